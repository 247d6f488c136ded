#include "ocsmm/density.hpp"
#include "ocsmm/model.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

using namespace ocsmm;
using testing_util::random_points;

namespace {

double gauss2(const Eigen::RowVectorXd& y, const Eigen::RowVectorXd& m, double var) {
    return std::exp(-(y - m).squaredNorm() / (2.0 * var)) / (2.0 * std::numbers::pi * var);
}

std::vector<Group> dirac_groups(const PointSet& pts, const std::vector<double>* omega = nullptr) {
    std::vector<Group> groups;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        Group g = testing_util::singleton("p" + std::to_string(i), pts.row(i));
        if (omega) g.omega = std::vector<double>{(*omega)[static_cast<std::size_t>(i)]};
        groups.push_back(std::move(g));
    }
    return groups;
}

GroupKernelSpec analytic(double sigma) {
    GroupKernelSpec s;
    s.embedding = MeanEmbedding::GaussianAnalytic;
    s.sigma = sigma;
    return s;
}

} // namespace

TEST(Kde, MatchesDirectSum) {
    std::mt19937_64 gen(200);
    const auto c = random_points(gen, 30, 2);
    const std::vector<double> y{0.3, -0.1};
    Eigen::RowVectorXd yr(2);
    yr << 0.3, -0.1;
    double expected = 0.0;
    for (Eigen::Index i = 0; i < c.rows(); ++i) expected += gauss2(yr, c.row(i), 0.25);
    EXPECT_NEAR(kde_eval(c, 0.5, y), expected / 30.0, 1e-15);
    EXPECT_THROW(kde_eval(c, 0.0, y), std::invalid_argument);
}

TEST(Kde, VariableEstimatorsReduceToFixed) {
    std::mt19937_64 gen(201);
    const auto c = random_points(gen, 20, 2);
    const std::vector<double> y{0.1, 0.2};
    const std::vector<double> same(20, 0.4);
    EXPECT_NEAR(vkde_sample_smoothing(c, same, y), kde_eval(c, 0.4, y), 1e-16);
    EXPECT_NEAR(vkde_balloon(c, 0.3, 0.4, y), kde_eval(c, 0.5, y), 1e-16);
}

TEST(OcsmmDensity, UniformDiracGroupsGiveKde) {
    std::mt19937_64 gen(202);
    const auto pts = random_points(gen, 40, 2);
    const auto groups = dirac_groups(pts);
    auto model = std::make_shared<const OcsmmModel>(OcsmmModel::fit(groups, analytic(0.6), 1.0));
    const auto f = DensityModel::ocsmm(model, 0.0);
    for (double a = -2.0; a <= 2.0; a += 0.5) {
        const std::vector<double> y{a, -0.5 * a};
        const double kde = kde_eval(pts, 0.6, y);
        EXPECT_NEAR(f(y), kde, 1e-10 * kde);
    }
}

TEST(OcsmmDensity, PerPointVarianceGivesSampleSmoothing) {
    std::mt19937_64 gen(203);
    const auto pts = random_points(gen, 25, 2);
    std::uniform_real_distribution<double> u(0.2, 0.3);
    std::vector<double> omega(25);
    for (auto& w : omega) w = u(gen);
    const double sigma = 0.5;
    const auto model = OcsmmModel::fit(dirac_groups(pts, &omega), analytic(sigma), 1.0);
    std::vector<double> widths;
    for (double w : omega) widths.push_back(std::sqrt(sigma * sigma + w));
    const std::vector<double> y{0.4, 0.1};
    const double ref = vkde_sample_smoothing(pts, widths, y);
    EXPECT_NEAR(ocsmm_density(model, 0.0, y, true), ref, 1e-10 * ref);
}

TEST(OcsmmDensity, TestUncertaintyGivesBalloon) {
    std::mt19937_64 gen(204);
    const auto pts = random_points(gen, 25, 2);
    const auto model = OcsmmModel::fit(dirac_groups(pts), analytic(0.5), 1.0);
    const std::vector<double> y{-0.4, 0.7};
    const double ref = vkde_balloon(pts, 0.5, 0.3, y);
    EXPECT_NEAR(ocsmm_density(model, 0.3, y, true), ref, 1e-10 * ref);
}

TEST(OcsmmDensity, NormalizationConstant) {
    std::mt19937_64 gen(205);
    const auto pts = random_points(gen, 10, 2);
    const auto model = OcsmmModel::fit(dirac_groups(pts), analytic(0.7), 1.0);
    const std::vector<double> y{0.0, 0.0};
    const double raw = ocsmm_density(model, 0.0, y, false);
    EXPECT_NEAR(ocsmm_density(model, 0.0, y, true), raw / (2.0 * std::numbers::pi * 0.49), 1e-15);
}

TEST(OcsmmDensity, IntegratesToOne) {
    std::mt19937_64 gen(206);
    const auto pts = random_points(gen, 15, 2, 0.5);
    auto model = std::make_shared<const OcsmmModel>(OcsmmModel::fit(dirac_groups(pts), analytic(0.4), 0.5));
    const auto f = DensityModel::ocsmm(model, 0.1);
    const GridSpec grid = bounding_grid(pts, 3.0, 201);
    const auto v = evaluate_on_grid([&](std::span<const double> y) { return f(y); }, grid);
    EXPECT_NEAR(trapezoid_integral(v, grid), 1.0, 1e-4);
}

TEST(OcsmmDensity, RequiresAnalyticLinearUnnormalized) {
    std::mt19937_64 gen(207);
    const auto groups = dirac_groups(random_points(gen, 6, 2));
    GroupKernelSpec emp;
    const auto m1 = OcsmmModel::fit(groups, emp, 1.0);
    const std::vector<double> y{0.0, 0.0};
    EXPECT_THROW(ocsmm_density(m1, 0.0, y, true), std::invalid_argument);
    GroupKernelSpec norm = analytic(1.0);
    norm.normalize = true;
    const auto m2 = OcsmmModel::fit(groups, norm, 1.0);
    EXPECT_THROW(ocsmm_density(m2, 0.0, y, true), std::invalid_argument);
    const auto m3 = OcsmmModel::fit(groups, analytic(1.0), 1.0);
    const std::vector<double> y3{0.0, 0.0, 0.0};
    EXPECT_THROW(ocsmm_density(m3, 0.0, y3, true), std::invalid_argument);
}

TEST(GridSpec, LayoutAndValidation) {
    GridSpec g{{0.0, 10.0}, {1.0, 20.0}, 3};
    EXPECT_EQ(g.size(), 9u);
    EXPECT_DOUBLE_EQ(g.step(0), 0.5);
    EXPECT_DOUBLE_EQ(g.step(1), 5.0);
    // axis 0 slowest
    EXPECT_EQ(g.node(1), (std::vector<double>{0.0, 15.0}));
    EXPECT_EQ(g.node(3), (std::vector<double>{0.5, 10.0}));
    EXPECT_EQ(g.node(8), (std::vector<double>{1.0, 20.0}));
    GridSpec bad{{0.0}, {0.0}, 3};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    GridSpec few{{0.0}, {1.0}, 1};
    EXPECT_THROW(few.validate(), std::invalid_argument);
    GridSpec mismatch{{0.0, 0.0}, {1.0}, 3};
    EXPECT_THROW(mismatch.validate(), std::invalid_argument);
}

TEST(Trapezoid, ExactForLinearFunctions) {
    GridSpec g{{0.0, -1.0}, {2.0, 1.0}, 11};
    const auto v = evaluate_on_grid([](std::span<const double> y) { return 1.0 + y[0] + 2.0 * y[1]; }, g);
    // ∫₀² ∫₋₁¹ (1 + x + 2y) dy dx = 4 + 4 + 0
    EXPECT_NEAR(trapezoid_integral(v, g), 8.0, 1e-12);
    GridSpec g1{{0.0}, {1.0}, 101};
    const auto sq = evaluate_on_grid([](std::span<const double> y) { return y[0] * y[0]; }, g1);
    EXPECT_NEAR(trapezoid_integral(sq, g1), 1.0 / 3.0, 1e-4);
}

TEST(BoundingGrid, CoversPointsWithMargin) {
    PointSet p(2, 2);
    p << 0.0, 1.0, 2.0, -1.0;
    const auto g = bounding_grid(p, 0.5, 5);
    EXPECT_EQ(g.lo, (std::vector<double>{-0.5, -1.5}));
    EXPECT_EQ(g.hi, (std::vector<double>{2.5, 1.5}));
    EXPECT_EQ(g.nodes, 5u);
}
