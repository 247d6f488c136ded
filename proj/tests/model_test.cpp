#include "ocsmm/kernel.hpp"
#include "ocsmm/model.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace ocsmm;
using testing_util::random_points;

namespace {

std::vector<Group> clouds(std::mt19937_64& gen, int count) {
    std::vector<Group> groups;
    for (int i = 0; i < count; ++i)
        groups.push_back(Group::from_points("g" + std::to_string(i), random_points(gen, 8 + i % 5, 2, 0.3, 0.05 * i)));
    return groups;
}

} // namespace

TEST(Model, ReducesToOcsvmOnSingletons) {
    std::mt19937_64 gen(100);
    const PointSet pts = random_points(gen, 25, 2);
    std::vector<Group> groups;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) groups.push_back(testing_util::singleton("p" + std::to_string(i), pts.row(i)));
    GroupKernelSpec spec;
    spec.sigma = 0.8;
    const double nu = 0.3;
    const auto model = OcsmmModel::fit(groups, spec, nu);

    Eigen::MatrixXd k(25, 25);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 25; ++j) k(i, j) = testing_util::naive_rbf(pts.row(i), pts.row(j), 0.8);
    const auto raw = solve_dual(DualProblem{k, nu});
    EXPECT_NEAR(model.rho(), raw.rho, 1e-10);
    std::size_t s = 0;
    for (Eigen::Index i = 0; i < 25; ++i) {
        if (raw.alpha(i) > 1e-9) {
            ASSERT_LT(s, model.alpha().size());
            EXPECT_NEAR(model.alpha()[s], raw.alpha(i), 1e-10);
            ++s;
        }
    }
    EXPECT_EQ(s, model.alpha().size());
}

TEST(Model, DecisionOnTrainingMatchesGram) {
    std::mt19937_64 gen(101);
    const auto groups = clouds(gen, 15);
    GroupKernelSpec spec;
    spec.sigma = 0.5;
    spec.outer = OuterKernel::EmbeddingRBF;
    spec.gamma = 0.4;
    spec.normalize = true;
    const auto model = OcsmmModel::fit(groups, spec, 0.2);
    const GramMatrix g = gram_matrix(groups, spec);
    const auto sol = solve_dual(DualProblem{g.entries, 0.2});
    const Eigen::VectorXd f = g.entries * sol.alpha;
    for (std::size_t i = 0; i < groups.size(); ++i)
        EXPECT_NEAR(model.decision(groups[i]), f(static_cast<Eigen::Index>(i)) - sol.rho, 1e-9);
}

TEST(Model, FitReportConsistency) {
    std::mt19937_64 gen(102);
    const auto groups = clouds(gen, 20);
    KernelConfig cfg;
    const auto model = OcsmmModel::fit(groups, cfg, 0.25);
    const auto& r = model.report();
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.n_train, 20u);
    EXPECT_EQ(r.n_support, model.support_groups().size());
    EXPECT_NEAR(r.alpha_sum, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(model.nu(), 0.25);
    EXPECT_DOUBLE_EQ(model.spec().sigma, std::sqrt(median_heuristic(groups)));
}

TEST(Model, NuProperty) {
    std::mt19937_64 gen(103);
    for (double nu : {0.1, 0.3, 0.5, 0.9}) {
        const auto groups = clouds(gen, 30);
        KernelConfig cfg;
        cfg.outer = OuterKernel::EmbeddingRBF;
        const auto model = OcsmmModel::fit(groups, cfg, nu);
        const auto rep = nu_property_check(model, groups);
        EXPECT_TRUE(rep.holds);
        EXPECT_LE(rep.outlier_fraction, nu + 1.0 / 30);
        EXPECT_GE(rep.sv_fraction, nu - 1.0 / 30);
    }
}

TEST(Model, FromPartsReproducesDecisions) {
    std::mt19937_64 gen(104);
    const auto groups = clouds(gen, 12);
    const auto model = OcsmmModel::fit(groups, KernelConfig{}, 0.3);
    const auto copy = OcsmmModel::from_parts(model.spec(), model.support_groups(), model.alpha(), model.rho(), model.report());
    for (const auto& g : groups) EXPECT_EQ(model.decision(g), copy.decision(g));
}

TEST(Model, FromPartsValidation) {
    std::mt19937_64 gen(105);
    const auto groups = clouds(gen, 3);
    EXPECT_THROW(OcsmmModel::from_parts(GroupKernelSpec{}, {}, {}, 0.0, FitReport{}), std::invalid_argument);
    EXPECT_THROW(OcsmmModel::from_parts(GroupKernelSpec{}, groups, {0.5, 0.5}, 0.0, FitReport{}), std::invalid_argument);
    EXPECT_THROW(OcsmmModel::from_parts(GroupKernelSpec{}, groups, {0.5, 0.5, 0.0}, 0.0, FitReport{}), std::invalid_argument);
}

TEST(Model, ErrorsOnBadInput) {
    std::mt19937_64 gen(106);
    const auto groups = clouds(gen, 5);
    EXPECT_THROW(OcsmmModel::fit(groups, KernelConfig{}, 0.0), std::invalid_argument);
    EXPECT_THROW(OcsmmModel::fit(std::vector<Group>{}, KernelConfig{}, 0.5), std::invalid_argument);
    const auto model = OcsmmModel::fit(groups, KernelConfig{}, 0.5);
    const Group other = Group::from_points("x", random_points(gen, 4, 3));
    EXPECT_THROW(model.decision(other), std::invalid_argument);
}

TEST(ScoreDataset, RanksAndFlags) {
    std::mt19937_64 gen(107);
    auto groups = clouds(gen, 16);
    groups.push_back(Group::from_points("far", random_points(gen, 10, 2, 0.3, 6.0)));
    const auto model = OcsmmModel::fit(groups, KernelConfig{}, 0.2);
    const auto scored = score_dataset(model, groups);
    ASSERT_EQ(scored.group_ids.size(), groups.size());
    std::vector<std::size_t> ranks = scored.rank;
    std::sort(ranks.begin(), ranks.end());
    for (std::size_t i = 0; i < ranks.size(); ++i) EXPECT_EQ(ranks[i], i + 1);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        EXPECT_EQ(scored.is_anomaly[i], scored.decision[i] < 0.0);
        EXPECT_EQ(scored.decision[i], model.decision(groups[i]));
    }
    const auto order = scored.order();
    for (std::size_t r = 1; r < order.size(); ++r) EXPECT_LE(scored.decision[order[r - 1]], scored.decision[order[r]]);
    EXPECT_EQ(scored.rank[order[0]], 1u);
}
