#include "ocsmm/data.hpp"
#include "ocsmm/eval.hpp"
#include "ocsmm/svg.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ocsmm;

namespace {

// Mann–Whitney by enumerating every positive/negative pair.
double pair_auc(const std::vector<double>& s, const std::vector<bool>& y) {
    double wins = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] && !y[j]) {
                pairs += 1.0;
                wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
    return wins / pairs;
}

} // namespace

TEST(RocAuc, PerfectInvertedAndTied) {
    const std::vector<bool> y{true, false, true, false};
    EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{4, 1, 3, 2}, y).auc, 1.0);
    EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{1, 4, 2, 3}, y).auc, 0.0);
    EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{1, 1, 1, 1}, y).auc, 0.5);
}

TEST(RocAuc, MatchesPairEnumerationWithTies) {
    std::mt19937_64 gen(300);
    std::uniform_int_distribution<int> score(0, 6);
    std::bernoulli_distribution lab(0.3);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> s(40);
        std::vector<bool> y(40);
        for (int i = 0; i < 40; ++i) {
            s[i] = score(gen);
            y[i] = lab(gen);
        }
        y[0] = true;
        y[1] = false;
        EXPECT_NEAR(roc_auc(s, y).auc, pair_auc(s, y), 1e-15);
    }
}

TEST(RocAuc, Invariances) {
    std::mt19937_64 gen(301);
    std::normal_distribution<double> nd;
    std::vector<double> s(60), neg(60), mono(60);
    std::vector<bool> y(60), flipped(60);
    for (int i = 0; i < 60; ++i) {
        s[i] = nd(gen);
        neg[i] = -s[i];
        mono[i] = std::exp(3.0 * s[i]) + 7.0;
        y[i] = i % 3 == 0;
        flipped[i] = !y[i];
    }
    const double auc = roc_auc(s, y).auc;
    EXPECT_DOUBLE_EQ(roc_auc(mono, y).auc, auc);
    EXPECT_NEAR(roc_auc(neg, y).auc + auc, 1.0, 1e-15);
    EXPECT_NEAR(roc_auc(s, flipped).auc, 1.0 - auc, 1e-15);
}

TEST(RocAuc, AveragePrecision) {
    const std::vector<bool> y{true, false, true};
    EXPECT_NEAR(roc_auc(std::vector<double>{3, 2, 1}, y).ap, (1.0 + 2.0 / 3.0) / 2.0, 1e-15);
    EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{3, 1, 2}, y).ap, 1.0);
    // tie between index 0 and 1: stable order puts the positive first
    EXPECT_DOUBLE_EQ(roc_auc(std::vector<double>{2, 2, 1}, std::vector<bool>{true, false, false}).ap, 1.0);
}

TEST(RocAuc, CurveShape) {
    const auto roc = roc_auc(std::vector<double>{0.9, 0.8, 0.8, 0.1}, std::vector<bool>{true, true, false, false});
    ASSERT_EQ(roc.tpr.size(), 4u);
    EXPECT_TRUE(std::isinf(roc.thresholds[0]));
    EXPECT_EQ(roc.fpr.front(), 0.0);
    EXPECT_EQ(roc.tpr.back(), 1.0);
    EXPECT_EQ(roc.fpr.back(), 1.0);
    EXPECT_DOUBLE_EQ(roc.auc, 0.875);
}

TEST(RocAuc, Errors) {
    EXPECT_THROW(roc_auc(std::vector<double>{1, 2}, std::vector<bool>{true, true}), std::invalid_argument);
    EXPECT_THROW(roc_auc(std::vector<double>{1, 2}, std::vector<bool>{true}), std::invalid_argument);
    EXPECT_THROW(roc_auc(std::vector<double>{1, std::nan("")}, std::vector<bool>{true, false}), std::invalid_argument);
}

TEST(NuSweep, DefaultGridAndNuProperty) {
    const auto ds = synth_rotated_gaussians(11);
    const auto grid = default_nu_grid();
    ASSERT_EQ(grid.size(), 9u);
    const auto rows = nu_sweep(ds, KernelConfig{}, grid);
    ASSERT_EQ(rows.size(), 9u);
    const double l = static_cast<double>(ds.size());
    for (const auto& r : rows) {
        EXPECT_TRUE(r.converged);
        EXPECT_TRUE(r.error.empty());
        EXPECT_LE(r.outlier_fraction, r.nu + 1.0 / l);
        EXPECT_GE(r.sv_fraction, r.nu - 1.0 / l);
        EXPECT_GE(r.auc, 0.0);
        EXPECT_LE(r.auc, 1.0);
    }
}

TEST(NuSweep, BadRowsAreMarked) {
    const auto ds = synth_rotated_gaussians(12);
    const std::vector<double> nus{0.5, 0.0};
    const auto rows = nu_sweep(ds, KernelConfig{}, nus);
    EXPECT_TRUE(rows[0].converged);
    EXPECT_FALSE(rows[1].converged);
    EXPECT_FALSE(rows[1].error.empty());
}

TEST(DensityIse, ZeroAndScaling) {
    const GridSpec grid{{-4.0, -4.0}, {4.0, 4.0}, 121};
    auto f = [](std::span<const double> y) { return std::exp(-(y[0] * y[0] + y[1] * y[1]) / 2.0) / (2.0 * M_PI); };
    EXPECT_EQ(density_ise(f, f, grid), 0.0);
    const double c = 1.7;
    const auto v = evaluate_on_grid(f, grid);
    std::vector<double> scaled(v), sq(v);
    for (std::size_t i = 0; i < v.size(); ++i) {
        scaled[i] *= c;
        sq[i] *= v[i];
    }
    EXPECT_NEAR(density_ise(scaled, v, grid), (c - 1) * (c - 1) * trapezoid_integral(sq, grid), 1e-15);
    EXPECT_THROW(density_ise(std::vector<double>{1.0}, v, grid), std::invalid_argument);
}

TEST(HistogramDensity, IntegratesToCoveredMass) {
    std::mt19937_64 gen(302);
    const auto pts = testing_util::random_points(gen, 100000, 2);
    const GridSpec grid{{-6.0, -6.0}, {6.0, 6.0}, 61};
    const auto h = histogram_density(pts, grid);
    double total = 0.0;
    for (double v : h) total += v * grid.step(0) * grid.step(1);
    EXPECT_NEAR(total, 1.0, 1e-12);
    // central value close to the standard normal peak
    EXPECT_NEAR(h[30 * 61 + 30], 1.0 / (2.0 * M_PI), 0.02);
}

TEST(CsvWriters, Headers) {
    const auto roc = roc_auc(std::vector<double>{1, 0}, std::vector<bool>{true, false});
    EXPECT_EQ(roc_to_csv(roc).substr(0, 19), "fpr,tpr,threshold\n0");
    const std::vector<SweepRow> rows{SweepRow{0.1, 1.0, 1.0, 0.0, 0.2, true, ""}};
    EXPECT_EQ(sweep_to_csv(rows), "nu,auc,ap,outlier_fraction,sv_fraction,converged,error\n0.1,1,1,0,0.2,1,\"\"\n");
    const GridSpec g{{0.0}, {1.0}, 2};
    EXPECT_EQ(grid_to_csv(g, std::vector<double>{0.5, 0.25}), "x1,density\n0,0.5\n1,0.25\n");
}

TEST(Svg, ProducesDocuments) {
    const GridSpec g{{0.0, 0.0}, {1.0, 1.0}, 3};
    const std::vector<double> v(9, 1.0);
    EXPECT_NE(svg_heatmap(g, v, "a<b").find("a&lt;b"), std::string::npos);
    const auto roc = roc_auc(std::vector<double>{1, 0}, std::vector<bool>{true, false});
    EXPECT_NE(svg_roc(roc).find("<polyline"), std::string::npos);
    ocsmm::PointSet p(2, 2);
    p << 0, 0, 1, 1;
    EXPECT_NE(svg_scatter(p, std::vector<bool>{true, false}).find("red"), std::string::npos);
    const GridSpec g1{{0.0}, {1.0}, 3};
    EXPECT_THROW(svg_heatmap(g1, std::vector<double>(3, 0.0)), std::invalid_argument);
}
