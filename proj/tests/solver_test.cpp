#include "ocsmm/solver.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using namespace ocsmm;

namespace {

double objective(const Eigen::MatrixXd& k, const Eigen::VectorXd& a) { return 0.5 * a.dot(k * a); }

void expect_feasible(const DualSolution& s, double upper) {
    EXPECT_NEAR(s.alpha.sum(), 1.0, 1e-12);
    EXPECT_GE(s.alpha.minCoeff(), 0.0);
    EXPECT_LE(s.alpha.maxCoeff(), upper + 1e-15);
}

} // namespace

TEST(SolveDual, ThreeGroupExampleMatchesOracle) {
    Eigen::MatrixXd k(3, 3);
    k << 1.0, 0.9, 0.1, 0.9, 1.0, 0.1, 0.1, 0.1, 1.0;
    const DualProblem p{k, 0.5, SolverConfig{1e-10}};
    const auto s = solve_dual(p);
    const auto ref = brute_force_dual(p);
    ASSERT_TRUE(s.converged);
    expect_feasible(s, p.upper_bound());
    EXPECT_NEAR(s.objective, ref.objective, 1e-9);
    EXPECT_NEAR((s.alpha - ref.alpha).cwiseAbs().maxCoeff(), 0.0, 1e-6);
    EXPECT_NEAR(s.rho, ref.rho, 1e-5);
    // the isolated third group carries the most weight
    EXPECT_GT(s.alpha(2), s.alpha(0));
}

TEST(SolveDual, RandomGramsMatchOracle) {
    std::mt19937_64 gen(7);
    std::uniform_int_distribution<int> size(2, 8);
    for (int rep = 0; rep < 40; ++rep) {
        const int n = size(gen);
        const Eigen::MatrixXd k = testing_util::random_psd(gen, n, 1 + rep % n);
        for (double nu : {0.2, 0.5, 0.8, 1.0}) {
            const DualProblem p{k, nu};
            const auto s = solve_dual(p);
            const auto ref = brute_force_dual(p);
            ASSERT_TRUE(s.converged);
            expect_feasible(s, p.upper_bound());
            EXPECT_NEAR(s.objective, ref.objective, 1e-7) << "rep " << rep << " nu " << nu;
            EXPECT_NEAR(s.objective, objective(k, s.alpha), 1e-12);
        }
    }
}

TEST(SolveDual, NuOneGivesUniformWeights) {
    std::mt19937_64 gen(8);
    for (int n : {1, 2, 5, 17}) {
        const Eigen::MatrixXd k = testing_util::random_psd(gen, n, 3);
        const auto s = solve_dual(DualProblem{k, 1.0});
        for (Eigen::Index i = 0; i < n; ++i) EXPECT_EQ(s.alpha(i), 1.0 / n);
    }
}

TEST(SolveDual, KktConditions) {
    std::mt19937_64 gen(9);
    const Eigen::MatrixXd k = testing_util::random_psd(gen, 30, 6) + 0.05 * Eigen::MatrixXd::Identity(30, 30);
    const DualProblem p{k, 0.3, SolverConfig{1e-9}};
    const auto s = solve_dual(p);
    ASSERT_TRUE(s.converged);
    const Eigen::VectorXd g = k * s.alpha;
    const double c = p.upper_bound();
    for (Eigen::Index i = 0; i < 30; ++i) {
        if (s.alpha(i) <= 1e-12) EXPECT_GE(g(i), s.rho - 1e-7);
        else if (s.alpha(i) >= c - 1e-12) EXPECT_LE(g(i), s.rho + 1e-7);
        else EXPECT_NEAR(g(i), s.rho, 1e-7);
    }
}

TEST(SolveDual, PermutationInvariance) {
    std::mt19937_64 gen(10);
    const int n = 12;
    const Eigen::MatrixXd k = testing_util::random_psd(gen, n, n) + 0.1 * Eigen::MatrixXd::Identity(n, n);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    Eigen::MatrixXd kp(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) kp(i, j) = k(perm[i], perm[j]);
    const SolverConfig tight{1e-10};
    const auto a = solve_dual(DualProblem{k, 0.4, tight});
    const auto b = solve_dual(DualProblem{kp, 0.4, tight});
    EXPECT_NEAR(a.objective, b.objective, 1e-12);
    EXPECT_NEAR(a.rho, b.rho, 1e-8);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(b.alpha(i), a.alpha(perm[i]), 1e-7);
}

TEST(SolveDual, ScaleInvariance) {
    std::mt19937_64 gen(11);
    const Eigen::MatrixXd k = testing_util::random_psd(gen, 10, 10) + 0.1 * Eigen::MatrixXd::Identity(10, 10);
    const SolverConfig tight{1e-11};
    const auto a = solve_dual(DualProblem{k, 0.3, tight});
    const Eigen::MatrixXd k3 = 3.0 * k;
    const auto b = solve_dual(DualProblem{k3, 0.3, SolverConfig{3e-11}});
    EXPECT_NEAR((a.alpha - b.alpha).cwiseAbs().maxCoeff(), 0.0, 1e-8);
    EXPECT_NEAR(b.rho, 3.0 * a.rho, 1e-8);
    EXPECT_NEAR(b.objective, 3.0 * a.objective, 1e-10);
}

TEST(SolveDual, SupportSetsAndNuBounds) {
    std::mt19937_64 gen(12);
    const int n = 40;
    const Eigen::MatrixXd k = testing_util::random_psd(gen, n, 4);
    for (double nu : {0.1, 0.25, 0.6}) {
        const auto s = solve_dual(DualProblem{k, nu});
        EXPECT_LE(static_cast<double>(s.bounded_sv_index.size()), nu * n + 1e-9);
        EXPECT_GE(static_cast<double>(s.sv_index.size()), nu * n - 1e-9);
    }
}

TEST(SolveDual, WarnsWhenBoxNeverBinds) {
    const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(3, 3);
    const auto s = solve_dual(DualProblem{k, 0.2});
    EXPECT_FALSE(s.warnings.empty());
    EXPECT_NEAR(s.alpha(0), 1.0 / 3.0, 1e-6);
}

TEST(SolveDual, IterationCapReportsNonConvergence) {
    std::mt19937_64 gen(13);
    const Eigen::MatrixXd k = testing_util::random_psd(gen, 50, 10);
    SolverConfig cfg;
    cfg.max_iter = 1;
    const auto s = solve_dual(DualProblem{k, 0.1, cfg});
    EXPECT_FALSE(s.converged);
    EXPECT_EQ(s.iterations, 1);
    expect_feasible(s, 1.0 / 5.0);
}

TEST(SolveDual, InputValidation) {
    const Eigen::MatrixXd ok = Eigen::MatrixXd::Identity(2, 2);
    EXPECT_THROW(solve_dual(DualProblem{ok, 0.0}), std::invalid_argument);
    EXPECT_THROW(solve_dual(DualProblem{ok, 1.5}), std::invalid_argument);
    EXPECT_THROW(solve_dual(DualProblem{ok, std::nan("")}), std::invalid_argument);
    const Eigen::MatrixXd rect = Eigen::MatrixXd::Ones(2, 3);
    EXPECT_THROW(solve_dual(DualProblem{rect, 0.5}), std::invalid_argument);
    const Eigen::MatrixXd empty(0, 0);
    EXPECT_THROW(solve_dual(DualProblem{empty, 0.5}), std::invalid_argument);
    Eigen::MatrixXd bad = ok;
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(solve_dual(DualProblem{bad, 0.5}), std::invalid_argument);
    EXPECT_THROW(solve_dual(DualProblem{ok, 0.5, SolverConfig{0.0}}), std::invalid_argument);
    SolverConfig no_iter;
    no_iter.max_iter = 0;
    EXPECT_THROW(solve_dual(DualProblem{ok, 0.5, no_iter}), std::invalid_argument);
}

TEST(SolveDual, Deterministic) {
    std::mt19937_64 gen(14);
    const Eigen::MatrixXd k = testing_util::random_psd(gen, 25, 5);
    const auto a = solve_dual(DualProblem{k, 0.2});
    const auto b = solve_dual(DualProblem{k, 0.2});
    EXPECT_EQ(a.alpha, b.alpha);
    EXPECT_EQ(a.rho, b.rho);
    EXPECT_EQ(a.iterations, b.iterations);
}

TEST(ComputeRho, FreeMeanOrMidpoint) {
    Eigen::VectorXd a(3), g(3);
    a << 0.5, 0.25, 0.25;
    g << 1.0, 2.0, 4.0;
    // all free with upper 0.6
    EXPECT_DOUBLE_EQ(compute_rho(a, g, 0.6), 7.0 / 3.0);
    // no free coordinates: bounded {0,1} max g = 2, zero {2} min g = 4
    a << 0.5, 0.5, 0.0;
    EXPECT_DOUBLE_EQ(compute_rho(a, g, 0.5), 3.0);
}

TEST(BruteForce, RefusesLargeProblems) {
    const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(9, 9);
    EXPECT_THROW(brute_force_dual(DualProblem{k, 0.5}), std::invalid_argument);
}
