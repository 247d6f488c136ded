#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace ocsmm {

struct SolverConfig {
    double tol = 1e-6;                  ///< maximal KKT violation accepted at exit
    std::int64_t max_iter = 10'000'000; ///< pair updates
    double alpha_zero_tol = 1e-9;
};

/// min ½ αᵀKα  s.t.  0 ≤ α_i ≤ 1/(νℓ),  Σ α_i = 1.
struct DualProblem {
    const Eigen::MatrixXd& gram;
    double nu;
    SolverConfig config{};

    double upper_bound() const { return 1.0 / (nu * static_cast<double>(gram.rows())); }
};

struct DualSolution {
    Eigen::VectorXd alpha;
    double rho = 0.0;
    double objective = 0.0;
    std::int64_t iterations = 0;
    bool converged = false;
    double max_violation = 0.0;
    std::vector<Eigen::Index> sv_index;
    std::vector<Eigen::Index> bounded_sv_index;
    /// Non-fatal remarks, e.g. ν·ℓ < 1 (box constraint inactive).
    std::vector<std::string> warnings;
};

/// SMO with maximal-violating-pair working sets (ties to the lowest index),
/// started from the deterministic feasible point that saturates the first
/// ⌊νℓ⌋ coordinates. Returns converged = false with the last iterate when
/// max_iter is exhausted. Throws std::invalid_argument for NaN, non-square
/// or empty Grams and ν outside (0, 1].
DualSolution solve_dual(const DualProblem& problem);

/// Offset recovery from a feasible α and its gradient Kα:
/// mean of the gradient over free coordinates; otherwise the midpoint of
/// max over bounded coordinates and min over zero coordinates (the max alone
/// when nothing sits at zero, the min alone when nothing is bounded).
double compute_rho(const Eigen::VectorXd& alpha, const Eigen::VectorXd& gradient, double upper_bound,
                   double alpha_zero_tol = 1e-9);

/// Reference solver for tests: projected gradient descent with Euclidean
/// projection onto the capped simplex (bisection on the shift). ρ is read off
/// as the equality-constraint multiplier of the final projection.
/// Refuses ℓ > 8.
DualSolution brute_force_dual(const DualProblem& problem);

} // namespace ocsmm
