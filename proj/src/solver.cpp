#include "ocsmm/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ocsmm {

namespace {

void check_problem(const DualProblem& problem) {
    const auto& k = problem.gram;
    if (k.rows() == 0) throw std::invalid_argument("solve_dual: empty gram matrix");
    if (k.rows() != k.cols()) throw std::invalid_argument("solve_dual: gram matrix must be square");
    if (!k.allFinite()) throw std::invalid_argument("solve_dual: gram matrix contains NaN or inf");
    if (!(problem.nu > 0.0 && problem.nu <= 1.0)) throw std::invalid_argument("solve_dual: nu must lie in (0, 1]");
    if (!(problem.config.tol > 0.0)) throw std::invalid_argument("solve_dual: tol must be > 0");
    if (problem.config.max_iter <= 0) throw std::invalid_argument("solve_dual: max_iter must be > 0");
}

void fill_support(DualSolution& sol, double upper, double zero_tol) {
    sol.sv_index.clear();
    sol.bounded_sv_index.clear();
    for (Eigen::Index i = 0; i < sol.alpha.size(); ++i) {
        if (sol.alpha(i) > zero_tol) sol.sv_index.push_back(i);
        if (sol.alpha(i) >= upper - zero_tol) sol.bounded_sv_index.push_back(i);
    }
}

// Euclidean projection onto {0 ≤ a ≤ upper, Σ a = 1}; returns the shift τ
// with a_i = clip(v_i - τ, 0, upper).
double project_capped_simplex(const Eigen::VectorXd& v, double upper, Eigen::VectorXd& out) {
    auto mass = [&](double tau) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) s += std::clamp(v(i) - tau, 0.0, upper);
        return s;
    };
    double lo = v.minCoeff() - upper - 1.0;
    double hi = v.maxCoeff() + 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (mass(mid) > 1.0) lo = mid;
        else hi = mid;
    }
    const double tau = 0.5 * (lo + hi);
    out.resize(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = std::clamp(v(i) - tau, 0.0, upper);
    return tau;
}

} // namespace

double compute_rho(const Eigen::VectorXd& alpha, const Eigen::VectorXd& gradient, double upper_bound,
                   double alpha_zero_tol) {
    if (alpha.size() == 0) throw std::invalid_argument("compute_rho: empty alpha");
    if (gradient.size() != alpha.size()) throw std::invalid_argument("compute_rho: size mismatch");
    double free_sum = 0.0;
    Eigen::Index free_count = 0;
    double max_bounded = -std::numeric_limits<double>::infinity();
    double min_zero = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        const double a = alpha(i);
        if (a > alpha_zero_tol && a < upper_bound - alpha_zero_tol) {
            free_sum += gradient(i);
            ++free_count;
        } else if (a >= upper_bound - alpha_zero_tol) {
            max_bounded = std::max(max_bounded, gradient(i));
        } else {
            min_zero = std::min(min_zero, gradient(i));
        }
    }
    if (free_count > 0) return free_sum / static_cast<double>(free_count);
    if (std::isinf(max_bounded)) return min_zero;
    if (std::isinf(min_zero)) return max_bounded;
    return 0.5 * (max_bounded + min_zero);
}

DualSolution solve_dual(const DualProblem& problem) {
    check_problem(problem);
    const auto& k = problem.gram;
    const auto n = k.rows();
    const double upper = problem.upper_bound();
    const auto& cfg = problem.config;

    DualSolution sol;
    if (problem.nu * static_cast<double>(n) < 1.0)
        sol.warnings.push_back("nu * l < 1: the upper bound 1/(nu l) exceeds 1 and never binds");

    // Feasible start: saturate the first floor(νℓ) coordinates, put the
    // remaining mass on the next one.
    sol.alpha = Eigen::VectorXd::Zero(n);
    const auto saturated = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(std::floor(problem.nu * static_cast<double>(n))));
    for (Eigen::Index i = 0; i < saturated; ++i) sol.alpha(i) = upper;
    if (saturated < n) sol.alpha(saturated) = std::clamp(1.0 - static_cast<double>(saturated) * upper, 0.0, upper);

    Eigen::VectorXd grad = k * sol.alpha;
#ifndef NDEBUG
    double objective = 0.5 * sol.alpha.dot(grad);
#endif

    std::int64_t iter = 0;
    double violation = 0.0;
    for (;;) {
        // i: steepest feasible increase (α_i < C, minimal gradient);
        // j: steepest feasible decrease (α_j > 0, maximal gradient).
        Eigen::Index up = -1, down = -1;
        double g_up = std::numeric_limits<double>::infinity();
        double g_down = -std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            if (sol.alpha(t) < upper && grad(t) < g_up) {
                g_up = grad(t);
                up = t;
            }
            if (sol.alpha(t) > 0.0 && grad(t) > g_down) {
                g_down = grad(t);
                down = t;
            }
        }
        violation = (up < 0 || down < 0) ? 0.0 : std::max(0.0, g_down - g_up);
        if (violation <= cfg.tol) {
            sol.converged = true;
            break;
        }
        if (iter >= cfg.max_iter) break;

        double curvature = k(up, up) + k(down, down) - 2.0 * k(up, down);
        if (curvature <= 0.0) curvature = 1e-12;
        double step = (g_down - g_up) / curvature;
        const double room_up = upper - sol.alpha(up);
        const double room_down = sol.alpha(down);
        bool hit_up = false, hit_down = false;
        if (step >= room_up) {
            step = room_up;
            hit_up = true;
        }
        if (step >= room_down) {
            step = room_down;
            hit_down = true;
            hit_up = hit_up && room_up == room_down;
        }
        sol.alpha(up) = hit_up ? upper : sol.alpha(up) + step;
        sol.alpha(down) = hit_down ? 0.0 : sol.alpha(down) - step;
        grad.noalias() += step * (k.col(up) - k.col(down));
        ++iter;

#ifndef NDEBUG
        const double next_objective = 0.5 * sol.alpha.dot(grad);
        assert(next_objective <= objective + 1e-12 * (1.0 + std::abs(objective)));
        objective = next_objective;
#endif
    }

    sol.iterations = iter;
    sol.max_violation = violation;
    // recompute from scratch to shed accumulated gradient drift
    grad = k * sol.alpha;
    sol.objective = 0.5 * sol.alpha.dot(grad);
    sol.rho = compute_rho(sol.alpha, grad, upper, cfg.alpha_zero_tol);
    fill_support(sol, upper, cfg.alpha_zero_tol);
    return sol;
}

DualSolution brute_force_dual(const DualProblem& problem) {
    check_problem(problem);
    const auto& k = problem.gram;
    const auto n = k.rows();
    if (n > 8) throw std::invalid_argument("brute_force_dual: refusing l > 8");
    const double upper = problem.upper_bound();

    // Lipschitz constant of the gradient bounded by the max absolute row sum.
    double lipschitz = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) lipschitz = std::max(lipschitz, k.row(i).cwiseAbs().sum());
    const double eta = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

    auto objective = [&](const Eigen::VectorXd& a) { return 0.5 * a.dot(k * a); };

    DualSolution sol;
    sol.alpha = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    double current = objective(sol.alpha);
    double tau = 0.0;
    Eigen::VectorXd next;
    std::int64_t it = 0;
    constexpr std::int64_t kMaxIter = 2'000'000;
    for (; it < kMaxIter; ++it) {
        tau = project_capped_simplex(sol.alpha - eta * (k * sol.alpha), upper, next);
        const double value = objective(next);
        const double improvement = current - value;
        const double moved = (next - sol.alpha).cwiseAbs().maxCoeff();
        sol.alpha = next;
        current = value;
        if (improvement < 1e-12 && moved < 1e-13) break;
    }
    sol.iterations = it;
    sol.converged = it < kMaxIter;
    sol.objective = current;
    // a_i = a_i - η g_i - τ on free coordinates, so g_i = -τ/η there.
    sol.rho = -tau / eta;
    fill_support(sol, upper, problem.config.alpha_zero_tol);
    return sol;
}

} // namespace ocsmm
