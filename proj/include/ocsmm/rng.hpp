#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace ocsmm {

/// Deterministic random source for the generators.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. All derived variates use explicit transforms (no std::*_distribution,
/// whose algorithms are implementation-defined):
///   uniform01  top 53 bits scaled by 2^-53, in [0, 1)
///   normal     Box–Muller, cos branch first, sin branch cached for the next call
///   poisson    inversion by sequential search from k = 0
///   below(n)   rejection sampling on 64-bit words
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    /// Uniform on the open interval (lo, hi).
    double uniform_open(double lo, double hi);
    double normal();
    std::uint64_t below(std::uint64_t n);
    std::int64_t poisson(double lambda);
    /// Sample from N(mean, L Lᵀ) given the lower Cholesky factor L.
    Eigen::VectorXd gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol_lower);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace ocsmm
