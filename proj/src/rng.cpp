#include "ocsmm/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ocsmm {

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform_open(double lo, double hi) {
    for (;;) {
        const double u = uniform01();
        if (u == 0.0) continue;
        const double v = lo + (hi - lo) * u;
        if (v > lo && v < hi) return v;
    }
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform01(); // (0, 1]
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be > 0");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    for (;;) {
        const std::uint64_t x = engine_();
        if (x < limit) return x % n;
    }
}

std::int64_t Rng::poisson(double lambda) {
    if (!(lambda > 0.0) || lambda > 700.0) throw std::invalid_argument("Rng::poisson: lambda must lie in (0, 700]");
    const double u = uniform01();
    double p = std::exp(-lambda);
    double cdf = p;
    std::int64_t k = 0;
    while (u > cdf) {
        ++k;
        p *= lambda / static_cast<double>(k);
        cdf += p;
        if (p == 0.0 && static_cast<double>(k) > lambda) break; // cdf rounding stalled below u
    }
    return k;
}

Eigen::VectorXd Rng::gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol_lower) {
    Eigen::VectorXd z(mean.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal();
    return mean + chol_lower * z;
}

} // namespace ocsmm
