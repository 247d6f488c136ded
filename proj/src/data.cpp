#include "ocsmm/data.hpp"

#include "ocsmm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ocsmm {

namespace {

std::string group_id(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%03zu", prefix, i);
    return buf;
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw std::invalid_argument("generator: covariance not positive definite");
    return llt.matrixL();
}

Group sample_gaussian_group(Rng& rng, std::string id, const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol,
                            std::size_t n, bool anomalous) {
    PointSet pts(static_cast<Eigen::Index>(n), mean.size());
    for (std::size_t k = 0; k < n; ++k) pts.row(static_cast<Eigen::Index>(k)) = rng.gaussian(mean, chol).transpose();
    Group g = Group::from_points(std::move(id), std::move(pts));
    g.label = anomalous;
    return g;
}

double as_variance(double value, bool is_std) { return is_std ? value * value : value; }

} // namespace

GroupDataset synth_rotated_gaussians(std::uint64_t seed, const RotatedOptions& options) {
    Rng rng(seed);
    Eigen::Matrix2d cov;
    cov << 0.01, 0.008, 0.008, 0.01;
    const double angle = options.rotation_degrees * std::numbers::pi / 180.0;
    Eigen::Matrix2d rot;
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    const Eigen::Matrix2d rotated = rot * cov * rot.transpose();
    const Eigen::MatrixXd chol = cholesky_lower(cov);
    const Eigen::MatrixXd chol_rot = cholesky_lower(0.5 * (rotated + rotated.transpose()));

    GroupDataset ds;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < options.normal_groups; ++i, ++idx) {
        Eigen::VectorXd mean(2);
        mean << rng.uniform01(), rng.uniform01();
        const bool shifted = options.shift_one_group && i == 0;
        if (shifted) mean += options.shift;
        ds.groups.push_back(sample_gaussian_group(rng, group_id("g", idx), mean, chol, options.points_per_group, shifted));
    }
    for (std::size_t i = 0; i < options.rotated_groups; ++i, ++idx) {
        Eigen::VectorXd mean(2);
        mean << rng.uniform01(), rng.uniform01();
        ds.groups.push_back(sample_gaussian_group(rng, group_id("g", idx), mean, chol_rot, options.points_per_group, true));
    }
    ds.provenance = {{"generator", "rotated"},
                     {"seed", seed},
                     {"normal_groups", options.normal_groups},
                     {"rotated_groups", options.rotated_groups},
                     {"points_per_group", options.points_per_group},
                     {"rotation_degrees", options.rotation_degrees},
                     {"shift", {options.shift(0), options.shift(1)}},
                     {"shift_one_group", options.shift_one_group}};
    return ds;
}

GroupDataset synth_mixture_groups(std::uint64_t seed, const MixtureOptions& options) {
    static const double kMeans[4][2] = {{-1, -1}, {1, -1}, {0, 1}, {1, 1}};
    static const double kNormalA[4] = {0.22, 0.64, 0.03, 0.11};
    static const double kNormalB[4] = {0.22, 0.03, 0.64, 0.11};
    static const double kAnomalous[4] = {0.61, 0.1, 0.06, 0.23};
    constexpr double kProbA = 0.48;

    Rng rng(seed);
    const double sd = std::sqrt(options.component_variance);
    auto draw_group = [&](const double* weights, std::string id, bool anomalous) {
        std::int64_t n = 0;
        while (n == 0) n = rng.poisson(options.mean_group_size);
        PointSet pts(n, 2);
        for (std::int64_t k = 0; k < n; ++k) {
            const double u = rng.uniform01();
            int comp = 3;
            double cdf = 0.0;
            for (int c = 0; c < 4; ++c) {
                cdf += weights[c];
                if (u < cdf) {
                    comp = c;
                    break;
                }
            }
            pts(k, 0) = kMeans[comp][0] + sd * rng.normal();
            pts(k, 1) = kMeans[comp][1] + sd * rng.normal();
        }
        Group g = Group::from_points(std::move(id), std::move(pts));
        g.label = anomalous;
        return g;
    };

    GroupDataset ds;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < options.normal_groups; ++i, ++idx)
        ds.groups.push_back(draw_group(rng.uniform01() < kProbA ? kNormalA : kNormalB, group_id("g", idx), false));
    for (std::size_t i = 0; i < options.anomalous_groups; ++i, ++idx)
        ds.groups.push_back(draw_group(kAnomalous, group_id("g", idx), true));
    ds.provenance = {{"generator", "mixture"},
                     {"seed", seed},
                     {"normal_groups", options.normal_groups},
                     {"anomalous_groups", options.anomalous_groups},
                     {"mean_group_size", options.mean_group_size},
                     {"component_variance", options.component_variance}};
    return ds;
}

Eigen::Vector2d shape_curve(Shape shape, double theta) {
    const double r = shape == Shape::Circle ? 1.0 : std::sin(4.0 * theta) + 2.0;
    return {r * std::cos(theta), r * std::sin(theta)};
}

NoisyShape sample_noisy_shape(Shape shape, std::uint64_t seed, std::size_t n, const NoiseOptions& options) {
    if (n == 0) throw std::invalid_argument("noisy shape: n must be >= 1");
    if (!(options.omega_hi > options.omega_lo) || options.omega_lo < 0.0)
        throw std::invalid_argument("noisy shape: invalid omega range");
    Rng rng(seed);
    const double base_sd = std::sqrt(as_variance(options.base_noise, options.base_noise_is_std));
    NoisyShape out;
    out.clean = PointSet(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
        // circle: θ in (-π, π]; flower: θ in (0, 2π]
        const double u = rng.uniform01();
        const double theta = shape == Shape::Circle ? std::numbers::pi - 2.0 * std::numbers::pi * u
                                                    : 2.0 * std::numbers::pi * (1.0 - u);
        const Eigen::Vector2d c = shape_curve(shape, theta);
        const double ex = rng.normal(), ey = rng.normal();
        const double cx = c(0) + base_sd * ex;
        const double cy = c(1) + base_sd * ey;
        out.clean(static_cast<Eigen::Index>(i), 0) = cx;
        out.clean(static_cast<Eigen::Index>(i), 1) = cy;

        const double w = as_variance(rng.uniform_open(options.omega_lo, options.omega_hi), options.omega_is_std);
        const double sw = std::sqrt(w);
        PointSet p(1, 2);
        p(0, 0) = cx + sw * rng.normal();
        p(0, 1) = cy + sw * rng.normal();
        Group g = Group::from_points(group_id("p", i), std::move(p));
        g.omega = std::vector<double>{w};
        out.dataset.groups.push_back(std::move(g));
    }
    out.dataset.provenance = {{"generator", shape == Shape::Circle ? "circle" : "flower"},
                              {"seed", seed},
                              {"n", n},
                              {"base_noise", options.base_noise},
                              {"base_noise_is_std", options.base_noise_is_std},
                              {"omega_range", {options.omega_lo, options.omega_hi}},
                              {"omega_is_std", options.omega_is_std}};
    return out;
}

GroupDataset synth_noisy_circle(std::uint64_t seed, std::size_t n, const NoiseOptions& options) {
    return sample_noisy_shape(Shape::Circle, seed, n, options).dataset;
}

GroupDataset synth_noisy_flower(std::uint64_t seed, std::size_t n, const NoiseOptions& options) {
    return sample_noisy_shape(Shape::Flower, seed, n, options).dataset;
}

double circle_density(std::span<const double> y, double variance) {
    if (y.size() != 2) throw std::invalid_argument("circle_density: 2-D query expected");
    if (!(variance > 0.0)) throw std::invalid_argument("circle_density: variance must be > 0");
    // (1/2π) ∫ N(y; (cos θ, sin θ), v I) dθ = exp(-(r² + 1)/(2v)) I₀(r/v) / (2π v)
    const double r = std::hypot(y[0], y[1]);
    const double x = r / variance;
    const double scaled_bessel = std::cyl_bessel_i(0.0, x) * std::exp(-x); // e^{-x} I₀(x)
    return std::exp(-(r - 1.0) * (r - 1.0) / (2.0 * variance)) * scaled_bessel / (2.0 * std::numbers::pi * variance);
}

GroupDataset inject_aggregation_anomalies(const GroupDataset& dataset, std::size_t count, std::uint64_t seed) {
    if (count == 0) throw std::invalid_argument("inject: count must be >= 1");
    dataset.validate();
    std::vector<const Group*> normals;
    std::vector<Eigen::Index> sizes;
    Eigen::Index pool_size = 0;
    for (const auto& g : dataset.groups) {
        if (g.label.value_or(false) || !g.has_points()) continue;
        normals.push_back(&g);
        sizes.push_back(g.size());
        pool_size += g.size();
    }
    if (normals.empty()) throw std::invalid_argument("inject: no normal groups with points");
    std::sort(sizes.begin(), sizes.end());
    const Eigen::Index group_size = sizes[(sizes.size() - 1) / 2];
    if (group_size > pool_size) throw std::invalid_argument("inject: pool too small");

    const auto d = dataset.dim();
    PointSet pool(pool_size, d);
    Eigen::Index r = 0;
    for (const Group* g : normals) {
        pool.middleRows(r, g->size()) = g->points;
        r += g->size();
    }

    Rng rng(seed);
    GroupDataset out = dataset;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(pool_size));
    for (std::size_t c = 0; c < count; ++c) {
        std::iota(idx.begin(), idx.end(), Eigen::Index{0});
        PointSet pts(group_size, d);
        // partial Fisher–Yates
        for (Eigen::Index k = 0; k < group_size; ++k) {
            const auto remaining = static_cast<std::uint64_t>(pool_size - k);
            const auto pick = k + static_cast<Eigen::Index>(rng.below(remaining));
            std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick)]);
            pts.row(k) = pool.row(idx[static_cast<std::size_t>(k)]);
        }
        Group g = Group::from_points(group_id("inj", c), std::move(pts));
        g.label = true;
        out.groups.push_back(std::move(g));
    }
    out.provenance["injection"] = {{"count", count}, {"seed", seed}, {"group_size", group_size}};
    return out;
}

} // namespace ocsmm
