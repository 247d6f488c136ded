#pragma once

#include "ocsmm/group.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>

namespace ocsmm {

/// 20 normal 2-D Gaussian groups with covariance [0.01 0.008; 0.008 0.01] and
/// means uniform on [0,1]², 2 anomalous groups whose covariance is the normal
/// one rotated by 60°, and one normal group shifted far away (labeled anomalous).
struct RotatedOptions {
    std::size_t normal_groups = 20;
    std::size_t rotated_groups = 2;
    std::size_t points_per_group = 100;
    double rotation_degrees = 60.0;
    Eigen::Vector2d shift{2.0, 2.0}; ///< added to the mean of normal group 0
    bool shift_one_group = true;
};

GroupDataset synth_rotated_gaussians(std::uint64_t seed, const RotatedOptions& options = {});

/// Groups drawn from a 4-component 2-D Gaussian mixture that differ only in
/// mixing proportions.
struct MixtureOptions {
    std::size_t normal_groups = 47;
    std::size_t anomalous_groups = 3;
    double mean_group_size = 300.0; ///< Poisson rate for group sizes
    double component_variance = 0.15;
};

GroupDataset synth_mixture_groups(std::uint64_t seed, const MixtureOptions& options = {});

/// Noise conventions for the noisy shapes. Both scales are variances by
/// default; set `*_is_std` to read them as standard deviations instead.
struct NoiseOptions {
    double base_noise = 0.05;
    bool base_noise_is_std = false;
    double omega_lo = 0.2;
    double omega_hi = 0.3;
    bool omega_is_std = false;
};

enum class Shape { Circle, Flower };

/// Corrupted sample plus the points before per-point corruption.
struct NoisyShape {
    GroupDataset dataset; ///< n single-point groups, each carrying its variance in `omega`
    PointSet clean;       ///< the same points with only the base noise
};

NoisyShape sample_noisy_shape(Shape shape, std::uint64_t seed, std::size_t n, const NoiseOptions& options = {});
GroupDataset synth_noisy_circle(std::uint64_t seed, std::size_t n, const NoiseOptions& options = {});
GroupDataset synth_noisy_flower(std::uint64_t seed, std::size_t n, const NoiseOptions& options = {});

/// Noise-free curve point: unit circle, or radius sin(4θ) + 2 for the flower.
Eigen::Vector2d shape_curve(Shape shape, double theta);

/// Density of curve(θ) + N(0, variance·I) with θ uniform, evaluated in closed
/// form for the circle (modified Bessel function). Throws for the flower.
double circle_density(std::span<const double> y, double variance);

/// Appends `count` groups whose points are drawn without replacement from the
/// pool of all points of the normal groups. Group size is the lower median of
/// the normal group sizes. Injected groups are labeled anomalous.
GroupDataset inject_aggregation_anomalies(const GroupDataset& dataset, std::size_t count, std::uint64_t seed);

} // namespace ocsmm
