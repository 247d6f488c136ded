#pragma once

#include "ocsmm/group.hpp"
#include "ocsmm/model.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace ocsmm {

/// (1/n) Σ_i N(y; x_i, h² I).
double kde_eval(const PointSet& centers, double h, std::span<const double> y);

/// Sample-smoothing variable KDE: (1/n) Σ_i N(y; x_i, σ_i² I).
double vkde_sample_smoothing(const PointSet& centers, std::span<const double> sigmas, std::span<const double> y);

/// Balloon variable KDE: the query's own uncertainty widens every kernel,
/// (1/n) Σ_i N(y; x_i, (base² + test²) I).
double vkde_balloon(const PointSet& centers, double base_sigma, double test_sigma, std::span<const double> y);

/// Σ_i α_i K(P_i, N(y, σ_t² I)) for a model fitted with the analytic mean
/// embedding, linear outer kernel and no normalization. With `normalized`
/// the sum is multiplied by (2πσ²)^(-d/2), which turns every summand into the
/// Gaussian density N(y; m_i, (σ² + Σ_i + σ_t²)) and the whole into a
/// mixture density. ρ plays no part.
double ocsmm_density(const OcsmmModel& model, double test_sigma, std::span<const double> y, bool normalized);

/// Tagged density estimator.
class DensityModel {
public:
    enum class Kind { FixedKDE, Balloon, SampleSmoothing, OcsmmInduced };

    static DensityModel fixed_kde(PointSet centers, double h);
    static DensityModel balloon(PointSet centers, double base_sigma, double test_sigma);
    static DensityModel sample_smoothing(PointSet centers, std::vector<double> sigmas);
    static DensityModel ocsmm(std::shared_ptr<const OcsmmModel> model, double test_sigma, bool normalized = true);

    Kind kind() const { return kind_; }
    bool normalized() const { return normalized_; }
    Eigen::Index dim() const;
    double operator()(std::span<const double> y) const;

private:
    Kind kind_ = Kind::FixedKDE;
    PointSet centers_;
    double base_ = 0.0;
    double test_ = 0.0;
    std::vector<double> sigmas_;
    std::shared_ptr<const OcsmmModel> model_;
    bool normalized_ = true;
};

/// Tensor-product grid for d ≤ 2 (d = 3 accepted but slow).
struct GridSpec {
    std::vector<double> lo;
    std::vector<double> hi;
    std::size_t nodes = 401; ///< per axis, ≥ 2

    std::size_t dim() const { return lo.size(); }
    std::size_t size() const;
    double step(std::size_t axis) const;
    /// Coordinates of the flat index (axis 0 varies slowest).
    std::vector<double> node(std::size_t flat) const;
    void validate() const;
};

/// Box extending `margin` beyond the bounding box of `points`.
GridSpec bounding_grid(const PointSet& points, double margin, std::size_t nodes = 401);

std::vector<double> evaluate_on_grid(const std::function<double(std::span<const double>)>& f, const GridSpec& grid);

/// Tensor-product trapezoid rule over grid values.
double trapezoid_integral(std::span<const double> values, const GridSpec& grid);

} // namespace ocsmm
