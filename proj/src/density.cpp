#include "ocsmm/density.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ocsmm {

namespace {

double squared_distance(std::span<const double> y, const PointSet& centers, Eigen::Index i) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < centers.cols(); ++c) {
        const double diff = y[static_cast<std::size_t>(c)] - centers(i, c);
        acc += diff * diff;
    }
    return acc;
}

double normal_density(double sq, double variance, Eigen::Index d) {
    return std::exp(-sq / (2.0 * variance)) / std::pow(2.0 * std::numbers::pi * variance, 0.5 * static_cast<double>(d));
}

void check_query(const PointSet& centers, std::span<const double> y, const char* who) {
    if (centers.rows() == 0) throw std::invalid_argument(std::string(who) + ": no centers");
    if (static_cast<Eigen::Index>(y.size()) != centers.cols())
        throw std::invalid_argument(std::string(who) + ": query dimension mismatch");
}

} // namespace

double kde_eval(const PointSet& centers, double h, std::span<const double> y) {
    check_query(centers, y, "kde_eval");
    if (!(h > 0.0)) throw std::invalid_argument("kde_eval: h must be > 0");
    const double var = h * h;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < centers.rows(); ++i) acc += normal_density(squared_distance(y, centers, i), var, centers.cols());
    return acc / static_cast<double>(centers.rows());
}

double vkde_sample_smoothing(const PointSet& centers, std::span<const double> sigmas, std::span<const double> y) {
    check_query(centers, y, "vkde_sample_smoothing");
    if (static_cast<Eigen::Index>(sigmas.size()) != centers.rows())
        throw std::invalid_argument("vkde_sample_smoothing: one bandwidth per center required");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < centers.rows(); ++i) {
        const double s = sigmas[static_cast<std::size_t>(i)];
        if (!(s > 0.0)) throw std::invalid_argument("vkde_sample_smoothing: bandwidths must be > 0");
        acc += normal_density(squared_distance(y, centers, i), s * s, centers.cols());
    }
    return acc / static_cast<double>(centers.rows());
}

double vkde_balloon(const PointSet& centers, double base_sigma, double test_sigma, std::span<const double> y) {
    if (!(base_sigma > 0.0)) throw std::invalid_argument("vkde_balloon: base_sigma must be > 0");
    if (!(test_sigma >= 0.0)) throw std::invalid_argument("vkde_balloon: test_sigma must be >= 0");
    return kde_eval(centers, std::sqrt(base_sigma * base_sigma + test_sigma * test_sigma), y);
}

double ocsmm_density(const OcsmmModel& model, double test_sigma, std::span<const double> y, bool normalized) {
    const auto& spec = model.spec();
    if (spec.embedding != MeanEmbedding::GaussianAnalytic || spec.outer != OuterKernel::Linear || spec.normalize)
        throw std::invalid_argument("ocsmm_density: model must use the analytic embedding, linear outer kernel, no normalization");
    if (!(test_sigma >= 0.0)) throw std::invalid_argument("ocsmm_density: test_sigma must be >= 0");
    const auto d = model.dim();
    if (static_cast<Eigen::Index>(y.size()) != d) throw std::invalid_argument("ocsmm_density: query dimension mismatch");

    Group probe;
    probe.id = "query";
    probe.points = PointSet(1, d);
    for (Eigen::Index c = 0; c < d; ++c) probe.points(0, c) = y[static_cast<std::size_t>(c)];
    probe.omega = std::vector<double>{test_sigma * test_sigma};

    double acc = 0.0;
    const auto& support = model.support_groups();
    const auto& alpha = model.alpha();
    for (std::size_t i = 0; i < support.size(); ++i) acc += alpha[i] * group_inner(support[i], probe, spec);
    if (!normalized) return acc;
    const double s2 = spec.sigma * spec.sigma;
    return acc / std::pow(2.0 * std::numbers::pi * s2, 0.5 * static_cast<double>(d));
}

DensityModel DensityModel::fixed_kde(PointSet centers, double h) {
    if (centers.rows() == 0) throw std::invalid_argument("density: no centers");
    if (!(h > 0.0)) throw std::invalid_argument("density: bandwidth must be > 0");
    DensityModel m;
    m.kind_ = Kind::FixedKDE;
    m.centers_ = std::move(centers);
    m.base_ = h;
    return m;
}

DensityModel DensityModel::balloon(PointSet centers, double base_sigma, double test_sigma) {
    if (centers.rows() == 0) throw std::invalid_argument("density: no centers");
    if (!(base_sigma > 0.0) || !(test_sigma >= 0.0)) throw std::invalid_argument("density: invalid balloon bandwidths");
    DensityModel m;
    m.kind_ = Kind::Balloon;
    m.centers_ = std::move(centers);
    m.base_ = base_sigma;
    m.test_ = test_sigma;
    return m;
}

DensityModel DensityModel::sample_smoothing(PointSet centers, std::vector<double> sigmas) {
    if (centers.rows() == 0) throw std::invalid_argument("density: no centers");
    if (static_cast<Eigen::Index>(sigmas.size()) != centers.rows())
        throw std::invalid_argument("density: one bandwidth per center required");
    for (double s : sigmas)
        if (!(s > 0.0)) throw std::invalid_argument("density: bandwidths must be > 0");
    DensityModel m;
    m.kind_ = Kind::SampleSmoothing;
    m.centers_ = std::move(centers);
    m.sigmas_ = std::move(sigmas);
    return m;
}

DensityModel DensityModel::ocsmm(std::shared_ptr<const OcsmmModel> model, double test_sigma, bool normalized) {
    if (!model) throw std::invalid_argument("density: null model");
    if (!(test_sigma >= 0.0)) throw std::invalid_argument("density: test_sigma must be >= 0");
    DensityModel m;
    m.kind_ = Kind::OcsmmInduced;
    m.model_ = std::move(model);
    m.test_ = test_sigma;
    m.normalized_ = normalized;
    return m;
}

Eigen::Index DensityModel::dim() const { return kind_ == Kind::OcsmmInduced ? model_->dim() : centers_.cols(); }

double DensityModel::operator()(std::span<const double> y) const {
    switch (kind_) {
    case Kind::FixedKDE: return kde_eval(centers_, base_, y);
    case Kind::Balloon: return vkde_balloon(centers_, base_, test_, y);
    case Kind::SampleSmoothing: return vkde_sample_smoothing(centers_, sigmas_, y);
    case Kind::OcsmmInduced: return ocsmm_density(*model_, test_, y, normalized_);
    }
    return 0.0;
}

std::size_t GridSpec::size() const {
    std::size_t n = 1;
    for (std::size_t a = 0; a < dim(); ++a) n *= nodes;
    return n;
}

double GridSpec::step(std::size_t axis) const { return (hi[axis] - lo[axis]) / static_cast<double>(nodes - 1); }

std::vector<double> GridSpec::node(std::size_t flat) const {
    std::vector<double> y(dim());
    for (std::size_t a = dim(); a-- > 0;) {
        const std::size_t idx = flat % nodes;
        flat /= nodes;
        y[a] = idx + 1 == nodes ? hi[a] : lo[a] + static_cast<double>(idx) * step(a);
    }
    return y;
}

void GridSpec::validate() const {
    if (lo.empty() || lo.size() != hi.size()) throw std::invalid_argument("grid: lo/hi must be non-empty and equal length");
    if (lo.size() > 3) throw std::invalid_argument("grid: at most 3 dimensions");
    if (nodes < 2) throw std::invalid_argument("grid: need at least 2 nodes per axis");
    for (std::size_t a = 0; a < lo.size(); ++a)
        if (!(hi[a] > lo[a])) throw std::invalid_argument("grid: hi must exceed lo on every axis");
}

GridSpec bounding_grid(const PointSet& points, double margin, std::size_t nodes) {
    if (points.rows() == 0) throw std::invalid_argument("grid: no points");
    GridSpec g;
    g.nodes = nodes;
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
        g.lo.push_back(points.col(c).minCoeff() - margin);
        g.hi.push_back(points.col(c).maxCoeff() + margin);
    }
    g.validate();
    return g;
}

std::vector<double> evaluate_on_grid(const std::function<double(std::span<const double>)>& f, const GridSpec& grid) {
    grid.validate();
    std::vector<double> values(grid.size());
    // one task per row of the slowest axis
    const std::size_t rows = grid.nodes;
    const std::size_t per_row = grid.size() / rows;
    parallel_for(rows, [&](std::size_t r) {
        for (std::size_t k = 0; k < per_row; ++k) {
            const std::size_t flat = r * per_row + k;
            const auto y = grid.node(flat);
            values[flat] = f(y);
        }
    });
    return values;
}

double trapezoid_integral(std::span<const double> values, const GridSpec& grid) {
    grid.validate();
    if (values.size() != grid.size()) throw std::invalid_argument("trapezoid: value count does not match grid");
    double cell = 1.0;
    for (std::size_t a = 0; a < grid.dim(); ++a) cell *= grid.step(a);
    double acc = 0.0;
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        std::size_t rest = flat;
        double w = 1.0;
        for (std::size_t a = 0; a < grid.dim(); ++a) {
            const std::size_t idx = rest % grid.nodes;
            rest /= grid.nodes;
            if (idx == 0 || idx + 1 == grid.nodes) w *= 0.5;
        }
        acc += w * values[flat];
    }
    return acc * cell;
}

} // namespace ocsmm
