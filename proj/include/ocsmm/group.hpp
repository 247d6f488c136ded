#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ocsmm {

/// Row-major n×d sample matrix; one observation per row.
using PointSet = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Explicit Gaussian description N(mean, cov) of a group.
class GaussianSummary {
public:
    /// Validates symmetry (1e-12) and PSD-ness (eigenvalues >= -1e-10).
    /// Slightly negative eigenvalues are clamped to zero.
    GaussianSummary(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    /// Isotropic N(mean, variance·I).
    static GaussianSummary isotropic(Eigen::VectorXd mean, double variance);

    const Eigen::VectorXd& mean() const { return mean_; }
    const Eigen::MatrixXd& cov() const { return cov_; }
    Eigen::Index dim() const { return mean_.size(); }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
};

/// A group of observations: the unit of anomaly detection.
///
/// A group carries a sample set, an explicit Gaussian summary, or both. Per-point
/// uncertainty is either an isotropic variance per point (`omega`) or a full
/// covariance per point (`point_cov`), never both.
struct Group {
    std::string id;
    PointSet points;
    std::optional<std::vector<double>> omega;
    std::optional<std::vector<Eigen::MatrixXd>> point_cov;
    std::optional<GaussianSummary> summary;
    std::optional<bool> label;

    Eigen::Index size() const { return points.rows(); }
    bool has_points() const { return points.rows() > 0; }
    /// Dimension from points, or from the summary when there are no points.
    Eigen::Index dim() const;

    /// Throws std::invalid_argument when the group's invariants do not hold.
    void validate() const;

    /// Convenience constructors.
    static Group from_points(std::string id, PointSet points);
    static Group from_summary(std::string id, GaussianSummary summary);
};

struct GroupDataset {
    std::vector<Group> groups;
    nlohmann::json provenance = nlohmann::json::object();

    /// Common dimension; throws when the dataset is empty.
    Eigen::Index dim() const;
    std::size_t size() const { return groups.size(); }
    /// Consistent dimension, unique ids, every group valid.
    void validate() const;
    std::size_t anomaly_count() const;
};

/// Groups whose label is absent or false.
GroupDataset normal_groups(const GroupDataset& dataset);

/// Replaces every group by a single zero-uncertainty point at its mean.
GroupDataset collapse_to_means(const GroupDataset& dataset);

/// Sample mean of a group (summary mean when it has no points).
Eigen::VectorXd group_mean(const Group& group);

} // namespace ocsmm
