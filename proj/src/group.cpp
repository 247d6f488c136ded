#include "ocsmm/group.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace ocsmm {

namespace {

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.allFinite(); }

} // namespace

GaussianSummary::GaussianSummary(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
    const auto d = mean_.size();
    if (d == 0) throw std::invalid_argument("gaussian summary: empty mean");
    if (cov_.rows() != d || cov_.cols() != d)
        throw std::invalid_argument("gaussian summary: covariance must be d x d");
    if (!all_finite(mean_) || !all_finite(cov_))
        throw std::invalid_argument("gaussian summary: non-finite entries");
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("gaussian summary: covariance not symmetric");
    if (d == 1) {
        if (cov_(0, 0) < -1e-10) throw std::invalid_argument("gaussian summary: negative variance");
        cov_(0, 0) = std::max(cov_(0, 0), 0.0);
        return;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_);
    if (eig.eigenvalues().minCoeff() < -1e-10)
        throw std::invalid_argument("gaussian summary: covariance not PSD");
    if (eig.eigenvalues().minCoeff() < 0.0) {
        const Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(0.0);
        cov_ = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
        cov_ = 0.5 * (cov_ + cov_.transpose()).eval();
    }
}

GaussianSummary GaussianSummary::isotropic(Eigen::VectorXd mean, double variance) {
    const auto d = mean.size();
    return GaussianSummary(std::move(mean), Eigen::MatrixXd::Identity(d, d) * variance);
}

Eigen::Index Group::dim() const {
    if (has_points()) return points.cols();
    if (summary) return summary->dim();
    return 0;
}

void Group::validate() const {
    if (!has_points() && !summary)
        throw std::invalid_argument("group '" + id + "': needs points or a gaussian summary");
    if (has_points()) {
        if (points.cols() == 0) throw std::invalid_argument("group '" + id + "': zero-dimensional points");
        if (!points.allFinite()) throw std::invalid_argument("group '" + id + "': non-finite point");
    }
    if (omega && point_cov)
        throw std::invalid_argument("group '" + id + "': omega and point_cov are exclusive");
    if (omega) {
        if (static_cast<Eigen::Index>(omega->size()) != size())
            throw std::invalid_argument("group '" + id + "': omega length must equal point count");
        for (double w : *omega)
            if (!std::isfinite(w) || w < 0.0)
                throw std::invalid_argument("group '" + id + "': omega must be finite and >= 0");
    }
    if (point_cov) {
        if (static_cast<Eigen::Index>(point_cov->size()) != size())
            throw std::invalid_argument("group '" + id + "': point_cov length must equal point count");
        for (const auto& c : *point_cov) {
            if (c.rows() != dim() || c.cols() != dim())
                throw std::invalid_argument("group '" + id + "': point covariance must be d x d");
            if (!c.allFinite()) throw std::invalid_argument("group '" + id + "': non-finite covariance");
        }
    }
    if (summary && has_points() && summary->dim() != points.cols())
        throw std::invalid_argument("group '" + id + "': summary and points disagree on dimension");
}

Group Group::from_points(std::string id, PointSet points) {
    Group g;
    g.id = std::move(id);
    g.points = std::move(points);
    return g;
}

Group Group::from_summary(std::string id, GaussianSummary summary) {
    Group g;
    g.id = std::move(id);
    g.summary = std::move(summary);
    return g;
}

Eigen::Index GroupDataset::dim() const {
    if (groups.empty()) throw std::invalid_argument("dataset: no groups");
    return groups.front().dim();
}

void GroupDataset::validate() const {
    if (groups.empty()) throw std::invalid_argument("dataset: no groups");
    const auto d = dim();
    std::unordered_set<std::string> ids;
    for (const auto& g : groups) {
        g.validate();
        if (g.dim() != d)
            throw std::invalid_argument("dataset: group '" + g.id + "' has inconsistent dimension");
        if (!ids.insert(g.id).second)
            throw std::invalid_argument("dataset: duplicate group id '" + g.id + "'");
    }
}

std::size_t GroupDataset::anomaly_count() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.label.value_or(false) ? 1 : 0;
    return n;
}

GroupDataset normal_groups(const GroupDataset& dataset) {
    GroupDataset out;
    out.provenance = dataset.provenance;
    for (const auto& g : dataset.groups)
        if (!g.label.value_or(false)) out.groups.push_back(g);
    return out;
}

Eigen::VectorXd group_mean(const Group& group) {
    if (group.has_points()) return group.points.colwise().mean().transpose();
    if (group.summary) return group.summary->mean();
    throw std::invalid_argument("group '" + group.id + "': no data");
}

GroupDataset collapse_to_means(const GroupDataset& dataset) {
    GroupDataset out;
    out.provenance = dataset.provenance;
    out.provenance["collapsed_to_means"] = true;
    for (const auto& g : dataset.groups) {
        const Eigen::VectorXd m = group_mean(g);
        PointSet p(1, m.size());
        p.row(0) = m.transpose();
        Group c = Group::from_points(g.id, std::move(p));
        c.label = g.label;
        out.groups.push_back(std::move(c));
    }
    return out;
}

} // namespace ocsmm
