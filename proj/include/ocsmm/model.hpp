#pragma once

#include "ocsmm/group.hpp"
#include "ocsmm/kernel.hpp"
#include "ocsmm/solver.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ocsmm {

struct FitReport {
    double objective = 0.0;
    std::int64_t iterations = 0;
    bool converged = false;
    double nu = 0.0;
    std::size_t n_train = 0;
    std::size_t n_support = 0;
    std::size_t n_bounded = 0;
    double alpha_sum = 0.0; ///< Σα over all training groups
    double max_violation = 0.0;
    double jitter = 0.0;
    std::vector<std::string> warnings;
};

/// Fitted one-class support measure machine. Immutable; decision() is safe
/// to call concurrently.
class OcsmmModel {
public:
    static OcsmmModel fit(std::span<const Group> training, const GroupKernelSpec& spec, double nu,
                          const SolverConfig& solver = {});
    /// Resolves bandwidths against `training` first (median heuristic, gamma rule).
    static OcsmmModel fit(std::span<const Group> training, const KernelConfig& config, double nu,
                          const SolverConfig& solver = {});

    /// Rebuilds a model from persisted parts.
    static OcsmmModel from_parts(GroupKernelSpec spec, std::vector<Group> support, std::vector<double> alpha,
                                 double rho, FitReport report);

    /// Σ_i α_i K(P_i, P) − ρ over the stored support groups.
    double decision(const Group& group) const;

    const GroupKernelSpec& spec() const { return spec_; }
    const std::vector<Group>& support_groups() const { return support_; }
    const std::vector<double>& alpha() const { return alpha_; }
    double rho() const { return rho_; }
    double nu() const { return report_.nu; }
    const FitReport& report() const { return report_; }
    Eigen::Index dim() const { return support_.empty() ? 0 : support_.front().dim(); }

private:
    OcsmmModel() = default;
    static OcsmmModel assemble(std::span<const Group> training, const GroupKernelSpec& spec,
                               const Eigen::MatrixXd& inner, double nu, const SolverConfig& solver);

    GroupKernelSpec spec_;
    std::vector<Group> support_;
    std::vector<double> alpha_;
    std::vector<double> support_self_; // level-1 <mu_i, mu_i>
    double rho_ = 0.0;
    FitReport report_;
};

struct ScoredDataset {
    std::vector<std::string> group_ids;
    std::vector<double> decision;
    std::vector<bool> is_anomaly;          ///< decision < 0
    std::vector<std::size_t> rank;         ///< 1-based position in ascending decision order
    std::optional<std::vector<bool>> labels;

    /// Group indices sorted by ascending decision, ties by index.
    std::vector<std::size_t> order() const;
};

ScoredDataset score_dataset(const OcsmmModel& model, std::span<const Group> dataset);

struct NuPropertyReport {
    double outlier_fraction = 0.0;
    double sv_fraction = 0.0;
    bool holds = false;
};

/// Outliers are training groups with decision < -tol; support fraction comes
/// from the fit report.
NuPropertyReport nu_property_check(const OcsmmModel& model, std::span<const Group> training, double tol = 1e-6);

} // namespace ocsmm
