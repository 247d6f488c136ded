#include "ocsmm/model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ocsmm {

namespace {

void check_training(std::span<const Group> training, double nu) {
    if (training.empty()) throw std::invalid_argument("fit: empty dataset");
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("fit: nu must lie in (0, 1]");
}

bool needs_self_inner(const GroupKernelSpec& spec) {
    return spec.normalize || spec.outer == OuterKernel::EmbeddingRBF;
}

} // namespace

OcsmmModel OcsmmModel::assemble(std::span<const Group> training, const GroupKernelSpec& spec,
                                const Eigen::MatrixXd& inner, double nu, const SolverConfig& solver) {
    const GramMatrix gram = gram_from_inner(inner, spec);
    const DualSolution sol = solve_dual(DualProblem{gram.entries, nu, solver});

    OcsmmModel model;
    model.spec_ = spec;
    model.rho_ = sol.rho;
    for (Eigen::Index i : sol.sv_index) {
        model.support_.push_back(training[static_cast<std::size_t>(i)]);
        model.alpha_.push_back(sol.alpha(i));
        model.support_self_.push_back(inner(i, i));
    }
    auto& r = model.report_;
    r.objective = sol.objective;
    r.iterations = sol.iterations;
    r.converged = sol.converged;
    r.nu = nu;
    r.n_train = training.size();
    r.n_support = sol.sv_index.size();
    r.n_bounded = sol.bounded_sv_index.size();
    r.alpha_sum = sol.alpha.sum();
    r.max_violation = sol.max_violation;
    r.jitter = gram.jitter;
    r.warnings = sol.warnings;
    return model;
}

OcsmmModel OcsmmModel::fit(std::span<const Group> training, const GroupKernelSpec& spec, double nu,
                           const SolverConfig& solver) {
    check_training(training, nu);
    spec.validate();
    return assemble(training, spec, inner_product_matrix(training, spec), nu, solver);
}

OcsmmModel OcsmmModel::fit(std::span<const Group> training, const KernelConfig& config, double nu,
                           const SolverConfig& solver) {
    check_training(training, nu);
    // the level-1 matrix depends only on sigma and the mean embedding
    GroupKernelSpec level1 = resolve_sigma(config, training);
    level1.outer = OuterKernel::Linear;
    level1.normalize = false;
    const Eigen::MatrixXd inner = inner_product_matrix(training, level1);
    GroupKernelSpec spec = level1;
    spec.outer = config.outer;
    spec.normalize = config.normalize;
    return assemble(training, resolve_gamma(config, spec, inner), inner, nu, solver);
}

OcsmmModel OcsmmModel::from_parts(GroupKernelSpec spec, std::vector<Group> support, std::vector<double> alpha,
                                  double rho, FitReport report) {
    spec.validate();
    if (support.empty()) throw std::invalid_argument("model: no support groups");
    if (support.size() != alpha.size()) throw std::invalid_argument("model: alpha/support size mismatch");
    for (double a : alpha)
        if (!(a > 0.0)) throw std::invalid_argument("model: alpha entries must be positive");
    const auto d = support.front().dim();
    for (const auto& g : support) {
        g.validate();
        if (g.dim() != d) throw std::invalid_argument("model: inconsistent support dimensions");
    }
    OcsmmModel model;
    model.spec_ = spec;
    model.support_ = std::move(support);
    model.alpha_ = std::move(alpha);
    model.rho_ = rho;
    model.report_ = std::move(report);
    model.support_self_.resize(model.support_.size());
    parallel_for(model.support_.size(), [&](std::size_t i) {
        model.support_self_[i] = group_inner(model.support_[i], model.support_[i], model.spec_);
    });
    return model;
}

double OcsmmModel::decision(const Group& group) const {
    group.validate();
    if (group.dim() != dim())
        throw std::invalid_argument("decision: group '" + group.id + "' has dimension " + std::to_string(group.dim()) +
                                    ", model expects " + std::to_string(dim()));
    const double self = needs_self_inner(spec_) ? group_inner(group, group, spec_) : 0.0;
    double f = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
        const double k_st = group_inner(support_[i], group, spec_);
        f += alpha_[i] * combine_kernel(k_st, support_self_[i], self, spec_);
    }
    return f - rho_;
}

std::vector<std::size_t> ScoredDataset::order() const {
    std::vector<std::size_t> idx(decision.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return decision[a] < decision[b]; });
    return idx;
}

ScoredDataset score_dataset(const OcsmmModel& model, std::span<const Group> dataset) {
    if (dataset.empty()) throw std::invalid_argument("score_dataset: empty dataset");
    ScoredDataset out;
    const auto n = dataset.size();
    out.decision.resize(n);
    parallel_for(n, [&](std::size_t i) { out.decision[i] = model.decision(dataset[i]); });
    bool any_label = false;
    for (const auto& g : dataset) {
        out.group_ids.push_back(g.id);
        any_label = any_label || g.label.has_value();
    }
    out.is_anomaly.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.is_anomaly[i] = out.decision[i] < 0.0;
    out.rank.resize(n);
    const auto order = out.order();
    for (std::size_t pos = 0; pos < n; ++pos) out.rank[order[pos]] = pos + 1;
    if (any_label) {
        std::vector<bool> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = dataset[i].label.value_or(false);
        out.labels = std::move(labels);
    }
    return out;
}

NuPropertyReport nu_property_check(const OcsmmModel& model, std::span<const Group> training, double tol) {
    NuPropertyReport rep;
    const double l = static_cast<double>(training.size());
    if (training.empty()) return rep;
    const ScoredDataset scores = score_dataset(model, training);
    std::size_t outliers = 0;
    for (double d : scores.decision) outliers += d < -tol ? 1 : 0;
    rep.outlier_fraction = static_cast<double>(outliers) / l;
    rep.sv_fraction = static_cast<double>(model.report().n_support) / l;
    const double nu = model.nu();
    rep.holds = rep.outlier_fraction <= nu + 1.0 / l && rep.sv_fraction >= nu - 1.0 / l;
    return rep;
}

} // namespace ocsmm
