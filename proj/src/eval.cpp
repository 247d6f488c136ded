#include "ocsmm/eval.hpp"

#include "ocsmm/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ocsmm {

RocResult roc_auc(std::span<const double> scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: scores and labels differ in length");
    const auto n = scores.size();
    std::size_t pos = 0;
    for (bool l : labels) pos += l ? 1 : 0;
    const std::size_t neg = n - pos;
    if (pos == 0 || neg == 0) throw std::invalid_argument("roc_auc: need at least one positive and one negative label");
    for (double s : scores)
        if (std::isnan(s)) throw std::invalid_argument("roc_auc: NaN score");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocResult roc;
    roc.thresholds.push_back(std::numeric_limits<double>::infinity());
    roc.tpr.push_back(0.0);
    roc.fpr.push_back(0.0);
    // twice the area in units of (1/pos)(1/neg), accumulated exactly
    std::uint64_t area2 = 0;
    std::size_t tp = 0, fp = 0;
    double precision_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t k = 0; k < n;) {
        const double s = scores[idx[k]];
        const std::size_t tp0 = tp, fp0 = fp;
        for (; k < n && scores[idx[k]] == s; ++k) {
            ++seen;
            if (labels[idx[k]]) {
                ++tp;
                precision_sum += static_cast<double>(tp) / static_cast<double>(seen);
            } else {
                ++fp;
            }
        }
        area2 += static_cast<std::uint64_t>(fp - fp0) * static_cast<std::uint64_t>(tp + tp0);
        roc.thresholds.push_back(s);
        roc.tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
        roc.fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
    }
    roc.auc = static_cast<double>(area2) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
    roc.ap = precision_sum / static_cast<double>(pos);
    return roc;
}

std::vector<double> default_nu_grid() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; }

std::vector<SweepRow> nu_sweep(const GroupDataset& dataset, const KernelConfig& config, std::span<const double> nus,
                               const SolverConfig& solver) {
    dataset.validate();
    std::vector<bool> labels;
    for (const auto& g : dataset.groups) labels.push_back(g.label.value_or(false));

    GroupKernelSpec level1 = resolve_sigma(config, dataset.groups);
    level1.outer = OuterKernel::Linear;
    level1.normalize = false;
    const Eigen::MatrixXd inner = inner_product_matrix(dataset.groups, level1);
    GroupKernelSpec spec = level1;
    spec.outer = config.outer;
    spec.normalize = config.normalize;
    spec = resolve_gamma(config, spec, inner);
    const GramMatrix gram = gram_from_inner(inner, spec);
    const double l = static_cast<double>(dataset.size());

    std::vector<SweepRow> rows;
    for (double nu : nus) {
        SweepRow row;
        row.nu = nu;
        try {
            const DualSolution sol = solve_dual(DualProblem{gram.entries, nu, solver});
            const Eigen::VectorXd decision = (gram.entries * sol.alpha).array() - sol.rho;
            std::vector<double> scores(static_cast<std::size_t>(decision.size()));
            std::size_t outliers = 0;
            for (Eigen::Index i = 0; i < decision.size(); ++i) {
                scores[static_cast<std::size_t>(i)] = -decision(i);
                outliers += decision(i) < -solver.tol ? 1 : 0;
            }
            const RocResult roc = roc_auc(scores, labels);
            row.auc = roc.auc;
            row.ap = roc.ap;
            row.outlier_fraction = static_cast<double>(outliers) / l;
            row.sv_fraction = static_cast<double>(sol.sv_index.size()) / l;
            row.converged = sol.converged;
        } catch (const std::exception& e) {
            row.converged = false;
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

double density_ise(std::span<const double> estimate, std::span<const double> truth, const GridSpec& grid) {
    if (estimate.size() != truth.size()) throw std::invalid_argument("density_ise: grid value counts differ");
    std::vector<double> sq(estimate.size());
    for (std::size_t i = 0; i < sq.size(); ++i) {
        const double diff = estimate[i] - truth[i];
        sq[i] = diff * diff;
    }
    return trapezoid_integral(sq, grid);
}

double density_ise(const std::function<double(std::span<const double>)>& estimate,
                   const std::function<double(std::span<const double>)>& truth, const GridSpec& grid) {
    return density_ise(evaluate_on_grid(estimate, grid), evaluate_on_grid(truth, grid), grid);
}

std::vector<double> histogram_density(const PointSet& samples, const GridSpec& grid) {
    grid.validate();
    if (static_cast<std::size_t>(samples.cols()) != grid.dim()) throw std::invalid_argument("histogram: dimension mismatch");
    std::vector<double> counts(grid.size(), 0.0);
    double volume = 1.0;
    for (std::size_t a = 0; a < grid.dim(); ++a) volume *= grid.step(a);
    for (Eigen::Index r = 0; r < samples.rows(); ++r) {
        std::size_t flat = 0;
        bool inside = true;
        for (std::size_t a = 0; a < grid.dim() && inside; ++a) {
            const double pos = (samples(r, static_cast<Eigen::Index>(a)) - grid.lo[a]) / grid.step(a);
            const double nearest = std::floor(pos + 0.5);
            if (nearest < 0.0 || nearest > static_cast<double>(grid.nodes - 1)) inside = false;
            else flat = flat * grid.nodes + static_cast<std::size_t>(nearest);
        }
        if (inside) counts[flat] += 1.0;
    }
    const double scale = 1.0 / (static_cast<double>(samples.rows()) * volume);
    for (double& c : counts) c *= scale;
    return counts;
}

std::string roc_to_csv(const RocResult& roc) {
    std::ostringstream os;
    os << "fpr,tpr,threshold\n";
    for (std::size_t i = 0; i < roc.tpr.size(); ++i)
        os << format_double(roc.fpr[i]) << ',' << format_double(roc.tpr[i]) << ',' << format_double(roc.thresholds[i]) << '\n';
    return os.str();
}

std::string sweep_to_csv(std::span<const SweepRow> rows) {
    std::ostringstream os;
    os << "nu,auc,ap,outlier_fraction,sv_fraction,converged,error\n";
    for (const auto& r : rows)
        os << format_double(r.nu) << ',' << format_double(r.auc) << ',' << format_double(r.ap) << ','
           << format_double(r.outlier_fraction) << ',' << format_double(r.sv_fraction) << ',' << (r.converged ? 1 : 0) << ','
           << '"' << r.error << '"' << '\n';
    return os.str();
}

std::string grid_to_csv(const GridSpec& grid, std::span<const double> values, const std::string& value_name) {
    if (values.size() != grid.size()) throw std::invalid_argument("grid_to_csv: value count does not match grid");
    std::ostringstream os;
    for (std::size_t a = 0; a < grid.dim(); ++a) os << 'x' << (a + 1) << ',';
    os << value_name << '\n';
    for (std::size_t flat = 0; flat < values.size(); ++flat) {
        for (double c : grid.node(flat)) os << format_double(c) << ',';
        os << format_double(values[flat]) << '\n';
    }
    return os.str();
}

} // namespace ocsmm
