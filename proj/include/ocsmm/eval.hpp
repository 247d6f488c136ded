#pragma once

#include "ocsmm/density.hpp"
#include "ocsmm/group.hpp"
#include "ocsmm/kernel.hpp"
#include "ocsmm/solver.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ocsmm {

struct RocResult {
    std::vector<double> thresholds; ///< +inf first, then distinct scores descending
    std::vector<double> tpr;
    std::vector<double> fpr;
    double auc = 0.0;
    double ap = 0.0;
};

/// Scores: higher = more anomalous. AUC is the Mann–Whitney statistic with
/// ties counted ½ (identical to the trapezoid area of the stored curve). AP
/// averages the precision at each positive in descending score order, ties
/// broken by input order. Throws unless both classes are present.
RocResult roc_auc(std::span<const double> scores, const std::vector<bool>& labels);

struct SweepRow {
    double nu = 0.0;
    double auc = 0.0;
    double ap = 0.0;
    double outlier_fraction = 0.0;
    double sv_fraction = 0.0;
    bool converged = false;
    std::string error; ///< non-empty when the fit failed for this ν
};

std::vector<double> default_nu_grid();

/// One-class protocol: one fit per ν on the whole labeled dataset, every
/// group scored with −decision. Kernel bandwidths are resolved once.
std::vector<SweepRow> nu_sweep(const GroupDataset& dataset, const KernelConfig& config, std::span<const double> nus,
                               const SolverConfig& solver = {});

/// Trapezoid integral of (estimate − truth)² over the grid.
double density_ise(std::span<const double> estimate, std::span<const double> truth, const GridSpec& grid);
double density_ise(const std::function<double(std::span<const double>)>& estimate,
                   const std::function<double(std::span<const double>)>& truth, const GridSpec& grid);

/// Histogram density on the grid: cells of one grid step centred on the nodes,
/// value = count / (N · cell volume). Samples outside every cell are dropped
/// but still counted in N.
std::vector<double> histogram_density(const PointSet& samples, const GridSpec& grid);

std::string roc_to_csv(const RocResult& roc);
std::string sweep_to_csv(std::span<const SweepRow> rows);
std::string grid_to_csv(const GridSpec& grid, std::span<const double> values, const std::string& value_name = "density");

} // namespace ocsmm
