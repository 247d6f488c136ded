#pragma once

#include "ocsmm/density.hpp"
#include "ocsmm/eval.hpp"
#include "ocsmm/group.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ocsmm {

/// Grayscale heat map of a 2-D grid (darker = larger value).
std::string svg_heatmap(const GridSpec& grid, std::span<const double> values, const std::string& title = "");

/// 2-D scatter of points; labeled points are drawn in red.
std::string svg_scatter(const PointSet& points, const std::optional<std::vector<bool>>& labels = std::nullopt,
                        const std::string& title = "");

/// ROC polyline with the chance diagonal.
std::string svg_roc(const RocResult& roc, const std::string& title = "");

} // namespace ocsmm
