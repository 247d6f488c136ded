#pragma once

#include "ocsmm/group.hpp"
#include "ocsmm/model.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ocsmm {

/// Malformed input file. `line()` is 1-based, 0 when not line-specific.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// One group per line:
///   {"id": str, "points": [[f64; d]...], "omega": [f64...]?, "point_cov": [[[f64]]]?,
///    "mean": [f64; d]?, "cov": [[f64; d]; d]?, "label": 0|1?}
/// Blank lines are skipped. Doubles are written in shortest round-trip form.
GroupDataset load_jsonl(const std::filesystem::path& path);
void save_jsonl(const GroupDataset& dataset, const std::filesystem::path& path);

nlohmann::json group_to_json(const Group& group);
/// `line` is used for error reporting only.
Group group_from_json(const nlohmann::json& j, std::size_t line = 0);

/// Flat CSV with a header row: group_id, x1..xd, optional omega, optional label.
/// Rows of one group need not be contiguous; groups keep first-appearance order.
GroupDataset load_points_csv(const std::filesystem::path& path);

/// Self-describing model document: format tag, version, resolved kernel spec,
/// ν, ρ, α and the support groups.
nlohmann::json model_to_json(const OcsmmModel& model);
OcsmmModel model_from_json(const nlohmann::json& j);
void save_model(const OcsmmModel& model, const std::filesystem::path& path);
OcsmmModel load_model(const std::filesystem::path& path);

nlohmann::json spec_to_json(const GroupKernelSpec& spec);
GroupKernelSpec spec_from_json(const nlohmann::json& j);

/// Scores CSV: id,decision,is_anomaly,rank
void save_scores_csv(const ScoredDataset& scores, const std::filesystem::path& path);
ScoredDataset load_scores_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace ocsmm
