#include "ocsmm/io.hpp"

#include "ocsmm/numeric.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ocsmm {

using nlohmann::json;

namespace {

std::string with_line(std::size_t line, const std::string& message) {
    return line == 0 ? message : "line " + std::to_string(line) + ": " + message;
}

double finite_number(const json& v, std::size_t line, const char* field) {
    if (!v.is_number()) throw ParseError(line, std::string(field) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(line, std::string(field) + ": non-finite value");
    return x;
}

std::vector<double> number_array(const json& v, std::size_t line, const char* field) {
    if (!v.is_array()) throw ParseError(line, std::string(field) + ": expected an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) out.push_back(finite_number(x, line, field));
    return out;
}

Eigen::MatrixXd square_matrix(const json& v, std::size_t line, const char* field) {
    if (!v.is_array() || v.empty()) throw ParseError(line, std::string(field) + ": expected a non-empty matrix");
    const auto d = static_cast<Eigen::Index>(v.size());
    Eigen::MatrixXd m(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        const auto row = number_array(v[static_cast<std::size_t>(r)], line, field);
        if (static_cast<Eigen::Index>(row.size()) != d) throw ParseError(line, std::string(field) + ": matrix must be square");
        for (Eigen::Index c = 0; c < d; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line, const std::string& field) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParseError(line, field + ": not a number '" + s + "'");
    }
    if (used != s.size()) throw ParseError(line, field + ": trailing characters in '" + s + "'");
    if (!std::isfinite(x)) throw ParseError(line, field + ": non-finite value");
    return x;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

} // namespace

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error(with_line(line, message)), line_(line) {}

json group_to_json(const Group& group) {
    json j;
    j["id"] = group.id;
    json pts = json::array();
    for (Eigen::Index r = 0; r < group.points.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < group.points.cols(); ++c) row.push_back(group.points(r, c));
        pts.push_back(std::move(row));
    }
    j["points"] = std::move(pts);
    if (group.omega) j["omega"] = *group.omega;
    if (group.point_cov) {
        json covs = json::array();
        for (const auto& c : *group.point_cov) covs.push_back(matrix_to_json(c));
        j["point_cov"] = std::move(covs);
    }
    if (group.summary) {
        j["mean"] = std::vector<double>(group.summary->mean().data(), group.summary->mean().data() + group.summary->dim());
        j["cov"] = matrix_to_json(group.summary->cov());
    }
    if (group.label) j["label"] = *group.label ? 1 : 0;
    return j;
}

Group group_from_json(const json& j, std::size_t line) {
    if (!j.is_object()) throw ParseError(line, "expected a JSON object");
    static const char* kKnown[] = {"id", "points", "omega", "point_cov", "mean", "cov", "label"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown))
            throw ParseError(line, "unknown field '" + key + "'");
    }
    Group g;
    if (!j.contains("id") || !j["id"].is_string()) throw ParseError(line, "id: required string");
    g.id = j["id"].get<std::string>();
    if (j.contains("points")) {
        const auto& pts = j["points"];
        if (!pts.is_array()) throw ParseError(line, "points: expected an array of points");
        if (!pts.empty()) {
            const auto first = number_array(pts[0], line, "points");
            const auto d = static_cast<Eigen::Index>(first.size());
            if (d == 0) throw ParseError(line, "points: zero-dimensional point");
            g.points.resize(static_cast<Eigen::Index>(pts.size()), d);
            for (std::size_t r = 0; r < pts.size(); ++r) {
                const auto row = number_array(pts[r], line, "points");
                if (static_cast<Eigen::Index>(row.size()) != d) throw ParseError(line, "points: ragged point dimensions");
                for (Eigen::Index c = 0; c < d; ++c) g.points(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
            }
        }
    }
    if (j.contains("omega")) g.omega = number_array(j["omega"], line, "omega");
    if (j.contains("point_cov")) {
        const auto& covs = j["point_cov"];
        if (!covs.is_array()) throw ParseError(line, "point_cov: expected an array of matrices");
        std::vector<Eigen::MatrixXd> out;
        for (const auto& c : covs) out.push_back(square_matrix(c, line, "point_cov"));
        g.point_cov = std::move(out);
    }
    if (j.contains("mean") != j.contains("cov")) throw ParseError(line, "mean and cov must appear together");
    if (j.contains("mean")) {
        const auto mean = number_array(j["mean"], line, "mean");
        const Eigen::MatrixXd cov = square_matrix(j["cov"], line, "cov");
        try {
            g.summary.emplace(Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size())), cov);
        } catch (const std::invalid_argument& e) {
            throw ParseError(line, e.what());
        }
    }
    if (j.contains("label")) {
        const auto& l = j["label"];
        if (l.is_boolean()) g.label = l.get<bool>();
        else if (l.is_number_integer() && (l.get<int>() == 0 || l.get<int>() == 1)) g.label = l.get<int>() == 1;
        else throw ParseError(line, "label: expected 0 or 1");
    }
    try {
        g.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(line, e.what());
    }
    return g;
}

GroupDataset load_jsonl(const std::filesystem::path& path) {
    auto in = open_input(path);
    GroupDataset ds;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw ParseError(line, std::string("invalid JSON: ") + e.what());
        }
        ds.groups.push_back(group_from_json(j, line));
    }
    if (ds.groups.empty()) throw ParseError(0, "no groups in '" + path.string() + "'");
    try {
        ds.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(0, e.what());
    }
    return ds;
}

void save_jsonl(const GroupDataset& dataset, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const auto& g : dataset.groups) out << group_to_json(g).dump() << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

GroupDataset load_points_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string text;
    if (!std::getline(in, text)) throw ParseError(0, "no groups in '" + path.string() + "'");
    const auto header = split_csv(text);
    if (header.empty() || header[0] != "group_id") throw ParseError(1, "header must start with group_id");
    std::size_t d = 0;
    int omega_col = -1, label_col = -1;
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c] == "x" + std::to_string(d + 1) && omega_col < 0 && label_col < 0) ++d;
        else if (header[c] == "omega" && omega_col < 0) omega_col = static_cast<int>(c);
        else if (header[c] == "label" && label_col < 0) label_col = static_cast<int>(c);
        else throw ParseError(1, "unexpected column '" + header[c] + "'");
    }
    if (d == 0) throw ParseError(1, "need at least one coordinate column x1");

    struct Acc {
        std::vector<std::vector<double>> rows;
        std::vector<double> omega;
        std::optional<bool> label;
    };
    std::vector<std::string> order;
    std::map<std::string, Acc> acc;
    std::size_t line = 1;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv(text);
        if (cells.size() != header.size()) throw ParseError(line, "expected " + std::to_string(header.size()) + " columns");
        auto [it, inserted] = acc.try_emplace(cells[0]);
        if (inserted) order.push_back(cells[0]);
        std::vector<double> row(d);
        for (std::size_t c = 0; c < d; ++c) row[c] = parse_double(cells[c + 1], line, header[c + 1]);
        it->second.rows.push_back(std::move(row));
        if (omega_col >= 0) it->second.omega.push_back(parse_double(cells[static_cast<std::size_t>(omega_col)], line, "omega"));
        if (label_col >= 0) {
            const auto& s = cells[static_cast<std::size_t>(label_col)];
            if (s != "0" && s != "1") throw ParseError(line, "label: expected 0 or 1");
            const bool lab = s == "1";
            if (it->second.label && *it->second.label != lab) throw ParseError(line, "conflicting labels within group '" + cells[0] + "'");
            it->second.label = lab;
        }
    }
    GroupDataset ds;
    for (const auto& id : order) {
        auto& a = acc[id];
        PointSet pts(static_cast<Eigen::Index>(a.rows.size()), static_cast<Eigen::Index>(d));
        for (std::size_t r = 0; r < a.rows.size(); ++r)
            for (std::size_t c = 0; c < d; ++c) pts(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a.rows[r][c];
        Group g = Group::from_points(id, std::move(pts));
        if (omega_col >= 0) g.omega = std::move(a.omega);
        g.label = a.label;
        ds.groups.push_back(std::move(g));
    }
    if (ds.groups.empty()) throw ParseError(0, "no groups in '" + path.string() + "'");
    try {
        ds.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(0, e.what());
    }
    ds.provenance = {{"source", path.string()}};
    return ds;
}

json spec_to_json(const GroupKernelSpec& spec) {
    return {{"embedding", to_string(spec.embedding)},
            {"outer", to_string(spec.outer)},
            {"sigma", spec.sigma},
            {"gamma", spec.gamma},
            {"normalize", spec.normalize}};
}

GroupKernelSpec spec_from_json(const json& j) {
    GroupKernelSpec spec;
    spec.embedding = parse_mean_embedding(j.at("embedding").get<std::string>());
    spec.outer = parse_outer_kernel(j.at("outer").get<std::string>());
    spec.sigma = j.at("sigma").get<double>();
    spec.gamma = j.value("gamma", 0.0);
    spec.normalize = j.value("normalize", false);
    spec.validate();
    return spec;
}

json model_to_json(const OcsmmModel& model) {
    const auto& r = model.report();
    json support = json::array();
    for (const auto& g : model.support_groups()) support.push_back(group_to_json(g));
    return {{"format", "ocsmm-model"},
            {"version", 1},
            {"spec", spec_to_json(model.spec())},
            {"nu", model.nu()},
            {"rho", model.rho()},
            {"alpha", model.alpha()},
            {"support", std::move(support)},
            {"fit_report",
             {{"objective", r.objective},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"nu", r.nu},
              {"n_train", r.n_train},
              {"n_support", r.n_support},
              {"n_bounded", r.n_bounded},
              {"alpha_sum", r.alpha_sum},
              {"max_violation", r.max_violation},
              {"jitter", r.jitter},
              {"warnings", r.warnings}}}};
}

OcsmmModel model_from_json(const json& j) {
    try {
        if (j.at("format").get<std::string>() != "ocsmm-model") throw ParseError(0, "not an ocsmm model file");
        if (j.at("version").get<int>() != 1) throw ParseError(0, "unsupported model version");
        FitReport r;
        const auto& fr = j.at("fit_report");
        r.objective = fr.at("objective").get<double>();
        r.iterations = fr.at("iterations").get<std::int64_t>();
        r.converged = fr.at("converged").get<bool>();
        r.nu = fr.at("nu").get<double>();
        r.n_train = fr.at("n_train").get<std::size_t>();
        r.n_support = fr.at("n_support").get<std::size_t>();
        r.n_bounded = fr.at("n_bounded").get<std::size_t>();
        r.alpha_sum = fr.at("alpha_sum").get<double>();
        r.max_violation = fr.at("max_violation").get<double>();
        r.jitter = fr.at("jitter").get<double>();
        r.warnings = fr.value("warnings", std::vector<std::string>{});
        std::vector<Group> support;
        for (const auto& g : j.at("support")) support.push_back(group_from_json(g));
        return OcsmmModel::from_parts(spec_from_json(j.at("spec")), std::move(support),
                                      j.at("alpha").get<std::vector<double>>(), j.at("rho").get<double>(), std::move(r));
    } catch (const json::exception& e) {
        throw ParseError(0, std::string("malformed model file: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ParseError(0, std::string("invalid model: ") + e.what());
    }
}

void save_model(const OcsmmModel& model, const std::filesystem::path& path) {
    write_text(path, model_to_json(model).dump(1) + "\n");
}

OcsmmModel load_model(const std::filesystem::path& path) {
    auto in = open_input(path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(0, std::string("invalid JSON in model file: ") + e.what());
    }
    return model_from_json(j);
}

void save_scores_csv(const ScoredDataset& scores, const std::filesystem::path& path) {
    std::ostringstream os;
    os << "id,decision,is_anomaly,rank\n";
    for (std::size_t i = 0; i < scores.decision.size(); ++i)
        os << scores.group_ids[i] << ',' << format_double(scores.decision[i]) << ',' << (scores.is_anomaly[i] ? 1 : 0) << ','
           << scores.rank[i] << '\n';
    write_text(path, os.str());
}

ScoredDataset load_scores_csv(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::string text;
    if (!std::getline(in, text)) throw ParseError(1, "empty scores file");
    const auto header = split_csv(text);
    if (header.size() < 2 || header[0] != "id" || header[1] != "decision")
        throw ParseError(1, "scores header must start with id,decision");
    ScoredDataset s;
    std::size_t line = 1;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split_csv(text);
        if (cells.size() != header.size()) throw ParseError(line, "column count mismatch");
        s.group_ids.push_back(cells[0]);
        s.decision.push_back(parse_double(cells[1], line, "decision"));
    }
    if (s.decision.empty()) throw ParseError(0, "no scores in '" + path.string() + "'");
    const auto n = s.decision.size();
    s.is_anomaly.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.is_anomaly[i] = s.decision[i] < 0.0;
    s.rank.resize(n);
    const auto order = s.order();
    for (std::size_t pos = 0; pos < n; ++pos) s.rank[order[pos]] = pos + 1;
    return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = open_output(path);
    out << text;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

} // namespace ocsmm
