#include "ocsmm/svg.hpp"

#include "ocsmm/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ocsmm {

namespace {

constexpr double kSize = 400.0;
constexpr double kPad = 30.0;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

void open(std::ostringstream& os, const std::string& title) {
    const double total = kSize + 2 * kPad;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total << "\" height=\"" << total << "\" viewBox=\"0 0 "
       << total << ' ' << total << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty())
        os << "<text x=\"" << kPad << "\" y=\"" << kPad * 0.6 << "\" font-family=\"sans-serif\" font-size=\"12\">"
           << escape(title) << "</text>\n";
}

} // namespace

std::string svg_heatmap(const GridSpec& grid, std::span<const double> values, const std::string& title) {
    grid.validate();
    if (grid.dim() != 2) throw std::invalid_argument("svg_heatmap: 2-D grid required");
    if (values.size() != grid.size()) throw std::invalid_argument("svg_heatmap: value count does not match grid");
    const double vmax = *std::max_element(values.begin(), values.end());
    const double vmin = *std::min_element(values.begin(), values.end());
    const double range = vmax > vmin ? vmax - vmin : 1.0;
    const double cell = kSize / static_cast<double>(grid.nodes);

    std::ostringstream os;
    open(os, title);
    for (std::size_t i = 0; i < grid.nodes; ++i) {
        for (std::size_t j = 0; j < grid.nodes; ++j) {
            const double v = (values[i * grid.nodes + j] - vmin) / range;
            const int shade = static_cast<int>(std::lround(255.0 * (1.0 - v)));
            // axis 0 → x, axis 1 → y (upwards)
            const double x = kPad + static_cast<double>(i) * cell;
            const double y = kPad + kSize - static_cast<double>(j + 1) * cell;
            os << "<rect x=\"" << format_double(x) << "\" y=\"" << format_double(y) << "\" width=\"" << format_double(cell)
               << "\" height=\"" << format_double(cell) << "\" fill=\"rgb(" << shade << ',' << shade << ',' << shade
               << ")\"/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_scatter(const PointSet& points, const std::optional<std::vector<bool>>& labels, const std::string& title) {
    if (points.cols() != 2) throw std::invalid_argument("svg_scatter: 2-D points required");
    if (labels && labels->size() != static_cast<std::size_t>(points.rows()))
        throw std::invalid_argument("svg_scatter: label count does not match points");
    std::ostringstream os;
    open(os, title);
    if (points.rows() > 0) {
        const Eigen::RowVectorXd lo = points.colwise().minCoeff();
        const Eigen::RowVectorXd hi = points.colwise().maxCoeff();
        const double span = std::max({hi(0) - lo(0), hi(1) - lo(1), 1e-12});
        for (Eigen::Index r = 0; r < points.rows(); ++r) {
            const double x = kPad + (points(r, 0) - lo(0)) / span * kSize;
            const double y = kPad + kSize - (points(r, 1) - lo(1)) / span * kSize;
            const bool hot = labels && (*labels)[static_cast<std::size_t>(r)];
            os << "<circle cx=\"" << format_double(x) << "\" cy=\"" << format_double(y) << "\" r=\"2\" fill=\""
               << (hot ? "red" : "steelblue") << "\"/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::string svg_roc(const RocResult& roc, const std::string& title) {
    std::ostringstream os;
    open(os, title);
    os << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << kSize << "\" height=\"" << kSize
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << kPad << "\" y1=\"" << kPad + kSize << "\" x2=\"" << kPad + kSize << "\" y2=\"" << kPad
       << "\" stroke=\"gray\" stroke-dasharray=\"4\"/>\n";
    os << "<polyline fill=\"none\" stroke=\"firebrick\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < roc.tpr.size(); ++i)
        os << format_double(kPad + roc.fpr[i] * kSize) << ',' << format_double(kPad + kSize - roc.tpr[i] * kSize) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << kPad + kSize - 90 << "\" y=\"" << kPad + kSize - 10
       << "\" font-family=\"sans-serif\" font-size=\"12\">AUC " << format_double(std::round(roc.auc * 1e4) / 1e4)
       << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

} // namespace ocsmm
