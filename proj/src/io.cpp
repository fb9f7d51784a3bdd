#include "plab/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace plab {

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(const std::string& bytes) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << content;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void CsvTable::save(const std::string& path) const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) os << ",";
        os << header[i];
    }
    os << "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw IoError("row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ",";
            os << format_double(row[i]);
        }
        os << "\n";
    }
    write_text_file(path, os.str());
}

CsvTable CsvTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV " + path);
    std::istringstream head(line);
    std::string cell;
    while (std::getline(head, cell, ',')) table.header.push_back(cell);
    if (table.header.empty()) throw IoError("missing header in " + path);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError("malformed cell '" + cell + "' in " + path);
            }
        }
        if (vals.size() != table.header.size())
            throw IoError("row width does not match header in " + path);
        table.rows.push_back(std::move(vals));
    }
    return table;
}

void Manifest::save(const std::string& path) const {
    nlohmann::json j{{"model_hash", model_hash},
                     {"config_hash", config_hash},
                     {"seed", seed},
                     {"tool_version", tool_version}};
    write_text_file(path, j.dump(2) + "\n");
}

double PlotFrame::x_of(double tau) const {
    const double usable = width - margin_left - margin_right;
    if (tau_max == tau_min) return margin_left + 0.5 * usable;
    return margin_left + usable * (tau - tau_min) / (tau_max - tau_min);
}

double PlotFrame::y_of(double log10_value) const {
    const double usable = height - margin_top - margin_bottom;
    if (log_max == log_min) return margin_top + 0.5 * usable;
    return margin_top + usable * (log_max - log10_value) / (log_max - log_min);
}

PlotFrame plot_frame(const CsvTable& table, const DecayPlotLayout& layout) {
    if (table.rows.empty()) throw IoError("empty table");
    PlotFrame fr{};
    fr.width = layout.width;
    fr.height = layout.height;
    fr.margin_left = layout.margin_left;
    fr.margin_right = layout.margin_right;
    fr.margin_top = layout.margin_top;
    fr.margin_bottom = layout.margin_bottom;
    fr.tau_min = fr.tau_max = table.rows.front()[0];
    double vmin = std::numeric_limits<double>::infinity(), vmax = 0.0;
    for (const auto& row : table.rows) {
        fr.tau_min = std::min(fr.tau_min, row[0]);
        fr.tau_max = std::max(fr.tau_max, row[0]);
        const double v = std::max(row[1], kRateFitFloor);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    fr.log_min = std::log10(vmin) - 0.05;
    fr.log_max = std::log10(vmax) + 0.05;
    return fr;
}

RateFit emit_decay_plot(const std::string& csv_path, const std::string& svg_path,
                        const DecayPlotLayout& layout) {
    const CsvTable table = CsvTable::load(csv_path);
    if (table.header.size() < 2) throw IoError("decay plot needs two columns in " + csv_path);
    if (table.rows.empty()) throw IoError("empty table " + csv_path);

    std::vector<std::pair<double, double>> samples;
    for (const auto& row : table.rows) samples.emplace_back(row[0], row[1]);
    const RateFit fit = fit_exponential_rate(samples);

    const PlotFrame fr = plot_frame(table, layout);
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fr.width << "\" height=\""
        << fr.height << "\" viewBox=\"0 0 " << fr.width << " " << fr.height << "\">\n";
    svg << "  <rect width=\"" << fr.width << "\" height=\"" << fr.height
        << "\" fill=\"white\"/>\n";
    // axes
    const int x0 = fr.margin_left, y0 = fr.height - fr.margin_bottom;
    const int x1 = fr.width - fr.margin_right, y1 = fr.margin_top;
    svg << "  <line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0
        << "\" stroke=\"black\"/>\n";
    svg << "  <line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1
        << "\" stroke=\"black\"/>\n";
    svg << "  <text x=\"" << (x0 + x1) / 2 << "\" y=\"" << fr.height - 12
        << "\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\">tau</text>\n";
    svg << "  <text x=\"16\" y=\"" << (y0 + y1) / 2
        << "\" font-family=\"monospace\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 16 "
        << (y0 + y1) / 2 << ")\">log10 value</text>\n";
    // tick labels at the corners of the data range
    svg << "  <text x=\"" << x0 << "\" y=\"" << y0 + 16
        << "\" font-family=\"monospace\" font-size=\"11\">" << format_double(fr.tau_min)
        << "</text>\n";
    svg << "  <text x=\"" << x1 << "\" y=\"" << y0 + 16
        << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">"
        << format_double(fr.tau_max) << "</text>\n";
    svg << "  <text x=\"" << x0 - 4 << "\" y=\"" << y0
        << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">"
        << format_double(fr.log_min) << "</text>\n";
    svg << "  <text x=\"" << x0 - 4 << "\" y=\"" << y1 + 4
        << "\" font-family=\"monospace\" font-size=\"11\" text-anchor=\"end\">"
        << format_double(fr.log_max) << "</text>\n";

    // fitted overlay: log10 d = log10 C - omega tau / ln 10
    {
        const double ly0 = (std::log(fit.C_hat) - fit.omega_hat * fr.tau_min) / std::log(10.0);
        const double ly1 = (std::log(fit.C_hat) - fit.omega_hat * fr.tau_max) / std::log(10.0);
        svg << "  <line x1=\"" << format_double(fr.x_of(fr.tau_min)) << "\" y1=\""
            << format_double(fr.y_of(ly0)) << "\" x2=\"" << format_double(fr.x_of(fr.tau_max))
            << "\" y2=\"" << format_double(fr.y_of(ly1))
            << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
    }
    for (const auto& row : table.rows) {
        const double v = std::max(row[1], kRateFitFloor);
        svg << "  <circle cx=\"" << format_double(fr.x_of(row[0])) << "\" cy=\""
            << format_double(fr.y_of(std::log10(v)))
            << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }
    svg << "  <text x=\"" << x1 << "\" y=\"" << y1 + 16
        << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"end\">fit: C="
        << format_double(fit.C_hat) << " omega=" << format_double(fit.omega_hat)
        << " residual=" << format_double(fit.residual) << "</text>\n";
    if (!layout.title.empty())
        svg << "  <text x=\"" << x0 << "\" y=\"" << y1 + 4
            << "\" font-family=\"monospace\" font-size=\"12\">" << layout.title << "</text>\n";
    svg << "</svg>\n";
    write_text_file(svg_path, svg.str());
    return fit;
}

} // namespace plab
