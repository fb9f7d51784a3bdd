#pragma once

#include "plab/process.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace plab {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kToolVersion = "pullback-lab 0.1.0";

std::uint64_t fnv1a(const std::string& bytes);
std::string hash_hex(const std::string& bytes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Deterministic CSV: doubles rendered with %.17g.
std::string format_double(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    void save(const std::string& path) const;
    static CsvTable load(const std::string& path);
};

struct Manifest {
    std::string model_hash;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;

    void save(const std::string& path) const;
};

// Log-scale decay plot of a (tau, value) table with the fitted exponential
// overlaid; byte-deterministic for fixed input.
struct DecayPlotLayout {
    int width = 640, height = 480;
    int margin_left = 70, margin_right = 20, margin_top = 20, margin_bottom = 50;
    std::string title;
};

// Reads the first two numeric columns, fits the rate, renders the SVG.
// Returns the fit so callers can cross-check the legend.
RateFit emit_decay_plot(const std::string& csv_path, const std::string& svg_path,
                        const DecayPlotLayout& layout = {});

// Coordinate mapping used by the renderer, exposed for the collinearity test.
struct PlotFrame {
    double tau_min, tau_max, log_min, log_max;
    int width, height, margin_left, margin_right, margin_top, margin_bottom;
    double x_of(double tau) const;
    double y_of(double log10_value) const;
};
PlotFrame plot_frame(const CsvTable& table, const DecayPlotLayout& layout);

} // namespace plab
