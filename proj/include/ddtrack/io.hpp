#pragma once

#include "ddtrack/evolvegcn.hpp"
#include "ddtrack/graph.hpp"
#include "ddtrack/metrics.hpp"
#include "ddtrack/tracker.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ddtrack {

/// Shortest round-trip decimal representation (printf %.17g).
std::string format_g17(double v);

/// Join cells with commas; no quoting (values never contain commas).
void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows);

/// Rows of a CSV produced by write_csv; header returned separately.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::string& header);

/// Binary complex-matrix dump ("DDTK" magic; kind tags tell CFR windows and
/// delay-Doppler maps apart).
inline constexpr std::uint32_t kKindCfr = 1;
inline constexpr std::uint32_t kKindDDMap = 2;
void write_complex_matrix(const std::filesystem::path& path, const MatXc& m, int window_index,
                          std::uint32_t kind);
MatXc read_complex_matrix(const std::filesystem::path& path, int& window_index,
                          std::uint32_t expected_kind);

/// Text graph snapshot: stores detections, labels, and the thresholds; edges
/// and features are rebuilt on load so the file cannot go out of sync with
/// the construction rule.
void write_graph(const std::filesystem::path& path, const DDGraph& graph, double gamma_tau_s,
                 double gamma_nu_hz);
DDGraph read_graph(const std::filesystem::path& path);

void save_model_file(const std::filesystem::path& path, const EvolveGcnModel& model);
EvolveGcnModel load_model_file(const std::filesystem::path& path);

/// detections.csv: k,delay_bin,doppler_bin,tau_s,nu_hz,power
void write_detections_csv(const std::filesystem::path& path,
                          const std::vector<std::vector<Detection>>& per_window);
std::vector<std::vector<Detection>> read_detections_csv(const std::filesystem::path& path);

/// ground_truth.csv: scene,target,k,tau_s,nu_hz
struct TruthRow {
    int scene = 0;
    int target = 0;
    int window = 0;
    double tau_s = 0.0;
    double nu_hz = 0.0;
};
void write_truth_csv(const std::filesystem::path& path, const std::vector<TruthRow>& rows);
std::vector<TruthRow> read_truth_csv(const std::filesystem::path& path);

/// tracks CSV: scene,target,k,tau_hat_s,nu_hat_hz,available
struct TrackRow {
    int scene = 0;
    TrackPoint point;
};
void write_tracks_csv(const std::filesystem::path& path, const std::vector<TrackRow>& rows);
std::vector<TrackRow> read_tracks_csv(const std::filesystem::path& path);

/// Simple line plot to a standalone SVG: one polyline per series over a
/// shared x axis.
struct PlotSeries {
    std::string name;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    bool dashed = false;
};
void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

/// Grouped bar chart (per-target RMSE style) to a standalone SVG.
struct BarGroup {
    std::string label;                 // x-axis group label
    std::vector<double> values;        // one bar per series
};
void write_svg_bars(const std::filesystem::path& path, const std::string& title,
                    const std::vector<std::string>& series_names,
                    const std::vector<BarGroup>& groups);

}  // namespace ddtrack
