#include "ddtrack/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ddtrack {

namespace {

void throw_io(const std::filesystem::path& path, const char* what) {
    throw std::runtime_error(path.string() + ": " + what);
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
    std::ofstream os(path, mode);
    if (!os) throw_io(path, "cannot open for writing");
    return os;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
    std::ifstream is(path, mode);
    if (!is) throw_io(path, "cannot open for reading");
    return is;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double to_double(const std::string& s, const std::filesystem::path& path) {
    try {
        size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ": bad numeric cell '" + s + "'");
    }
}

int to_int(const std::string& s, const std::filesystem::path& path) {
    try {
        size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ": bad integer cell '" + s + "'");
    }
}

constexpr char kMagic[4] = {'D', 'D', 'T', 'K'};
constexpr std::uint32_t kBinaryVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw_io(path, "truncated binary file");
    return v;
}

double axis_value(double v) { return std::isfinite(v) ? v : 0.0; }

std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", axis_value(v));
    return buf;
}

/// Round a span to 1/2/5 x 10^n tick spacing.
double nice_step(double span, int target_ticks) {
    if (!(span > 0)) return 1.0;
    const double raw = span / std::max(target_ticks, 1);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    double step = 10.0;
    if (frac <= 1.0) step = 1.0;
    else if (frac <= 2.0) step = 2.0;
    else if (frac <= 5.0) step = 5.0;
    return step * mag;
}

struct AxisRange {
    double lo = 0.0, hi = 1.0;
    double span() const { return hi - lo; }
};

AxisRange fit_range(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
    if (lo == hi) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        return {lo - pad, hi + pad};
    }
    const double pad = (hi - lo) * 0.05;
    return {lo - pad, hi + pad};
}

}  // namespace

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream os = open_out(path);
    os << header << '\n';
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << row[i];
        }
        os << '\n';
    }
    if (!os) throw_io(path, "write failed");
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path,
                                               std::string& header) {
    std::ifstream is = open_in(path);
    if (!std::getline(is, header)) throw_io(path, "missing header");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

void write_complex_matrix(const std::filesystem::path& path, const MatXc& m, int window_index,
                          std::uint32_t kind) {
    std::ofstream os = open_out(path, std::ios::binary);
    os.write(kMagic, 4);
    put(os, kBinaryVersion);
    put(os, kind);
    put(os, static_cast<std::int32_t>(window_index));
    put(os, static_cast<std::uint64_t>(m.rows()));
    put(os, static_cast<std::uint64_t>(m.cols()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            put(os, m(i, j).real());
            put(os, m(i, j).imag());
        }
    if (!os) throw_io(path, "write failed");
}

MatXc read_complex_matrix(const std::filesystem::path& path, int& window_index,
                          std::uint32_t expected_kind) {
    std::ifstream is = open_in(path, std::ios::binary);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw_io(path, "not a ddtrack binary dump");
    if (get<std::uint32_t>(is, path) != kBinaryVersion) throw_io(path, "unsupported version");
    if (get<std::uint32_t>(is, path) != expected_kind) throw_io(path, "unexpected content kind");
    window_index = get<std::int32_t>(is, path);
    const auto rows = get<std::uint64_t>(is, path);
    const auto cols = get<std::uint64_t>(is, path);
    if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20))
        throw_io(path, "implausible matrix dimensions");
    MatXc m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double re = get<double>(is, path);
            const double im = get<double>(is, path);
            m(i, j) = cplx(re, im);
        }
    return m;
}

void write_graph(const std::filesystem::path& path, const DDGraph& graph, double gamma_tau_s,
                 double gamma_nu_hz) {
    std::ofstream os = open_out(path);
    os << "ddtrack-graph 1\n";
    os << graph.window_index << ' ' << graph.n_doppler << ' ' << format_g17(gamma_tau_s) << ' '
       << format_g17(gamma_nu_hz) << ' ' << graph.n_nodes() << '\n';
    for (size_t i = 0; i < graph.nodes.size(); ++i) {
        const Detection& d = graph.nodes[i].detection;
        os << d.delay_bin << ' ' << d.doppler_bin << ' ' << format_g17(d.tau_s) << ' '
           << format_g17(d.nu_hz) << ' ' << format_g17(d.power) << ' ' << graph.labels[i] << '\n';
    }
    if (!os) throw_io(path, "write failed");
}

DDGraph read_graph(const std::filesystem::path& path) {
    std::ifstream is = open_in(path);
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != "ddtrack-graph" || version != 1)
        throw_io(path, "not a ddtrack graph file");
    int window = 0, n_doppler = 0, n_nodes = 0;
    double gamma_tau = 0.0, gamma_nu = 0.0;
    if (!(is >> window >> n_doppler >> gamma_tau >> gamma_nu >> n_nodes))
        throw_io(path, "truncated graph header");
    std::vector<Detection> detections(static_cast<size_t>(n_nodes));
    std::vector<int> labels(static_cast<size_t>(n_nodes));
    for (int i = 0; i < n_nodes; ++i) {
        Detection& d = detections[static_cast<size_t>(i)];
        if (!(is >> d.delay_bin >> d.doppler_bin >> d.tau_s >> d.nu_hz >> d.power >>
              labels[static_cast<size_t>(i)]))
            throw_io(path, "truncated graph node list");
    }
    DDGraph g = build_graph(detections, window, gamma_tau, gamma_nu, n_doppler);
    g.labels = std::move(labels);  // build_graph sorts by (l, p); files store that order
    return g;
}

void save_model_file(const std::filesystem::path& path, const EvolveGcnModel& model) {
    std::ofstream os = open_out(path);
    save_model(model, os);
    if (!os) throw_io(path, "write failed");
}

EvolveGcnModel load_model_file(const std::filesystem::path& path) {
    std::ifstream is = open_in(path);
    try {
        return load_model(is);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_detections_csv(const std::filesystem::path& path,
                          const std::vector<std::vector<Detection>>& per_window) {
    std::vector<std::vector<std::string>> rows;
    for (size_t k = 0; k < per_window.size(); ++k)
        for (const Detection& d : per_window[k])
            rows.push_back({std::to_string(k), std::to_string(d.delay_bin),
                            std::to_string(d.doppler_bin), format_g17(d.tau_s),
                            format_g17(d.nu_hz), format_g17(d.power)});
    write_csv(path, "k,delay_bin,doppler_bin,tau_s,nu_hz,power", rows);
}

std::vector<std::vector<Detection>> read_detections_csv(const std::filesystem::path& path) {
    std::string header;
    const auto rows = read_csv(path, header);
    std::vector<std::vector<Detection>> per_window;
    for (const auto& row : rows) {
        if (row.size() != 6) throw_io(path, "detection row needs 6 cells");
        const int k = to_int(row[0], path);
        if (k < 0) throw_io(path, "negative window index");
        if (static_cast<size_t>(k) >= per_window.size())
            per_window.resize(static_cast<size_t>(k) + 1);
        Detection d;
        d.delay_bin = to_int(row[1], path);
        d.doppler_bin = to_int(row[2], path);
        d.tau_s = to_double(row[3], path);
        d.nu_hz = to_double(row[4], path);
        d.power = to_double(row[5], path);
        per_window[static_cast<size_t>(k)].push_back(d);
    }
    return per_window;
}

void write_truth_csv(const std::filesystem::path& path, const std::vector<TruthRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const TruthRow& r : rows)
        cells.push_back({std::to_string(r.scene), std::to_string(r.target),
                         std::to_string(r.window), format_g17(r.tau_s), format_g17(r.nu_hz)});
    write_csv(path, "scene,target,k,tau_s,nu_hz", cells);
}

std::vector<TruthRow> read_truth_csv(const std::filesystem::path& path) {
    std::string header;
    const auto rows = read_csv(path, header);
    std::vector<TruthRow> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (row.size() != 5) throw_io(path, "truth row needs 5 cells");
        TruthRow r;
        r.scene = to_int(row[0], path);
        r.target = to_int(row[1], path);
        r.window = to_int(row[2], path);
        r.tau_s = to_double(row[3], path);
        r.nu_hz = to_double(row[4], path);
        out.push_back(r);
    }
    return out;
}

void write_tracks_csv(const std::filesystem::path& path, const std::vector<TrackRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const TrackRow& r : rows)
        cells.push_back({std::to_string(r.scene), std::to_string(r.point.target),
                         std::to_string(r.point.window), format_g17(r.point.tau_hat_s),
                         format_g17(r.point.nu_hat_hz),
                         std::to_string(r.point.available ? 1 : 0)});
    write_csv(path, "scene,target,k,tau_hat_s,nu_hat_hz,available", cells);
}

std::vector<TrackRow> read_tracks_csv(const std::filesystem::path& path) {
    std::string header;
    const auto rows = read_csv(path, header);
    std::vector<TrackRow> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        if (row.size() != 6) throw_io(path, "track row needs 6 cells");
        TrackRow r;
        r.scene = to_int(row[0], path);
        r.point.target = to_int(row[1], path);
        r.point.window = to_int(row[2], path);
        r.point.tau_hat_s = to_double(row[3], path);
        r.point.nu_hat_hz = to_double(row[4], path);
        r.point.available = to_int(row[5], path) != 0;
        out.push_back(r);
    }
    return out;
}

void write_svg_plot(const std::filesystem::path& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series) {
    constexpr double kW = 860, kH = 480, kL = 80, kR = 200, kT = 50, kB = 60;
    const double plot_w = kW - kL - kR, plot_h = kH - kT - kB;

    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    bool any = false;
    for (const PlotSeries& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (!any) {
                xlo = xhi = s.x[i];
                ylo = yhi = s.y[i];
                any = true;
            }
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    const AxisRange xr = fit_range(xlo, xhi), yr = fit_range(ylo, yhi);
    const auto px = [&](double x) { return kL + (x - xr.lo) / xr.span() * plot_w; };
    const auto py = [&](double y) { return kT + plot_h - (y - yr.lo) / yr.span() * plot_h; };

    std::ofstream os = open_out(path);
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
       << "' font-family='sans-serif' font-size='12'>\n";
    os << "<rect width='" << kW << "' height='" << kH << "' fill='white'/>\n";
    os << "<text x='" << kW / 2 << "' y='24' text-anchor='middle' font-size='16'>"
       << svg_escape(title) << "</text>\n";
    os << "<rect x='" << kL << "' y='" << kT << "' width='" << plot_w << "' height='" << plot_h
       << "' fill='none' stroke='black'/>\n";

    const double xstep = nice_step(xr.span(), 6), ystep = nice_step(yr.span(), 6);
    for (double x = std::ceil(xr.lo / xstep) * xstep; x <= xr.hi + 1e-12 * xr.span(); x += xstep) {
        os << "<line x1='" << num(px(x)) << "' y1='" << kT + plot_h << "' x2='" << num(px(x))
           << "' y2='" << kT + plot_h + 5 << "' stroke='black'/>\n";
        os << "<text x='" << num(px(x)) << "' y='" << kT + plot_h + 20
           << "' text-anchor='middle'>" << num(x) << "</text>\n";
    }
    for (double y = std::ceil(yr.lo / ystep) * ystep; y <= yr.hi + 1e-12 * yr.span(); y += ystep) {
        os << "<line x1='" << kL - 5 << "' y1='" << num(py(y)) << "' x2='" << kL << "' y2='"
           << num(py(y)) << "' stroke='black'/>\n";
        os << "<text x='" << kL - 8 << "' y='" << num(py(y) + 4)
           << "' text-anchor='end'>" << num(y) << "</text>\n";
    }
    os << "<text x='" << kL + plot_w / 2 << "' y='" << kH - 15 << "' text-anchor='middle'>"
       << svg_escape(x_label) << "</text>\n";
    os << "<text x='20' y='" << kT + plot_h / 2 << "' text-anchor='middle' transform='rotate(-90 20 "
       << kT + plot_h / 2 << ")'>" << svg_escape(y_label) << "</text>\n";

    double legend_y = kT + 10;
    for (const PlotSeries& s : series) {
        os << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5'";
        if (s.dashed) os << " stroke-dasharray='6 4'";
        os << " points='";
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (i) os << ' ';
            os << num(px(s.x[i])) << ',' << num(py(s.y[i]));
        }
        os << "'/>\n";
        os << "<line x1='" << kW - kR + 10 << "' y1='" << legend_y << "' x2='" << kW - kR + 40
           << "' y2='" << legend_y << "' stroke='" << s.color << "' stroke-width='1.5'";
        if (s.dashed) os << " stroke-dasharray='6 4'";
        os << "/>\n";
        os << "<text x='" << kW - kR + 46 << "' y='" << legend_y + 4 << "'>" << svg_escape(s.name)
           << "</text>\n";
        legend_y += 18;
    }
    os << "</svg>\n";
    if (!os) throw_io(path, "write failed");
}

void write_svg_bars(const std::filesystem::path& path, const std::string& title,
                    const std::vector<std::string>& series_names,
                    const std::vector<BarGroup>& groups) {
    constexpr double kW = 860, kH = 480, kL = 80, kR = 200, kT = 50, kB = 60;
    const double plot_w = kW - kL - kR, plot_h = kH - kT - kB;
    static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
    constexpr size_t kPaletteLen = sizeof(kPalette) / sizeof(kPalette[0]);

    double vmax = 0.0;
    for (const BarGroup& g : groups)
        for (double v : g.values) vmax = std::max(vmax, v);
    if (!(vmax > 0)) vmax = 1.0;
    vmax *= 1.1;

    std::ofstream os = open_out(path);
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
       << "' font-family='sans-serif' font-size='12'>\n";
    os << "<rect width='" << kW << "' height='" << kH << "' fill='white'/>\n";
    os << "<text x='" << kW / 2 << "' y='24' text-anchor='middle' font-size='16'>"
       << svg_escape(title) << "</text>\n";
    os << "<rect x='" << kL << "' y='" << kT << "' width='" << plot_w << "' height='" << plot_h
       << "' fill='none' stroke='black'/>\n";

    const double ystep = nice_step(vmax, 6);
    for (double y = 0.0; y <= vmax + 1e-12 * vmax; y += ystep) {
        const double yy = kT + plot_h - y / vmax * plot_h;
        os << "<line x1='" << kL - 5 << "' y1='" << num(yy) << "' x2='" << kL << "' y2='"
           << num(yy) << "' stroke='black'/>\n";
        os << "<text x='" << kL - 8 << "' y='" << num(yy + 4) << "' text-anchor='end'>" << num(y)
           << "</text>\n";
    }

    const size_t n_groups = groups.size();
    const size_t n_series = series_names.size();
    const double group_w = plot_w / std::max<size_t>(n_groups, 1);
    const double bar_w = group_w * 0.8 / std::max<size_t>(n_series, 1);
    for (size_t g = 0; g < n_groups; ++g) {
        const double gx = kL + static_cast<double>(g) * group_w + group_w * 0.1;
        for (size_t s = 0; s < groups[g].values.size() && s < n_series; ++s) {
            const double v = groups[g].values[s];
            const double h = v / vmax * plot_h;
            os << "<rect x='" << num(gx + static_cast<double>(s) * bar_w) << "' y='"
               << num(kT + plot_h - h) << "' width='" << num(bar_w * 0.92) << "' height='"
               << num(h) << "' fill='" << kPalette[s % kPaletteLen] << "'/>\n";
        }
        os << "<text x='" << num(gx + group_w * 0.4) << "' y='" << kT + plot_h + 20
           << "' text-anchor='middle'>" << svg_escape(groups[g].label) << "</text>\n";
    }

    double legend_y = kT + 10;
    for (size_t s = 0; s < n_series; ++s) {
        os << "<rect x='" << kW - kR + 10 << "' y='" << legend_y - 9 << "' width='14' height='14' fill='"
           << kPalette[s % kPaletteLen] << "'/>\n";
        os << "<text x='" << kW - kR + 30 << "' y='" << legend_y + 3 << "'>"
           << svg_escape(series_names[s]) << "</text>\n";
        legend_y += 18;
    }
    os << "</svg>\n";
    if (!os) throw_io(path, "write failed");
}

}  // namespace ddtrack
