#include "ddtrack/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddtrack {

namespace {
// Comparisons against the thresholds carry a 1e-9 relative slack so that
// separations of exactly gamma (e.g. an integer number of bins) stay
// inclusive under floating-point evaluation of the physical quantities.
inline bool within(double delta, double gamma) {
    return std::abs(delta) <= gamma * (1.0 + 1e-9);
}

inline double power_db_of(const Detection& d) {
    return d.power > 0.0 ? std::max(10.0 * std::log10(d.power), kPowerFloorDb) : kPowerFloorDb;
}
}  // namespace

MatX DDGraph::adjacency() const {
    MatX a = MatX::Zero(n_nodes(), n_nodes());
    for (const auto& [u, v] : edges) {
        a(u, v) = 1.0;
        a(v, u) = 1.0;
    }
    return a;
}

std::int64_t node_id(int delay_bin, int doppler_bin, int n_doppler) {
    if (delay_bin < 0 || doppler_bin < 0 || doppler_bin >= n_doppler)
        throw std::out_of_range("node_id: bin indices outside [0, N) range");
    return static_cast<std::int64_t>(delay_bin) * n_doppler + doppler_bin;
}

DDGraph build_graph(const std::vector<Detection>& detections, int k, double gamma_tau_s,
                    double gamma_nu_hz, int n_doppler) {
    if (gamma_tau_s <= 0.0 || gamma_nu_hz <= 0.0)
        throw std::invalid_argument("build_graph: thresholds must be positive");

    DDGraph g;
    g.window_index = k;
    g.n_doppler = n_doppler;
    g.nodes.reserve(detections.size());
    for (const Detection& d : detections) {
        GraphNode node;
        node.id = node_id(d.delay_bin, d.doppler_bin, n_doppler);
        node.detection = d;
        g.nodes.push_back(node);
    }
    std::sort(g.nodes.begin(), g.nodes.end(), [](const GraphNode& a, const GraphNode& b) {
        return std::make_pair(a.detection.delay_bin, a.detection.doppler_bin) <
               std::make_pair(b.detection.delay_bin, b.detection.doppler_bin);
    });
    for (size_t i = 1; i < g.nodes.size(); ++i)
        if (g.nodes[i].id == g.nodes[i - 1].id)
            throw std::invalid_argument("build_graph: duplicate (delay, doppler) detection");

    const int n = g.n_nodes();
    std::vector<std::vector<int>> nbrs(n);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) {
            const Detection& a = g.nodes[u].detection;
            const Detection& b = g.nodes[v].detection;
            if (within(a.tau_s - b.tau_s, gamma_tau_s) && within(a.nu_hz - b.nu_hz, gamma_nu_hz)) {
                g.edges.emplace_back(u, v);
                nbrs[u].push_back(v);
                nbrs[v].push_back(u);
            }
        }

    g.features.resize(n, kFeatureDim);
    g.labels.assign(n, kUnlabeled);
    for (int u = 0; u < n; ++u) {
        GraphNode& node = g.nodes[u];
        const Detection& d = node.detection;
        if (nbrs[u].empty()) {
            // Isolated node: neighborhood means fall back to the node itself.
            node.mean_tau_s = d.tau_s;
            node.mean_nu_hz = d.nu_hz;
            node.mean_power_db = power_db_of(d);
        } else {
            double st = 0.0, sn = 0.0, sp = 0.0;
            for (int v : nbrs[u]) {
                const Detection& e = g.nodes[v].detection;
                st += e.tau_s;
                sn += e.nu_hz;
                sp += power_db_of(e);
            }
            const double inv = 1.0 / static_cast<double>(nbrs[u].size());
            node.mean_tau_s = st * inv;
            node.mean_nu_hz = sn * inv;
            node.mean_power_db = sp * inv;
        }
        g.features(u, 0) = static_cast<double>(node.id);
        g.features(u, 1) = static_cast<double>(k);
        g.features(u, 2) = d.tau_s;
        g.features(u, 3) = d.nu_hz;
        g.features(u, 4) = power_db_of(d);
        g.features(u, 5) = node.mean_tau_s;
        g.features(u, 6) = node.mean_nu_hz;
        g.features(u, 7) = node.mean_power_db;
    }
    return g;
}

void label_nodes(DDGraph& graph, const std::vector<DelayDoppler>& target_truth, double gate_tau_s,
                 double gate_nu_hz) {
    if (gate_tau_s <= 0.0 || gate_nu_hz <= 0.0)
        throw std::invalid_argument("label_nodes: gates must be positive");
    const int n_targets = static_cast<int>(target_truth.size());
    for (int u = 0; u < graph.n_nodes(); ++u) {
        const Detection& d = graph.nodes[u].detection;
        int best = n_targets;  // background class
        double best_dist = std::numeric_limits<double>::infinity();
        for (int c = 0; c < n_targets; ++c) {
            const double dist = std::max(std::abs(d.tau_s - target_truth[c].tau_s) / gate_tau_s,
                                         std::abs(d.nu_hz - target_truth[c].nu_hz) / gate_nu_hz);
            if (dist <= 1.0 + 1e-12 && dist < best_dist) {  // strict < keeps the smaller index on ties
                best_dist = dist;
                best = c;
            }
        }
        graph.labels[u] = best;
    }
}

}  // namespace ddtrack
