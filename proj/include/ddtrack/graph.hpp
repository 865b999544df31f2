#pragma once

#include "ddtrack/cfar.hpp"
#include "ddtrack/scene.hpp"

#include <cstdint>
#include <vector>

namespace ddtrack {

inline constexpr int kFeatureDim = 8;
inline constexpr int kUnlabeled = -1;

/// Graph node: one CFAR detection plus its neighborhood summary.
struct GraphNode {
    std::int64_t id = 0;  // l * N_nu + p
    Detection detection;
    double mean_tau_s = 0.0;     // over the node's neighborhood (itself if isolated)
    double mean_nu_hz = 0.0;
    double mean_power_db = 0.0;
};

/// Attributed delay-Doppler graph snapshot for one window.
struct DDGraph {
    std::vector<GraphNode> nodes;                     // sorted by (l, p)
    std::vector<std::pair<int, int>> edges;           // u < v, node indices
    MatX features;                                    // N_k x 8
    std::vector<int> labels;                          // class id or kUnlabeled
    int window_index = 0;
    int n_doppler = 0;                                // N_nu

    int n_nodes() const { return static_cast<int>(nodes.size()); }
    /// Dense symmetric 0/1 adjacency, zero diagonal.
    MatX adjacency() const;
};

/// Unique bin identifier ID = l * N_nu + p; stable across windows.
std::int64_t node_id(int delay_bin, int doppler_bin, int n_doppler);

/// Build the snapshot: one node per detection, edges where both |dtau| and
/// |dnu| are within the thresholds (inclusive), features
/// [ID, k, tau, nu, power_db, mean_tau, mean_nu, mean_power_db].
/// Node power enters the features in dB; neighborhood means average dB values.
/// Labels start out kUnlabeled. Duplicate (l, p) detections are rejected.
DDGraph build_graph(const std::vector<Detection>& detections, int k, double gamma_tau_s,
                    double gamma_nu_hz, int n_doppler);

/// Label nodes against ground truth at this window: nearest target by the
/// normalized distance max(|dtau|/gate_tau, |dnu|/gate_nu) if within 1,
/// else the background class n_targets. Ties go to the smaller target index.
void label_nodes(DDGraph& graph, const std::vector<DelayDoppler>& target_truth, double gate_tau_s,
                 double gate_nu_hz);

}  // namespace ddtrack
