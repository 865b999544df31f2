#pragma once

#include "ddtrack/common.hpp"

#include <optional>
#include <vector>

namespace ddtrack {

/// A point-scatterer target on a constant-velocity trajectory.
struct Target {
    Vec3 initial_pos = Vec3::Zero();   // m
    Vec3 velocity = Vec3::Zero();      // m/s (constant)
    double gain_db = 0.0;              // path-gain magnitude, stands in for RCS
    // When set, the effective gain for window k is drawn uniformly from
    // [gain_db_min, gain_db_max] with a seed derived from (scene seed, k, label).
    std::optional<double> gain_db_min;
    std::optional<double> gain_db_max;
    int label = 0;                     // class id, unique and contiguous from 0
};

/// Bistatic geometry: static Tx and Rx plus moving point-scatterer targets.
struct Scene {
    Vec3 tx_pos = Vec3::Zero();
    Vec3 rx_pos = Vec3::Zero();
    std::vector<Target> targets;
    double carrier_freq_hz = 5e9;
    double noise_power = 0.0;          // linear W; 0 disables noise injection
    bool include_los_path = false;     // optional static Tx->Rx path (nu = 0)
    double los_gain_db = 0.0;
    std::uint64_t rng_seed = 0;

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;

    int n_targets() const { return static_cast<int>(targets.size()); }
};

/// Per-target delay/Doppler truth at one instant.
struct DelayDoppler {
    double tau_s = 0.0;
    double nu_hz = 0.0;
};

/// Position of target c at time t (constant-velocity kinematics).
Vec3 target_position(const Scene& scene, int c, double t_s);

/// Bistatic ground truth: tau = two-leg path length over c0,
/// nu = -(f_c/c0) * (v.u_tx + v.u_rx) with u pointing from Tx/Rx toward the target.
/// Approaching targets produce positive Doppler.
DelayDoppler ground_truth(const Scene& scene, int c, double t_s);

/// Effective path gain (dB) of target c in window k; resolves the optional
/// per-window uniform draw.
double target_gain_db(const Scene& scene, int c, int window_index);

/// Ranges for randomized scene generation (desk-scale experiments).
struct SceneGenParams {
    Vec3 region_min = Vec3(-150, -150, 0);
    Vec3 region_max = Vec3(150, 150, 0);
    double tx_rx_min_separation_m = 80.0;
    double speed_min_kmh = 10.0;
    double speed_max_kmh = 15.0;
    std::vector<double> target_gains_db;  // one per target
    double gain_jitter_db = 0.0;          // > 0: per-window gain in [g - j, g + j]
    int n_targets = 3;
    double min_target_standoff_m = 20.0;  // from Tx and Rx
    double carrier_freq_hz = 5e9;
    double noise_power = 0.0;
    bool include_los_path = false;
    double los_gain_db = 0.0;
};

/// Draw a random scene; deterministic for a fixed seed. Targets move in the
/// horizontal plane with uniformly random headings.
Scene generate_scene(const SceneGenParams& params, std::uint64_t seed);

}  // namespace ddtrack
