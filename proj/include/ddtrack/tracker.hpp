#pragma once

#include "ddtrack/cfar.hpp"
#include "ddtrack/scene.hpp"

#include <Eigen/Dense>
#include <vector>

namespace ddtrack {

struct DbscanParams {
    double eps = 3.0;   // Chebyshev distance in bins
    int min_pts = 2;    // neighbor count including the point itself
    void validate() const;
};

struct DbscanResult {
    std::vector<std::vector<int>> clusters;  // member indices into the input list
    std::vector<int> noise;
};

/// Density clustering over (delay_bin, doppler_bin) with Chebyshev bin
/// distance. The input is processed in canonical (delay, doppler) order, so
/// the partition does not depend on input ordering.
DbscanResult dbscan(const std::vector<Detection>& detections, const DbscanParams& params);

struct Measurement {
    double tau_s = 0.0;
    double nu_hz = 0.0;
    double power = 0.0;  // summed linear power of the cluster
};

/// Power-weighted mean of member (tau, nu); weights are linear powers.
Measurement cluster_centroid(const std::vector<Detection>& detections,
                             const std::vector<int>& members);

struct KfModel {
    Eigen::Matrix2d f;  // transition; couples delay rate to Doppler
    Eigen::Matrix2d q;  // process noise
    Eigen::Matrix2d r;  // measurement noise (H = I)

    /// F = [[1, -dt/f_c], [0, 1]]; R = per-axis quantization variance
    /// (bin/sqrt(12))^2; Q = (q_bins * bin)^2 per axis.
    static KfModel from_system(double window_interval_s, double carrier_freq_hz,
                               double delay_res_s, double doppler_res_hz, double q_bins = 0.1);
};

struct KfState {
    Eigen::Vector2d x;  // [tau_s, nu_hz]
    Eigen::Matrix2d p;
    int id = 0;
    int misses = 0;
    bool alive = true;
};

void kf_predict(KfState& state, const KfModel& model);
void kf_update(KfState& state, const KfModel& model, const Eigen::Vector2d& measurement);

/// chi^2 two-dof 0.99 quantile, the association gate on squared Mahalanobis
/// distance.
inline constexpr double kChi2Gate99 = 9.21034;

struct Association {
    std::vector<int> track_to_meas;  // -1 when unassigned
    std::vector<int> unassigned_tracks;
    std::vector<int> unassigned_meas;
};

/// Global nearest neighbor: minimum-total-cost one-to-one assignment under
/// squared Mahalanobis distance with per-track innovation covariance P + R;
/// pairs beyond the gate stay unassigned.
Association gnn_associate(const std::vector<KfState>& tracks, const KfModel& model,
                          const std::vector<Measurement>& measurements,
                          double gate = kChi2Gate99);

/// Minimum-cost assignment of each row to a distinct column (rows <= cols).
/// Returns per-row column indices.
std::vector<int> solve_assignment(const MatX& cost);

struct BaselineParams {
    DbscanParams dbscan;
    double gate = kChi2Gate99;
    double q_bins = 0.1;
    int max_misses = 10;
    void validate() const;
};

struct TrackPoint {
    int target = 0;
    int window = 0;
    double tau_hat_s = 0.0;
    double nu_hat_hz = 0.0;
    bool available = false;
};

struct TrackRecord {
    std::vector<TrackPoint> points;  // ordered by (window, target)
};

/// Classical pipeline over a detection sequence: one track per target,
/// initialized from ground truth at window 0; thereafter predict, cluster,
/// associate, update per window. A missed association emits the prediction
/// (still available); a track dies after max_misses consecutive misses and
/// emits unavailable points from the following window on.
TrackRecord run_baseline(const std::vector<std::vector<Detection>>& detections_per_window,
                         const std::vector<DelayDoppler>& initial_truth, const KfModel& model,
                         const BaselineParams& params);

}  // namespace ddtrack
