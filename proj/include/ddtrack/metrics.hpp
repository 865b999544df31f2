#pragma once

#include "ddtrack/graph.hpp"
#include "ddtrack/scene.hpp"

#include <optional>
#include <vector>

namespace ddtrack {

/// One (scene, target, window) sample of an estimator against ground truth.
/// mask = 0 marks steps where the estimator produced nothing; estimate fields
/// are ignored there.
struct MaskedEntry {
    int scene = 0;
    int target = 0;
    int window = 0;
    double tau_hat_s = 0.0;
    double nu_hat_hz = 0.0;
    double tau_gt_s = 0.0;
    double nu_gt_hz = 0.0;
    int mask = 1;
};

/// Per-target (tau, nu) estimates for one window from node-level class
/// predictions: power-weighted centroid (linear power) over the nodes
/// predicted as each target class; a class with no nodes yields nullopt.
/// Classes >= n_target (background) are ignored.
std::vector<std::optional<DelayDoppler>> estimate_from_labels(
    const DDGraph& graph, const std::vector<int>& predicted, int n_target);

/// Absolute per-step errors over mask-valid entries, in entry order.
struct StepErrors {
    std::vector<double> tau;  // |tau_hat - tau_gt|, seconds
    std::vector<double> nu;   // |nu_hat - nu_gt|, Hz
};
StepErrors per_step_errors(const std::vector<MaskedEntry>& entries);

/// sqrt(mean(e^2)); throws when no valid samples exist.
double rmse(const std::vector<double>& errors);

struct TargetRmse {
    int target = 0;
    double tau_s = 0.0;
    double nu_hz = 0.0;
    double tau_bins = 0.0;
    double nu_bins = 0.0;
    int n_valid = 0;
};

/// RMSE grouped by target, in physical units and in bins.
std::vector<TargetRmse> rmse_per_target(const std::vector<MaskedEntry>& entries,
                                        double delay_res_s, double doppler_res_hz);

struct NmseResult {
    double tau = 0.0;
    double nu = 0.0;
};

/// Masked normalized mean square error per axis:
/// sum m (x_hat - x)^2 / sum m x^2 over all entries.
NmseResult nmse(const std::vector<MaskedEntry>& entries);

}  // namespace ddtrack
