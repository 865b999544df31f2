#pragma once

#include "ddtrack/common.hpp"
#include "ddtrack/scene.hpp"

#include <vector>

namespace ddtrack {

/// OFDM grid and observation-window parameters.
struct OfdmParams {
    double subcarrier_spacing_hz = 15e3;
    int n_subcarriers = 1024;        // N_FFT
    int symbols_per_window = 1400;   // N_sym^win
    int window_gap = 1400;           // P, in OFDM symbols
    int n_windows = 160;             // K
    double symbol_duration_s = 0.0;  // 0 -> defaults to 1/subcarrier_spacing (no CP)

    void validate() const;

    double symbol_duration() const {
        return symbol_duration_s > 0.0 ? symbol_duration_s : 1.0 / subcarrier_spacing_hz;
    }
    /// Delay resolution 1/(N_FFT * df).
    double delay_resolution() const { return 1.0 / (n_subcarriers * subcarrier_spacing_hz); }
    /// Doppler resolution 1/(N_sym^win * T_sym).
    double doppler_resolution() const { return 1.0 / (symbols_per_window * symbol_duration()); }
    /// Start time of window k in seconds.
    double window_start_time(int k) const { return static_cast<double>(k) * window_gap * symbol_duration(); }
    double window_interval() const { return window_gap * symbol_duration(); }
};

struct Path {
    cplx gain;       // alpha_l, complex linear
    double tau_s;    // >= 0
    double nu_hz;
};

struct PathSet {
    std::vector<Path> paths;
    void validate() const;
};

/// Channel frequency response over one observation window:
/// H(n, m), n = subcarrier, m = symbol within the window.
struct CfrWindow {
    MatXc H;           // n_subcarriers x symbols_per_window
    int window_index = 0;
    long start_symbol = 0;  // kP
};

/// Symbol indices of window k: {kP, ..., kP + N_sym^win - 1}.
std::vector<long> window_indices(const OfdmParams& params, int k);

/// Per-window path parameters from scene geometry, frozen at the window start.
/// Path gain magnitude comes from the target's (possibly per-window) gain_db;
/// its phase is the carrier phase -2*pi*f_c*tau of the frozen delay.
PathSet paths_for_window(const Scene& scene, const OfdmParams& params, int k);

/// Evaluate H[n,m] = sum_l alpha_l exp(-j2pi f_n tau_l) exp(+j2pi nu_l t_m)
/// on the window grid, f_n = n*df, t_m = (kP+m)*T_sym. No noise.
CfrWindow evaluate_cfr(const PathSet& paths, const OfdmParams& params, int k);

/// Full synthesis for window k: geometry-derived paths, plus complex white
/// Gaussian noise of scene.noise_power when enabled. Deterministic given
/// (scene.rng_seed, k).
CfrWindow synthesize_cfr(const Scene& scene, const OfdmParams& params, int k);

}  // namespace ddtrack
