#include "ddtrack/channel.hpp"

#include <cmath>

namespace ddtrack {

void OfdmParams::validate() const {
    if (subcarrier_spacing_hz <= 0.0)
        throw std::invalid_argument("ofdm: subcarrier spacing must be positive");
    if (n_subcarriers < 1 || symbols_per_window < 1 || window_gap < 1 || n_windows < 1)
        throw std::invalid_argument("ofdm: N_FFT, N_sym^win, P and K must all be >= 1");
    if (symbol_duration_s < 0.0)
        throw std::invalid_argument("ofdm: symbol duration must be positive (or 0 for 1/df)");
}

void PathSet::validate() const {
    for (const auto& p : paths) {
        if (p.tau_s < 0.0 || !std::isfinite(p.tau_s) || !std::isfinite(p.nu_hz) ||
            !std::isfinite(p.gain.real()) || !std::isfinite(p.gain.imag()))
            throw std::invalid_argument("pathset: delays must be non-negative and all parameters finite");
    }
}

std::vector<long> window_indices(const OfdmParams& params, int k) {
    if (k < 0 || k >= params.n_windows)
        throw std::out_of_range("window_indices: window index out of range");
    std::vector<long> idx(params.symbols_per_window);
    const long base = static_cast<long>(k) * params.window_gap;
    for (int m = 0; m < params.symbols_per_window; ++m) idx[m] = base + m;
    return idx;
}

PathSet paths_for_window(const Scene& scene, const OfdmParams& params, int k) {
    if (k < 0 || k >= params.n_windows)
        throw std::out_of_range("paths_for_window: window index out of range");
    const double t0 = params.window_start_time(k);
    PathSet set;
    for (int c = 0; c < scene.n_targets(); ++c) {
        const DelayDoppler dd = ground_truth(scene, c, t0);
        const double mag = std::pow(10.0, target_gain_db(scene, c, k) / 20.0);
        const double phase = -2.0 * M_PI * scene.carrier_freq_hz * dd.tau_s;
        set.paths.push_back({std::polar(mag, std::remainder(phase, 2.0 * M_PI)), dd.tau_s, dd.nu_hz});
    }
    if (scene.include_los_path) {
        const double tau_los = (scene.tx_pos - scene.rx_pos).norm() / kSpeedOfLight;
        const double mag = std::pow(10.0, scene.los_gain_db / 20.0);
        const double phase = -2.0 * M_PI * scene.carrier_freq_hz * tau_los;
        set.paths.push_back({std::polar(mag, std::remainder(phase, 2.0 * M_PI)), tau_los, 0.0});
    }
    return set;
}

CfrWindow evaluate_cfr(const PathSet& paths, const OfdmParams& params, int k) {
    if (k < 0 || k >= params.n_windows)
        throw std::out_of_range("evaluate_cfr: window index out of range");
    paths.validate();
    const int n_sc = params.n_subcarriers;
    const int n_sym = params.symbols_per_window;
    const double df = params.subcarrier_spacing_hz;
    const double t_sym = params.symbol_duration();
    const long base = static_cast<long>(k) * params.window_gap;

    CfrWindow out;
    out.H = MatXc::Zero(n_sc, n_sym);
    out.window_index = k;
    out.start_symbol = base;

    for (const Path& p : paths.paths) {
        // Per-path phase over the grid is separable: a frequency ramp across
        // subcarriers times a time ramp across symbols. Both are advanced with
        // phase rotators; the column phasor is re-anchored per column from the
        // exact exponential so rotator drift stays at the 1e-13 level.
        const cplx step_f = std::exp(cplx(0.0, -2.0 * M_PI * df * p.tau_s));
        for (int m = 0; m < n_sym; ++m) {
            const double t_m = static_cast<double>(base + m) * t_sym;
            const cplx col = p.gain * std::exp(cplx(0.0, 2.0 * M_PI * std::remainder(p.nu_hz * t_m, 1.0)));
            cplx ramp(1.0, 0.0);
            cplx* colptr = out.H.col(m).data();
            for (int n = 0; n < n_sc; ++n) {
                colptr[n] += col * ramp;
                ramp *= step_f;
            }
        }
    }
    return out;
}

CfrWindow synthesize_cfr(const Scene& scene, const OfdmParams& params, int k) {
    CfrWindow out = evaluate_cfr(paths_for_window(scene, params, k), params, k);
    if (scene.noise_power > 0.0) {
        Rng rng(mix_seed(scene.rng_seed, 0x63667277ULL /*"cfrw"*/, static_cast<std::uint64_t>(k)));
        for (int m = 0; m < out.H.cols(); ++m)
            for (int n = 0; n < out.H.rows(); ++n)
                out.H(n, m) += rng.cnormal(scene.noise_power);
    }
    return out;
}

}  // namespace ddtrack
