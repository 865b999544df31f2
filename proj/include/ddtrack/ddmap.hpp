#pragma once

#include "ddtrack/channel.hpp"

namespace ddtrack {

inline constexpr double kPowerFloorDb = -300.0;

/// Delay-Doppler map of one window. The Doppler axis is circularly shifted so
/// that 0 Hz sits at bin N_nu/2; the delay axis starts at 0.
struct DDMap {
    MatX power_db;          // N_FFT x N_nu, 20*log10|.| floored at kPowerFloorDb
    MatXc complex_map;      // pre-magnitude values
    std::vector<double> delay_axis_s;    // per delay bin l
    std::vector<double> doppler_axis_hz; // per (centered) Doppler bin p
    int window_index = 0;

    int n_delay() const { return static_cast<int>(complex_map.rows()); }
    int n_doppler() const { return static_cast<int>(complex_map.cols()); }
    double linear_power(int l, int p) const { return std::norm(complex_map(l, p)); }
};

/// IDFT over the frequency axis (1/N_FFT-normalised), unnormalised DFT over
/// the time axis, then an fftshift along Doppler.
DDMap delay_doppler_map(const CfrWindow& cfr, const OfdmParams& params);

/// Rebuild the derived fields (power, axes) around an already-shifted complex
/// map, e.g. one loaded from a cached artifact.
DDMap ddmap_from_complex(MatXc centered_map, int window_index, const OfdmParams& params);

}  // namespace ddtrack
