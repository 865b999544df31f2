#pragma once

#include "ddtrack/ddmap.hpp"

#include <optional>
#include <vector>

namespace ddtrack {

/// 2-D ordered-statistics CFAR configuration. Guard/train values are extents
/// in bins on each side of the cell under test; training cells form the
/// rectangular ring between the guard box and the train box, with toroidal
/// wrap at map edges.
struct OsCfarParams {
    int guard_delay = 2;
    int guard_doppler = 2;
    int train_delay = 8;
    int train_doppler = 8;
    double rank_fraction = 0.75;           // k_os = round(rank_fraction * N_train)
    std::optional<double> scale;           // alpha_os; exclusive with target_pfa
    std::optional<double> target_pfa;      // alpha_os derived via alpha_from_pfa
    int zero_doppler_mask_halfwidth = 2;   // cells this close to 0 Hz are never CUTs

    void validate() const;
    int n_train() const {
        return (2 * (guard_delay + train_delay) + 1) * (2 * (guard_doppler + train_doppler) + 1) -
               (2 * guard_delay + 1) * (2 * guard_doppler + 1);
    }
    int rank() const;
    /// Resolved threshold multiplier.
    double resolve_scale() const;
};

/// One detected delay-Doppler bin.
struct Detection {
    int delay_bin = 0;    // l
    int doppler_bin = 0;  // p, centered axis
    double tau_s = 0.0;
    double nu_hz = 0.0;
    double power = 0.0;   // linear
};

/// Solve P_fa = prod_{i=0}^{k-1} (N-i)/(N-i+alpha) for alpha by bisection.
/// Exact for i.i.d. exponentially distributed training cells.
double alpha_from_pfa(int n_train, int k_os, double pfa);

/// Ordered-statistics CFAR over the full map. The noise level for each cell
/// under test is the k_os-th smallest linear power in its training ring;
/// detection iff CUT > alpha_os * Z. Output is sorted by (l, p).
std::vector<Detection> os_cfar_2d(const DDMap& map, const OsCfarParams& params);

}  // namespace ddtrack
