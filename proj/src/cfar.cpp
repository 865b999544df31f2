#include "ddtrack/cfar.hpp"

#include <algorithm>
#include <cmath>

namespace ddtrack {

void OsCfarParams::validate() const {
    if (guard_delay < 0 || guard_doppler < 0 || train_delay < 1 || train_doppler < 1)
        throw std::invalid_argument("cfar: guard extents must be >= 0 and train extents >= 1");
    if (rank_fraction <= 0.0 || rank_fraction > 1.0)
        throw std::invalid_argument("cfar: rank fraction must lie in (0, 1]");
    if (n_train() < 1) throw std::invalid_argument("cfar: training window empty");
    const int k = rank();
    if (k < 1 || k > n_train()) throw std::invalid_argument("cfar: rank outside [1, N_train]");
    if (scale.has_value() == target_pfa.has_value())
        throw std::invalid_argument("cfar: exactly one of scale / target_pfa must be set");
    if (scale && *scale <= 0.0) throw std::invalid_argument("cfar: scale must be positive");
    if (target_pfa && (*target_pfa <= 0.0 || *target_pfa >= 1.0))
        throw std::invalid_argument("cfar: target_pfa must lie in (0, 1)");
    if (zero_doppler_mask_halfwidth < 0)
        throw std::invalid_argument("cfar: zero-Doppler mask halfwidth must be >= 0");
}

int OsCfarParams::rank() const {
    return static_cast<int>(std::lround(rank_fraction * n_train()));
}

double OsCfarParams::resolve_scale() const {
    return scale ? *scale : alpha_from_pfa(n_train(), rank(), *target_pfa);
}

namespace {
// log P_fa(alpha) = sum_{i=0}^{k-1} log((N-i)/(N-i+alpha)); strictly decreasing in alpha.
double log_pfa(int n_train, int k_os, double alpha) {
    double acc = 0.0;
    for (int i = 0; i < k_os; ++i) {
        const double ni = static_cast<double>(n_train - i);
        acc += std::log(ni) - std::log(ni + alpha);
    }
    return acc;
}
}  // namespace

double alpha_from_pfa(int n_train, int k_os, double pfa) {
    if (k_os < 1 || k_os > n_train)
        throw std::invalid_argument("alpha_from_pfa: rank outside [1, n_train]");
    if (pfa <= 0.0 || pfa >= 1.0)
        throw std::invalid_argument("alpha_from_pfa: pfa must lie in (0, 1)");
    const double target = std::log(pfa);
    double lo = 0.0, hi = 1.0;
    while (log_pfa(n_train, k_os, hi) > target) {
        hi *= 2.0;
        if (hi > 1e18) throw std::runtime_error("alpha_from_pfa: no root in bracket");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (log_pfa(n_train, k_os, mid) > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<Detection> os_cfar_2d(const DDMap& map, const OsCfarParams& params) {
    params.validate();
    const int n_l = map.n_delay();
    const int n_p = map.n_doppler();
    const int ext_l = params.guard_delay + params.train_delay;
    const int ext_p = params.guard_doppler + params.train_doppler;
    if (n_l <= 2 * ext_l + 1 || n_p <= 2 * ext_p + 1)
        throw std::invalid_argument("os_cfar_2d: map smaller than CFAR window in at least one axis");

    const int k_os = params.rank();
    const double alpha = params.resolve_scale();
    const int zero_bin = n_p / 2;  // Doppler axis is centered

    // Linear powers once, row-major in (l, p).
    std::vector<double> pow_lin(static_cast<size_t>(n_l) * n_p);
    for (int l = 0; l < n_l; ++l)
        for (int p = 0; p < n_p; ++p) pow_lin[static_cast<size_t>(l) * n_p + p] = map.linear_power(l, p);

    std::vector<double> ring;
    ring.reserve(params.n_train());
    std::vector<Detection> detections;

    for (int l = 0; l < n_l; ++l) {
        for (int p = 0; p < n_p; ++p) {
            if (std::abs(p - zero_bin) <= params.zero_doppler_mask_halfwidth) continue;
            ring.clear();
            for (int dl = -ext_l; dl <= ext_l; ++dl) {
                const bool guard_l = std::abs(dl) <= params.guard_delay;
                const int ll = (l + dl + n_l) % n_l;  // |dl| < n_l guaranteed above
                const size_t row = static_cast<size_t>(ll) * n_p;
                for (int dp = -ext_p; dp <= ext_p; ++dp) {
                    if (guard_l && std::abs(dp) <= params.guard_doppler) continue;
                    const int pp = (p + dp + n_p) % n_p;
                    ring.push_back(pow_lin[row + pp]);
                }
            }
            std::nth_element(ring.begin(), ring.begin() + (k_os - 1), ring.end());
            const double noise = ring[k_os - 1];
            const double cut = pow_lin[static_cast<size_t>(l) * n_p + p];
            if (cut > alpha * noise) {
                Detection d;
                d.delay_bin = l;
                d.doppler_bin = p;
                d.tau_s = map.delay_axis_s[l];
                d.nu_hz = map.doppler_axis_hz[p];
                d.power = cut;
                detections.push_back(d);
            }
        }
    }
    return detections;  // (l, p) order by construction
}

}  // namespace ddtrack
