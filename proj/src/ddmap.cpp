#include "ddtrack/ddmap.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace ddtrack {

namespace {
// FFTW plan creation is not thread-safe; execution via fftw_execute_dft is.
std::mutex g_plan_mutex;

struct PlanPair {
    fftw_plan idft_freq = nullptr;
    fftw_plan dft_time = nullptr;
    ~PlanPair() {
        std::lock_guard<std::mutex> lock(g_plan_mutex);
        if (idft_freq) fftw_destroy_plan(idft_freq);
        if (dft_time) fftw_destroy_plan(dft_time);
    }
};

PlanPair make_plans(fftw_complex* buf, int n_sc, int n_sym) {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    PlanPair p;
    // Column-major buffer: columns (length n_sc) are contiguous.
    int n0 = n_sc;
    p.idft_freq = fftw_plan_many_dft(1, &n0, n_sym, buf, nullptr, 1, n_sc, buf, nullptr, 1, n_sc,
                                     FFTW_BACKWARD, FFTW_ESTIMATE);
    int n1 = n_sym;
    p.dft_time = fftw_plan_many_dft(1, &n1, n_sc, buf, nullptr, n_sc, 1, buf, nullptr, n_sc, 1,
                                    FFTW_FORWARD, FFTW_ESTIMATE);
    if (!p.idft_freq || !p.dft_time) throw std::runtime_error("ddmap: FFTW plan creation failed");
    return p;
}
}  // namespace

DDMap delay_doppler_map(const CfrWindow& cfr, const OfdmParams& params) {
    const int n_sc = params.n_subcarriers;
    const int n_sym = params.symbols_per_window;
    if (cfr.H.rows() != n_sc || cfr.H.cols() != n_sym)
        throw std::invalid_argument("delay_doppler_map: CFR dimensions do not match OFDM parameters");

    MatXc work = cfr.H;  // column-major, columns contiguous
    auto* buf = reinterpret_cast<fftw_complex*>(work.data());
    PlanPair plans = make_plans(buf, n_sc, n_sym);

    fftw_execute_dft(plans.idft_freq, buf, buf);  // unnormalised; scale below
    work *= 1.0 / static_cast<double>(n_sc);
    fftw_execute_dft(plans.dft_time, buf, buf);

    MatXc centered(n_sc, n_sym);
    const int half = n_sym / 2;
    for (int p = 0; p < n_sym; ++p) {
        // centered bin p holds raw Doppler bin (p - N_nu/2) mod N_nu
        const int raw = ((p - half) % n_sym + n_sym) % n_sym;
        centered.col(p) = work.col(raw);
    }
    return ddmap_from_complex(std::move(centered), cfr.window_index, params);
}

DDMap ddmap_from_complex(MatXc centered_map, int window_index, const OfdmParams& params) {
    const int n_sc = static_cast<int>(centered_map.rows());
    const int n_sym = static_cast<int>(centered_map.cols());
    if (n_sc != params.n_subcarriers || n_sym != params.symbols_per_window)
        throw std::invalid_argument("ddmap_from_complex: dimensions do not match OFDM parameters");

    DDMap out;
    out.window_index = window_index;
    out.complex_map = std::move(centered_map);
    out.power_db.resize(n_sc, n_sym);
    for (int p = 0; p < n_sym; ++p)
        for (int l = 0; l < n_sc; ++l) {
            const double mag = std::abs(out.complex_map(l, p));
            out.power_db(l, p) = mag > 0.0 ? std::max(20.0 * std::log10(mag), kPowerFloorDb) : kPowerFloorDb;
        }

    const double dtau = params.delay_resolution();
    const double dnu = params.doppler_resolution();
    const int half = n_sym / 2;
    out.delay_axis_s.resize(n_sc);
    for (int l = 0; l < n_sc; ++l) out.delay_axis_s[l] = l * dtau;
    out.doppler_axis_hz.resize(n_sym);
    for (int p = 0; p < n_sym; ++p) out.doppler_axis_hz[p] = (p - half) * dnu;
    return out;
}

}  // namespace ddtrack
