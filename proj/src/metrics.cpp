#include "ddtrack/metrics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace ddtrack {

std::vector<std::optional<DelayDoppler>> estimate_from_labels(
    const DDGraph& graph, const std::vector<int>& predicted, int n_target) {
    if (predicted.size() != graph.nodes.size())
        throw std::invalid_argument("estimate_from_labels: one prediction per node required");
    if (n_target < 1) throw std::invalid_argument("estimate_from_labels: n_target must be >= 1");

    std::vector<double> wsum(static_cast<size_t>(n_target), 0.0);
    std::vector<DelayDoppler> acc(static_cast<size_t>(n_target), DelayDoppler{0.0, 0.0});
    for (size_t i = 0; i < predicted.size(); ++i) {
        const int c = predicted[i];
        if (c < 0 || c >= n_target) continue;  // background or unlabeled
        const Detection& d = graph.nodes[i].detection;
        acc[static_cast<size_t>(c)].tau_s += d.power * d.tau_s;
        acc[static_cast<size_t>(c)].nu_hz += d.power * d.nu_hz;
        wsum[static_cast<size_t>(c)] += d.power;
    }

    std::vector<std::optional<DelayDoppler>> out(static_cast<size_t>(n_target));
    for (int c = 0; c < n_target; ++c) {
        if (wsum[static_cast<size_t>(c)] > 0.0)
            out[static_cast<size_t>(c)] = DelayDoppler{acc[static_cast<size_t>(c)].tau_s /
                                                           wsum[static_cast<size_t>(c)],
                                                       acc[static_cast<size_t>(c)].nu_hz /
                                                           wsum[static_cast<size_t>(c)]};
    }
    return out;
}

StepErrors per_step_errors(const std::vector<MaskedEntry>& entries) {
    StepErrors e;
    for (const MaskedEntry& m : entries) {
        if (m.mask == 0) continue;
        e.tau.push_back(std::abs(m.tau_hat_s - m.tau_gt_s));
        e.nu.push_back(std::abs(m.nu_hat_hz - m.nu_gt_hz));
    }
    return e;
}

double rmse(const std::vector<double>& errors) {
    if (errors.empty()) throw std::invalid_argument("rmse: no valid samples");
    double acc = 0.0;
    for (double e : errors) acc += e * e;
    return std::sqrt(acc / static_cast<double>(errors.size()));
}

std::vector<TargetRmse> rmse_per_target(const std::vector<MaskedEntry>& entries,
                                        double delay_res_s, double doppler_res_hz) {
    if (!(delay_res_s > 0) || !(doppler_res_hz > 0))
        throw std::invalid_argument("rmse_per_target: resolutions must be > 0");
    std::map<int, std::vector<MaskedEntry>> by_target;
    for (const MaskedEntry& m : entries) by_target[m.target].push_back(m);

    std::vector<TargetRmse> out;
    for (const auto& [target, list] : by_target) {
        const StepErrors e = per_step_errors(list);
        TargetRmse r;
        r.target = target;
        r.n_valid = static_cast<int>(e.tau.size());
        if (r.n_valid > 0) {
            r.tau_s = rmse(e.tau);
            r.nu_hz = rmse(e.nu);
            r.tau_bins = r.tau_s / delay_res_s;
            r.nu_bins = r.nu_hz / doppler_res_hz;
        }
        out.push_back(r);
    }
    return out;
}

NmseResult nmse(const std::vector<MaskedEntry>& entries) {
    double num_tau = 0.0, den_tau = 0.0, num_nu = 0.0, den_nu = 0.0;
    for (const MaskedEntry& m : entries) {
        if (m.mask == 0) continue;
        num_tau += (m.tau_hat_s - m.tau_gt_s) * (m.tau_hat_s - m.tau_gt_s);
        den_tau += m.tau_gt_s * m.tau_gt_s;
        num_nu += (m.nu_hat_hz - m.nu_gt_hz) * (m.nu_hat_hz - m.nu_gt_hz);
        den_nu += m.nu_gt_hz * m.nu_gt_hz;
    }
    if (!(den_tau > 0) || !(den_nu > 0))
        throw std::invalid_argument("nmse: ground-truth energy is zero under the mask");
    return {num_tau / den_tau, num_nu / den_nu};
}

}  // namespace ddtrack
