#include "ddtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ddtrack {

namespace {

constexpr double kBigCost = 1e15;

int chebyshev(const Detection& a, const Detection& b) {
    return std::max(std::abs(a.delay_bin - b.delay_bin), std::abs(a.doppler_bin - b.doppler_bin));
}

/// Symmetrize, then add diagonal jitter until a Cholesky factorization
/// succeeds.
void make_spd(Eigen::Matrix2d& p) {
    p = 0.5 * (p + p.transpose());
    double jitter = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::LLT<Eigen::Matrix2d> llt(p + jitter * Eigen::Matrix2d::Identity());
        if (llt.info() == Eigen::Success) {
            if (jitter > 0.0) p += jitter * Eigen::Matrix2d::Identity();
            return;
        }
        const double scale = std::max(p.diagonal().cwiseAbs().maxCoeff(), 1e-300);
        jitter = jitter == 0.0 ? 1e-12 * scale : jitter * 100.0;
    }
    throw std::runtime_error("kalman: covariance could not be repaired to SPD");
}

}  // namespace

void DbscanParams::validate() const {
    if (!(eps > 0)) throw std::invalid_argument("dbscan: eps must be > 0");
    if (min_pts < 1) throw std::invalid_argument("dbscan: min_pts must be >= 1");
}

DbscanResult dbscan(const std::vector<Detection>& detections, const DbscanParams& params) {
    params.validate();
    const int n = static_cast<int>(detections.size());

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const Detection& da = detections[static_cast<size_t>(a)];
        const Detection& db = detections[static_cast<size_t>(b)];
        if (da.delay_bin != db.delay_bin) return da.delay_bin < db.delay_bin;
        return da.doppler_bin < db.doppler_bin;
    });

    const auto neighbors_of = [&](int i) {
        std::vector<int> nb;
        for (int j : order)
            if (chebyshev(detections[static_cast<size_t>(i)], detections[static_cast<size_t>(j)]) <=
                params.eps)
                nb.push_back(j);  // includes i itself
        return nb;
    };

    constexpr int kUnvisited = -2, kNoise = -1;
    std::vector<int> assignment(static_cast<size_t>(n), kUnvisited);
    DbscanResult result;

    for (int seed : order) {
        if (assignment[static_cast<size_t>(seed)] != kUnvisited) continue;
        std::vector<int> nb = neighbors_of(seed);
        if (static_cast<int>(nb.size()) < params.min_pts) {
            assignment[static_cast<size_t>(seed)] = kNoise;
            continue;
        }
        const int cluster_id = static_cast<int>(result.clusters.size());
        result.clusters.emplace_back();
        assignment[static_cast<size_t>(seed)] = cluster_id;
        std::deque<int> frontier(nb.begin(), nb.end());
        while (!frontier.empty()) {
            const int q = frontier.front();
            frontier.pop_front();
            int& mark = assignment[static_cast<size_t>(q)];
            if (mark == kNoise) mark = cluster_id;  // border point claimed
            if (mark != kUnvisited) continue;
            mark = cluster_id;
            std::vector<int> qn = neighbors_of(q);
            if (static_cast<int>(qn.size()) >= params.min_pts)
                frontier.insert(frontier.end(), qn.begin(), qn.end());
        }
    }

    for (int i : order) {
        const int mark = assignment[static_cast<size_t>(i)];
        if (mark >= 0)
            result.clusters[static_cast<size_t>(mark)].push_back(i);
        else
            result.noise.push_back(i);
    }
    return result;
}

Measurement cluster_centroid(const std::vector<Detection>& detections,
                             const std::vector<int>& members) {
    if (members.empty()) throw std::invalid_argument("cluster_centroid: empty cluster");
    Measurement m;
    double wsum = 0.0;
    for (int i : members) {
        const Detection& d = detections.at(static_cast<size_t>(i));
        const double w = d.power;
        m.tau_s += w * d.tau_s;
        m.nu_hz += w * d.nu_hz;
        wsum += w;
    }
    if (!(wsum > 0)) throw std::invalid_argument("cluster_centroid: nonpositive total power");
    m.tau_s /= wsum;
    m.nu_hz /= wsum;
    m.power = wsum;
    return m;
}

KfModel KfModel::from_system(double window_interval_s, double carrier_freq_hz,
                             double delay_res_s, double doppler_res_hz, double q_bins) {
    if (!(window_interval_s > 0) || !(carrier_freq_hz > 0) || !(delay_res_s > 0) ||
        !(doppler_res_hz > 0) || !(q_bins >= 0))
        throw std::invalid_argument("kalman model: parameters must be positive");
    KfModel m;
    m.f << 1.0, -window_interval_s / carrier_freq_hz, 0.0, 1.0;
    const double var_tau = delay_res_s * delay_res_s / 12.0;
    const double var_nu = doppler_res_hz * doppler_res_hz / 12.0;
    m.r << var_tau, 0.0, 0.0, var_nu;
    const double q_tau = q_bins * delay_res_s, q_nu = q_bins * doppler_res_hz;
    m.q << q_tau * q_tau, 0.0, 0.0, q_nu * q_nu;
    return m;
}

void kf_predict(KfState& state, const KfModel& model) {
    state.x = model.f * state.x;
    state.p = model.f * state.p * model.f.transpose() + model.q;
    make_spd(state.p);
}

void kf_update(KfState& state, const KfModel& model, const Eigen::Vector2d& measurement) {
    const Eigen::Matrix2d s = state.p + model.r;  // H = I
    const Eigen::Matrix2d k = state.p * s.inverse();
    state.x += k * (measurement - state.x);
    const Eigen::Matrix2d ikh = Eigen::Matrix2d::Identity() - k;
    state.p = ikh * state.p * ikh.transpose() + k * model.r * k.transpose();
    make_spd(state.p);
}

std::vector<int> solve_assignment(const MatX& cost) {
    const int n = static_cast<int>(cost.rows());
    const int m = static_cast<int>(cost.cols());
    if (n > m) throw std::invalid_argument("solve_assignment: needs rows <= cols");
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // Shortest-augmenting-path assignment with potentials (1-indexed).
    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(m) + 1, 0.0);
    std::vector<int> match(static_cast<size_t>(m) + 1, 0), way(static_cast<size_t>(m) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(m) + 1, kInf);
        std::vector<char> used(static_cast<size_t>(m) + 1, 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            const int i0 = match[static_cast<size_t>(j0)];
            double delta = kInf;
            int j1 = -1;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] -
                                   v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(static_cast<size_t>(n), -1);
    for (int j = 1; j <= m; ++j)
        if (match[static_cast<size_t>(j)] > 0)
            row_to_col[static_cast<size_t>(match[static_cast<size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

Association gnn_associate(const std::vector<KfState>& tracks, const KfModel& model,
                          const std::vector<Measurement>& measurements, double gate) {
    const int k = static_cast<int>(tracks.size());
    const int m = static_cast<int>(measurements.size());
    Association out;
    out.track_to_meas.assign(static_cast<size_t>(k), -1);
    if (k == 0) {
        for (int j = 0; j < m; ++j) out.unassigned_meas.push_back(j);
        return out;
    }

    // k x (m + k): real pairings gated on squared Mahalanobis distance, plus
    // one diagonal dummy column per track priced at the gate.
    MatX cost = MatX::Constant(k, m + k, kBigCost);
    for (int i = 0; i < k; ++i) {
        const Eigen::Matrix2d s = tracks[static_cast<size_t>(i)].p + model.r;
        const Eigen::Matrix2d s_inv = s.inverse();
        for (int j = 0; j < m; ++j) {
            const Eigen::Vector2d y =
                Eigen::Vector2d(measurements[static_cast<size_t>(j)].tau_s,
                                measurements[static_cast<size_t>(j)].nu_hz) -
                tracks[static_cast<size_t>(i)].x;
            const double d2 = y.dot(s_inv * y);
            if (d2 <= gate) cost(i, j) = d2;
        }
        cost(i, m + i) = gate;
    }

    const std::vector<int> row_to_col = solve_assignment(cost);
    std::vector<char> meas_taken(static_cast<size_t>(m), 0);
    for (int i = 0; i < k; ++i) {
        const int j = row_to_col[static_cast<size_t>(i)];
        if (j < m && cost(i, j) < kBigCost) {
            out.track_to_meas[static_cast<size_t>(i)] = j;
            meas_taken[static_cast<size_t>(j)] = 1;
        } else {
            out.unassigned_tracks.push_back(i);
        }
    }
    for (int j = 0; j < m; ++j)
        if (!meas_taken[static_cast<size_t>(j)]) out.unassigned_meas.push_back(j);
    return out;
}

void BaselineParams::validate() const {
    dbscan.validate();
    if (!(gate > 0)) throw std::invalid_argument("baseline: gate must be > 0");
    if (!(q_bins >= 0)) throw std::invalid_argument("baseline: q_bins must be >= 0");
    if (max_misses < 1) throw std::invalid_argument("baseline: max_misses must be >= 1");
}

TrackRecord run_baseline(const std::vector<std::vector<Detection>>& detections_per_window,
                         const std::vector<DelayDoppler>& initial_truth, const KfModel& model,
                         const BaselineParams& params) {
    params.validate();
    if (detections_per_window.empty())
        throw std::invalid_argument("run_baseline: need at least one window");
    if (initial_truth.empty())
        throw std::invalid_argument("run_baseline: need at least one target");

    const int n_target = static_cast<int>(initial_truth.size());
    std::vector<KfState> tracks(static_cast<size_t>(n_target));
    for (int t = 0; t < n_target; ++t) {
        KfState& s = tracks[static_cast<size_t>(t)];
        s.x << initial_truth[static_cast<size_t>(t)].tau_s,
            initial_truth[static_cast<size_t>(t)].nu_hz;
        s.p = model.r;
        s.id = t;
    }

    TrackRecord record;
    const auto emit = [&](int window) {
        for (const KfState& s : tracks)
            record.points.push_back(
                {s.id, window, s.alive ? s.x(0) : 0.0, s.alive ? s.x(1) : 0.0, s.alive});
    };

    emit(0);  // ground-truth initialization occupies window 0

    for (size_t k = 1; k < detections_per_window.size(); ++k) {
        std::vector<KfState*> alive;
        for (KfState& s : tracks)
            if (s.alive) {
                kf_predict(s, model);
                alive.push_back(&s);
            }

        std::vector<Measurement> meas;
        const std::vector<Detection>& dets = detections_per_window[k];
        if (!dets.empty()) {
            const DbscanResult clusters = dbscan(dets, params.dbscan);
            meas.reserve(clusters.clusters.size());
            for (const auto& members : clusters.clusters)
                meas.push_back(cluster_centroid(dets, members));
        }

        std::vector<KfState> alive_copy;
        alive_copy.reserve(alive.size());
        for (KfState* s : alive) alive_copy.push_back(*s);
        const Association assoc = gnn_associate(alive_copy, model, meas, params.gate);

        std::vector<KfState*> dying;
        for (size_t i = 0; i < alive.size(); ++i) {
            KfState& s = *alive[i];
            const int j = assoc.track_to_meas[i];
            if (j >= 0) {
                kf_update(s, model,
                          Eigen::Vector2d(meas[static_cast<size_t>(j)].tau_s,
                                          meas[static_cast<size_t>(j)].nu_hz));
                s.misses = 0;
            } else if (++s.misses >= params.max_misses) {
                dying.push_back(&s);  // this window still emits the prediction
            }
        }
        emit(static_cast<int>(k));
        for (KfState* s : dying) s->alive = false;
    }
    return record;
}

}  // namespace ddtrack
