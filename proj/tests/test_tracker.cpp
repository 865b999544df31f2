#include <doctest.h>

#include "ddtrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

using namespace ddtrack;

namespace {

Detection det(int l, int p, double tau = 0.0, double nu = 0.0, double power = 1.0) {
    Detection d;
    d.delay_bin = l;
    d.doppler_bin = p;
    d.tau_s = tau;
    d.nu_hz = nu;
    d.power = power;
    return d;
}

int cheb(const Detection& a, const Detection& b) {
    return std::max(std::abs(a.delay_bin - b.delay_bin), std::abs(a.doppler_bin - b.doppler_bin));
}

// order-free fingerprint of a clustering for comparing across input shuffles
std::set<std::set<std::pair<int, int>>> cluster_fingerprint(const std::vector<Detection>& dets,
                                                            const DbscanResult& res) {
    std::set<std::set<std::pair<int, int>>> out;
    for (const auto& cluster : res.clusters) {
        std::set<std::pair<int, int>> bins;
        for (int i : cluster) bins.emplace(dets[i].delay_bin, dets[i].doppler_bin);
        out.insert(std::move(bins));
    }
    return out;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

TEST_CASE("two far-apart blobs form two clusters") {
    std::vector<Detection> dets;
    for (int i = 0; i < 4; ++i) dets.push_back(det(10 + i, 20));
    for (int i = 0; i < 4; ++i) dets.push_back(det(60 + i, 70));
    DbscanParams params;
    params.eps = 3.0;
    params.min_pts = 3;
    const DbscanResult res = dbscan(dets, params);
    REQUIRE(res.clusters.size() == 2);
    CHECK(res.noise.empty());
    CHECK(res.clusters[0].size() == 4);
    CHECK(res.clusters[1].size() == 4);
    // members come out in canonical (delay, doppler) order
    CHECK(std::is_sorted(res.clusters[0].begin(), res.clusters[0].end(), [&](int a, int b) {
        return std::make_pair(dets[a].delay_bin, dets[a].doppler_bin) <
               std::make_pair(dets[b].delay_bin, dets[b].doppler_bin);
    }));
}

TEST_CASE("an isolated detection is noise") {
    DbscanParams params;  // eps 3, min_pts 2 with self counted
    const DbscanResult res = dbscan({det(5, 5)}, params);
    CHECK(res.clusters.empty());
    REQUIRE(res.noise.size() == 1);

    const DbscanResult pair = dbscan({det(5, 5), det(6, 5)}, params);
    CHECK(pair.clusters.size() == 1);
    CHECK(pair.noise.empty());

    CHECK(dbscan({}, params).clusters.empty());

    DbscanParams bad;
    bad.eps = 0.0;
    CHECK_THROWS_AS(dbscan({det(0, 0)}, bad), std::invalid_argument);
    bad.eps = 1.0;
    bad.min_pts = 0;
    CHECK_THROWS_AS(dbscan({det(0, 0)}, bad), std::invalid_argument);
}

TEST_CASE("border points attach to the cluster of an adjacent core") {
    // only the middle point of a 3-chain is core at min_pts 3, eps 1;
    // the ends are border points and get pulled in rather than left as noise
    std::vector<Detection> dets{det(0, 0), det(1, 0), det(2, 0)};
    DbscanParams params;
    params.eps = 1.0;
    params.min_pts = 3;
    const DbscanResult res = dbscan(dets, params);
    REQUIRE(res.clusters.size() == 1);
    CHECK(res.clusters[0].size() == 3);
    CHECK(res.noise.empty());
}

TEST_CASE("random clusterings satisfy the density-reachability axioms") {
    DbscanParams params;
    params.eps = 2.0;
    params.min_pts = 3;
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        Rng rng(seed);
        std::vector<Detection> dets;
        std::set<std::pair<int, int>> used;
        while (dets.size() < 60) {
            const int l = rng.uniform_int(0, 39);
            const int p = rng.uniform_int(0, 39);
            if (used.emplace(l, p).second) dets.push_back(det(l, p));
        }
        const int n = static_cast<int>(dets.size());
        const DbscanResult res = dbscan(dets, params);

        std::vector<char> core(n, 0);
        for (int i = 0; i < n; ++i) {
            int count = 0;
            for (int j = 0; j < n; ++j)
                if (cheb(dets[i], dets[j]) <= params.eps) ++count;
            core[i] = count >= params.min_pts;
        }
        UnionFind uf(n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (core[i] && core[j] && cheb(dets[i], dets[j]) <= params.eps) uf.unite(i, j);

        // partition: every detection lands in exactly one bucket
        std::vector<int> membership(n, -1);
        for (size_t c = 0; c < res.clusters.size(); ++c)
            for (int i : res.clusters[c]) {
                CHECK(membership[i] == -1);
                membership[i] = static_cast<int>(c);
            }
        for (int i : res.noise) {
            CHECK(membership[i] == -1);
            membership[i] = -2;
        }
        for (int i = 0; i < n; ++i) CHECK(membership[i] != -1);

        for (int i = 0; i < n; ++i) {
            const bool near_core = [&] {
                for (int j = 0; j < n; ++j)
                    if (core[j] && cheb(dets[i], dets[j]) <= params.eps) return true;
                return false;
            }();
            // noise <=> unreachable from any core point
            CHECK((membership[i] == -2) == !near_core);
            if (membership[i] >= 0 && !core[i]) {
                // border points sit next to a core member of their own cluster
                bool ok = false;
                for (int j : res.clusters[membership[i]])
                    if (core[j] && cheb(dets[i], dets[j]) <= params.eps) ok = true;
                CHECK(ok);
            }
        }

        // core points cluster exactly by density connectivity
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (core[i] && core[j])
                    CHECK((membership[i] == membership[j]) == (uf.find(i) == uf.find(j)));
    }
}

TEST_CASE("clustering does not depend on input order") {
    Rng rng(99);
    std::vector<Detection> dets;
    std::set<std::pair<int, int>> used;
    while (dets.size() < 40) {
        const int l = rng.uniform_int(0, 29);
        const int p = rng.uniform_int(0, 29);
        if (used.emplace(l, p).second) dets.push_back(det(l, p));
    }
    DbscanParams params;
    params.eps = 2.0;
    params.min_pts = 3;
    const auto base = cluster_fingerprint(dets, dbscan(dets, params));
    for (int shuffle = 0; shuffle < 5; ++shuffle) {
        for (size_t i = dets.size() - 1; i > 0; --i)
            std::swap(dets[i], dets[rng.uniform_int(0, static_cast<int>(i))]);
        CHECK(cluster_fingerprint(dets, dbscan(dets, params)) == base);
    }
}

TEST_CASE("centroid is the power-weighted mean") {
    std::vector<Detection> dets{det(1, 1, 10.0, -5.0, 2.0), det(2, 1, 20.0, 5.0, 2.0),
                                det(3, 1, 40.0, 11.0, 6.0)};
    const Measurement single = cluster_centroid(dets, {0});
    CHECK(single.tau_s == 10.0);
    CHECK(single.nu_hz == -5.0);
    CHECK(single.power == 2.0);

    const Measurement pair = cluster_centroid(dets, {0, 1});
    CHECK(pair.tau_s == doctest::Approx(15.0));
    CHECK(pair.nu_hz == doctest::Approx(0.0));
    CHECK(pair.power == doctest::Approx(4.0));

    const Measurement all = cluster_centroid(dets, {0, 1, 2});
    CHECK(all.tau_s == doctest::Approx((2.0 * 10 + 2.0 * 20 + 6.0 * 40) / 10.0));
    CHECK(all.nu_hz == doctest::Approx((2.0 * -5 + 2.0 * 5 + 6.0 * 11) / 10.0));

    CHECK_THROWS_AS(cluster_centroid(dets, {}), std::invalid_argument);
    std::vector<Detection> dark{det(0, 0, 1.0, 1.0, 0.0)};
    CHECK_THROWS_AS(cluster_centroid(dark, {0}), std::invalid_argument);
}

TEST_CASE("filter matrices derived from the system geometry") {
    const double dt = 0.2731, fc = 28e9, dres = 2.6e-7, nres = 3.5;
    const KfModel m = KfModel::from_system(dt, fc, dres, nres, 0.1);
    CHECK(m.f(0, 0) == 1.0);
    CHECK(m.f(0, 1) == doctest::Approx(-dt / fc).scale(0).epsilon(1e-14));
    CHECK(m.f(1, 0) == 0.0);
    CHECK(m.f(1, 1) == 1.0);
    CHECK(m.r(0, 0) == doctest::Approx(dres * dres / 12.0).scale(0).epsilon(1e-14));
    CHECK(m.r(1, 1) == doctest::Approx(nres * nres / 12.0).scale(0).epsilon(1e-14));
    CHECK(m.r(0, 1) == 0.0);
    CHECK(m.q(0, 0) == doctest::Approx(0.01 * dres * dres).scale(0).epsilon(1e-14));
    CHECK(m.q(1, 1) == doctest::Approx(0.01 * nres * nres).scale(0).epsilon(1e-14));
    CHECK_THROWS_AS(KfModel::from_system(0.0, fc, dres, nres), std::invalid_argument);
}

TEST_CASE("prediction couples Doppler into delay with the right sign") {
    const KfModel m = KfModel::from_system(0.5, 1e9, 1e-7, 2.0, 0.0);
    KfState s;
    s.x << 1e-5, 100.0;  // approaching: positive Doppler shrinks the delay
    s.p = Eigen::Matrix2d::Identity() * 1e-12;
    kf_predict(s, m);
    CHECK(s.x(0) == doctest::Approx(1e-5 - 0.5 / 1e9 * 100.0).scale(0).epsilon(1e-14));
    CHECK(s.x(1) == 100.0);

    KfState still;
    still.x << 1e-5, 0.0;
    still.p = Eigen::Matrix2d::Identity() * 1e-12;
    kf_predict(still, m);
    CHECK(still.x(0) == 1e-5);  // zero Doppler, zero process noise: frozen
}

TEST_CASE("a near-certain measurement overrides the prediction") {
    KfModel m;
    m.f = Eigen::Matrix2d::Identity();
    m.q = Eigen::Matrix2d::Identity() * 1e-6;
    m.r = Eigen::Matrix2d::Identity() * 1e-18;
    KfState s;
    s.x << 5.0, -2.0;
    s.p = Eigen::Matrix2d::Identity();
    kf_update(s, m, Eigen::Vector2d(7.5, 3.25));
    CHECK(s.x(0) == doctest::Approx(7.5).epsilon(1e-12));
    CHECK(s.x(1) == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("filter cycles match the textbook covariance recursions") {
    const KfModel m = KfModel::from_system(0.3, 5e9, 1e-7, 1.5, 0.2);
    KfState s;
    s.x << 4e-6, 20.0;
    s.p = m.r;
    Eigen::Vector2d rx = s.x;
    Eigen::Matrix2d rp = s.p;
    Rng rng(7);
    for (int step = 0; step < 50; ++step) {
        kf_predict(s, m);
        rx = m.f * rx;
        rp = m.f * rp * m.f.transpose() + m.q;
        CHECK((s.x - rx).cwiseAbs().maxCoeff() <= 1e-12 * rx.cwiseAbs().maxCoeff());
        CHECK((s.p - rp).cwiseAbs().maxCoeff() <= 1e-9 * rp.cwiseAbs().maxCoeff());

        const Eigen::Vector2d z(rx(0) + rng.normal() * 1e-7, rx(1) + rng.normal() * 1.5);
        kf_update(s, m, z);
        const Eigen::Matrix2d gain = rp * (rp + m.r).inverse();
        rx += gain * (z - rx);
        rp = (Eigen::Matrix2d::Identity() - gain) * rp;
        CHECK((s.x - rx).cwiseAbs().maxCoeff() <= 1e-9 * rx.cwiseAbs().maxCoeff());
        CHECK((s.p - rp).cwiseAbs().maxCoeff() <= 1e-7 * rp.cwiseAbs().maxCoeff());
        rx = s.x;  // re-anchor so roundoff does not accumulate across steps
        rp = s.p;
    }
}

TEST_CASE("covariance stays symmetric positive definite over many cycles") {
    const KfModel m = KfModel::from_system(0.2731, 28e9, 2.604e-7, 3.6621, 0.1);
    KfState s;
    s.x << 1e-6, 50.0;
    s.p = m.r;
    Rng rng(13);
    for (int step = 0; step < 10000; ++step) {
        kf_predict(s, m);
        if (rng.uniform() < 0.7) {
            const Eigen::Vector2d z(s.x(0) + rng.normal() * 3e-7, s.x(1) + rng.normal() * 4.0);
            kf_update(s, m, z);
        }
        CHECK((s.p - s.p.transpose()).cwiseAbs().maxCoeff() <= 1e-18);
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(s.p);
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("assignment picks the global minimum, not the greedy one") {
    MatX crossed(2, 2);
    crossed << 0.81, 4.0,
               0.01, 1.0;
    const std::vector<int> sol = solve_assignment(crossed);
    CHECK(sol[0] == 0);  // greedy would grab (1,0) first and pay 4.01 total
    CHECK(sol[1] == 1);

    MatX one(1, 1);
    one << 3.0;
    CHECK(solve_assignment(one) == std::vector<int>{0});

    MatX tall(3, 2);
    CHECK_THROWS_AS(solve_assignment(tall), std::invalid_argument);
}

TEST_CASE("assignment cost equals the exhaustive minimum on random instances") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const int rows = rng.uniform_int(1, 4);
        const int cols = rows + rng.uniform_int(0, 2);
        MatX cost(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) cost(i, j) = rng.uniform(0.0, 10.0);

        const std::vector<int> sol = solve_assignment(cost);
        std::vector<char> seen(cols, 0);
        double total = 0.0;
        for (int i = 0; i < rows; ++i) {
            REQUIRE(sol[i] >= 0);
            REQUIRE(sol[i] < cols);
            CHECK(!seen[sol[i]]);
            seen[sol[i]] = 1;
            total += cost(i, sol[i]);
        }

        std::vector<int> cand(cols);
        std::iota(cand.begin(), cand.end(), 0);
        double best = std::numeric_limits<double>::infinity();
        std::sort(cand.begin(), cand.end());
        do {
            double acc = 0.0;
            for (int i = 0; i < rows; ++i) acc += cost(i, cand[i]);
            best = std::min(best, acc);
        } while (std::next_permutation(cand.begin(), cand.end()));
        CHECK(total == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("association gates on Mahalanobis distance and solves globally") {
    KfModel m;
    m.f = Eigen::Matrix2d::Identity();
    m.q = Eigen::Matrix2d::Zero();
    m.r = Eigen::Matrix2d::Identity();

    auto track_at = [](double tau, double nu) {
        KfState s;
        s.x << tau, nu;
        s.p = Eigen::Matrix2d::Zero();  // innovation covariance collapses to R
        return s;
    };
    auto meas_at = [](double tau, double nu) {
        Measurement z;
        z.tau_s = tau;
        z.nu_hz = nu;
        z.power = 1.0;
        return z;
    };

    SUBCASE("single in-gate pair matches") {
        const Association a = gnn_associate({track_at(0, 0)}, m, {meas_at(1.0, 2.0)}, 9.21034);
        CHECK(a.track_to_meas == std::vector<int>{0});  // d^2 = 5
        CHECK(a.unassigned_tracks.empty());
        CHECK(a.unassigned_meas.empty());
    }

    SUBCASE("two crossed tracks take the jointly cheapest pairing") {
        const std::vector<KfState> tracks{track_at(0, 0), track_at(1, 0)};
        const std::vector<Measurement> meas{meas_at(0.9, 0), meas_at(2.0, 0)};
        const Association a = gnn_associate(tracks, m, meas, 100.0);
        CHECK(a.track_to_meas == std::vector<int>{0, 1});
    }

    SUBCASE("the gate boundary splits assigned from coasting") {
        const double gate = 9.0;
        const Association in = gnn_associate({track_at(0, 0)}, m, {meas_at(2.9, 0)}, gate);
        CHECK(in.track_to_meas[0] == 0);  // d^2 = 8.41
        const Association out = gnn_associate({track_at(0, 0)}, m, {meas_at(3.1, 0)}, gate);
        CHECK(out.track_to_meas[0] == -1);  // d^2 = 9.61
        CHECK(out.unassigned_tracks == std::vector<int>{0});
        CHECK(out.unassigned_meas == std::vector<int>{0});
    }

    SUBCASE("surplus measurements are reported unassigned") {
        const Association a =
            gnn_associate({track_at(0, 0)}, m, {meas_at(50, 50), meas_at(0.5, 0.5)}, 9.21034);
        CHECK(a.track_to_meas[0] == 1);
        CHECK(a.unassigned_meas == std::vector<int>{0});
    }

    SUBCASE("no tracks at all") {
        const Association a = gnn_associate({}, m, {meas_at(0, 0)}, 9.21034);
        CHECK(a.track_to_meas.empty());
        CHECK(a.unassigned_meas == std::vector<int>{0});
    }
}

TEST_CASE("tracks locked to exact stationary measurements never drift") {
    const KfModel m = KfModel::from_system(0.25, 28e9, 1e-7, 2.0, 0.1);
    const double tau0 = 8e-7, nu0 = 0.0;
    std::vector<std::vector<Detection>> windows(12);
    for (size_t k = 1; k < windows.size(); ++k)
        windows[k] = {det(8, 30, tau0, nu0, 10.0), det(8, 31, tau0, nu0, 5.0)};

    BaselineParams params;
    const TrackRecord rec = run_baseline(windows, {{tau0, nu0}}, m, params);
    REQUIRE(rec.points.size() == 12);
    for (const TrackPoint& pt : rec.points) {
        CHECK(pt.available);
        CHECK(pt.tau_hat_s == doctest::Approx(tau0).epsilon(1e-12));
        CHECK(pt.nu_hat_hz == doctest::Approx(nu0).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("a constant-Doppler drift that matches the motion model tracks exactly") {
    const double dt = 0.25, fc = 28e9, nu0 = 80.0, tau0 = 6e-7;
    const KfModel m = KfModel::from_system(dt, fc, 1e-7, 2.0, 0.1);
    std::vector<std::vector<Detection>> windows(10);
    for (size_t k = 1; k < windows.size(); ++k) {
        const double tau_k = tau0 - static_cast<double>(k) * dt / fc * nu0;
        windows[k] = {det(6, 40, tau_k, nu0, 10.0), det(6, 41, tau_k, nu0, 10.0)};
    }
    const TrackRecord rec = run_baseline(windows, {{tau0, nu0}}, m, BaselineParams{});
    for (const TrackPoint& pt : rec.points) {
        const double tau_truth = tau0 - pt.window * dt / fc * nu0;
        CHECK(pt.available);
        CHECK(std::abs(pt.tau_hat_s - tau_truth) < 1e-16);
        CHECK(pt.nu_hat_hz == doctest::Approx(nu0).epsilon(1e-12));
    }
}

TEST_CASE("short measurement gaps coast on the prediction and survive") {
    const KfModel m = KfModel::from_system(0.25, 28e9, 1e-7, 2.0, 0.1);
    const double tau0 = 5e-7;
    std::vector<std::vector<Detection>> windows(9);
    for (size_t k = 1; k < windows.size(); ++k) {
        if (k >= 3 && k <= 5) continue;  // three dark windows
        windows[k] = {det(5, 30, tau0, 0.0, 10.0), det(5, 31, tau0, 0.0, 10.0)};
    }
    const TrackRecord rec = run_baseline(windows, {{tau0, 0.0}}, m, BaselineParams{});
    for (const TrackPoint& pt : rec.points) {
        CHECK(pt.available);  // max_misses 10 never reached
        CHECK(pt.tau_hat_s == doctest::Approx(tau0).epsilon(1e-9));
    }
}

TEST_CASE("a track dies after the miss budget and stops reporting") {
    const KfModel m = KfModel::from_system(0.25, 28e9, 1e-7, 2.0, 0.1);
    // only the initialization: every later window is empty
    std::vector<std::vector<Detection>> windows(13);
    BaselineParams params;  // max_misses 10
    const TrackRecord rec = run_baseline(windows, {{4e-7, 10.0}}, m, params);
    REQUIRE(rec.points.size() == 13);
    for (const TrackPoint& pt : rec.points) {
        if (pt.window <= 10) {
            // the 10th consecutive miss still emits its prediction
            CHECK(pt.available);
            CHECK(pt.tau_hat_s > 0.0);
        } else {
            CHECK(!pt.available);
            CHECK(pt.tau_hat_s == 0.0);
            CHECK(pt.nu_hat_hz == 0.0);
        }
    }
}

TEST_CASE("multi-target runs emit one row per target per window in order") {
    const KfModel m = KfModel::from_system(0.25, 28e9, 1e-7, 2.0, 0.1);
    std::vector<std::vector<Detection>> windows(4);
    for (size_t k = 1; k < windows.size(); ++k)
        windows[k] = {det(5, 30, 5e-7, 0.0, 10.0), det(5, 31, 5e-7, 0.0, 10.0),
                      det(50, 50, 5e-6, 40.0, 10.0), det(50, 51, 5e-6, 40.0, 10.0)};
    const TrackRecord rec =
        run_baseline(windows, {{5e-7, 0.0}, {5e-6, 40.0}}, m, BaselineParams{});
    REQUIRE(rec.points.size() == 8);
    for (size_t i = 0; i < rec.points.size(); ++i) {
        CHECK(rec.points[i].window == static_cast<int>(i / 2));
        CHECK(rec.points[i].target == static_cast<int>(i % 2));
    }
    // each track stays glued to its own target
    CHECK(rec.points[6].tau_hat_s == doctest::Approx(5e-7).scale(0).epsilon(1e-9));
    CHECK(rec.points[7].tau_hat_s == doctest::Approx(5e-6).scale(0).epsilon(1e-9));
    CHECK(rec.points[7].nu_hat_hz == doctest::Approx(40.0));

    CHECK_THROWS_AS(run_baseline({}, {{1e-7, 0.0}}, m, BaselineParams{}), std::invalid_argument);
    CHECK_THROWS_AS(run_baseline(windows, {}, m, BaselineParams{}), std::invalid_argument);
}
