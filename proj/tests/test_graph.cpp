#include <doctest.h>

#include "ddtrack/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace ddtrack;

namespace {

Detection det(int l, int p, double power = 1.0) {
    // toy physical scaling: half a unit per delay bin, two units per Doppler
    // bin on a 64-bin centered axis
    Detection d;
    d.delay_bin = l;
    d.doppler_bin = p;
    d.tau_s = l * 0.5;
    d.nu_hz = (p - 32) * 2.0;
    d.power = power;
    return d;
}

}  // namespace

TEST_CASE("node identifier packs the bin pair") {
    CHECK(node_id(0, 0, 1400) == 0);
    CHECK(node_id(3, 5, 1400) == 4205);
    CHECK(node_id(1023, 1399, 1400) == 1023LL * 1400 + 1399);
    CHECK_THROWS_AS(node_id(0, 1400, 1400), std::out_of_range);
    CHECK_THROWS_AS(node_id(-1, 0, 1400), std::out_of_range);
    CHECK_THROWS_AS(node_id(0, -1, 1400), std::out_of_range);
}

TEST_CASE("the same physical bin keeps its identifier across windows") {
    const std::vector<Detection> dets{det(7, 40)};
    const DDGraph g0 = build_graph(dets, 0, 1.0, 1.0, 64);
    const DDGraph g5 = build_graph(dets, 5, 1.0, 1.0, 64);
    CHECK(g0.nodes[0].id == g5.nodes[0].id);
    CHECK(g0.features(0, 1) == 0.0);
    CHECK(g5.features(0, 1) == 5.0);  // only the window feature moves
}

TEST_CASE("edges are inclusive at the threshold and gone one bin past it") {
    // 9-bin separations on both axes, thresholds of exactly 9 bins
    const double gamma_tau = 9 * 0.5, gamma_nu = 9 * 2.0;
    auto edge_count = [&](int dl, int dp) {
        const std::vector<Detection> dets{det(10, 32), det(10 + dl, 32 + dp)};
        return build_graph(dets, 0, gamma_tau, gamma_nu, 64).edges.size();
    };
    CHECK(edge_count(9, 0) == 1);
    CHECK(edge_count(0, 9) == 1);
    CHECK(edge_count(9, 9) == 1);   // both axes at the limit simultaneously
    CHECK(edge_count(10, 0) == 0);
    CHECK(edge_count(0, 10) == 0);
    CHECK(edge_count(10, 9) == 0);  // one violated axis is enough
}

TEST_CASE("adjacency agrees with the all-pairs rule on random detection sets") {
    Rng rng(77);
    for (int trial = 0; trial < 4; ++trial) {
        // unique bins via a shuffled index list; physical coordinates drawn
        // independently so threshold boundaries are never hit exactly
        std::vector<int> flat(64 * 64);
        std::iota(flat.begin(), flat.end(), 0);
        for (size_t i = flat.size() - 1; i > 0; --i)
            std::swap(flat[i], flat[rng.uniform_int(0, static_cast<int>(i))]);
        std::vector<Detection> dets;
        for (int i = 0; i < 100; ++i) {
            Detection d;
            d.delay_bin = flat[i] / 64;
            d.doppler_bin = flat[i] % 64;
            d.tau_s = rng.uniform(0.0, 40.0);
            d.nu_hz = rng.uniform(-80.0, 80.0);
            d.power = rng.uniform(0.5, 2.0);
            dets.push_back(d);
        }
        const double gt = 6.0, gn = 25.0;
        const DDGraph g = build_graph(dets, trial, gt, gn, 64);
        const MatX a = g.adjacency();
        REQUIRE(a.rows() == 100);
        CHECK(a.diagonal().cwiseAbs().maxCoeff() == 0.0);
        CHECK((a - a.transpose()).cwiseAbs().maxCoeff() == 0.0);
        for (int u = 0; u < 100; ++u)
            for (int v = 0; v < 100; ++v) {
                if (u == v) continue;
                const Detection& x = g.nodes[u].detection;
                const Detection& y = g.nodes[v].detection;
                const bool expect =
                    std::abs(x.tau_s - y.tau_s) <= gt && std::abs(x.nu_hz - y.nu_hz) <= gn;
                CHECK(a(u, v) == (expect ? 1.0 : 0.0));
            }
    }
}

TEST_CASE("node order and features do not depend on input order") {
    std::vector<Detection> dets{det(30, 10), det(2, 50), det(2, 12), det(15, 32)};
    const DDGraph fwd = build_graph(dets, 1, 20.0, 100.0, 64);
    std::reverse(dets.begin(), dets.end());
    const DDGraph rev = build_graph(dets, 1, 20.0, 100.0, 64);

    REQUIRE(fwd.n_nodes() == rev.n_nodes());
    for (int u = 0; u < fwd.n_nodes(); ++u) CHECK(fwd.nodes[u].id == rev.nodes[u].id);
    CHECK(fwd.edges == rev.edges);
    CHECK(fwd.features == rev.features);
    // canonical order: ascending (delay, doppler)
    CHECK(fwd.nodes[0].detection.delay_bin == 2);
    CHECK(fwd.nodes[0].detection.doppler_bin == 12);
    CHECK(fwd.nodes[1].detection.doppler_bin == 50);
    CHECK(fwd.nodes[3].detection.delay_bin == 30);
}

TEST_CASE("feature rows hold bin id, window, coordinates, power and neighborhood means") {
    // A-B-C chain (B adjacent to both ends), D isolated
    std::vector<Detection> dets{det(10, 32, 10.0), det(12, 32, 1000.0), det(14, 32, 10.0),
                                det(40, 10, 123.0)};
    const DDGraph g = build_graph(dets, 3, 0.5 * 2, 2.0, 64);  // 2-bin delay reach
    REQUIRE(g.n_nodes() == 4);
    REQUIRE(g.edges.size() == 2);

    const double db10 = 10.0 * std::log10(10.0);
    const double db1000 = 10.0 * std::log10(1000.0);

    // node 0 = (10,32): sole neighbor is (12,32)
    CHECK(g.features(0, 0) == static_cast<double>(node_id(10, 32, 64)));
    CHECK(g.features(0, 1) == 3.0);
    CHECK(g.features(0, 2) == 5.0);
    CHECK(g.features(0, 3) == 0.0);
    CHECK(g.features(0, 4) == doctest::Approx(db10));
    CHECK(g.features(0, 5) == doctest::Approx(6.0));
    CHECK(g.features(0, 7) == doctest::Approx(db1000));

    // node 1 = (12,32): two neighbors, means in dB not linear
    CHECK(g.features(1, 5) == doctest::Approx((5.0 + 7.0) / 2.0));
    CHECK(g.features(1, 7) == doctest::Approx(db10));

    // node 3 = (40,10) is isolated: means fall back to its own values
    CHECK(g.features(3, 5) == g.features(3, 2));
    CHECK(g.features(3, 6) == g.features(3, 3));
    CHECK(g.features(3, 7) == g.features(3, 4));
    CHECK(g.nodes[3].mean_power_db == doctest::Approx(10.0 * std::log10(123.0)));

    // labels start out unassigned
    for (int l : g.labels) CHECK(l == kUnlabeled);
}

TEST_CASE("duplicate bins and non-positive thresholds are rejected") {
    std::vector<Detection> dup{det(5, 20), det(5, 20)};
    CHECK_THROWS_AS(build_graph(dup, 0, 1.0, 1.0, 64), std::invalid_argument);
    std::vector<Detection> ok{det(5, 20)};
    CHECK_THROWS_AS(build_graph(ok, 0, 0.0, 1.0, 64), std::invalid_argument);
    CHECK_THROWS_AS(build_graph(ok, 0, 1.0, -2.0, 64), std::invalid_argument);
}

TEST_CASE("labeling assigns the nearest gated target, background otherwise") {
    std::vector<Detection> dets{det(10, 32), det(10, 33), det(60, 60), det(20, 32)};
    DDGraph g = build_graph(dets, 0, 0.5, 2.0, 64);
    // truth for three targets in the same toy units
    std::vector<DelayDoppler> truth{{5.0, 0.0}, {5.0, 2.0}, {15.0, 0.0}};

    label_nodes(g, truth, 1.5, 6.0);
    // node (10,32): tau 5, nu 0 -> exactly on target 0 (distance 0), target 1
    // at normalized 2/6 -- nearest wins
    CHECK(g.labels[0] == 0);
    // node (10,33): tau 5, nu 2 -> exactly target 1
    CHECK(g.labels[1] == 1);
    // node (20,32): tau 10 is > 1.5 from every target -> background class 3
    CHECK(g.labels[3] == 3);
    CHECK(g.labels[2] == 3);

    // equidistant case: a node halfway between targets 0 and 2 in tau takes
    // the smaller index
    std::vector<Detection> mid{det(20, 32)};  // tau 10, nu 0
    DDGraph gm = build_graph(mid, 0, 0.5, 2.0, 64);
    label_nodes(gm, truth, 5.0, 6.0);  // both at normalized distance 1.0
    CHECK(gm.labels[0] == 0);

    // the gate boundary itself is inside
    std::vector<Detection> edge{det(13, 32)};  // tau 6.5, 1.5 from target 0
    DDGraph ge = build_graph(edge, 0, 0.5, 2.0, 64);
    label_nodes(ge, truth, 1.5, 6.0);
    CHECK(ge.labels[0] == 0);

    CHECK_THROWS_AS(label_nodes(g, truth, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("co-gated nodes all take the label of their shared target") {
    std::vector<Detection> dets;
    for (int dp = -2; dp <= 2; ++dp) dets.push_back(det(10, 32 + dp));
    DDGraph g = build_graph(dets, 0, 0.5, 20.0, 64);
    std::vector<DelayDoppler> truth{{5.0, 0.0}};
    label_nodes(g, truth, 2.0, 10.0);
    for (int l : g.labels) CHECK(l == 0);
}
