#include "ddtrack/scene.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace ddtrack {

void Scene::validate() const {
    if ((tx_pos - rx_pos).norm() == 0.0)
        throw std::invalid_argument("scene: tx_pos and rx_pos coincide");
    if (carrier_freq_hz <= 0.0)
        throw std::invalid_argument("scene: carrier frequency must be positive");
    if (noise_power < 0.0)
        throw std::invalid_argument("scene: noise power must be non-negative");
    std::set<int> labels;
    for (const auto& t : targets) {
        if ((t.initial_pos - tx_pos).norm() == 0.0 || (t.initial_pos - rx_pos).norm() == 0.0)
            throw std::invalid_argument("scene: target initial position coincides with Tx or Rx");
        if (!t.velocity.allFinite())
            throw std::invalid_argument("scene: target velocity not finite");
        if (t.gain_db_min.has_value() != t.gain_db_max.has_value())
            throw std::invalid_argument("scene: gain_db_min/gain_db_max must be set together");
        if (t.gain_db_min && *t.gain_db_min > *t.gain_db_max)
            throw std::invalid_argument("scene: gain_db_min exceeds gain_db_max");
        labels.insert(t.label);
    }
    for (int c = 0; c < n_targets(); ++c) {
        if (!labels.count(c)) {
            std::ostringstream os;
            os << "scene: target labels must be unique and contiguous from 0 (missing " << c << ")";
            throw std::invalid_argument(os.str());
        }
    }
}

Vec3 target_position(const Scene& scene, int c, double t_s) {
    if (c < 0 || c >= scene.n_targets())
        throw std::out_of_range("target_position: invalid target index");
    const Target& t = scene.targets[c];
    return t.initial_pos + t.velocity * t_s;
}

DelayDoppler ground_truth(const Scene& scene, int c, double t_s) {
    const Vec3 p = target_position(scene, c, t_s);
    const Vec3 d_tx = p - scene.tx_pos;
    const Vec3 d_rx = p - scene.rx_pos;
    const double r_tx = d_tx.norm();
    const double r_rx = d_rx.norm();
    if (r_tx == 0.0 || r_rx == 0.0)
        throw std::domain_error("ground_truth: target coincides with Tx or Rx");
    const Vec3& v = scene.targets[c].velocity;
    DelayDoppler out;
    out.tau_s = (r_tx + r_rx) / kSpeedOfLight;
    const double range_rate = v.dot(d_tx) / r_tx + v.dot(d_rx) / r_rx;
    out.nu_hz = -(scene.carrier_freq_hz / kSpeedOfLight) * range_rate;
    return out;
}

double target_gain_db(const Scene& scene, int c, int window_index) {
    if (c < 0 || c >= scene.n_targets())
        throw std::out_of_range("target_gain_db: invalid target index");
    const Target& t = scene.targets[c];
    if (!t.gain_db_min)
        return t.gain_db;
    Rng rng(mix_seed(scene.rng_seed, 0x6761696eULL /*"gain"*/,
                     (static_cast<std::uint64_t>(window_index) << 20) ^ static_cast<std::uint64_t>(t.label)));
    return rng.uniform(*t.gain_db_min, *t.gain_db_max);
}

Scene generate_scene(const SceneGenParams& params, std::uint64_t seed) {
    if (params.n_targets < 1)
        throw std::invalid_argument("generate_scene: need at least one target");
    Rng rng(splitmix64(seed));
    const auto draw_point = [&](double z) {
        Vec3 p;
        p.x() = rng.uniform(params.region_min.x(), params.region_max.x());
        p.y() = rng.uniform(params.region_min.y(), params.region_max.y());
        p.z() = z;
        return p;
    };

    Scene scene;
    scene.carrier_freq_hz = params.carrier_freq_hz;
    scene.noise_power = params.noise_power;
    scene.include_los_path = params.include_los_path;
    scene.los_gain_db = params.los_gain_db;
    scene.rng_seed = seed;

    scene.tx_pos = draw_point(0.0);
    do {
        scene.rx_pos = draw_point(0.0);
    } while ((scene.rx_pos - scene.tx_pos).norm() < params.tx_rx_min_separation_m);

    for (int c = 0; c < params.n_targets; ++c) {
        Target t;
        do {
            t.initial_pos = draw_point(0.0);
        } while ((t.initial_pos - scene.tx_pos).norm() < params.min_target_standoff_m ||
                 (t.initial_pos - scene.rx_pos).norm() < params.min_target_standoff_m);
        const double speed = rng.uniform(params.speed_min_kmh, params.speed_max_kmh) * kKmhToMs;
        const double heading = rng.uniform(0.0, 2.0 * M_PI);
        t.velocity = Vec3(speed * std::cos(heading), speed * std::sin(heading), 0.0);
        t.gain_db = c < static_cast<int>(params.target_gains_db.size()) ? params.target_gains_db[c] : 0.0;
        if (params.gain_jitter_db > 0.0) {
            t.gain_db_min = t.gain_db - params.gain_jitter_db;
            t.gain_db_max = t.gain_db + params.gain_jitter_db;
        }
        t.label = c;
        scene.targets.push_back(t);
    }
    scene.validate();
    return scene;
}

}  // namespace ddtrack
