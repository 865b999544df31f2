#include "ddtrack/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ddtrack {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known) throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void opt(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

void opt_vec3(const json& obj, const char* key, Vec3& out) {
    if (!obj.contains(key)) return;
    const auto& arr = obj.at(key);
    if (!arr.is_array() || arr.size() != 3)
        throw std::invalid_argument(std::string("config: ") + key + " must be [x, y, z]");
    for (int i = 0; i < 3; ++i) out(i) = arr.at(static_cast<size_t>(i)).get<double>();
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

void parse_ofdm(const json& o, OfdmParams& p) {
    check_keys(o, "ofdm",
               {"subcarrier_spacing_hz", "n_subcarriers", "symbols_per_window", "window_gap",
                "n_windows", "symbol_duration_s"});
    opt(o, "subcarrier_spacing_hz", p.subcarrier_spacing_hz);
    opt(o, "n_subcarriers", p.n_subcarriers);
    opt(o, "symbols_per_window", p.symbols_per_window);
    opt(o, "window_gap", p.window_gap);
    opt(o, "n_windows", p.n_windows);
    opt(o, "symbol_duration_s", p.symbol_duration_s);
}

void parse_cfar(const json& o, OsCfarParams& p) {
    check_keys(o, "cfar",
               {"guard_delay", "guard_doppler", "train_delay", "train_doppler", "rank_fraction",
                "scale", "target_pfa", "zero_doppler_mask_halfwidth"});
    opt(o, "guard_delay", p.guard_delay);
    opt(o, "guard_doppler", p.guard_doppler);
    opt(o, "train_delay", p.train_delay);
    opt(o, "train_doppler", p.train_doppler);
    opt(o, "rank_fraction", p.rank_fraction);
    if (o.contains("scale")) {
        p.scale = o.at("scale").get<double>();
        if (!o.contains("target_pfa")) p.target_pfa.reset();
    }
    if (o.contains("target_pfa")) {
        p.target_pfa = o.at("target_pfa").get<double>();
        if (!o.contains("scale")) p.scale.reset();
    }
    opt(o, "zero_doppler_mask_halfwidth", p.zero_doppler_mask_halfwidth);
}

void parse_graph(const json& o, GraphParams& p) {
    check_keys(o, "graph",
               {"gamma_tau_bins", "gamma_nu_bins", "label_gate_tau_bins", "label_gate_nu_bins"});
    opt(o, "gamma_tau_bins", p.gamma_tau_bins);
    opt(o, "gamma_nu_bins", p.gamma_nu_bins);
    opt(o, "label_gate_tau_bins", p.label_gate_tau_bins);
    opt(o, "label_gate_nu_bins", p.label_gate_nu_bins);
}

void parse_train(const json& o, TrainConfig& p) {
    check_keys(o, "train",
               {"learning_rate", "history_window", "train_frac", "val_frac", "epochs", "patience",
                "seed", "class_weights", "hidden_dims", "decoder_hidden"});
    opt(o, "learning_rate", p.learning_rate);
    opt(o, "history_window", p.history_window);
    opt(o, "train_frac", p.train_frac);
    opt(o, "val_frac", p.val_frac);
    opt(o, "epochs", p.epochs);
    opt(o, "patience", p.patience);
    opt(o, "seed", p.seed);
    opt(o, "class_weights", p.class_weights);
    opt(o, "hidden_dims", p.hidden_dims);
    opt(o, "decoder_hidden", p.decoder_hidden);
}

void parse_baseline(const json& o, BaselineParams& p) {
    check_keys(o, "baseline", {"dbscan", "gate", "q_bins", "max_misses"});
    if (o.contains("dbscan")) {
        const json& d = o.at("dbscan");
        check_keys(d, "baseline.dbscan", {"eps", "min_pts"});
        opt(d, "eps", p.dbscan.eps);
        opt(d, "min_pts", p.dbscan.min_pts);
    }
    opt(o, "gate", p.gate);
    opt(o, "q_bins", p.q_bins);
    opt(o, "max_misses", p.max_misses);
}

void parse_scene_gen(const json& o, SceneGenParams& p) {
    check_keys(o, "scene_gen",
               {"region_min", "region_max", "tx_rx_min_separation_m", "speed_min_kmh",
                "speed_max_kmh", "target_gains_db", "gain_jitter_db", "n_targets",
                "min_target_standoff_m", "carrier_freq_hz", "noise_power", "include_los_path",
                "los_gain_db"});
    opt_vec3(o, "region_min", p.region_min);
    opt_vec3(o, "region_max", p.region_max);
    opt(o, "tx_rx_min_separation_m", p.tx_rx_min_separation_m);
    opt(o, "speed_min_kmh", p.speed_min_kmh);
    opt(o, "speed_max_kmh", p.speed_max_kmh);
    opt(o, "target_gains_db", p.target_gains_db);
    opt(o, "gain_jitter_db", p.gain_jitter_db);
    opt(o, "n_targets", p.n_targets);
    opt(o, "min_target_standoff_m", p.min_target_standoff_m);
    opt(o, "carrier_freq_hz", p.carrier_freq_hz);
    opt(o, "noise_power", p.noise_power);
    opt(o, "include_los_path", p.include_los_path);
    opt(o, "los_gain_db", p.los_gain_db);
}

Scene parse_scene(const json& o, size_t index) {
    const std::string where = "scenes[" + std::to_string(index) + "]";
    check_keys(o, where,
               {"tx_pos", "rx_pos", "carrier_freq_hz", "noise_power", "include_los_path",
                "los_gain_db", "rng_seed", "targets"});
    Scene s;
    opt_vec3(o, "tx_pos", s.tx_pos);
    opt_vec3(o, "rx_pos", s.rx_pos);
    opt(o, "carrier_freq_hz", s.carrier_freq_hz);
    opt(o, "noise_power", s.noise_power);
    opt(o, "include_los_path", s.include_los_path);
    opt(o, "los_gain_db", s.los_gain_db);
    opt(o, "rng_seed", s.rng_seed);
    if (!o.contains("targets"))
        throw std::invalid_argument("config: " + where + " needs a targets list");
    size_t ti = 0;
    for (const json& t : o.at("targets")) {
        const std::string twhere = where + ".targets[" + std::to_string(ti) + "]";
        check_keys(t, twhere,
                   {"pos", "vel_mps", "gain_db", "gain_db_min", "gain_db_max", "label"});
        Target target;
        opt_vec3(t, "pos", target.initial_pos);
        opt_vec3(t, "vel_mps", target.velocity);
        opt(t, "gain_db", target.gain_db);
        if (t.contains("gain_db_min")) target.gain_db_min = t.at("gain_db_min").get<double>();
        if (t.contains("gain_db_max")) target.gain_db_max = t.at("gain_db_max").get<double>();
        target.label = static_cast<int>(ti);
        opt(t, "label", target.label);
        s.targets.push_back(target);
        ++ti;
    }
    return s;
}

json scene_to_json(const Scene& s) {
    json o;
    o["tx_pos"] = vec3_to_json(s.tx_pos);
    o["rx_pos"] = vec3_to_json(s.rx_pos);
    o["carrier_freq_hz"] = s.carrier_freq_hz;
    o["noise_power"] = s.noise_power;
    o["include_los_path"] = s.include_los_path;
    o["los_gain_db"] = s.los_gain_db;
    o["rng_seed"] = s.rng_seed;
    o["targets"] = json::array();
    for (const Target& t : s.targets) {
        json to;
        to["pos"] = vec3_to_json(t.initial_pos);
        to["vel_mps"] = vec3_to_json(t.velocity);
        to["gain_db"] = t.gain_db;
        if (t.gain_db_min) to["gain_db_min"] = *t.gain_db_min;
        if (t.gain_db_max) to["gain_db_max"] = *t.gain_db_max;
        to["label"] = t.label;
        o["targets"].push_back(to);
    }
    return o;
}

}  // namespace

void GraphParams::validate() const {
    if (!(gamma_tau_bins > 0) || !(gamma_nu_bins > 0))
        throw std::invalid_argument("graph: edge thresholds must be > 0");
    if (!(label_gate_tau_bins > 0) || !(label_gate_nu_bins > 0))
        throw std::invalid_argument("graph: label gates must be > 0");
}

void ExperimentConfig::validate() const {
    ofdm.validate();
    cfar.validate();
    graph.validate();
    train.validate();
    baseline.validate();
    if (n_scenes < 1) throw std::invalid_argument("config: n_scenes must be >= 1");
    if (ofdm.n_subcarriers <= 2 * (cfar.guard_delay + cfar.train_delay) + 1 ||
        ofdm.symbols_per_window <= 2 * (cfar.guard_doppler + cfar.train_doppler) + 1)
        throw std::invalid_argument("config: delay-Doppler map smaller than the CFAR window");
    for (const Scene& s : explicit_scenes) s.validate();
    if (explicit_scenes.empty() && scene_gen.n_targets < 1)
        throw std::invalid_argument("config: scene_gen.n_targets must be >= 1");
}

std::vector<Scene> ExperimentConfig::make_scenes() const {
    if (!explicit_scenes.empty()) return explicit_scenes;
    std::vector<Scene> scenes;
    scenes.reserve(static_cast<size_t>(n_scenes));
    for (int s = 0; s < n_scenes; ++s)
        scenes.push_back(generate_scene(scene_gen, mix_seed(seed, 0x7363656eULL /*"scen"*/,
                                                            static_cast<std::uint64_t>(s))));
    return scenes;
}

double ExperimentConfig::gamma_tau_s() const {
    return graph.gamma_tau_bins * ofdm.delay_resolution();
}
double ExperimentConfig::gamma_nu_hz() const {
    return graph.gamma_nu_bins * ofdm.doppler_resolution();
}
double ExperimentConfig::label_gate_tau_s() const {
    return graph.label_gate_tau_bins * ofdm.delay_resolution();
}
double ExperimentConfig::label_gate_nu_hz() const {
    return graph.label_gate_nu_bins * ofdm.doppler_resolution();
}

int ExperimentConfig::n_targets() const {
    return explicit_scenes.empty() ? scene_gen.n_targets
                                   : explicit_scenes.front().n_targets();
}

ExperimentConfig desk_profile() {
    ExperimentConfig c;
    c.name = "desk";
    c.seed = 1;
    c.n_scenes = 4;
    c.ofdm.subcarrier_spacing_hz = 15e3;
    c.ofdm.n_subcarriers = 256;
    c.ofdm.symbols_per_window = 256;
    c.ofdm.window_gap = 4096;
    c.ofdm.n_windows = 30;
    c.scene_gen.region_min = Vec3(-150, -150, 0);
    c.scene_gen.region_max = Vec3(150, 150, 0);
    c.scene_gen.tx_rx_min_separation_m = 80.0;
    c.scene_gen.min_target_standoff_m = 20.0;
    c.scene_gen.speed_min_kmh = 10.0;
    c.scene_gen.speed_max_kmh = 15.0;
    c.scene_gen.target_gains_db = {0.0, -6.0, -14.0};
    c.scene_gen.gain_jitter_db = 3.0;
    c.scene_gen.n_targets = 3;
    c.scene_gen.carrier_freq_hz = 28e9;
    c.scene_gen.noise_power = 60.0;
    c.cfar.target_pfa = 1e-4;
    c.cfar.scale.reset();
    c.graph.gamma_tau_bins = 9.0;
    c.graph.gamma_nu_bins = 9.0;
    c.graph.label_gate_tau_bins = 3.0;
    c.graph.label_gate_nu_bins = 3.0;
    return c;
}

ExperimentConfig paper_profile() {
    ExperimentConfig c;
    c.name = "paper";
    c.seed = 1;
    c.n_scenes = 1;
    c.ofdm.subcarrier_spacing_hz = 15e3;
    c.ofdm.n_subcarriers = 1024;
    c.ofdm.symbols_per_window = 1400;
    c.ofdm.window_gap = 1400;
    c.ofdm.n_windows = 160;
    c.scene_gen.region_min = Vec3(-250, -250, 0);
    c.scene_gen.region_max = Vec3(250, 250, 0);
    c.scene_gen.tx_rx_min_separation_m = 100.0;
    c.scene_gen.min_target_standoff_m = 30.0;
    c.scene_gen.speed_min_kmh = 10.0;
    c.scene_gen.speed_max_kmh = 15.0;
    c.scene_gen.target_gains_db = {0.0, -3.0, -6.0};
    c.scene_gen.gain_jitter_db = 0.0;
    c.scene_gen.n_targets = 3;
    c.scene_gen.carrier_freq_hz = 5e9;
    c.scene_gen.noise_power = 300.0;
    c.cfar.target_pfa = 1e-4;
    c.cfar.scale.reset();
    c.graph.gamma_tau_bins = 9.0;
    c.graph.gamma_nu_bins = 9.0;
    c.graph.label_gate_tau_bins = 3.0;
    c.graph.label_gate_nu_bins = 3.0;
    return c;
}

ExperimentConfig profile_by_name(const std::string& name) {
    if (name == "desk") return desk_profile();
    if (name == "paper") return paper_profile();
    throw std::invalid_argument("config: unknown profile '" + name + "' (expected desk or paper)");
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_profile) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }
    check_keys(root, "top level",
               {"profile", "name", "seed", "n_scenes", "out_dir", "ofdm", "cfar", "graph", "train",
                "baseline", "scene_gen", "scenes"});

    std::string profile = base_profile;
    if (profile.empty() && root.contains("profile"))
        profile = root.at("profile").get<std::string>();
    if (profile.empty()) profile = "desk";
    ExperimentConfig c = profile_by_name(profile);

    opt(root, "name", c.name);
    opt(root, "seed", c.seed);
    opt(root, "n_scenes", c.n_scenes);
    if (root.contains("out_dir")) c.out_dir = root.at("out_dir").get<std::string>();
    if (root.contains("ofdm")) parse_ofdm(root.at("ofdm"), c.ofdm);
    if (root.contains("cfar")) parse_cfar(root.at("cfar"), c.cfar);
    if (root.contains("graph")) parse_graph(root.at("graph"), c.graph);
    if (root.contains("train")) parse_train(root.at("train"), c.train);
    if (root.contains("baseline")) parse_baseline(root.at("baseline"), c.baseline);
    if (root.contains("scene_gen")) parse_scene_gen(root.at("scene_gen"), c.scene_gen);
    if (root.contains("scenes")) {
        size_t i = 0;
        for (const json& s : root.at("scenes")) c.explicit_scenes.push_back(parse_scene(s, i++));
        c.n_scenes = static_cast<int>(c.explicit_scenes.size());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config_file(const std::filesystem::path& path,
                                  const std::string& base_profile) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    try {
        return parse_config(ss.str(), base_profile);
    } catch (const std::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

std::string config_to_json(const ExperimentConfig& c) {
    json root;
    root["name"] = c.name;
    root["seed"] = c.seed;
    root["n_scenes"] = c.n_scenes;
    root["out_dir"] = c.out_dir.string();
    root["ofdm"] = {{"subcarrier_spacing_hz", c.ofdm.subcarrier_spacing_hz},
                    {"n_subcarriers", c.ofdm.n_subcarriers},
                    {"symbols_per_window", c.ofdm.symbols_per_window},
                    {"window_gap", c.ofdm.window_gap},
                    {"n_windows", c.ofdm.n_windows},
                    {"symbol_duration_s", c.ofdm.symbol_duration_s}};
    root["cfar"] = {{"guard_delay", c.cfar.guard_delay},
                    {"guard_doppler", c.cfar.guard_doppler},
                    {"train_delay", c.cfar.train_delay},
                    {"train_doppler", c.cfar.train_doppler},
                    {"rank_fraction", c.cfar.rank_fraction},
                    {"zero_doppler_mask_halfwidth", c.cfar.zero_doppler_mask_halfwidth}};
    if (c.cfar.scale) root["cfar"]["scale"] = *c.cfar.scale;
    if (c.cfar.target_pfa) root["cfar"]["target_pfa"] = *c.cfar.target_pfa;
    root["graph"] = {{"gamma_tau_bins", c.graph.gamma_tau_bins},
                     {"gamma_nu_bins", c.graph.gamma_nu_bins},
                     {"label_gate_tau_bins", c.graph.label_gate_tau_bins},
                     {"label_gate_nu_bins", c.graph.label_gate_nu_bins}};
    root["train"] = {{"learning_rate", c.train.learning_rate},
                     {"history_window", c.train.history_window},
                     {"train_frac", c.train.train_frac},
                     {"val_frac", c.train.val_frac},
                     {"epochs", c.train.epochs},
                     {"patience", c.train.patience},
                     {"seed", c.train.seed},
                     {"class_weights", c.train.class_weights},
                     {"hidden_dims", c.train.hidden_dims},
                     {"decoder_hidden", c.train.decoder_hidden}};
    root["baseline"] = {{"dbscan", {{"eps", c.baseline.dbscan.eps}, {"min_pts", c.baseline.dbscan.min_pts}}},
                        {"gate", c.baseline.gate},
                        {"q_bins", c.baseline.q_bins},
                        {"max_misses", c.baseline.max_misses}};
    root["scene_gen"] = {{"region_min", vec3_to_json(c.scene_gen.region_min)},
                         {"region_max", vec3_to_json(c.scene_gen.region_max)},
                         {"tx_rx_min_separation_m", c.scene_gen.tx_rx_min_separation_m},
                         {"speed_min_kmh", c.scene_gen.speed_min_kmh},
                         {"speed_max_kmh", c.scene_gen.speed_max_kmh},
                         {"target_gains_db", c.scene_gen.target_gains_db},
                         {"gain_jitter_db", c.scene_gen.gain_jitter_db},
                         {"n_targets", c.scene_gen.n_targets},
                         {"min_target_standoff_m", c.scene_gen.min_target_standoff_m},
                         {"carrier_freq_hz", c.scene_gen.carrier_freq_hz},
                         {"noise_power", c.scene_gen.noise_power},
                         {"include_los_path", c.scene_gen.include_los_path},
                         {"los_gain_db", c.scene_gen.los_gain_db}};
    if (!c.explicit_scenes.empty()) {
        root["scenes"] = json::array();
        for (const Scene& s : c.explicit_scenes) root["scenes"].push_back(scene_to_json(s));
    }
    return root.dump(2) + "\n";
}

}  // namespace ddtrack
