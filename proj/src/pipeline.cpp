#include "ddtrack/pipeline.hpp"

#include "ddtrack/ddmap.hpp"
#include "ddtrack/io.hpp"
#include "ddtrack/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace ddtrack {

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kTrainStream = 0x74726169ULL;  // "trai"

std::string padded(int v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d", v);
    return buf;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir.string());
}

/// Per-scene graphs sorted by window, as written by the graph stage.
std::vector<DDGraph> load_scene_graphs(const StagePaths& paths, const ExperimentConfig& config,
                                       int scene) {
    std::vector<DDGraph> graphs;
    graphs.reserve(static_cast<size_t>(config.ofdm.n_windows));
    for (int k = 0; k < config.ofdm.n_windows; ++k)
        graphs.push_back(read_graph(paths.graph_txt(scene, k)));
    return graphs;
}

std::vector<DelayDoppler> truth_at_window(const Scene& scene, const OfdmParams& ofdm, int k) {
    std::vector<DelayDoppler> truth;
    truth.reserve(static_cast<size_t>(scene.n_targets()));
    for (int c = 0; c < scene.n_targets(); ++c)
        truth.push_back(ground_truth(scene, c, ofdm.window_start_time(k)));
    return truth;
}

/// Ground-truth lookup keyed by (scene, target, window) from the truth CSV.
std::map<std::tuple<int, int, int>, DelayDoppler> truth_index(const std::vector<TruthRow>& rows) {
    std::map<std::tuple<int, int, int>, DelayDoppler> index;
    for (const TruthRow& r : rows)
        index[{r.scene, r.target, r.window}] = {r.tau_s, r.nu_hz};
    return index;
}

std::vector<MaskedEntry> masked_entries(
    const std::vector<TrackRow>& tracks,
    const std::map<std::tuple<int, int, int>, DelayDoppler>& truth, int test_start) {
    std::vector<MaskedEntry> entries;
    for (const TrackRow& t : tracks) {
        if (t.point.window < test_start) continue;
        const auto it = truth.find({t.scene, t.point.target, t.point.window});
        if (it == truth.end())
            throw std::runtime_error("report: no ground truth for scene " +
                                     std::to_string(t.scene) + " target " +
                                     std::to_string(t.point.target) + " window " +
                                     std::to_string(t.point.window));
        MaskedEntry e;
        e.scene = t.scene;
        e.target = t.point.target;
        e.window = t.point.window;
        e.tau_hat_s = t.point.tau_hat_s;
        e.nu_hat_hz = t.point.nu_hat_hz;
        e.tau_gt_s = it->second.tau_s;
        e.nu_gt_hz = it->second.nu_hz;
        e.mask = t.point.available ? 1 : 0;
        entries.push_back(e);
    }
    return entries;
}

void write_track_plots(const StagePaths& paths, const ExperimentConfig& config,
                       const std::vector<TruthRow>& truth_rows,
                       const std::vector<TrackRow>& kf, const std::vector<TrackRow>& tgnn) {
    static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
    constexpr size_t kColorsLen = sizeof(kColors) / sizeof(kColors[0]);
    const double dtau = config.ofdm.delay_resolution();
    const double dnu = config.ofdm.doppler_resolution();

    for (int s = 0; s < config.n_scenes; ++s) {
        for (const bool doppler_axis : {false, true}) {
            std::vector<PlotSeries> series;
            for (int c = 0; c < config.n_targets(); ++c) {
                PlotSeries gt;
                gt.name = "target " + std::to_string(c) + " truth";
                gt.color = kColors[static_cast<size_t>(c) % kColorsLen];
                gt.dashed = true;
                for (const TruthRow& r : truth_rows)
                    if (r.scene == s && r.target == c) {
                        gt.x.push_back(r.window);
                        gt.y.push_back(doppler_axis ? r.nu_hz / dnu : r.tau_s / dtau);
                    }
                series.push_back(std::move(gt));
                for (const auto* tracks : {&kf, &tgnn}) {
                    PlotSeries tr;
                    tr.name = std::string("target ") + std::to_string(c) +
                              (tracks == &kf ? " KF" : " EvolveGCN");
                    tr.color = kColors[static_cast<size_t>(c) % kColorsLen];
                    tr.dashed = tracks != &kf;
                    for (const TrackRow& r : *tracks)
                        if (r.scene == s && r.point.target == c && r.point.available) {
                            tr.x.push_back(r.point.window);
                            tr.y.push_back(doppler_axis ? r.point.nu_hat_hz / dnu
                                                        : r.point.tau_hat_s / dtau);
                        }
                    series.push_back(std::move(tr));
                }
            }
            const std::string what = doppler_axis ? "doppler" : "delay";
            write_svg_plot(paths.report_dir() / ("tracks_scene_" + std::to_string(s) + "_" +
                                                 what + ".svg"),
                           "Scene " + std::to_string(s) + " " + what + " tracks", "window",
                           what + " (bins)", series);
        }
    }
}

}  // namespace

fs::path StagePaths::ddmap_bin(int s, int k) const {
    return scene_dir(s) / ("ddmap_" + padded(k) + ".bin");
}

fs::path StagePaths::graph_txt(int s, int k) const {
    return scene_dir(s) / ("graph_" + padded(k) + ".txt");
}

int test_start_window(const TrainConfig& train, int k_total) {
    return train.n_train_windows(k_total) + train.n_val_windows(k_total);
}

void cmd_simulate(const ExperimentConfig& config) {
    config.validate();
    const StagePaths paths(config);
    ensure_dir(paths.root);
    {
        std::ofstream os(paths.config_json());
        if (!os) throw std::runtime_error("cannot write " + paths.config_json().string());
        os << config_to_json(config);
    }

    const std::vector<Scene> scenes = config.make_scenes();
    std::vector<TruthRow> truth_rows;
    for (int s = 0; s < static_cast<int>(scenes.size()); ++s) {
        ensure_dir(paths.scene_dir(s));
        for (int k = 0; k < config.ofdm.n_windows; ++k) {
            const CfrWindow cfr = synthesize_cfr(scenes[static_cast<size_t>(s)], config.ofdm, k);
            const DDMap map = delay_doppler_map(cfr, config.ofdm);
            write_complex_matrix(paths.ddmap_bin(s, k), map.complex_map, k, kKindDDMap);
            const auto truth = truth_at_window(scenes[static_cast<size_t>(s)], config.ofdm, k);
            for (int c = 0; c < static_cast<int>(truth.size()); ++c)
                truth_rows.push_back(
                    {s, c, k, truth[static_cast<size_t>(c)].tau_s,
                     truth[static_cast<size_t>(c)].nu_hz});
        }
    }
    // fixed (scene, target, window) ordering keyed by target first for readability
    std::sort(truth_rows.begin(), truth_rows.end(), [](const TruthRow& a, const TruthRow& b) {
        return std::tie(a.scene, a.target, a.window) < std::tie(b.scene, b.target, b.window);
    });
    write_truth_csv(paths.truth_csv(), truth_rows);
}

void cmd_detect(const ExperimentConfig& config) {
    config.validate();
    const StagePaths paths(config);
    for (int s = 0; s < config.n_scenes; ++s) {
        std::vector<std::vector<Detection>> per_window(
            static_cast<size_t>(config.ofdm.n_windows));
        for (int k = 0; k < config.ofdm.n_windows; ++k) {
            int stored_k = 0;
            MatXc complex_map = read_complex_matrix(paths.ddmap_bin(s, k), stored_k, kKindDDMap);
            if (stored_k != k)
                throw std::runtime_error("detect: window index mismatch in " +
                                         paths.ddmap_bin(s, k).string());
            const DDMap map = ddmap_from_complex(std::move(complex_map), k, config.ofdm);
            per_window[static_cast<size_t>(k)] = os_cfar_2d(map, config.cfar);
        }
        write_detections_csv(paths.detections_csv(s), per_window);
    }
}

void cmd_graph(const ExperimentConfig& config) {
    config.validate();
    const StagePaths paths(config);
    const std::vector<Scene> scenes = config.make_scenes();
    for (int s = 0; s < config.n_scenes; ++s) {
        auto per_window = read_detections_csv(paths.detections_csv(s));
        per_window.resize(static_cast<size_t>(config.ofdm.n_windows));
        for (int k = 0; k < config.ofdm.n_windows; ++k) {
            DDGraph graph =
                build_graph(per_window[static_cast<size_t>(k)], k, config.gamma_tau_s(),
                            config.gamma_nu_hz(), config.ofdm.symbols_per_window);
            label_nodes(graph, truth_at_window(scenes[static_cast<size_t>(s)], config.ofdm, k),
                        config.label_gate_tau_s(), config.label_gate_nu_hz());
            write_graph(paths.graph_txt(s, k), graph, config.gamma_tau_s(), config.gamma_nu_hz());
        }
    }
}

void cmd_train(const ExperimentConfig& config) {
    config.validate();
    const StagePaths paths(config);
    for (int s = 0; s < config.n_scenes; ++s) {
        const std::vector<DDGraph> graphs = load_scene_graphs(paths, config, s);
        TrainConfig train_config = config.train;
        train_config.seed = mix_seed(config.seed ^ config.train.seed, kTrainStream,
                                     static_cast<std::uint64_t>(s));
        EvolveGcnModel model =
            init_model(kFeatureDim, train_config, config.n_targets() + 1);
        const TrainReport report = train(model, graphs);
        save_model_file(paths.model_txt(s), model);

        std::vector<std::vector<std::string>> rows;
        for (size_t e = 0; e < report.train_loss.size(); ++e)
            rows.push_back({std::to_string(e), format_g17(report.train_loss[e]),
                            format_g17(report.val_loss[e]),
                            std::to_string(static_cast<int>(e) == report.best_epoch ? 1 : 0)});
        write_csv(paths.train_history_csv(s), "epoch,train_loss,val_loss,best", rows);
    }
}

void cmd_eval(const ExperimentConfig& config) {
    config.validate();
    const StagePaths paths(config);
    std::vector<TrackRow> rows;
    for (int s = 0; s < config.n_scenes; ++s) {
        const std::vector<DDGraph> graphs = load_scene_graphs(paths, config, s);
        const EvolveGcnModel model = load_model_file(paths.model_txt(s));
        if (model.n_class != config.n_targets() + 1)
            throw std::runtime_error("eval: model has " + std::to_string(model.n_class) +
                                     " classes but the config expects " +
                                     std::to_string(config.n_targets() + 1));
        const auto predicted = predict(model, graphs);
        for (size_t g = 0; g < graphs.size(); ++g) {
            const auto estimates =
                estimate_from_labels(graphs[g], predicted[g], config.n_targets());
            for (int c = 0; c < config.n_targets(); ++c) {
                TrackRow row;
                row.scene = s;
                row.point.target = c;
                row.point.window = graphs[g].window_index;
                if (estimates[static_cast<size_t>(c)]) {
                    row.point.tau_hat_s = estimates[static_cast<size_t>(c)]->tau_s;
                    row.point.nu_hat_hz = estimates[static_cast<size_t>(c)]->nu_hz;
                    row.point.available = true;
                }
                rows.push_back(row);
            }
        }
    }
    write_tracks_csv(paths.tgnn_tracks_csv(), rows);
}

void cmd_baseline(const ExperimentConfig& config) {
    config.validate();
    const StagePaths paths(config);
    const std::vector<Scene> scenes = config.make_scenes();
    std::vector<TrackRow> rows;
    for (int s = 0; s < config.n_scenes; ++s) {
        auto per_window = read_detections_csv(paths.detections_csv(s));
        per_window.resize(static_cast<size_t>(config.ofdm.n_windows));
        const Scene& scene = scenes[static_cast<size_t>(s)];
        const KfModel model = KfModel::from_system(
            config.ofdm.window_interval(), scene.carrier_freq_hz, config.ofdm.delay_resolution(),
            config.ofdm.doppler_resolution(), config.baseline.q_bins);
        const TrackRecord record = run_baseline(per_window, truth_at_window(scene, config.ofdm, 0),
                                                model, config.baseline);
        for (const TrackPoint& p : record.points) rows.push_back({s, p});
    }
    write_tracks_csv(paths.kf_tracks_csv(), rows);
}

void cmd_report(const ExperimentConfig& config) {
    config.validate();
    const StagePaths paths(config);
    ensure_dir(paths.report_dir());

    const std::vector<TruthRow> truth_rows = read_truth_csv(paths.truth_csv());
    const auto truth = truth_index(truth_rows);
    const std::vector<TrackRow> kf = read_tracks_csv(paths.kf_tracks_csv());
    const std::vector<TrackRow> tgnn = read_tracks_csv(paths.tgnn_tracks_csv());
    const int test_start = test_start_window(config.train, config.ofdm.n_windows);

    const auto kf_entries = masked_entries(kf, truth, test_start);
    const auto tgnn_entries = masked_entries(tgnn, truth, test_start);
    const NmseResult kf_nmse = nmse(kf_entries);
    const NmseResult tgnn_nmse = nmse(tgnn_entries);

    write_csv(paths.nmse_csv(), "method,nmse_tau,nmse_nu",
              {{"kf", format_g17(kf_nmse.tau), format_g17(kf_nmse.nu)},
               {"evolvegcn", format_g17(tgnn_nmse.tau), format_g17(tgnn_nmse.nu)}});

    const double dtau = config.ofdm.delay_resolution();
    const double dnu = config.ofdm.doppler_resolution();
    const auto kf_rmse = rmse_per_target(kf_entries, dtau, dnu);
    const auto tgnn_rmse = rmse_per_target(tgnn_entries, dtau, dnu);
    std::vector<std::vector<std::string>> rmse_rows;
    for (const auto* per_target : {&kf_rmse, &tgnn_rmse})
        for (const TargetRmse& r : *per_target)
            rmse_rows.push_back({per_target == &kf_rmse ? "kf" : "evolvegcn",
                                 std::to_string(r.target), format_g17(r.tau_bins),
                                 format_g17(r.nu_bins), format_g17(r.tau_s), format_g17(r.nu_hz),
                                 std::to_string(r.n_valid)});
    write_csv(paths.rmse_csv(),
              "method,target,rmse_tau_bins,rmse_nu_bins,rmse_tau_s,rmse_nu_hz,n_valid",
              rmse_rows);

    std::vector<BarGroup> tau_groups, nu_groups;
    for (size_t i = 0; i < kf_rmse.size(); ++i) {
        const std::string label = "target " + std::to_string(kf_rmse[i].target);
        const double tgnn_tau = i < tgnn_rmse.size() ? tgnn_rmse[i].tau_bins : 0.0;
        const double tgnn_nu = i < tgnn_rmse.size() ? tgnn_rmse[i].nu_bins : 0.0;
        tau_groups.push_back({label, {kf_rmse[i].tau_bins, tgnn_tau}});
        nu_groups.push_back({label, {kf_rmse[i].nu_bins, tgnn_nu}});
    }
    write_svg_bars(paths.report_dir() / "rmse_delay.svg", "Delay RMSE per target (bins)",
                   {"KF", "EvolveGCN"}, tau_groups);
    write_svg_bars(paths.report_dir() / "rmse_doppler.svg", "Doppler RMSE per target (bins)",
                   {"KF", "EvolveGCN"}, nu_groups);
    write_track_plots(paths, config, truth_rows, kf, tgnn);
}

void cmd_run_all(const ExperimentConfig& config) {
    cmd_simulate(config);
    cmd_detect(config);
    cmd_graph(config);
    cmd_train(config);
    cmd_eval(config);
    cmd_baseline(config);
    cmd_report(config);
}

}  // namespace ddtrack
