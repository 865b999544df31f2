#pragma once

#include "ddtrack/config.hpp"

#include <filesystem>

namespace ddtrack {

/// File layout under the configured output directory.
struct StagePaths {
    std::filesystem::path root;
    explicit StagePaths(const ExperimentConfig& config) : root(config.out_dir) {}

    std::filesystem::path config_json() const { return root / "config.json"; }
    std::filesystem::path truth_csv() const { return root / "ground_truth.csv"; }
    std::filesystem::path scene_dir(int s) const {
        return root / ("scene_" + std::to_string(s));
    }
    std::filesystem::path ddmap_bin(int s, int k) const;
    std::filesystem::path detections_csv(int s) const { return scene_dir(s) / "detections.csv"; }
    std::filesystem::path graph_txt(int s, int k) const;
    std::filesystem::path model_txt(int s) const { return scene_dir(s) / "model.txt"; }
    std::filesystem::path train_history_csv(int s) const {
        return scene_dir(s) / "train_history.csv";
    }
    std::filesystem::path tgnn_tracks_csv() const { return root / "track_tgnn.csv"; }
    std::filesystem::path kf_tracks_csv() const { return root / "track_kf.csv"; }
    std::filesystem::path report_dir() const { return root / "report"; }
    std::filesystem::path nmse_csv() const { return report_dir() / "nmse.csv"; }
    std::filesystem::path rmse_csv() const { return report_dir() / "rmse.csv"; }
};

/// First test-split window index for a K-window sequence.
int test_start_window(const TrainConfig& train, int k_total);

void cmd_simulate(const ExperimentConfig& config);
void cmd_detect(const ExperimentConfig& config);
void cmd_graph(const ExperimentConfig& config);
void cmd_train(const ExperimentConfig& config);
void cmd_eval(const ExperimentConfig& config);
void cmd_baseline(const ExperimentConfig& config);
void cmd_report(const ExperimentConfig& config);
void cmd_run_all(const ExperimentConfig& config);

}  // namespace ddtrack
