#pragma once

#include "ddtrack/cfar.hpp"
#include "ddtrack/channel.hpp"
#include "ddtrack/evolvegcn.hpp"
#include "ddtrack/scene.hpp"
#include "ddtrack/tracker.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ddtrack {

/// Graph-construction thresholds, in bins of the delay/Doppler grid.
struct GraphParams {
    double gamma_tau_bins = 9.0;       // edge threshold
    double gamma_nu_bins = 9.0;
    double label_gate_tau_bins = 9.0;  // node-labeling gate around ground truth
    double label_gate_nu_bins = 9.0;
    void validate() const;
};

struct ExperimentConfig {
    std::string name = "desk";
    std::uint64_t seed = 1;
    int n_scenes = 4;
    std::filesystem::path out_dir = "out";
    OfdmParams ofdm;
    OsCfarParams cfar;
    GraphParams graph;
    TrainConfig train;
    BaselineParams baseline;
    SceneGenParams scene_gen;
    std::vector<Scene> explicit_scenes;  // when nonempty, used instead of generation

    void validate() const;
    /// Explicit scenes, or n_scenes random draws seeded from the master seed.
    std::vector<Scene> make_scenes() const;
    double gamma_tau_s() const;
    double gamma_nu_hz() const;
    double label_gate_tau_s() const;
    double label_gate_nu_hz() const;
    int n_targets() const;
};

/// CI-scale profile: 256 x 256 grid, 30 windows, 4 random 3-target scenes.
ExperimentConfig desk_profile();
/// Full-scale profile mirroring the reference system parameters
/// (15 kHz spacing, 1024 subcarriers, 1400-symbol windows, 5 GHz carrier).
ExperimentConfig paper_profile();
ExperimentConfig profile_by_name(const std::string& name);

/// Parse a JSON config text over a base profile. Every present key overrides
/// the base; unknown keys are rejected. The optional top-level "profile" key
/// selects the base unless base_profile is nonempty (CLI override).
ExperimentConfig parse_config(const std::string& json_text, const std::string& base_profile = "");
ExperimentConfig load_config_file(const std::filesystem::path& path,
                                  const std::string& base_profile = "");
/// Serialize the full effective config (all keys explicit).
std::string config_to_json(const ExperimentConfig& config);

}  // namespace ddtrack
