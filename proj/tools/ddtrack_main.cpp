#include "ddtrack/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <iostream>
#include <string>

namespace {

using StageFn = std::function<void(const ddtrack::ExperimentConfig&)>;

struct Options {
    std::string config_path;
    std::string out_dir;
    std::string profile;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool out_set = false;
};

ddtrack::ExperimentConfig make_config(const Options& opt) {
    ddtrack::ExperimentConfig config =
        opt.config_path.empty()
            ? ddtrack::profile_by_name(opt.profile.empty() ? "desk" : opt.profile)
            : ddtrack::load_config_file(opt.config_path, opt.profile);
    if (opt.seed_set) config.seed = opt.seed;
    if (opt.out_set) config.out_dir = opt.out_dir;
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bistatic delay-Doppler multi-target tracking pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    Options opt;
    app.add_option("--config", opt.config_path, "JSON config file")
        ->check(CLI::ExistingFile);
    app.add_option("--out", opt.out_dir, "output directory (overrides config)")
        ->each([&](const std::string&) { opt.out_set = true; });
    app.add_option("--seed", opt.seed, "master seed (overrides config)")
        ->each([&](const std::string&) { opt.seed_set = true; });
    app.add_option("--profile", opt.profile, "base profile")
        ->check(CLI::IsMember({"paper", "desk"}));

    const std::pair<const char*, StageFn> stages[] = {
        {"simulate", ddtrack::cmd_simulate}, {"detect", ddtrack::cmd_detect},
        {"graph", ddtrack::cmd_graph},       {"train", ddtrack::cmd_train},
        {"eval", ddtrack::cmd_eval},         {"baseline", ddtrack::cmd_baseline},
        {"report", ddtrack::cmd_report},     {"run-all", ddtrack::cmd_run_all},
    };
    for (const auto& [name, fn] : stages) app.add_subcommand(name, std::string("run the ") + name + " stage");

    CLI11_PARSE(app, argc, argv);

    const std::string stage = app.get_subcommands().front()->get_name();
    try {
        const ddtrack::ExperimentConfig config = make_config(opt);
        for (const auto& [name, fn] : stages)
            if (stage == name) {
                fn(config);
                return 0;
            }
        std::cerr << "stage " << stage << ": not implemented\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "stage " << stage << ": " << e.what() << '\n';
        return 1;
    }
}
