#include <CLI11.hpp>

#include <iostream>

#include "footnav/cli.hpp"

using namespace footnav;

namespace {

RunConfig load_run_config(const std::string& path, std::size_t jobs, bool diagnostics) {
    KeyValueConfig kv = path.empty() ? KeyValueConfig{} : KeyValueConfig::load(path);
    if (jobs > 0) kv.set("jobs", std::to_string(jobs));
    if (diagnostics) kv.set("diagnostics", "true");
    return RunConfig::from(kv);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Foot-mounted IMU reference trajectories"};
    app.require_subcommand(1);

    std::string root, out, config_path;
    std::size_t jobs = 0;
    bool diagnostics = false;

    auto* rec = app.add_subcommand("reconstruct", "reconstruct the reference trajectory of every experiment");
    rec->add_option("root", root, "directory holding the experiment folders")->required();
    rec->add_option("-o,--out", out, "output directory (default: each reference folder)");
    rec->add_option("-c,--config", config_path, "run configuration (key: value)");
    rec->add_option("-j,--jobs", jobs, "experiments processed in parallel");
    rec->add_flag("--diagnostics", diagnostics, "write covariance trace and gate per foot");

    std::string params_path;
    std::uint64_t seed = 0;
    auto* syn = app.add_subcommand("synth", "generate a synthetic experiment");
    syn->add_option("params", params_path, "gait parameter file (key: value)")->required();
    syn->add_option("out", out, "output root")->required();
    syn->add_option("--seed", seed, "overrides the seed of the parameter file");

    auto* cmp = app.add_subcommand("compare-steps", "compare smartphone and reference step durations");
    cmp->add_option("root", root, "experiment directory")->required();
    cmp->add_option("-o,--out", out, "output directory (default: the reference folder)");
    cmp->add_option("-c,--config", config_path, "run configuration (key: value)");

    auto* syc = app.add_subcommand("sync", "report (and optionally apply) smartphone time shifts");
    syc->add_option("root", root, "experiment directory")->required();
    syc->add_option("-o,--out", out, "write synchronized copies here");

    auto* val = app.add_subcommand("validate", "re-run the quality gate on published reference files");
    val->add_option("root", root, "directory holding the experiment folders")->required();
    val->add_option("-c,--config", config_path, "run configuration (key: value)");

    CLI11_PARSE(app, argc, argv);

    const auto out_opt = out.empty() ? std::nullopt : std::optional<fs::path>(out);
    try {
        if (*rec) {
            ReconstructOptions opt{root, out_opt, load_run_config(config_path, jobs, diagnostics)};
            return cmd_reconstruct(opt, std::cout, std::cerr);
        }
        if (*syn) {
            KeyValueConfig kv = KeyValueConfig::load(params_path);
            if (seed > 0) kv.set("seed", std::to_string(seed));
            return cmd_synth(SynthConfig::from(kv), out, std::cout, std::cerr);
        }
        if (*cmp) return cmd_compare_steps(root, out_opt, load_run_config(config_path, 0, false), std::cout, std::cerr);
        if (*syc) return cmd_sync(root, out_opt, std::cout, std::cerr);
        if (*val) return cmd_validate(root, load_run_config(config_path, 0, false), std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
