// swgsim - config-driven guidance experiments on analytic toy diffusion
// models. Subcommands: toy, swg-demo, sweep (config-based) and metrics
// (image statistics). Log level comes from the SWGSIM_LOG env var.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swgsim/errors.hpp"
#include "swgsim/experiment.hpp"
#include "swgsim/log.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config) {
    auto* config = cmd->add_option("--config", opts.config_path, "experiment config (json)");
    if (needs_config) {
        config->required()->check(CLI::ExistingFile);
    }
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", opts.seed, "base seed (overrides config)");
    cmd->add_option("--threads", opts.threads, "worker threads (overrides config)");
}

swg::ExperimentConfig load_config(const CommonOpts& opts) {
    auto config = swg::load_experiment_config(opts.config_path);
    if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
    if (opts.seed) config.seed = *opts.seed;
    if (opts.threads) config.threads = *opts.threads;
    return config;
}

void print_sweep(const std::vector<swg::WeightRunStats>& rows) {
    for (const auto& s : rows) {
        std::printf("w=%-8g endpoint_error=%-12g matched_ref=%-12g unstable=%.3f%s\n",
                    s.weight, s.endpoint_error_nearest, s.endpoint_error_matched,
                    s.instability_rate, s.unstable_dominated ? "  [unstable-dominated]" : "");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"guidance experiments on analytic finite-dataset diffusion models"};
    app.require_subcommand(1);

    CommonOpts toy_opts, demo_opts, sweep_opts, metrics_opts;
    std::vector<std::string> image_paths;

    auto* toy = app.add_subcommand("toy", "2-D toy trajectories, ensembles and plots");
    add_common(toy, toy_opts, true);

    auto* demo = app.add_subcommand("swg-demo", "sliding-window guidance demonstration");
    add_common(demo, demo_opts, true);

    auto* sweep = app.add_subcommand("sweep", "guidance-weight sweep");
    add_common(sweep, sweep_opts, true);

    auto* metrics = app.add_subcommand("metrics", "saturation/contrast statistics");
    metrics->add_option("images", image_paths, "image files (PPM; PNG if enabled)")
        ->required();
    add_common(metrics, metrics_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (toy->parsed()) {
            const auto result = swg::run_toy(load_config(toy_opts));
            print_sweep(result.per_weight);
            std::printf("artifacts in %s\n", result.out_dir.string().c_str());
        } else if (demo->parsed()) {
            const auto result = swg::run_swg_demo(load_config(demo_opts));
            std::printf("plan: k=%d l=%d N=%zu s=%d r=%g\n", result.plan.crop_h,
                        result.plan.crop_w, result.plan.rects.size(),
                        result.plan.stride_rows, result.plan.overlap_ratio);
            print_sweep(result.per_weight);
            std::printf("artifacts in %s\n", result.out_dir.string().c_str());
        } else if (sweep->parsed()) {
            const auto result = swg::run_sweep(load_config(sweep_opts));
            print_sweep(result.per_weight);
            std::printf("artifacts in %s\n", result.out_dir.string().c_str());
        } else if (metrics->parsed()) {
            std::vector<std::filesystem::path> paths(image_paths.begin(),
                                                     image_paths.end());
            const auto out =
                metrics_opts.out_dir.empty() ? "out" : metrics_opts.out_dir;
            const auto result = swg::run_metrics(paths, out);
            std::printf("%zu image(s) processed, %zu failed; stats in %s\n",
                        result.n_ok, result.n_failed, result.csv_path.string().c_str());
            if (result.n_ok == 0) {
                return kExitRuntimeError;
            }
        }
    } catch (const swg::ValidationError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const swg::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitRuntimeError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntimeError;
    }
    return kExitOk;
}
