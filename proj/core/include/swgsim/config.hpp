#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swgsim/guidance.hpp"
#include "swgsim/sampler.hpp"
#include "swgsim/schedule.hpp"
#include "swgsim/window.hpp"

namespace swg {

struct DatasetConfig {
    std::string preset;  // "triangle", "gaussian-cloud", "corner-pair", or empty
    // gaussian-cloud parameters
    std::size_t count = 32;
    double stddev = 1.0;
    int dim = 2;
    std::uint64_t seed = 1;
    // inline points
    std::optional<std::vector<std::vector<double>>> points;
    std::optional<std::vector<int>> labels;
    // external dataset json
    std::string file;
    // grid annotation (required for swg/mswg methods)
    std::optional<GridShape> grid;
};

struct DenoiserConfig {
    double delta_pos = 0.0;  // 0 selects the optimal denoiser
    double delta_neg = 0.0;
};

struct CombinedTermConfig {
    std::string method;  // "cfg", "wmg", "swg", "mswg"
    double weight = 0.0;
    double alpha = 1.0;
};

struct GuidanceConfig {
    std::string method = "none";        // none|cfg|wmg|swg|mswg|combined
    std::vector<double> weights = {0.0};  // one entry, or a sweep
    std::optional<StepInterval> interval;
    std::string mask_source = "none";  // "none" | "swg-overlap" | "explicit"
    std::optional<std::vector<std::uint8_t>> mask_bits;
    std::vector<CombinedTermConfig> terms;
};

struct SwgConfig {
    int crop = 0;        // k
    int n_windows = 0;   // N, a perfect square
    int crop_w = -1;     // l; defaults to k
};

// Declarative description of one experiment; validated before any compute.
struct ExperimentConfig {
    DatasetConfig dataset;
    NoiseSchedule schedule = NoiseSchedule::default_power();
    DenoiserConfig denoiser;
    GuidanceConfig guidance;
    std::optional<SwgConfig> swg_plan;
    ClassPolicy class_policy = ClassPolicyNone{};
    std::size_t ensemble = 100;
    std::uint64_t seed = 1;
    std::size_t dump_trajectories = 8;
    std::filesystem::path out_dir = "out";
    int threads = 1;
};

// Strict parse: unknown keys anywhere are rejected with their path.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Materialized experiment inputs shared by the runners.
struct ExperimentSetup {
    std::shared_ptr<const Dataset> dataset;
    std::optional<GridShape> grid;
    std::optional<WindowPlan> plan;
    DenoiserPtr positive;       // the rule's positive predictor at weight w
    DenoiserPtr oracle;         // optimal denoiser over the same dataset
    std::shared_ptr<const GridDenoiser> grid_positive;  // set for swg/mswg
};

ExperimentSetup build_setup(const ExperimentConfig& config);

// The guidance rule for one sweep weight. For "combined", weight scales
// every term's configured weight.
GuidanceRule build_rule(const ExperimentConfig& config, const ExperimentSetup& setup,
                        double weight);

}  // namespace swg
