#pragma once

#include <filesystem>
#include <vector>

#include "swgsim/config.hpp"
#include "swgsim/metrics.hpp"

namespace swg {

// Summary row for one guidance weight of a sweep.
struct WeightRunStats {
    double weight = 0.0;
    double endpoint_error_nearest = 0.0;
    double endpoint_error_matched = 0.0;
    double instability_rate = 0.0;
    std::size_t stable_count = 0;
    bool unstable_dominated = false;  // > 50% unstable
};

struct ToyRunResult {
    std::vector<WeightRunStats> per_weight;
    std::filesystem::path out_dir;
};

// Reproduces the 2-D toy experiments: for every configured weight, runs the
// ensemble, dumps per-trajectory CSVs, the endpoint ensemble CSV, the
// trajectory report CSV and a scatter/trajectory SVG, plus one sweep.csv
// keyed by (method, w). Requires a 2-D dataset.
ToyRunResult run_toy(const ExperimentConfig& config);

// Lean weight sweep: ensemble statistics per weight into sweep.csv plus an
// error-vs-weight SVG curve. Works for any dataset dimension.
ToyRunResult run_sweep(const ExperimentConfig& config);

struct SwgDemoResult {
    WindowPlan plan;
    OverlapField field;
    std::vector<WeightRunStats> per_weight;  // configured weights plus w = -1
    std::filesystem::path out_dir;
};

// Sliding-window demonstration on a grid dataset: writes the overlap-count
// grid, the mask grid (CSV + PGM), a probe eps_pos/eps_neg field dump, and
// a guided-vs-unguided comparison sweep that includes the pure-negative
// run (w = -1).
SwgDemoResult run_swg_demo(const ExperimentConfig& config);

struct MetricsRunResult {
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;
    std::filesystem::path csv_path;
};

// Per-image saturation and RMS contrast plus an aggregate row. Unreadable
// files produce per-file error rows; the run only counts as failed when
// every file fails.
MetricsRunResult run_metrics(const std::vector<std::filesystem::path>& paths,
                             const std::filesystem::path& out_dir);

}  // namespace swg
