#include "swgsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "swgsim/csv.hpp"
#include "swgsim/errors.hpp"
#include "swgsim/log.hpp"
#include "swgsim/rng.hpp"
#include "swgsim/svg.hpp"

namespace swg {

namespace {

namespace fs = std::filesystem;

// "w5", "w0.5", "w-1" - weight tag usable in filenames.
std::string weight_tag(double w) {
    return "w" + format_double(w);
}

// Reference rule: the optimal denoiser with the same conditioning as the
// configured positive, no guidance.
GuidanceRule reference_rule(const ExperimentConfig& config, const ExperimentSetup& setup) {
    DenoiserSpec spec;
    spec.kind = DenoiserKind::Optimal;
    spec.dataset = setup.dataset;
    spec.conditioning = config.guidance.method == "cfg" ? Conditioning::FromCall
                                                        : Conditioning::Unconditional;
    GuidanceRule rule;
    rule.positive = make_denoiser(std::move(spec));
    return rule;
}

WeightRunStats summarize_run(double weight, const std::vector<Trajectory>& ensemble,
                             const std::vector<Trajectory>& reference,
                             const Dataset& dataset) {
    WeightRunStats stats;
    stats.weight = weight;
    stats.instability_rate = instability_rate(ensemble);
    stats.unstable_dominated = stats.instability_rate > 0.5;
    for (const auto& traj : ensemble) {
        if (!traj.unstable) ++stats.stable_count;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    stats.endpoint_error_nearest =
        stats.stable_count > 0 ? endpoint_error(ensemble, dataset) : nan;
    try {
        stats.endpoint_error_matched = endpoint_error_matched(ensemble, reference);
    } catch (const UndefinedMetricError&) {
        stats.endpoint_error_matched = nan;
    }
    if (stats.unstable_dominated) {
        SWG_LOG_WARN("run at w=%s is unstable-dominated (%.0f%% unstable)",
                     format_double(weight).c_str(), 100.0 * stats.instability_rate);
    }
    return stats;
}

void write_sweep_csv(const fs::path& path, const std::string& method,
                     const std::vector<WeightRunStats>& rows) {
    CsvWriter csv(path, {"method", "w", "endpoint_error", "matched_reference_error",
                         "instability_rate", "stable_count", "warning"});
    for (const auto& s : rows) {
        auto row = csv.row();
        row.add(method)
            .add(s.weight)
            .add(s.endpoint_error_nearest)
            .add(s.endpoint_error_matched)
            .add(s.instability_rate)
            .add(s.stable_count)
            .add(s.unstable_dominated ? "unstable-dominated" : "");
    }
}

void plot_toy_panel(const fs::path& path, const Dataset& dataset,
                    const std::vector<Trajectory>& ensemble, std::size_t n_curves) {
    // View focused on the data region, Fig.-2-like; trajectories enter from
    // far outside and get clipped by the viewport.
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (double v : dataset.point(i)) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    const double pad = 0.8 * (hi - lo) + 0.1;
    SvgCanvas canvas(480, 480, lo - pad, hi + pad, lo - pad, hi + pad);

    const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
    for (std::size_t j = 0; j < std::min(n_curves, ensemble.size()); ++j) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(ensemble[j].records.size());
        for (const auto& rec : ensemble[j].records) {
            pts.emplace_back(rec.x[0], rec.x[1]);
        }
        canvas.polyline(pts, palette[j % 5], 1.0, 0.6);
    }
    for (const auto& traj : ensemble) {
        if (traj.unstable) continue;
        canvas.circle(traj.endpoint[0], traj.endpoint[1], 1.5, "#444444", 0.5);
    }
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto p = dataset.point(i);
        canvas.circle(p[0], p[1], 5.0, "#000000");
    }
    canvas.save(path);
}

void plot_error_curve(const fs::path& path, const std::vector<WeightRunStats>& rows) {
    double w_lo = rows.front().weight, w_hi = rows.front().weight;
    double e_hi = 0.0;
    for (const auto& s : rows) {
        w_lo = std::min(w_lo, s.weight);
        w_hi = std::max(w_hi, s.weight);
        if (std::isfinite(s.endpoint_error_nearest)) {
            e_hi = std::max(e_hi, s.endpoint_error_nearest);
        }
    }
    if (w_hi == w_lo) w_hi = w_lo + 1.0;
    if (e_hi == 0.0) e_hi = 1.0;
    SvgCanvas canvas(480, 320, w_lo, w_hi, 0.0, 1.1 * e_hi);
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : rows) {
        if (std::isfinite(s.endpoint_error_nearest)) {
            pts.emplace_back(s.weight, s.endpoint_error_nearest);
            canvas.circle(s.weight, s.endpoint_error_nearest, 3.0, "#d62728");
        }
    }
    canvas.polyline(pts, "#d62728", 1.5);
    canvas.text(w_lo, 1.05 * e_hi, "endpoint error vs guidance weight");
    canvas.save(path);
}

std::function<std::optional<int>(std::size_t)> class_fn(const ExperimentConfig& config,
                                                        const ExperimentSetup& setup) {
    if (std::holds_alternative<ClassPolicyNone>(config.class_policy)) {
        return {};
    }
    const ClassPolicy policy = config.class_policy;
    const auto dataset = setup.dataset;
    return [policy, dataset](std::size_t j) {
        return class_for_trajectory(policy, *dataset, j);
    };
}

std::vector<Trajectory> run_weight(const ExperimentConfig& config,
                                   const ExperimentSetup& setup,
                                   const std::vector<double>& levels, double weight) {
    const GuidanceRule rule = build_rule(config, setup, weight);
    return sample_ensemble_levels(rule, levels, config.ensemble, config.seed,
                                  class_fn(config, setup), config.threads);
}

struct RunContext {
    ExperimentSetup setup;
    std::vector<double> levels;
    std::vector<Trajectory> reference;
};

RunContext prepare_run(const ExperimentConfig& config) {
    RunContext ctx;
    ctx.setup = build_setup(config);
    ctx.levels = discretize(config.schedule);
    ctx.reference = sample_ensemble_levels(reference_rule(config, ctx.setup), ctx.levels,
                                           config.ensemble, config.seed,
                                           class_fn(config, ctx.setup), config.threads);
    return ctx;
}

}  // namespace

ToyRunResult run_toy(const ExperimentConfig& config) {
    if (config.dataset.grid || config.dataset.preset == "corner-pair") {
        throw ValidationError("run_toy expects a plain (non-grid) dataset");
    }
    RunContext ctx = prepare_run(config);
    if (ctx.setup.dataset->dim() != 2) {
        throw ValidationError("run_toy needs a 2-D dataset");
    }
    fs::create_directories(config.out_dir);

    ToyRunResult result;
    result.out_dir = config.out_dir;
    for (double w : config.guidance.weights) {
        const auto ensemble = run_weight(config, ctx.setup, ctx.levels, w);
        const std::string tag = weight_tag(w);

        const std::size_t dumps = std::min(config.dump_trajectories, ensemble.size());
        for (std::size_t j = 0; j < dumps; ++j) {
            write_trajectory_csv(ensemble[j], config.out_dir /
                                                  ("trajectory_" + tag + "_" +
                                                   std::to_string(j) + ".csv"));
        }
        write_ensemble_csv(ensemble, *ctx.setup.dataset,
                           config.out_dir / ("ensemble_" + tag + ".csv"));

        const auto stats = summarize_run(w, ensemble, ctx.reference, *ctx.setup.dataset);
        if (stats.stable_count > 0) {
            const auto report =
                build_report(ensemble, *ctx.setup.oracle, *ctx.setup.dataset);
            write_report_csv(report, config.out_dir / ("report_" + tag + ".csv"));
        }
        plot_toy_panel(config.out_dir / ("toy_" + tag + ".svg"), *ctx.setup.dataset,
                       ensemble, config.dump_trajectories);
        result.per_weight.push_back(stats);
    }
    write_sweep_csv(config.out_dir / "sweep.csv", config.guidance.method,
                    result.per_weight);
    return result;
}

ToyRunResult run_sweep(const ExperimentConfig& config) {
    RunContext ctx = prepare_run(config);
    fs::create_directories(config.out_dir);

    ToyRunResult result;
    result.out_dir = config.out_dir;
    for (double w : config.guidance.weights) {
        const auto ensemble = run_weight(config, ctx.setup, ctx.levels, w);
        result.per_weight.push_back(
            summarize_run(w, ensemble, ctx.reference, *ctx.setup.dataset));
    }
    write_sweep_csv(config.out_dir / "sweep.csv", config.guidance.method,
                    result.per_weight);
    plot_error_curve(config.out_dir / "sweep.svg", result.per_weight);
    return result;
}

SwgDemoResult run_swg_demo(const ExperimentConfig& config) {
    if (config.guidance.method != "swg" && config.guidance.method != "mswg") {
        throw ValidationError("swg-demo needs guidance.method swg or mswg");
    }
    RunContext ctx = prepare_run(config);
    if (!ctx.setup.grid || !ctx.setup.plan || !ctx.setup.grid_positive) {
        throw ValidationError("swg-demo needs a grid dataset and window plan");
    }
    fs::create_directories(config.out_dir);

    SwgDemoResult result;
    result.out_dir = config.out_dir;
    result.plan = *ctx.setup.plan;
    result.field = overlap_field(*ctx.setup.grid, result.plan);

    write_counts_csv(result.field, config.out_dir / "overlap_counts.csv");
    write_mask_pgm(result.field, config.out_dir / "mask.pgm");
    {
        // mask as a 0/1 grid CSV
        OverlapField mask_grid = result.field;
        for (std::size_t i = 0; i < mask_grid.counts.size(); ++i) {
            mask_grid.counts[i] = mask_grid.mask[i];
        }
        write_counts_csv(mask_grid, config.out_dir / "mask.csv");
    }

    // Probe field dump: first dataset point noised at sigma = 1.
    {
        const double sigma_probe = 1.0;
        const auto& grid = *ctx.setup.grid;
        const auto& den = *ctx.setup.grid_positive;
        Rng rng(derive_seed(config.seed, 0x9e0bULL));
        std::vector<double> x(den.dim());
        const auto p0 = ctx.setup.dataset->point(0);
        for (std::size_t j = 0; j < x.size(); ++j) {
            x[j] = p0[j] + sigma_probe * rng.gaussian();
        }
        const auto eps_pos = den.predict_noise_copy(x, sigma_probe);
        const auto eps_neg = swg_negative(den, x, sigma_probe, result.plan);

        CsvWriter csv(config.out_dir / "eps_neg_field.csv",
                      {"row", "col", "channel", "x", "eps_pos", "eps_neg"});
        for (int ch = 0; ch < grid.channels; ++ch) {
            for (int r = 0; r < grid.height; ++r) {
                for (int c = 0; c < grid.width; ++c) {
                    const std::size_t at =
                        static_cast<std::size_t>(ch) *
                            static_cast<std::size_t>(grid.cells()) +
                        static_cast<std::size_t>(r * grid.width + c);
                    auto row = csv.row();
                    row.add(r).add(c).add(ch).add(x[at]).add(eps_pos[at]).add(
                        eps_neg[at]);
                }
            }
        }
    }

    // Comparison sweep: pure negative (w = -1) first, then configured weights.
    std::vector<double> weights = {-1.0};
    weights.insert(weights.end(), config.guidance.weights.begin(),
                   config.guidance.weights.end());
    for (double w : weights) {
        const auto ensemble = run_weight(config, ctx.setup, ctx.levels, w);
        result.per_weight.push_back(
            summarize_run(w, ensemble, ctx.reference, *ctx.setup.dataset));
    }
    {
        CsvWriter csv(config.out_dir / "comparison.csv",
                      {"method", "H", "W", "k", "l", "N", "s", "r", "w",
                       "endpoint_error", "matched_reference_error", "instability_rate",
                       "stable_count", "warning"});
        for (const auto& s : result.per_weight) {
            auto row = csv.row();
            row.add(config.guidance.method)
                .add(ctx.setup.grid->height)
                .add(ctx.setup.grid->width)
                .add(result.plan.crop_h)
                .add(result.plan.crop_w)
                .add(result.plan.rects.size())
                .add(result.plan.stride_rows)
                .add(result.plan.overlap_ratio)
                .add(s.weight)
                .add(s.endpoint_error_nearest)
                .add(s.endpoint_error_matched)
                .add(s.instability_rate)
                .add(s.stable_count)
                .add(s.unstable_dominated ? "unstable-dominated" : "");
        }
    }
    return result;
}

MetricsRunResult run_metrics(const std::vector<std::filesystem::path>& paths,
                             const std::filesystem::path& out_dir) {
    fs::create_directories(out_dir);
    MetricsRunResult result;
    result.csv_path = out_dir / "image_stats.csv";

    CsvWriter csv(result.csv_path, {"path", "saturation", "rms_contrast", "error"});
    double sat_sum = 0.0;
    double con_sum = 0.0;
    for (const auto& path : paths) {
        try {
            const Image img = read_image(path);
            const auto stats = image_stats(img);
            auto row = csv.row();
            row.add(path.string()).add(stats.saturation).add(stats.contrast).add("");
            sat_sum += stats.saturation;
            con_sum += stats.contrast;
            ++result.n_ok;
        } catch (const Error& e) {
            auto row = csv.row();
            row.add(path.string()).add("").add("").add(e.what());
            ++result.n_failed;
            SWG_LOG_WARN("metrics: %s", e.what());
        }
    }
    if (result.n_ok > 0) {
        auto row = csv.row();
        row.add("aggregate")
            .add(sat_sum / static_cast<double>(result.n_ok))
            .add(con_sum / static_cast<double>(result.n_ok))
            .add("");
    }
    return result;
}

}  // namespace swg
