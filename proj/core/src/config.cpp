#include "swgsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "swgsim/errors.hpp"
#include "swgsim/log.hpp"

namespace swg {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& path) {
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ValidationError("unknown config key \"" + path + key + "\"");
        }
    }
}

GridShape parse_grid(const json& obj, const std::string& path) {
    reject_unknown_keys(obj, {"H", "W", "channels"}, path);
    GridShape shape;
    shape.height = obj.at("H").get<int>();
    shape.width = obj.at("W").get<int>();
    shape.channels = obj.value("channels", 1);
    return shape;
}

DatasetConfig parse_dataset(const json& obj) {
    reject_unknown_keys(obj,
                        {"preset", "count", "std", "dim", "seed", "points", "labels",
                         "file", "grid"},
                        "dataset.");
    DatasetConfig cfg;
    cfg.preset = obj.value("preset", "");
    cfg.count = obj.value("count", static_cast<std::size_t>(32));
    cfg.stddev = obj.value("std", 1.0);
    cfg.dim = obj.value("dim", 2);
    cfg.seed = obj.value("seed", static_cast<std::uint64_t>(1));
    if (obj.contains("points")) {
        cfg.points = obj.at("points").get<std::vector<std::vector<double>>>();
    }
    if (obj.contains("labels")) {
        cfg.labels = obj.at("labels").get<std::vector<int>>();
    }
    cfg.file = obj.value("file", "");
    if (obj.contains("grid")) {
        cfg.grid = parse_grid(obj.at("grid"), "dataset.grid.");
    }

    const int sources = (cfg.preset.empty() ? 0 : 1) + (cfg.points ? 1 : 0) +
                        (cfg.file.empty() ? 0 : 1);
    if (sources != 1) {
        throw ValidationError("dataset needs exactly one of preset/points/file");
    }
    return cfg;
}

NoiseSchedule parse_schedule(const json& obj) {
    reject_unknown_keys(obj, {"kind", "sigma_min", "sigma_max", "steps", "rho"},
                        "schedule.");
    NoiseSchedule schedule = NoiseSchedule::default_power();
    const std::string kind = obj.value("kind", "power-rho");
    if (kind == "power-rho") {
        schedule.kind = ScheduleKind::PowerRho;
    } else if (kind == "linear-sigma") {
        schedule.kind = ScheduleKind::LinearSigma;
        schedule.sigma_min = 0.0;
    } else {
        throw ValidationError("schedule.kind must be power-rho or linear-sigma");
    }
    schedule.sigma_min = obj.value("sigma_min", schedule.sigma_min);
    schedule.sigma_max = obj.value("sigma_max", schedule.sigma_max);
    schedule.n_steps = obj.value("steps", schedule.n_steps);
    schedule.rho = obj.value("rho", schedule.rho);
    schedule.validate();
    return schedule;
}

GuidanceConfig parse_guidance(const json& obj) {
    reject_unknown_keys(obj, {"method", "w", "interval", "mask", "terms"}, "guidance.");
    GuidanceConfig cfg;
    cfg.method = obj.value("method", "none");
    const std::set<std::string> known = {"none", "cfg", "wmg", "swg", "mswg", "combined"};
    if (!known.contains(cfg.method)) {
        throw ValidationError("unknown guidance.method \"" + cfg.method + "\"");
    }
    if (obj.contains("w")) {
        const auto& w = obj.at("w");
        if (w.is_array()) {
            cfg.weights = w.get<std::vector<double>>();
        } else {
            cfg.weights = {w.get<double>()};
        }
        if (cfg.weights.empty()) {
            throw ValidationError("guidance.w sweep must be non-empty");
        }
    } else {
        cfg.weights = {0.0};
    }
    if (obj.contains("interval")) {
        const auto iv = obj.at("interval").get<std::vector<int>>();
        if (iv.size() != 2) {
            throw ValidationError("guidance.interval must be [lo, hi]");
        }
        cfg.interval = StepInterval{iv[0], iv[1]};
    }
    if (obj.contains("mask")) {
        const auto& mask = obj.at("mask");
        if (mask.is_string()) {
            cfg.mask_source = mask.get<std::string>();
            if (cfg.mask_source != "none" && cfg.mask_source != "swg-overlap") {
                throw ValidationError("guidance.mask must be \"none\", \"swg-overlap\" "
                                      "or an explicit bit list");
            }
        } else {
            cfg.mask_source = "explicit";
            cfg.mask_bits = mask.get<std::vector<std::uint8_t>>();
            for (auto bit : *cfg.mask_bits) {
                if (bit > 1) {
                    throw ValidationError("guidance.mask bits must be 0 or 1");
                }
            }
        }
    }
    if (obj.contains("terms")) {
        for (const auto& term : obj.at("terms")) {
            reject_unknown_keys(term, {"method", "w", "alpha"}, "guidance.terms.");
            CombinedTermConfig t;
            t.method = term.at("method").get<std::string>();
            t.weight = term.at("w").get<double>();
            t.alpha = term.value("alpha", 1.0);
            cfg.terms.push_back(t);
        }
    }
    if (cfg.method == "combined" && cfg.terms.empty()) {
        throw ValidationError("combined guidance needs a non-empty terms list");
    }
    return cfg;
}

ClassPolicy parse_class_policy(const json& value) {
    if (value.is_string()) {
        const std::string s = value.get<std::string>();
        if (s == "none") return ClassPolicyNone{};
        if (s == "round-robin") return ClassPolicyRoundRobin{};
        throw ValidationError("class_policy must be none, round-robin or {fixed: c}");
    }
    if (value.is_object()) {
        reject_unknown_keys(value, {"fixed"}, "class_policy.");
        return ClassPolicyFixed{value.at("fixed").get<int>()};
    }
    throw ValidationError("class_policy must be none, round-robin or {fixed: c}");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ValidationError("config must be a json object");
    }
    reject_unknown_keys(doc,
                        {"dataset", "schedule", "denoiser", "guidance", "swg",
                         "class_policy", "ensemble", "seed", "dump_trajectories", "out"},
                        "");

    ExperimentConfig cfg;
    if (!doc.contains("dataset")) {
        throw ValidationError("config needs a dataset section");
    }
    cfg.dataset = parse_dataset(doc.at("dataset"));
    if (doc.contains("schedule")) {
        cfg.schedule = parse_schedule(doc.at("schedule"));
    }
    if (doc.contains("denoiser")) {
        const auto& d = doc.at("denoiser");
        reject_unknown_keys(d, {"delta_pos", "delta_neg"}, "denoiser.");
        cfg.denoiser.delta_pos = d.value("delta_pos", 0.0);
        cfg.denoiser.delta_neg = d.value("delta_neg", 0.0);
        if (cfg.denoiser.delta_pos < 0.0 || cfg.denoiser.delta_neg < 0.0) {
            throw ValidationError("denoiser deltas must be >= 0");
        }
    }
    if (doc.contains("guidance")) {
        cfg.guidance = parse_guidance(doc.at("guidance"));
    }
    if (doc.contains("swg")) {
        const auto& s = doc.at("swg");
        reject_unknown_keys(s, {"k", "N", "l"}, "swg.");
        SwgConfig plan;
        plan.crop = s.at("k").get<int>();
        plan.n_windows = s.at("N").get<int>();
        plan.crop_w = s.value("l", -1);
        cfg.swg_plan = plan;
    }
    if (doc.contains("class_policy")) {
        cfg.class_policy = parse_class_policy(doc.at("class_policy"));
    }
    cfg.ensemble = doc.value("ensemble", static_cast<std::size_t>(100));
    if (cfg.ensemble == 0) {
        throw ValidationError("ensemble must be >= 1");
    }
    cfg.seed = doc.value("seed", static_cast<std::uint64_t>(1));
    cfg.dump_trajectories = doc.value("dump_trajectories", static_cast<std::size_t>(8));
    cfg.out_dir = doc.value("out", std::string("out"));

    const bool needs_grid = cfg.guidance.method == "swg" || cfg.guidance.method == "mswg";
    const bool has_grid = cfg.dataset.grid.has_value() || cfg.dataset.preset == "corner-pair";
    if (needs_grid && !has_grid) {
        throw ValidationError("swg/mswg guidance needs a grid-annotated dataset");
    }
    if (needs_grid && !cfg.swg_plan) {
        throw ValidationError("swg/mswg guidance needs an swg {k, N} section");
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

namespace {

std::shared_ptr<const Dataset> materialize_dataset(const DatasetConfig& cfg,
                                                   std::optional<GridShape>& grid) {
    grid = cfg.grid;
    if (cfg.preset == "triangle") {
        return std::make_shared<Dataset>(make_triangle_dataset());
    }
    if (cfg.preset == "gaussian-cloud") {
        return std::make_shared<Dataset>(
            make_gaussian_cloud(cfg.count, cfg.stddev, cfg.dim, cfg.seed));
    }
    if (cfg.preset == "corner-pair") {
        auto [dataset, shape] = cfg.grid
                                    ? make_corner_pair_grid(cfg.grid->height,
                                                            cfg.grid->width)
                                    : make_corner_pair_grid();
        grid = shape;
        return dataset;
    }
    if (!cfg.preset.empty()) {
        throw ValidationError("unknown dataset preset \"" + cfg.preset + "\"");
    }
    if (cfg.points) {
        return std::make_shared<Dataset>(Dataset::from_points(*cfg.points, cfg.labels));
    }
    return std::make_shared<Dataset>(load_dataset_json(cfg.file));
}

DenoiserSpec spec_for(std::shared_ptr<const Dataset> dataset, double delta,
                      Conditioning conditioning) {
    DenoiserSpec spec;
    spec.kind = delta > 0.0 ? DenoiserKind::ErrorProne : DenoiserKind::Optimal;
    spec.delta = delta;
    spec.dataset = std::move(dataset);
    spec.conditioning = conditioning;
    return spec;
}

}  // namespace

ExperimentSetup build_setup(const ExperimentConfig& config) {
    ExperimentSetup setup;
    setup.dataset = materialize_dataset(config.dataset, setup.grid);
    if (setup.grid) {
        setup.grid->validate_for_dim(setup.dataset->dim());
    }
    setup.oracle = make_denoiser(
        spec_for(setup.dataset, 0.0, Conditioning::Unconditional));

    const std::string& method = config.guidance.method;
    if (method == "swg" || method == "mswg") {
        if (!setup.grid || !config.swg_plan) {
            throw ValidationError("swg/mswg needs grid shape and swg plan");
        }
        setup.plan = plan_windows(*setup.grid, config.swg_plan->crop,
                                  config.swg_plan->n_windows, config.swg_plan->crop_w);
        setup.grid_positive = std::make_shared<GridDenoiser>(
            spec_for(setup.dataset, config.denoiser.delta_pos,
                     Conditioning::Unconditional),
            *setup.grid);
        setup.positive = setup.grid_positive;
    } else if (method == "cfg") {
        setup.positive = make_denoiser(
            spec_for(setup.dataset, config.denoiser.delta_pos, Conditioning::FromCall));
    } else {
        setup.positive = make_denoiser(
            spec_for(setup.dataset, config.denoiser.delta_pos,
                     Conditioning::Unconditional));
    }
    return setup;
}

namespace {

GuidanceTerm build_term(const ExperimentConfig& config, const ExperimentSetup& setup,
                        const std::string& method, double weight, double alpha) {
    GuidanceTerm term;
    term.weight = weight;
    term.alpha = alpha;
    if (method == "cfg") {
        // The unconditional twin of the positive model (same delta).
        term.negative = make_denoiser(spec_for(setup.dataset, config.denoiser.delta_pos,
                                               Conditioning::Unconditional));
    } else if (method == "wmg") {
        term.negative = make_denoiser(spec_for(setup.dataset, config.denoiser.delta_neg,
                                               Conditioning::Unconditional));
    } else if (method == "swg" || method == "mswg") {
        if (!setup.grid_positive || !setup.plan) {
            throw ValidationError("swg term needs a grid positive and a window plan");
        }
        term.negative =
            std::make_shared<SlidingWindowDenoiser>(setup.grid_positive, *setup.plan);
    } else {
        throw ValidationError("unknown guidance term method \"" + method + "\"");
    }
    return term;
}

}  // namespace

GuidanceRule build_rule(const ExperimentConfig& config, const ExperimentSetup& setup,
                        double weight) {
    GuidanceRule rule;
    rule.positive = setup.positive;
    rule.interval = config.guidance.interval;

    const std::string& method = config.guidance.method;
    if (method == "none") {
        // degenerate rule: positive predictor only
    } else if (method == "combined") {
        for (const auto& term_cfg : config.guidance.terms) {
            rule.terms.push_back(build_term(config, setup, term_cfg.method,
                                            weight * term_cfg.weight, term_cfg.alpha));
        }
    } else {
        rule.terms.push_back(build_term(config, setup, method, weight, 1.0));
    }

    if (config.guidance.mask_source == "swg-overlap" || method == "mswg") {
        if (!setup.grid || !setup.plan) {
            throw ValidationError("swg-overlap mask needs a grid and a window plan");
        }
        const auto field = overlap_field(*setup.grid, *setup.plan);
        if (field.mask_all_zero()) {
            SWG_LOG_WARN("M-SWG mask is all zero (overlap ratio 0); "
                         "the rule degenerates to the positive prediction");
        }
        rule.mask = field.mask_for_channels(setup.grid->channels);
    } else if (config.guidance.mask_source == "explicit") {
        rule.mask = config.guidance.mask_bits;
    }
    rule.validate();
    return rule;
}

}  // namespace swg
