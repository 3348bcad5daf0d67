#include "swgsim/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "swgsim/csv.hpp"
#include "swgsim/errors.hpp"
#include "swgsim/rng.hpp"

namespace swg {

namespace {

// States beyond this magnitude are treated as blown up before they reach
// inf/NaN, so posterior logits never overflow.
constexpr double kStateLimit = 1e100;

bool state_ok(const std::vector<double>& x) {
    for (double v : x) {
        if (!std::isfinite(v) || std::abs(v) > kStateLimit) {
            return false;
        }
    }
    return true;
}

}  // namespace

Trajectory euler_sample_levels(const GuidanceRule& rule,
                               const std::vector<double>& levels, std::uint64_t seed,
                               std::optional<int> class_id) {
    rule.validate();
    if (levels.size() < 2) {
        throw ValidationError("need at least two sigma levels");
    }
    const int n_steps = static_cast<int>(levels.size()) - 1;
    for (int i = 0; i < n_steps; ++i) {
        // Only the final level may reach 0; eps~ divides by sigma_i.
        if (!(levels[static_cast<std::size_t>(i)] > 0.0)) {
            throw InvalidNoiseLevelError("sigma must stay positive before the last step");
        }
    }

    const std::size_t d = static_cast<std::size_t>(rule.positive->dim());
    const double sigma_max = levels.front();

    Trajectory traj;
    traj.seed = seed;
    traj.class_id = class_id;
    traj.records.reserve(static_cast<std::size_t>(n_steps) + 1);

    Rng rng(seed);
    std::vector<double> x(d);
    for (double& v : x) {
        v = sigma_max * rng.gaussian();
    }

    std::vector<double> eps(d);
    std::vector<double> y_hat(d);
    for (int i = 0; i < n_steps; ++i) {
        const double sigma = levels[static_cast<std::size_t>(i)];
        const double sigma_next = levels[static_cast<std::size_t>(i) + 1];
        const double t = 1.0 - static_cast<double>(i) / n_steps;

        guided_predict_into(x, sigma, i, rule, class_id, eps);
        for (std::size_t j = 0; j < d; ++j) {
            y_hat[j] = x[j] - sigma * eps[j];
        }
        traj.records.push_back({i, t, sigma, x, y_hat});

        std::vector<double> x_next(d);
        for (std::size_t j = 0; j < d; ++j) {
            x_next[j] = x[j] + (sigma_next - sigma) * eps[j];
        }
        if (!state_ok(x_next)) {
            // Flag and freeze: keep the last finite state, fill the
            // remaining records, and report instead of propagating NaN.
            traj.unstable = true;
            for (int k = i + 1; k <= n_steps; ++k) {
                traj.records.push_back({k, 1.0 - static_cast<double>(k) / n_steps,
                                        levels[static_cast<std::size_t>(k)], x, x});
            }
            traj.endpoint = x;
            return traj;
        }
        x = std::move(x_next);
    }
    // Final state: fully denoised, the prediction coincides with the state.
    traj.records.push_back({n_steps, 0.0, levels.back(), x, x});
    traj.endpoint = std::move(x);
    return traj;
}

Trajectory euler_sample(const GuidanceRule& rule, const NoiseSchedule& schedule,
                        std::uint64_t seed, std::optional<int> class_id) {
    return euler_sample_levels(rule, discretize(schedule), seed, class_id);
}

std::optional<int> class_for_trajectory(const ClassPolicy& policy, const Dataset& dataset,
                                        std::size_t index) {
    if (std::holds_alternative<ClassPolicyNone>(policy)) {
        return std::nullopt;
    }
    if (const auto* fixed = std::get_if<ClassPolicyFixed>(&policy)) {
        return fixed->class_id;
    }
    const auto& classes = dataset.classes();
    if (classes.empty()) {
        throw ValidationError("round-robin class policy needs a labelled dataset");
    }
    return classes[index % classes.size()];
}

std::vector<Trajectory> sample_ensemble_levels(
    const GuidanceRule& rule, const std::vector<double>& levels, std::size_t n,
    std::uint64_t base_seed,
    const std::function<std::optional<int>(std::size_t)>& class_of, int threads) {
    if (n == 0) {
        throw ValidationError("ensemble size must be >= 1");
    }
    rule.validate();

    std::vector<Trajectory> out(n);
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const auto class_id = class_of ? class_of(j) : std::optional<int>{};
            out[j] = euler_sample_levels(rule, levels, derive_seed(base_seed, j), class_id);
        }
    };

    const int workers = std::max(1, threads);
    if (workers == 1 || n < 2) {
        work(0, n);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    const std::size_t chunk = (n + static_cast<std::size_t>(workers) - 1) /
                              static_cast<std::size_t>(workers);
    for (int w = 0; w < workers; ++w) {
        const std::size_t begin = static_cast<std::size_t>(w) * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, w, begin, end] {
            try {
                work(begin, end);
            } catch (...) {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return out;
}

std::vector<Trajectory> sample_ensemble(const GuidanceRule& rule,
                                        const NoiseSchedule& schedule, std::size_t n,
                                        std::uint64_t base_seed,
                                        const ClassPolicy& policy, int threads) {
    const auto levels = discretize(schedule);

    const Dataset* dataset = nullptr;
    if (const auto* analytic = dynamic_cast<const AnalyticDenoiser*>(rule.positive.get())) {
        dataset = analytic->spec().dataset.get();
    }

    std::function<std::optional<int>(std::size_t)> class_of;
    if (!std::holds_alternative<ClassPolicyNone>(policy)) {
        if (dataset == nullptr) {
            throw ValidationError("class policy requires an analytic positive denoiser");
        }
        class_of = [&policy, dataset](std::size_t j) {
            return class_for_trajectory(policy, *dataset, j);
        };
    }
    return sample_ensemble_levels(rule, levels, n, base_seed, class_of, threads);
}

void write_trajectory_csv(const Trajectory& trajectory,
                          const std::filesystem::path& path) {
    if (trajectory.records.empty()) {
        throw ValidationError("empty trajectory");
    }
    const std::size_t d = trajectory.records.front().x.size();
    std::vector<std::string> header = {"step", "t", "sigma"};
    for (std::size_t j = 0; j < d; ++j) header.push_back("x_" + std::to_string(j));
    for (std::size_t j = 0; j < d; ++j) header.push_back("yhat_" + std::to_string(j));
    header.push_back("unstable");

    CsvWriter csv(path, header);
    for (const auto& rec : trajectory.records) {
        auto row = csv.row();
        row.add(rec.step).add(rec.t).add(rec.sigma);
        for (double v : rec.x) row.add(v);
        for (double v : rec.y_hat) row.add(v);
        row.add(trajectory.unstable ? 1 : 0);
    }
}

void write_ensemble_csv(const std::vector<Trajectory>& ensemble, const Dataset& dataset,
                        const std::filesystem::path& path) {
    if (ensemble.empty()) {
        throw ValidationError("empty ensemble");
    }
    const std::size_t d = static_cast<std::size_t>(dataset.dim());
    std::vector<std::string> header = {"seed"};
    for (std::size_t j = 0; j < d; ++j) header.push_back("endpoint_" + std::to_string(j));
    header.push_back("nearest_point");
    header.push_back("endpoint_error");

    CsvWriter csv(path, header);
    for (const auto& traj : ensemble) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            const auto p = dataset.point(i);
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = traj.endpoint[j] - p[j];
                s += diff * diff;
            }
            if (s < best) {
                best = s;
                best_idx = i;
            }
        }
        auto row = csv.row();
        row.add(traj.seed);
        for (double v : traj.endpoint) row.add(v);
        row.add(best_idx).add(std::sqrt(best));
    }
}

}  // namespace swg
