#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/oracles.hpp"
#include "swgsim/errors.hpp"
#include "swgsim/metrics.hpp"
#include "swgsim/sampler.hpp"

using namespace swg;

namespace {

std::shared_ptr<const Dataset> triangle() {
    return std::make_shared<Dataset>(make_triangle_dataset());
}

DenoiserPtr make(std::shared_ptr<const Dataset> data, double delta,
                 Conditioning cond = Conditioning::Unconditional) {
    DenoiserSpec spec;
    spec.kind = delta > 0.0 ? DenoiserKind::ErrorProne : DenoiserKind::Optimal;
    spec.delta = delta;
    spec.dataset = std::move(data);
    spec.conditioning = cond;
    return make_denoiser(spec);
}

GuidanceRule plain_rule(DenoiserPtr positive) {
    GuidanceRule rule;
    rule.positive = std::move(positive);
    return rule;
}

bool same_trajectory(const Trajectory& a, const Trajectory& b) {
    if (a.records.size() != b.records.size() || a.unstable != b.unstable) return false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        if (std::memcmp(a.records[i].x.data(), b.records[i].x.data(),
                        a.records[i].x.size() * sizeof(double)) != 0) {
            return false;
        }
    }
    return std::memcmp(a.endpoint.data(), b.endpoint.data(),
                       a.endpoint.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_SUITE("sampler") {

TEST_CASE("single-point dataset lands on the point") {
    auto data = std::make_shared<Dataset>(Dataset::from_points({{0.7, -0.2}}));
    const auto rule = plain_rule(make(data, 0.0));
    const auto traj =
        euler_sample(rule, NoiseSchedule::figure_linear(25), /*seed=*/42);
    REQUIRE(traj.records.size() == 26);
    CHECK(!traj.unstable);
    CHECK(std::abs(traj.endpoint[0] - 0.7) < 1e-9);
    CHECK(std::abs(traj.endpoint[1] + 0.2) < 1e-9);
}

TEST_CASE("optimal denoiser endpoints hit a vertex at 200 steps") {
    auto data = triangle();
    const auto rule = plain_rule(make(data, 0.0));
    // tolerance established against a 400-step reference run; the noise
    // floor is sigma_min * ||z||, so the floor is dropped below 1e-3
    NoiseSchedule schedule = NoiseSchedule::default_power();
    schedule.n_steps = 200;
    schedule.sigma_min = 1e-4;
    const auto ensemble = sample_ensemble(rule, schedule, 50, 9);
    for (const auto& traj : ensemble) {
        double best = 1e300;
        for (std::size_t i = 0; i < data->size(); ++i) {
            best = std::min(best, oracle::l2(traj.endpoint, data->point(i)));
        }
        CHECK(best < 1e-3);
    }
}

TEST_CASE("identical seeds give bit-identical trajectories") {
    auto data = triangle();
    const auto rule = plain_rule(make(data, 0.1));
    const auto schedule = NoiseSchedule::default_power();
    const auto a = euler_sample(rule, schedule, 1234);
    const auto b = euler_sample(rule, schedule, 1234);
    CHECK(same_trajectory(a, b));
    const auto c = euler_sample(rule, schedule, 1235);
    CHECK(!same_trajectory(a, c));
}

TEST_CASE("records are ordered by decreasing sigma with endpoint duplicated") {
    auto data = triangle();
    const auto rule = plain_rule(make(data, 0.1));
    const auto traj = euler_sample(rule, NoiseSchedule::default_power(), 7);
    REQUIRE(traj.records.size() == 41);
    for (std::size_t i = 0; i + 1 < traj.records.size(); ++i) {
        CHECK(traj.records[i].sigma > traj.records[i + 1].sigma);
    }
    CHECK(traj.records.back().x == traj.endpoint);
    CHECK(traj.records.front().t == 1.0);
    CHECK(traj.records.back().t == 0.0);
}

TEST_CASE("w = -1 ensemble equals running the negative as positive, bitwise") {
    auto data = triangle();
    auto pos = make(data, 0.1);
    auto neg = make(data, 0.5);
    GuidanceRule guided = plain_rule(pos);
    guided.terms.push_back({neg, -1.0, 1.0});
    const GuidanceRule direct = plain_rule(neg);

    const auto schedule = NoiseSchedule::default_power();
    const auto a = sample_ensemble(guided, schedule, 20, 77);
    const auto b = sample_ensemble(direct, schedule, 20, 77);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(same_trajectory(a[i], b[i]));
    }
}

TEST_CASE("round-robin classes send each trajectory to its vertex") {
    auto data = triangle();
    const auto rule = plain_rule(make(data, 0.0, Conditioning::FromCall));
    // single-point class posterior predicts the vertex at every step, so
    // the final linear step to sigma = 0 lands on it
    const auto ensemble = sample_ensemble(rule, NoiseSchedule::figure_linear(40), 30, 5,
                                          ClassPolicyRoundRobin{});
    for (std::size_t j = 0; j < ensemble.size(); ++j) {
        const int expected_class = static_cast<int>(j % 3);
        CHECK(ensemble[j].class_id == expected_class);
        const auto vertex = data->point(static_cast<std::size_t>(expected_class));
        CHECK(oracle::l2(ensemble[j].endpoint, vertex) < 1e-9);
    }
}

TEST_CASE("error-prone endpoints scatter with std close to delta") {
    auto data = triangle();
    const double delta = 0.1;
    const auto rule = plain_rule(make(data, delta));
    const auto ensemble = sample_ensemble(rule, NoiseSchedule::default_power(), 300, 21);

    // per-coordinate deviation from the nearest vertex
    double sum2 = 0.0;
    std::size_t n_coords = 0;
    for (const auto& traj : ensemble) {
        REQUIRE(!traj.unstable);
        double best = 1e300;
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < data->size(); ++i) {
            const double d = oracle::l2(traj.endpoint, data->point(i));
            if (d < best) {
                best = d;
                best_i = i;
            }
        }
        const auto vertex = data->point(best_i);
        for (std::size_t j = 0; j < 2; ++j) {
            const double dev = traj.endpoint[j] - vertex[j];
            sum2 += dev * dev;
            ++n_coords;
        }
    }
    const double std_hat = std::sqrt(sum2 / static_cast<double>(n_coords));
    CHECK(std_hat > 0.08);
    CHECK(std_hat < 0.12);
}

TEST_CASE("order-1 convergence against a 4x-steps reference") {
    auto data = triangle();
    const auto rule = plain_rule(make(data, 0.0));

    auto mean_dev = [&](int n_steps) {
        NoiseSchedule coarse = NoiseSchedule::default_power();
        coarse.n_steps = n_steps;
        NoiseSchedule fine = coarse;
        fine.n_steps = 4 * n_steps;
        double sum = 0.0;
        const int reps = 60;
        for (int j = 0; j < reps; ++j) {
            const auto seed = derive_seed(1001, static_cast<std::uint64_t>(j));
            const auto a = euler_sample(rule, coarse, seed);
            const auto b = euler_sample(rule, fine, seed);
            sum += oracle::l2(a.endpoint, b.endpoint);
        }
        return sum / reps;
    };
    const double ratio = mean_dev(40) / mean_dev(80);
    CHECK(ratio > 1.7);
    CHECK(ratio < 2.3);
}

TEST_CASE("instability: large weights blow up, get flagged and frozen") {
    auto data = triangle();
    GuidanceRule rule = plain_rule(make(data, 0.1));
    rule.terms.push_back({make(data, 0.5), 0.0, 1.0});

    bool found_unstable_weight = false;
    for (double w = 1e3; w <= 1e7; w *= 10.0) {
        rule.terms[0].weight = w;
        const auto ensemble = sample_ensemble(rule, NoiseSchedule::default_power(), 50, 3);
        std::size_t unstable = 0;
        for (const auto& traj : ensemble) {
            if (traj.unstable) {
                ++unstable;
                REQUIRE(traj.records.size() == 41);
                for (double v : traj.endpoint) {
                    CHECK(std::isfinite(v));
                }
            }
        }
        if (static_cast<double>(unstable) / 50.0 > 0.01) {
            found_unstable_weight = true;
            break;
        }
    }
    CHECK(found_unstable_weight);
}

TEST_CASE("schedule with an interior zero level is rejected") {
    auto data = triangle();
    const auto rule = plain_rule(make(data, 0.0));
    const std::vector<double> levels = {80.0, 0.0, -1.0};
    CHECK_THROWS_AS(euler_sample_levels(rule, levels, 1), InvalidNoiseLevelError);
}

TEST_CASE("threaded ensembles match sequential ones bitwise") {
    auto data = triangle();
    const auto rule = plain_rule(make(data, 0.1));
    const auto schedule = NoiseSchedule::default_power();
    const auto seq = sample_ensemble(rule, schedule, 17, 99, ClassPolicyNone{}, 1);
    const auto par = sample_ensemble(rule, schedule, 17, 99, ClassPolicyNone{}, 4);
    REQUIRE(seq.size() == par.size());
    for (std::size_t i = 0; i < seq.size(); ++i) {
        CHECK(same_trajectory(seq[i], par[i]));
    }
}

TEST_CASE("trajectory csv dump has the documented columns") {
    auto data = triangle();
    const auto rule = plain_rule(make(data, 0.1));
    const auto traj = euler_sample(rule, NoiseSchedule::default_power(), 11);

    const auto path = std::filesystem::temp_directory_path() / "swgsim_traj_test.csv";
    write_trajectory_csv(traj, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "step,t,sigma,x_0,x_1,yhat_0,yhat_1,unstable");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 41);
    std::filesystem::remove(path);
}

TEST_CASE("ensemble csv dump has the documented columns") {
    auto data = triangle();
    const auto rule = plain_rule(make(data, 0.1));
    const auto ensemble = sample_ensemble(rule, NoiseSchedule::default_power(), 4, 2);

    const auto path = std::filesystem::temp_directory_path() / "swgsim_ens_test.csv";
    write_ensemble_csv(ensemble, *data, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "seed,endpoint_0,endpoint_1,nearest_point,endpoint_error");
    std::filesystem::remove(path);
}

}  // TEST_SUITE
