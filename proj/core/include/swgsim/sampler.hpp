#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "swgsim/guidance.hpp"
#include "swgsim/schedule.hpp"

namespace swg {

struct TrajectoryRecord {
    int step = 0;
    double t = 0.0;
    double sigma = 0.0;
    std::vector<double> x;
    std::vector<double> y_hat;  // guided target prediction at this state
};

// One probability-flow ODE solve. records holds n_steps + 1 states ordered
// by decreasing sigma; endpoint duplicates the final state's x. A
// trajectory that left the finite range is flagged unstable and frozen at
// its last finite state.
struct Trajectory {
    std::uint64_t seed = 0;
    std::optional<int> class_id;
    std::vector<TrajectoryRecord> records;
    std::vector<double> endpoint;
    bool unstable = false;
};

// Euler integration of dx = eps~(x, sigma) dsigma from x ~ N(0, sigma_max^2 I).
// The guided target y~ = x - sigma eps~ is recorded at every step; the
// denoisers are never evaluated at sigma = 0 (only the last level may be 0).
// Deterministic given (rule, schedule, seed).
Trajectory euler_sample(const GuidanceRule& rule, const NoiseSchedule& schedule,
                        std::uint64_t seed, std::optional<int> class_id = std::nullopt);

// Same, but over precomputed sigma levels.
Trajectory euler_sample_levels(const GuidanceRule& rule,
                               const std::vector<double>& levels, std::uint64_t seed,
                               std::optional<int> class_id = std::nullopt);

struct ClassPolicyNone {};
struct ClassPolicyRoundRobin {};
struct ClassPolicyFixed {
    int class_id = 0;
};
using ClassPolicy = std::variant<ClassPolicyNone, ClassPolicyRoundRobin, ClassPolicyFixed>;

// Class id trajectory j receives under the policy. Round-robin cycles
// through the dataset's sorted class ids.
std::optional<int> class_for_trajectory(const ClassPolicy& policy, const Dataset& dataset,
                                        std::size_t index);

// n independent trajectories with per-trajectory seeds derived from
// base_seed by counter, so the result does not depend on evaluation order.
// threads > 1 evaluates trajectories concurrently.
std::vector<Trajectory> sample_ensemble(const GuidanceRule& rule,
                                        const NoiseSchedule& schedule, std::size_t n,
                                        std::uint64_t base_seed,
                                        const ClassPolicy& policy = ClassPolicyNone{},
                                        int threads = 1);

// Core ensemble loop over precomputed levels; class_of maps the trajectory
// index to its class id (may be empty).
std::vector<Trajectory> sample_ensemble_levels(
    const GuidanceRule& rule, const std::vector<double>& levels, std::size_t n,
    std::uint64_t base_seed,
    const std::function<std::optional<int>(std::size_t)>& class_of, int threads = 1);

// CSV dump, columns: step,t,sigma,x_0..x_{d-1},yhat_0..yhat_{d-1},unstable.
void write_trajectory_csv(const Trajectory& trajectory,
                          const std::filesystem::path& path);

// CSV summary, columns: seed,endpoint_0..endpoint_{d-1},nearest_point,endpoint_error.
void write_ensemble_csv(const std::vector<Trajectory>& ensemble, const Dataset& dataset,
                        const std::filesystem::path& path);

}  // namespace swg
