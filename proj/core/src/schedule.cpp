#include "swgsim/schedule.hpp"

#include <cmath>
#include <string>

#include "swgsim/errors.hpp"

namespace swg {

void NoiseSchedule::validate() const {
    if (!(sigma_min >= 0.0)) {
        throw ValidationError("sigma_min must be >= 0");
    }
    if (sigma_min >= sigma_max) {
        throw ValidationError("sigma_min must be smaller than sigma_max");
    }
    if (n_steps < 1) {
        throw ValidationError("schedule needs n_steps >= 1");
    }
    if (kind == ScheduleKind::PowerRho && !(rho > 0.0)) {
        throw ValidationError("power-rho schedule needs rho > 0");
    }
}

NoiseSchedule NoiseSchedule::default_power() {
    return {0.002, 80.0, 40, ScheduleKind::PowerRho, 7.0};
}

NoiseSchedule NoiseSchedule::figure_linear(int n_steps) {
    return {0.0, 80.0, n_steps, ScheduleKind::LinearSigma, 7.0};
}

std::vector<double> discretize(const NoiseSchedule& schedule) {
    schedule.validate();
    const int n = schedule.n_steps;
    std::vector<double> levels(static_cast<std::size_t>(n) + 1);
    levels.front() = schedule.sigma_max;
    levels.back() = schedule.sigma_min;

    if (schedule.kind == ScheduleKind::LinearSigma) {
        for (int i = 1; i < n; ++i) {
            levels[static_cast<std::size_t>(i)] =
                schedule.sigma_max +
                static_cast<double>(i) / n * (schedule.sigma_min - schedule.sigma_max);
        }
    } else {
        const double inv_rho = 1.0 / schedule.rho;
        const double max_root = std::pow(schedule.sigma_max, inv_rho);
        const double min_root = std::pow(schedule.sigma_min, inv_rho);
        for (int i = 1; i < n; ++i) {
            levels[static_cast<std::size_t>(i)] = std::pow(
                max_root + static_cast<double>(i) / n * (min_root - max_root),
                schedule.rho);
        }
    }

    for (int i = 0; i < n; ++i) {
        if (!(levels[static_cast<std::size_t>(i)] >
              levels[static_cast<std::size_t>(i) + 1])) {
            throw ValidationError("discretized schedule is not strictly decreasing");
        }
    }
    return levels;
}

}  // namespace swg
