#pragma once

#include <vector>

namespace swg {

enum class ScheduleKind {
    LinearSigma,  // equal spacing in sigma
    PowerRho,     // (sigma_max^(1/rho) + i/N (sigma_min^(1/rho) - sigma_max^(1/rho)))^rho
};

// Map t -> sigma(t) discretized into n_steps intervals. sigma(1) = sigma_max
// at the noise end, sigma(0) = sigma_min at the data end; sigma_max should
// be much larger than the per-dimension dataset std.
struct NoiseSchedule {
    double sigma_min = 0.002;
    double sigma_max = 80.0;
    int n_steps = 40;
    ScheduleKind kind = ScheduleKind::PowerRho;
    double rho = 7.0;

    void validate() const;

    // 40-step power-rho(7) from 80 down to 0.002; the general-purpose default.
    static NoiseSchedule default_power();
    // Linear in sigma down to exactly 0; used by the figure-reproduction
    // configs.
    static NoiseSchedule figure_linear(int n_steps = 40);
};

// n_steps + 1 strictly decreasing levels, sigma_max first, sigma_min last.
// Endpoints are pinned exactly; interior levels follow the closed form.
std::vector<double> discretize(const NoiseSchedule& schedule);

}  // namespace swg
