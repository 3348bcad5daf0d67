#include "swgsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "swgsim/csv.hpp"
#include "swgsim/errors.hpp"

namespace swg {

namespace {

double nearest_point_distance(const std::vector<double>& x, const Dataset& dataset) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto p = dataset.point(i);
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double d = x[j] - p[j];
            s += d * d;
        }
        best = std::min(best, s);
    }
    return std::sqrt(best);
}

double l2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

double endpoint_error(const std::vector<Trajectory>& ensemble, const Dataset& dataset) {
    double sum = 0.0;
    std::size_t stable = 0;
    for (const auto& traj : ensemble) {
        if (traj.unstable) continue;
        sum += nearest_point_distance(traj.endpoint, dataset);
        ++stable;
    }
    if (stable == 0) {
        throw UndefinedMetricError("no stable trajectories to average");
    }
    return sum / static_cast<double>(stable);
}

double endpoint_error_matched(const std::vector<Trajectory>& ensemble,
                              const std::vector<Trajectory>& reference) {
    if (ensemble.size() != reference.size()) {
        throw ShapeError("matched-reference error needs ensembles of equal size");
    }
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        if (ensemble[i].unstable || reference[i].unstable) continue;
        sum += l2(ensemble[i].endpoint, reference[i].endpoint);
        ++used;
    }
    if (used == 0) {
        throw UndefinedMetricError("no stable trajectory pairs to average");
    }
    return sum / static_cast<double>(used);
}

double instability_rate(const std::vector<Trajectory>& ensemble) {
    if (ensemble.empty()) {
        throw UndefinedMetricError("empty ensemble");
    }
    std::size_t unstable = 0;
    for (const auto& traj : ensemble) {
        if (traj.unstable) ++unstable;
    }
    return static_cast<double>(unstable) / static_cast<double>(ensemble.size());
}

std::vector<double> stepwise_predictor_error(const Trajectory& trajectory,
                                             const Denoiser& oracle) {
    std::vector<double> curve;
    if (trajectory.records.size() < 2) {
        return curve;
    }
    curve.reserve(trajectory.records.size() - 1);
    std::vector<double> eps_star(trajectory.records.front().x.size());
    for (std::size_t i = 0; i + 1 < trajectory.records.size(); ++i) {
        const auto& rec = trajectory.records[i];
        if (!(rec.sigma > 0.0)) {
            break;  // the oracle is never evaluated at sigma = 0
        }
        oracle.predict_noise(rec.x, rec.sigma, trajectory.class_id, eps_star);
        double s = 0.0;
        for (std::size_t j = 0; j < rec.x.size(); ++j) {
            // guided eps~ reconstructed from the recorded target prediction
            const double eps_j = (rec.x[j] - rec.y_hat[j]) / rec.sigma;
            const double d = eps_j - eps_star[j];
            s += d * d;
        }
        curve.push_back(std::sqrt(s));
    }
    return curve;
}

TrajectoryReport build_report(const std::vector<Trajectory>& ensemble,
                              const Denoiser& oracle, const Dataset& dataset) {
    TrajectoryReport report;
    report.instability_rate = instability_rate(ensemble);
    report.mean_endpoint_error = endpoint_error(ensemble, dataset);

    for (const auto& traj : ensemble) {
        if (traj.unstable) continue;
        const auto curve = stepwise_predictor_error(traj, oracle);
        if (report.mean_stepwise_error.empty()) {
            report.mean_stepwise_error.assign(curve.size(), 0.0);
            report.sigmas.clear();
            for (std::size_t i = 0; i < curve.size(); ++i) {
                report.sigmas.push_back(traj.records[i].sigma);
            }
        }
        for (std::size_t i = 0; i < curve.size(); ++i) {
            report.mean_stepwise_error[i] += curve[i];
        }
        ++report.stable_count;
    }
    for (double& v : report.mean_stepwise_error) {
        v /= static_cast<double>(report.stable_count);
    }
    return report;
}

void write_report_csv(const TrajectoryReport& report,
                      const std::filesystem::path& path) {
    CsvWriter csv(path, {"step", "sigma", "mean_predictor_error", "mean_endpoint_error",
                         "instability_rate", "stable_count"});
    for (std::size_t i = 0; i < report.mean_stepwise_error.size(); ++i) {
        auto row = csv.row();
        row.add(i)
            .add(report.sigmas[i])
            .add(report.mean_stepwise_error[i])
            .add(report.mean_endpoint_error)
            .add(report.instability_rate)
            .add(report.stable_count);
    }
}

namespace {

void check_unit_range(const Image& image) {
    for (double v : image.rgb) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError("image values must lie in [0, 1]");
        }
    }
}

}  // namespace

double saturation(const Image& image) {
    check_unit_range(image);
    const std::size_t pixels = image.rgb.size() / 3;
    if (pixels == 0) {
        throw ValidationError("empty image");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) {
        const double r = image.rgb[3 * i];
        const double g = image.rgb[3 * i + 1];
        const double b = image.rgb[3 * i + 2];
        const double hi = std::max({r, g, b});
        const double lo = std::min({r, g, b});
        sum += hi > 0.0 ? (hi - lo) / hi : 0.0;
    }
    return sum / static_cast<double>(pixels);
}

double rms_contrast(const Image& image) {
    check_unit_range(image);
    const std::size_t pixels = image.rgb.size() / 3;
    if (pixels == 0) {
        throw ValidationError("empty image");
    }
    // Rec.601 weights with the blue one closed so they sum to exactly 1.0
    // (otherwise a pure-white pixel would not land on luma 1.0).
    constexpr double kRed = 0.299;
    constexpr double kGreen = 0.587;
    constexpr double kBlue = 1.0 - kRed - kGreen;
    double mean = 0.0;
    std::vector<double> luma(pixels);
    for (std::size_t i = 0; i < pixels; ++i) {
        luma[i] = kRed * image.rgb[3 * i] + kGreen * image.rgb[3 * i + 1] +
                  kBlue * image.rgb[3 * i + 2];
        mean += luma[i];
    }
    mean /= static_cast<double>(pixels);
    // A constant image has zero spread by definition; skip the subtraction
    // so accumulated rounding cannot produce a spurious ~1e-17 result.
    const auto [lo, hi] = std::minmax_element(luma.begin(), luma.end());
    if (*lo == *hi) {
        return 0.0;
    }
    double var = 0.0;
    for (double y : luma) {
        var += (y - mean) * (y - mean);
    }
    return std::sqrt(var / static_cast<double>(pixels));
}

ImageStats image_stats(const Image& image) {
    return {saturation(image), rms_contrast(image)};
}

}  // namespace swg
