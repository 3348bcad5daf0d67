#pragma once

#include <filesystem>
#include <vector>

#include "swgsim/dataset.hpp"
#include "swgsim/image.hpp"
#include "swgsim/sampler.hpp"

namespace swg {

enum class EndpointErrorMode {
    NearestPoint,       // min_i ||endpoint - y_i||
    MatchedReference,   // ||endpoint - endpoint of the same-seed reference run||
};

// Mean nearest-point endpoint error over the stable trajectories.
// Unstable trajectories are excluded (they are reported as a rate, not
// folded into the mean). Throws UndefinedMetricError when nothing is stable.
double endpoint_error(const std::vector<Trajectory>& ensemble, const Dataset& dataset);

// Mean distance to the endpoint of the same-index reference trajectory;
// pairs where either side is unstable are skipped.
double endpoint_error_matched(const std::vector<Trajectory>& ensemble,
                              const std::vector<Trajectory>& reference);

double instability_rate(const std::vector<Trajectory>& ensemble);

// ||eps~(x_i, sigma_i) - eps*(x_i, sigma_i)|| per step, reconstructed from
// the recorded guided targets. The final record (sigma may be 0) is excluded.
std::vector<double> stepwise_predictor_error(const Trajectory& trajectory,
                                             const Denoiser& oracle);

// Aggregate over an ensemble against the optimal predictor.
struct TrajectoryReport {
    std::vector<double> mean_stepwise_error;  // averaged over stable trajectories
    std::vector<double> sigmas;               // sigma at each contributing step
    double mean_endpoint_error = 0.0;
    double instability_rate = 0.0;
    std::size_t stable_count = 0;
};

TrajectoryReport build_report(const std::vector<Trajectory>& ensemble,
                              const Denoiser& oracle, const Dataset& dataset);

void write_report_csv(const TrajectoryReport& report, const std::filesystem::path& path);

// Image statistics used to detect guidance-induced oversaturation and
// overcontrast.
struct ImageStats {
    double saturation = 0.0;  // mean HSV S channel, in [0, 1]
    double contrast = 0.0;    // RMS contrast: population std of Rec.601 luma
};

// Mean over pixels of S = (max - min) / max (S = 0 for black pixels).
// Inputs must lie in [0, 1].
double saturation(const Image& image);

// Population standard deviation of Y = 0.299 r + 0.587 g + 0.114 b.
double rms_contrast(const Image& image);

ImageStats image_stats(const Image& image);

}  // namespace swg
