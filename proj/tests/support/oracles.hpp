// Test-side oracles, independent of the library implementation paths they
// check.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "swgsim/dataset.hpp"
#include "swgsim/rng.hpp"
#include "swgsim/window.hpp"

namespace oracle {

inline double l2(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline double norm(std::span<const double> a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

inline double rel_err(std::span<const double> got, std::span<const double> want) {
    const double denom = std::max(norm(want), 1e-300);
    return l2(got, want) / denom;
}

// Naive sliding-window negative, written directly from the published
// pseudocode: accumulate denoised crops in target space, accumulate
// overlap counts, divide, then convert to a noise prediction.
inline std::vector<double> naive_swg_eps(const swg::GridDenoiser& denoiser,
                                         std::span<const double> x, double sigma,
                                         const swg::WindowPlan& plan) {
    const auto& shape = denoiser.shape();
    const std::size_t d = static_cast<std::size_t>(shape.dim());
    std::vector<double> y_neg(d, 0.0);
    std::vector<double> overlap(d, 0.0);

    for (const auto& rect : plan.rects) {
        const std::size_t crop_dim = static_cast<std::size_t>(rect.cells()) *
                                     static_cast<std::size_t>(shape.channels);
        std::vector<double> x_crop(crop_dim);
        std::vector<double> y_crop(crop_dim);
        std::size_t o = 0;
        for (int ch = 0; ch < shape.channels; ++ch) {
            for (int r = rect.top; r < rect.top + rect.height; ++r) {
                for (int c = rect.left; c < rect.left + rect.width; ++c) {
                    x_crop[o++] =
                        x[static_cast<std::size_t>(ch) *
                              static_cast<std::size_t>(shape.cells()) +
                          static_cast<std::size_t>(r * shape.width + c)];
                }
            }
        }
        denoiser.denoise_crop(x_crop, rect, sigma, std::nullopt, y_crop);
        o = 0;
        for (int ch = 0; ch < shape.channels; ++ch) {
            for (int r = rect.top; r < rect.top + rect.height; ++r) {
                for (int c = rect.left; c < rect.left + rect.width; ++c) {
                    const std::size_t at =
                        static_cast<std::size_t>(ch) *
                            static_cast<std::size_t>(shape.cells()) +
                        static_cast<std::size_t>(r * shape.width + c);
                    y_neg[at] += y_crop[o];
                    overlap[at] += 1.0;
                    ++o;
                }
            }
        }
    }
    std::vector<double> eps(d);
    for (std::size_t i = 0; i < d; ++i) {
        eps[i] = (x[i] - y_neg[i] / overlap[i]) / sigma;
    }
    return eps;
}

// Empirical counterpart of the error-prone denoiser: the optimal posterior
// mean over an expanded dataset of n_samples draws y_i + N(0, delta^2).
inline std::vector<double> mc_error_denoiser(std::span<const double> x, double sigma,
                                             double delta, const swg::Dataset& data,
                                             std::size_t n_samples, std::uint64_t seed) {
    swg::Rng rng(seed);
    const std::size_t d = static_cast<std::size_t>(data.dim());
    std::vector<double> sample(d);
    std::vector<double> logits;
    std::vector<std::vector<double>> samples;
    logits.reserve(n_samples);
    samples.reserve(n_samples);
    double max_logit = -1e300;
    for (std::size_t s = 0; s < n_samples; ++s) {
        const auto base = data.point(s % data.size());
        for (std::size_t j = 0; j < d; ++j) {
            sample[j] = base[j] + delta * rng.gaussian();
        }
        double dist2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = x[j] - sample[j];
            dist2 += diff * diff;
        }
        const double logit = -dist2 / (2.0 * sigma * sigma);
        logits.push_back(logit);
        samples.push_back(sample);
        if (logit > max_logit) max_logit = logit;
    }
    double norm_sum = 0.0;
    for (double& l : logits) {
        l = std::exp(l - max_logit);
        norm_sum += l;
    }
    std::vector<double> mean(d, 0.0);
    for (std::size_t s = 0; s < n_samples; ++s) {
        for (std::size_t j = 0; j < d; ++j) {
            mean[j] += logits[s] / norm_sum * samples[s][j];
        }
    }
    return mean;
}

// Distance from a point to the convex hull of a 2-D point set given as the
// polygon's vertices in order (0 when inside).
inline double hull_distance_2d(std::span<const double> p,
                               const std::vector<std::array<double, 2>>& polygon) {
    const auto cross = [](double ax, double ay, double bx, double by) {
        return ax * by - ay * bx;
    };
    bool inside = true;
    double min_edge = 1e300;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = polygon[i];
        const auto& b = polygon[(i + 1) % n];
        const double ex = b[0] - a[0];
        const double ey = b[1] - a[1];
        const double px = p[0] - a[0];
        const double py = p[1] - a[1];
        if (cross(ex, ey, px, py) < 0.0) {
            inside = false;
        }
        const double t = std::clamp((px * ex + py * ey) / (ex * ex + ey * ey), 0.0, 1.0);
        const double dx = px - t * ex;
        const double dy = py - t * ey;
        min_edge = std::min(min_edge, std::sqrt(dx * dx + dy * dy));
    }
    return inside ? 0.0 : min_edge;
}

}  // namespace oracle
