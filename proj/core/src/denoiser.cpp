#include "swgsim/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "swgsim/errors.hpp"

namespace swg {

namespace {

void check_eval_inputs(std::span<const double> x, double sigma, const DenoiserSpec& spec) {
    if (!spec.dataset) {
        throw ValidationError("denoiser spec has no dataset");
    }
    if (x.size() != static_cast<std::size_t>(spec.dataset->dim())) {
        throw ShapeError("input dimension " + std::to_string(x.size()) +
                         " does not match dataset dimension " +
                         std::to_string(spec.dataset->dim()));
    }
    if (!(sigma > 0.0)) {
        throw InvalidNoiseLevelError("sigma must be > 0, got " + std::to_string(sigma));
    }
}

// Active point indices under the spec's conditioning. nullptr means all.
const std::vector<std::size_t>* active_indices(const DenoiserSpec& spec,
                                               std::optional<int> class_id) {
    switch (spec.conditioning) {
        case Conditioning::Unconditional:
            return nullptr;
        case Conditioning::FixedClass:
            return &spec.dataset->class_indices(spec.fixed_class);
        case Conditioning::FromCall:
            if (!class_id) {
                throw MissingConditionError(
                    "conditional denoiser evaluated without a class id");
            }
            return &spec.dataset->class_indices(*class_id);
    }
    return nullptr;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

// Posterior mean at level sigma over the active points, written to y_out.
void posterior_mean(std::span<const double> x, double sigma, const Dataset& data,
                    const std::vector<std::size_t>* active, std::span<double> y_out) {
    const std::size_t n = active ? active->size() : data.size();
    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);

    // Log-space softmax with max subtraction; the Gaussian normalization
    // constant is shared and cancels.
    double max_logit = -std::numeric_limits<double>::infinity();
    std::vector<double> logits(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = active ? (*active)[i] : i;
        logits[i] = -squared_distance(x, data.point(idx)) * inv_two_sigma2;
        if (logits[i] > max_logit) max_logit = logits[i];
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        logits[i] = std::exp(logits[i] - max_logit);
        norm += logits[i];
    }
    std::fill(y_out.begin(), y_out.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = active ? (*active)[i] : i;
        const double w = logits[i] / norm;
        const auto p = data.point(idx);
        for (std::size_t j = 0; j < y_out.size(); ++j) {
            y_out[j] += w * p[j];
        }
    }
}

}  // namespace

void DenoiserSpec::validate() const {
    if (!dataset) {
        throw ValidationError("denoiser spec has no dataset");
    }
    if (kind == DenoiserKind::Optimal && delta != 0.0) {
        throw ValidationError("optimal denoiser must have delta == 0");
    }
    if (kind == DenoiserKind::ErrorProne && !(delta > 0.0)) {
        throw ValidationError("error-prone denoiser requires delta > 0");
    }
    if (conditioning != Conditioning::Unconditional && !dataset->has_labels()) {
        throw ValidationError("conditional denoiser over an unlabelled dataset");
    }
    if (conditioning == Conditioning::FixedClass && !dataset->has_class(fixed_class)) {
        throw ValidationError("fixed class " + std::to_string(fixed_class) +
                              " not present in dataset");
    }
}

NoiseLevelPair NoiseLevelPair::from_delta(double sigma, double delta) {
    if (!(sigma >= 0.0) || !(delta >= 0.0)) {
        throw InvalidNoiseLevelError("sigma and delta must be >= 0");
    }
    return {sigma, std::sqrt(sigma * sigma + delta * delta)};
}

void Denoiser::predict_noise(std::span<const double> x, double sigma,
                             std::optional<int> class_id,
                             std::span<double> eps_out) const {
    denoise(x, sigma, class_id, eps_out);
    for (std::size_t j = 0; j < eps_out.size(); ++j) {
        eps_out[j] = (x[j] - eps_out[j]) / sigma;
    }
}

std::vector<double> Denoiser::denoise_copy(std::span<const double> x, double sigma,
                                           std::optional<int> class_id) const {
    std::vector<double> y(x.size());
    denoise(x, sigma, class_id, y);
    return y;
}

std::vector<double> Denoiser::predict_noise_copy(std::span<const double> x, double sigma,
                                                 std::optional<int> class_id) const {
    std::vector<double> eps(x.size());
    predict_noise(x, sigma, class_id, eps);
    return eps;
}

AnalyticDenoiser::AnalyticDenoiser(DenoiserSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
}

void AnalyticDenoiser::denoise(std::span<const double> x, double sigma,
                               std::optional<int> class_id,
                               std::span<double> y_out) const {
    check_eval_inputs(x, sigma, spec_);
    const auto* active = active_indices(spec_, class_id);
    if (spec_.kind == DenoiserKind::Optimal) {
        posterior_mean(x, sigma, *spec_.dataset, active, y_out);
        return;
    }
    // y_delta = (x delta^2 + y* sigma^2) / sigma_tilde^2, evaluated through
    // the residual x - y_delta = (sigma^2 / sigma_tilde^2)(x - y*): the
    // direct form cancels catastrophically once sigma << delta.
    const auto level = NoiseLevelPair::from_delta(sigma, spec_.delta);
    posterior_mean(x, level.sigma_tilde, *spec_.dataset, active, y_out);
    const double shrink =
        (sigma * sigma) / (level.sigma_tilde * level.sigma_tilde);
    for (std::size_t j = 0; j < y_out.size(); ++j) {
        y_out[j] = x[j] - shrink * (x[j] - y_out[j]);
    }
}

void AnalyticDenoiser::predict_noise(std::span<const double> x, double sigma,
                                     std::optional<int> class_id,
                                     std::span<double> eps_out) const {
    check_eval_inputs(x, sigma, spec_);
    const auto* active = active_indices(spec_, class_id);
    if (spec_.kind == DenoiserKind::Optimal) {
        posterior_mean(x, sigma, *spec_.dataset, active, eps_out);
        for (std::size_t j = 0; j < eps_out.size(); ++j) {
            eps_out[j] = (x[j] - eps_out[j]) / sigma;
        }
        return;
    }
    const auto level = NoiseLevelPair::from_delta(sigma, spec_.delta);
    posterior_mean(x, level.sigma_tilde, *spec_.dataset, active, eps_out);
    const double scale =
        sigma / (level.sigma_tilde * level.sigma_tilde);
    for (std::size_t j = 0; j < eps_out.size(); ++j) {
        eps_out[j] = scale * (x[j] - eps_out[j]);
    }
}

DenoiserPtr make_denoiser(DenoiserSpec spec) {
    return std::make_shared<AnalyticDenoiser>(std::move(spec));
}

std::vector<double> posterior_weights(std::span<const double> x, double sigma,
                                      const DenoiserSpec& spec,
                                      std::optional<int> class_id) {
    check_eval_inputs(x, sigma, spec);
    const Dataset& data = *spec.dataset;
    const auto* active = active_indices(spec, class_id);
    const std::size_t n = active ? active->size() : data.size();

    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
    std::vector<double> logits(n);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = active ? (*active)[i] : i;
        logits[i] = -squared_distance(x, data.point(idx)) * inv_two_sigma2;
        if (logits[i] > max_logit) max_logit = logits[i];
    }
    double norm = 0.0;
    for (double& l : logits) {
        l = std::exp(l - max_logit);
        norm += l;
    }
    std::vector<double> weights(data.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = active ? (*active)[i] : i;
        weights[idx] = logits[i] / norm;
    }
    return weights;
}

std::vector<double> optimal_denoiser(std::span<const double> x, double sigma,
                                     const DenoiserSpec& spec,
                                     std::optional<int> class_id) {
    check_eval_inputs(x, sigma, spec);
    std::vector<double> y(x.size());
    posterior_mean(x, sigma, *spec.dataset, active_indices(spec, class_id), y);
    return y;
}

std::vector<double> error_denoiser(std::span<const double> x, double sigma,
                                   const DenoiserSpec& spec,
                                   std::optional<int> class_id) {
    if (spec.kind != DenoiserKind::ErrorProne || !(spec.delta > 0.0)) {
        throw ValidationError("error_denoiser requires an ErrorProne spec with delta > 0");
    }
    check_eval_inputs(x, sigma, spec);
    const auto level = NoiseLevelPair::from_delta(sigma, spec.delta);
    std::vector<double> y(x.size());
    posterior_mean(x, level.sigma_tilde, *spec.dataset, active_indices(spec, class_id), y);
    const double shrink = (sigma * sigma) / (level.sigma_tilde * level.sigma_tilde);
    for (std::size_t j = 0; j < y.size(); ++j) {
        y[j] = x[j] - shrink * (x[j] - y[j]);
    }
    return y;
}

std::vector<double> noise_predictor(std::span<const double> x, double sigma,
                                    const DenoiserSpec& spec,
                                    std::optional<int> class_id) {
    std::vector<double> eps(x.size());
    AnalyticDenoiser(spec).predict_noise(x, sigma, class_id, eps);
    return eps;
}

}  // namespace swg
