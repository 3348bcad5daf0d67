#include "swgsim/guidance.hpp"

#include <cmath>
#include <string>

#include "swgsim/errors.hpp"

namespace swg {

void GuidanceRule::validate() const {
    if (!positive) {
        throw ValidationError("guidance rule has no positive predictor");
    }
    const int d = positive->dim();
    for (const auto& term : terms) {
        if (!term.negative) {
            throw ValidationError("guidance term has no negative predictor");
        }
        if (term.negative->dim() != d) {
            throw ShapeError("negative predictor dimension " +
                             std::to_string(term.negative->dim()) +
                             " does not match positive dimension " + std::to_string(d));
        }
        if (!std::isfinite(term.weight) || !std::isfinite(term.alpha)) {
            throw ValidationError("guidance term weight/alpha must be finite");
        }
        if (term.alpha < 0.0 || term.alpha > 1.0) {
            throw ValidationError("guidance term alpha must lie in [0, 1]");
        }
    }
    if (mask && mask->size() != static_cast<std::size_t>(d)) {
        throw ShapeError("guidance mask length does not match dimension");
    }
    if (interval && interval->lo > interval->hi) {
        throw ValidationError("guidance interval lo > hi");
    }
}

void guided_predict_into(std::span<const double> x, double sigma, int step,
                         const GuidanceRule& rule, std::optional<int> class_id,
                         std::span<double> eps_out) {
    rule.validate();
    if (x.size() != static_cast<std::size_t>(rule.positive->dim()) ||
        eps_out.size() != x.size()) {
        throw ShapeError("guided_predict input/output dimension mismatch");
    }

    rule.positive->predict_noise(x, sigma, class_id, eps_out);

    // Outside the active interval the guidance branch is skipped entirely,
    // keeping the output bit-exact equal to eps_pos.
    if (rule.interval && !rule.interval->contains(step)) {
        return;
    }

    const std::size_t d = x.size();
    std::vector<double> eps_pos;  // original eps_pos, shared by all terms
    std::vector<double> eps_neg(d);
    for (const auto& term : rule.terms) {
        const double scale = term.alpha * term.weight;
        if (scale == 0.0) {
            continue;
        }
        term.negative->predict_noise(x, sigma, class_id, eps_neg);
        if (scale == -1.0 && !rule.mask && rule.terms.size() == 1) {
            // w = -1 recovers the negative model exactly.
            std::copy(eps_neg.begin(), eps_neg.end(), eps_out.begin());
            return;
        }
        if (eps_pos.empty()) {
            eps_pos.assign(eps_out.begin(), eps_out.end());
        }
        if (rule.mask) {
            const auto& mask = *rule.mask;
            for (std::size_t j = 0; j < d; ++j) {
                if (mask[j] != 0) {
                    eps_out[j] += scale * (eps_pos[j] - eps_neg[j]);
                }
            }
        } else {
            for (std::size_t j = 0; j < d; ++j) {
                eps_out[j] += scale * (eps_pos[j] - eps_neg[j]);
            }
        }
    }
}

std::vector<double> guided_predict(std::span<const double> x, double sigma, int step,
                                   const GuidanceRule& rule,
                                   std::optional<int> class_id) {
    std::vector<double> eps(x.size());
    guided_predict_into(x, sigma, step, rule, class_id, eps);
    return eps;
}

namespace {

double l2_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

double optimal_weight(std::span<const double> eps_pos, std::span<const double> eps_neg,
                      std::span<const double> eps_star) {
    if (eps_pos.size() != eps_neg.size() || eps_pos.size() != eps_star.size()) {
        throw ShapeError("optimal_weight dimension mismatch");
    }
    const double denom = l2_distance(eps_pos, eps_neg);
    if (denom <= 1e-14) {
        throw DegenerateDirectionError(
            "||eps_pos - eps_neg|| <= 1e-14, optimal weight undefined");
    }
    return l2_distance(eps_pos, eps_star) / denom;
}

double optimal_weight(std::span<const double> x, double sigma, const Denoiser& positive,
                      const Denoiser& negative, const Denoiser& oracle,
                      std::optional<int> class_id) {
    const auto eps_pos = positive.predict_noise_copy(x, sigma, class_id);
    const auto eps_neg = negative.predict_noise_copy(x, sigma, class_id);
    const auto eps_star = oracle.predict_noise_copy(x, sigma, class_id);
    return optimal_weight(eps_pos, eps_neg, eps_star);
}

PointwiseOptimalGuidance::PointwiseOptimalGuidance(DenoiserPtr positive,
                                                   DenoiserPtr negative,
                                                   DenoiserPtr oracle)
    : positive_(std::move(positive)),
      negative_(std::move(negative)),
      oracle_(std::move(oracle)) {
    if (!positive_ || !negative_ || !oracle_) {
        throw ValidationError("pointwise optimal guidance needs all three predictors");
    }
    if (negative_->dim() != positive_->dim() || oracle_->dim() != positive_->dim()) {
        throw ShapeError("pointwise optimal guidance dimension mismatch");
    }
}

void PointwiseOptimalGuidance::predict_noise(std::span<const double> x, double sigma,
                                             std::optional<int> class_id,
                                             std::span<double> eps_out) const {
    positive_->predict_noise(x, sigma, class_id, eps_out);
    const auto eps_neg = negative_->predict_noise_copy(x, sigma, class_id);
    const auto eps_star = oracle_->predict_noise_copy(x, sigma, class_id);
    const double denom = l2_distance(eps_out, eps_neg);
    if (denom <= 1e-14) {
        return;  // weight undefined, keep eps_pos
    }
    const double w = l2_distance(eps_out, eps_star) / denom;
    for (std::size_t j = 0; j < eps_out.size(); ++j) {
        eps_out[j] += w * (eps_out[j] - eps_neg[j]);
    }
}

void PointwiseOptimalGuidance::denoise(std::span<const double> x, double sigma,
                                       std::optional<int> class_id,
                                       std::span<double> y_out) const {
    predict_noise(x, sigma, class_id, y_out);
    for (std::size_t j = 0; j < y_out.size(); ++j) {
        y_out[j] = x[j] - sigma * y_out[j];
    }
}

GuidanceRule interpolate_rules(const std::vector<std::pair<GuidanceRule, double>>& rules) {
    if (rules.empty()) {
        throw ValidationError("interpolate_rules needs at least one rule");
    }
    double alpha_sum = 0.0;
    for (const auto& [rule, alpha] : rules) {
        rule.validate();
        if (alpha < 0.0) {
            throw ValidationError("interpolation alphas must be non-negative");
        }
        alpha_sum += alpha;
    }
    if (std::abs(alpha_sum - 1.0) > 1e-12) {
        throw ValidationError("interpolation alphas must sum to 1");
    }

    const GuidanceRule& first = rules.front().first;
    GuidanceRule merged;
    merged.positive = first.positive;
    merged.mask = first.mask;
    merged.interval = first.interval;

    for (const auto& [rule, alpha] : rules) {
        if (rule.positive != first.positive) {
            throw IncompatibleRuleError(
                "interpolated rules must share the positive predictor");
        }
        if (rule.mask != first.mask) {
            throw IncompatibleRuleError("interpolated rules must share the mask");
        }
        const bool same_interval =
            rule.interval.has_value() == first.interval.has_value() &&
            (!rule.interval || (rule.interval->lo == first.interval->lo &&
                                rule.interval->hi == first.interval->hi));
        if (!same_interval) {
            throw IncompatibleRuleError("interpolated rules must share the interval");
        }
        for (const auto& term : rule.terms) {
            GuidanceTerm scaled = term;
            scaled.alpha = alpha * term.alpha;
            merged.terms.push_back(std::move(scaled));
        }
    }
    return merged;
}

}  // namespace swg
