#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "swgsim/denoiser.hpp"

namespace swg {

// One negative predictor with its extrapolation weight. alpha scales the
// term when several guidance methods are convexly combined; it is 1 for a
// standalone rule.
struct GuidanceTerm {
    DenoiserPtr negative;
    double weight = 0.0;
    double alpha = 1.0;
};

// Inclusive step-index range on the discretized schedule. Step 0 is the
// first (highest-noise) step; this matches interval specs like "10-20 of
// 32 steps" counted from the high-noise end.
struct StepInterval {
    int lo = 0;
    int hi = 0;

    bool contains(int step) const { return step >= lo && step <= hi; }
};

// Guided prediction recipe:
//   eps~ = eps_pos + sum_i alpha_i w_i M . (eps_pos - eps_neg_i)
// where M is an optional {0,1} mask over dimensions and the whole
// correction is skipped for steps outside the optional interval.
struct GuidanceRule {
    DenoiserPtr positive;
    std::vector<GuidanceTerm> terms;
    std::optional<std::vector<std::uint8_t>> mask;
    std::optional<StepInterval> interval;

    void validate() const;
};

// Evaluates the rule at one state. Exact identities honored by
// construction (not just up to rounding): steps outside the interval and
// masked-off dimensions return eps_pos bitwise; a single unmasked term at
// alpha*w == -1 returns eps_neg bitwise; zero-weight terms are skipped.
std::vector<double> guided_predict(std::span<const double> x, double sigma, int step,
                                   const GuidanceRule& rule,
                                   std::optional<int> class_id = std::nullopt);

// Same, writing into eps_out (size d).
void guided_predict_into(std::span<const double> x, double sigma, int step,
                         const GuidanceRule& rule, std::optional<int> class_id,
                         std::span<double> eps_out);

// Pointwise optimal weight w* = ||eps_pos - eps*|| / ||eps_pos - eps_neg||.
// Throws DegenerateDirectionError when the denominator is <= 1e-14.
double optimal_weight(std::span<const double> eps_pos, std::span<const double> eps_neg,
                      std::span<const double> eps_star);
double optimal_weight(std::span<const double> x, double sigma, const Denoiser& positive,
                      const Denoiser& negative, const Denoiser& oracle,
                      std::optional<int> class_id = std::nullopt);

// Convex combination of rules sharing one positive predictor: term weights
// are kept and each term's alpha is scaled by the rule's alpha, so a
// one-hot alpha vector reproduces that rule's output bitwise. All rules
// must agree on mask and interval.
GuidanceRule interpolate_rules(const std::vector<std::pair<GuidanceRule, double>>& rules);

// Guided predictor with the weight chosen pointwise at every evaluation:
// w = ||eps_pos - eps_oracle|| / ||eps_pos - eps_neg||. When the positive
// and negative errors are collinear this recovers the oracle prediction
// exactly; a degenerate direction falls back to eps_pos. Needs oracle
// access, so it serves simulation studies rather than practical sampling.
class PointwiseOptimalGuidance final : public Denoiser {
public:
    PointwiseOptimalGuidance(DenoiserPtr positive, DenoiserPtr negative,
                             DenoiserPtr oracle);

    int dim() const override { return positive_->dim(); }

    void denoise(std::span<const double> x, double sigma, std::optional<int> class_id,
                 std::span<double> y_out) const override;
    void predict_noise(std::span<const double> x, double sigma,
                       std::optional<int> class_id,
                       std::span<double> eps_out) const override;

private:
    DenoiserPtr positive_;
    DenoiserPtr negative_;
    DenoiserPtr oracle_;
};

}  // namespace swg
