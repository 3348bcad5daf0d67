#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "swgsim/dataset.hpp"

namespace swg {

enum class DenoiserKind {
    Optimal,     // Bayes posterior mean of the dataset
    ErrorProne,  // posterior mean of the dataset broadened by N(0, delta^2)
};

// How the denoiser handles class conditioning:
//   Unconditional  - posterior over all points, class id at the call ignored
//   FixedClass     - posterior restricted to one class baked into the spec
//   FromCall       - restricted to the class id supplied per evaluation
enum class Conditioning { Unconditional, FixedClass, FromCall };

struct DenoiserSpec {
    DenoiserKind kind = DenoiserKind::Optimal;
    std::shared_ptr<const Dataset> dataset;
    double delta = 0.0;  // endpoint std; must be > 0 iff kind == ErrorProne
    Conditioning conditioning = Conditioning::Unconditional;
    int fixed_class = 0;  // used when conditioning == FixedClass

    void validate() const;
};

// sigma and the effective level sigma_tilde = sqrt(sigma^2 + delta^2).
struct NoiseLevelPair {
    double sigma = 0.0;
    double sigma_tilde = 0.0;

    static NoiseLevelPair from_delta(double sigma, double delta);
};

// Pure target-prediction evaluator: (x, sigma, optional class) -> y_hat.
class Denoiser {
public:
    virtual ~Denoiser() = default;

    virtual int dim() const = 0;

    virtual void denoise(std::span<const double> x, double sigma,
                         std::optional<int> class_id, std::span<double> y_out) const = 0;

    // eps = (x - y_hat) / sigma. Overridable so composite denoisers can
    // produce the noise prediction without the y_hat round-trip.
    virtual void predict_noise(std::span<const double> x, double sigma,
                               std::optional<int> class_id,
                               std::span<double> eps_out) const;

    std::vector<double> denoise_copy(std::span<const double> x, double sigma,
                                     std::optional<int> class_id = std::nullopt) const;
    std::vector<double> predict_noise_copy(std::span<const double> x, double sigma,
                                           std::optional<int> class_id = std::nullopt) const;
};

using DenoiserPtr = std::shared_ptr<const Denoiser>;

// Closed-form denoiser over a finite dataset (optimal or error-prone).
class AnalyticDenoiser final : public Denoiser {
public:
    explicit AnalyticDenoiser(DenoiserSpec spec);

    int dim() const override { return spec_.dataset->dim(); }
    const DenoiserSpec& spec() const { return spec_; }

    void denoise(std::span<const double> x, double sigma, std::optional<int> class_id,
                 std::span<double> y_out) const override;
    void predict_noise(std::span<const double> x, double sigma,
                       std::optional<int> class_id,
                       std::span<double> eps_out) const override;

private:
    DenoiserSpec spec_;
};

DenoiserPtr make_denoiser(DenoiserSpec spec);

// p(y_i | x, sigma) over all dataset points: softmax of -||x - y_i||^2 / (2 sigma^2),
// restricted and renormalized over the class selected by the spec (and
// class_id for FromCall conditioning). Entries outside the class are 0.
// Log-space with max subtraction, so it stays normalized for sigma in
// [1e-3, 1e3] and |x| up to 1e3.
std::vector<double> posterior_weights(std::span<const double> x, double sigma,
                                      const DenoiserSpec& spec,
                                      std::optional<int> class_id = std::nullopt);

// Posterior mean sum_i y_i p(y_i | x, sigma); lies in the convex hull of
// the active points.
std::vector<double> optimal_denoiser(std::span<const double> x, double sigma,
                                     const DenoiserSpec& spec,
                                     std::optional<int> class_id = std::nullopt);

// y_delta(x, sigma) = (x delta^2 + y*(x, sigma_tilde) sigma^2) / sigma_tilde^2.
// Requires spec.kind == ErrorProne (delta > 0).
std::vector<double> error_denoiser(std::span<const double> x, double sigma,
                                   const DenoiserSpec& spec,
                                   std::optional<int> class_id = std::nullopt);

// eps = (x - y_hat) / sigma with y_hat picked by spec.kind. Satisfies
// eps_err(x, sigma) = (sigma / sigma_tilde) eps*(x, sigma_tilde).
std::vector<double> noise_predictor(std::span<const double> x, double sigma,
                                    const DenoiserSpec& spec,
                                    std::optional<int> class_id = std::nullopt);

}  // namespace swg
