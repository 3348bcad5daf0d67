#include "swgsim/window.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "swgsim/csv.hpp"
#include "swgsim/errors.hpp"
#include "swgsim/log.hpp"

namespace swg {

void GridShape::validate_for_dim(int d) const {
    if (height <= 0 || width <= 0 || channels <= 0) {
        throw ValidationError("grid shape must have positive extents");
    }
    if (dim() != d) {
        throw ShapeError("grid shape " + std::to_string(height) + "x" +
                         std::to_string(width) + "x" + std::to_string(channels) +
                         " does not flatten to dimension " + std::to_string(d));
    }
}

WindowPlan plan_windows(const GridShape& shape, int crop_h, int n_windows, int crop_w) {
    if (crop_w < 0) {
        crop_w = crop_h;
    }
    if (shape.height <= 0 || shape.width <= 0) {
        throw ValidationError("window plan needs a positive grid shape");
    }
    if (crop_h <= 0 || crop_h > shape.height || crop_w <= 0 || crop_w > shape.width) {
        throw ValidationError("crop size must lie in [1, grid extent]");
    }
    const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n_windows))));
    if (n_windows < 1 || m * m != n_windows) {
        throw ValidationError("number of crops must be a perfect square, got " +
                              std::to_string(n_windows));
    }

    WindowPlan plan;
    plan.crop_h = crop_h;
    plan.crop_w = crop_w;

    if (m == 1) {
        if (crop_h != shape.height || crop_w != shape.width) {
            throw ValidationError("a single window must cover the full grid");
        }
        plan.stride_rows = crop_h;
        plan.stride_cols = crop_w;
    } else {
        if ((shape.height - crop_h) % (m - 1) != 0 ||
            (shape.width - crop_w) % (m - 1) != 0) {
            throw ValidationError("non-integral stride: grid minus crop must be divisible "
                                  "by m-1 (no silent rounding)");
        }
        plan.stride_rows = (shape.height - crop_h) / (m - 1);
        plan.stride_cols = (shape.width - crop_w) / (m - 1);
        if (plan.stride_rows > crop_h || plan.stride_cols > crop_w) {
            throw ValidationError("stride exceeds crop size, grid not fully covered");
        }
    }
    plan.overlap_ratio = 1.0 - static_cast<double>(plan.stride_rows) / crop_h;

    plan.rects.reserve(static_cast<std::size_t>(n_windows));
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            plan.rects.push_back(
                {i * plan.stride_rows, j * plan.stride_cols, crop_h, crop_w});
        }
    }
    return plan;
}

bool OverlapField::mask_all_zero() const {
    return std::all_of(mask.begin(), mask.end(),
                       [](std::uint8_t v) { return v == 0; });
}

std::vector<std::uint8_t> OverlapField::mask_for_channels(int channels) const {
    std::vector<std::uint8_t> out;
    out.reserve(mask.size() * static_cast<std::size_t>(channels));
    for (int c = 0; c < channels; ++c) {
        out.insert(out.end(), mask.begin(), mask.end());
    }
    return out;
}

OverlapField overlap_field(const GridShape& shape, const WindowPlan& plan) {
    OverlapField field;
    field.height = shape.height;
    field.width = shape.width;
    field.counts.assign(static_cast<std::size_t>(shape.cells()), 0);
    for (const auto& rect : plan.rects) {
        if (rect.top < 0 || rect.left < 0 || rect.top + rect.height > shape.height ||
            rect.left + rect.width > shape.width) {
            throw ValidationError("window rect out of grid bounds");
        }
        for (int r = rect.top; r < rect.top + rect.height; ++r) {
            for (int c = rect.left; c < rect.left + rect.width; ++c) {
                ++field.counts[static_cast<std::size_t>(r * shape.width + c)];
            }
        }
    }
    for (int count : field.counts) {
        if (count < 1) {
            throw ValidationError("window plan leaves uncovered cells");
        }
    }
    field.mask.resize(field.counts.size());
    for (std::size_t i = 0; i < field.counts.size(); ++i) {
        field.mask[i] = field.counts[i] >= 2 ? 1 : 0;
    }
    return field;
}

GridDenoiser::GridDenoiser(DenoiserSpec spec, GridShape shape)
    : spec_(std::move(spec)), shape_(shape) {
    spec_.validate();
    shape_.validate_for_dim(spec_.dataset->dim());
}

namespace {

const std::vector<std::size_t>* grid_active_indices(const DenoiserSpec& spec,
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

}  // namespace

void GridDenoiser::denoise_crop(std::span<const double> x_crop, const CropRect& rect,
                                double sigma, std::optional<int> class_id,
                                std::span<double> y_out) const {
    if (rect.top < 0 || rect.left < 0 || rect.height <= 0 || rect.width <= 0 ||
        rect.top + rect.height > shape_.height ||
        rect.left + rect.width > shape_.width) {
        throw ValidationError("crop rect out of grid bounds");
    }
    const std::size_t crop_dim =
        static_cast<std::size_t>(rect.cells()) * static_cast<std::size_t>(shape_.channels);
    if (x_crop.size() != crop_dim || y_out.size() != crop_dim) {
        throw IncompatibleDenoiserError("crop buffer does not match rect size");
    }
    if (!(sigma > 0.0)) {
        throw InvalidNoiseLevelError("sigma must be > 0");
    }

    // Flat dataset offsets of the rect's cells, channel-major.
    std::vector<std::size_t> offsets(crop_dim);
    {
        std::size_t o = 0;
        for (int ch = 0; ch < shape_.channels; ++ch) {
            const std::size_t plane = static_cast<std::size_t>(ch) *
                                      static_cast<std::size_t>(shape_.cells());
            for (int r = rect.top; r < rect.top + rect.height; ++r) {
                for (int c = rect.left; c < rect.left + rect.width; ++c) {
                    offsets[o++] = plane + static_cast<std::size_t>(r * shape_.width + c);
                }
            }
        }
    }

    const Dataset& data = *spec_.dataset;
    const auto* active = grid_active_indices(spec_, class_id);
    const std::size_t n = active ? active->size() : data.size();

    const bool error_prone = spec_.kind == DenoiserKind::ErrorProne;
    const double delta2 = spec_.delta * spec_.delta;
    const double sigma2 = sigma * sigma;
    const double tilde2 = error_prone ? sigma2 + delta2 : sigma2;

    // Posterior over the cropped points at the effective level.
    std::vector<double> logits(n);
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = active ? (*active)[i] : i;
        const auto point = data.point(idx);
        double dist2 = 0.0;
        for (std::size_t j = 0; j < crop_dim; ++j) {
            const double diff = x_crop[j] - point[offsets[j]];
            dist2 += diff * diff;
        }
        logits[i] = -dist2 / (2.0 * tilde2);
        if (logits[i] > max_logit) max_logit = logits[i];
    }
    double norm = 0.0;
    for (double& l : logits) {
        l = std::exp(l - max_logit);
        norm += l;
    }

    std::fill(y_out.begin(), y_out.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = active ? (*active)[i] : i;
        const auto point = data.point(idx);
        const double w = logits[i] / norm;
        for (std::size_t j = 0; j < crop_dim; ++j) {
            y_out[j] += w * point[offsets[j]];
        }
    }
    if (error_prone) {
        // residual form of (x delta^2 + y* sigma^2) / tilde2, stable for
        // sigma << delta
        const double shrink = sigma2 / tilde2;
        for (std::size_t j = 0; j < crop_dim; ++j) {
            y_out[j] = x_crop[j] - shrink * (x_crop[j] - y_out[j]);
        }
    }
}

void GridDenoiser::denoise(std::span<const double> x, double sigma,
                           std::optional<int> class_id, std::span<double> y_out) const {
    denoise_crop(x, {0, 0, shape_.height, shape_.width}, sigma, class_id, y_out);
}

namespace {

class CropRestrictedDenoiser final : public Denoiser {
public:
    CropRestrictedDenoiser(GridDenoiserPtr grid, CropRect rect)
        : grid_(std::move(grid)), rect_(rect) {
        // Validate bounds eagerly via a dummy shape check.
        if (rect_.top < 0 || rect_.left < 0 ||
            rect_.top + rect_.height > grid_->shape().height ||
            rect_.left + rect_.width > grid_->shape().width) {
            throw ValidationError("crop rect out of grid bounds");
        }
    }

    int dim() const override { return rect_.cells() * grid_->shape().channels; }

    void denoise(std::span<const double> x, double sigma, std::optional<int> class_id,
                 std::span<double> y_out) const override {
        grid_->denoise_crop(x, rect_, sigma, class_id, y_out);
    }

private:
    GridDenoiserPtr grid_;
    CropRect rect_;
};

}  // namespace

DenoiserPtr crop_restricted_denoiser(GridDenoiserPtr grid, const CropRect& rect) {
    return std::make_shared<CropRestrictedDenoiser>(std::move(grid), rect);
}

std::vector<double> swg_negative(const GridDenoiser& denoiser, std::span<const double> x,
                                 double sigma, const WindowPlan& plan,
                                 const OverlapField& field,
                                 std::optional<int> class_id) {
    const GridShape& shape = denoiser.shape();
    if (x.size() != static_cast<std::size_t>(shape.dim())) {
        throw ShapeError("input does not match the denoiser's grid shape");
    }

    std::vector<double> eps_acc(x.size(), 0.0);
    std::vector<double> x_crop;
    std::vector<double> y_crop;
    for (const auto& rect : plan.rects) {
        const std::size_t crop_dim = static_cast<std::size_t>(rect.cells()) *
                                     static_cast<std::size_t>(shape.channels);
        x_crop.resize(crop_dim);
        y_crop.resize(crop_dim);
        std::size_t o = 0;
        for (int ch = 0; ch < shape.channels; ++ch) {
            const std::size_t plane =
                static_cast<std::size_t>(ch) * static_cast<std::size_t>(shape.cells());
            for (int r = rect.top; r < rect.top + rect.height; ++r) {
                for (int c = rect.left; c < rect.left + rect.width; ++c) {
                    x_crop[o++] = x[plane + static_cast<std::size_t>(r * shape.width + c)];
                }
            }
        }
        denoiser.denoise_crop(x_crop, rect, sigma, class_id, y_crop);
        o = 0;
        for (int ch = 0; ch < shape.channels; ++ch) {
            const std::size_t plane =
                static_cast<std::size_t>(ch) * static_cast<std::size_t>(shape.cells());
            for (int r = rect.top; r < rect.top + rect.height; ++r) {
                for (int c = rect.left; c < rect.left + rect.width; ++c) {
                    const std::size_t at =
                        plane + static_cast<std::size_t>(r * shape.width + c);
                    eps_acc[at] += (x_crop[o] - y_crop[o]) / sigma;
                    ++o;
                }
            }
        }
    }
    for (int ch = 0; ch < shape.channels; ++ch) {
        const std::size_t plane =
            static_cast<std::size_t>(ch) * static_cast<std::size_t>(shape.cells());
        for (std::size_t cell = 0; cell < field.counts.size(); ++cell) {
            eps_acc[plane + cell] /= static_cast<double>(field.counts[cell]);
        }
    }
    return eps_acc;
}

std::vector<double> swg_negative(const GridDenoiser& denoiser, std::span<const double> x,
                                 double sigma, const WindowPlan& plan,
                                 std::optional<int> class_id) {
    return swg_negative(denoiser, x, sigma, plan, overlap_field(denoiser.shape(), plan),
                        class_id);
}

SlidingWindowDenoiser::SlidingWindowDenoiser(GridDenoiserPtr inner, WindowPlan plan)
    : inner_(std::move(inner)),
      plan_(std::move(plan)),
      field_(overlap_field(inner_->shape(), plan_)) {}

void SlidingWindowDenoiser::predict_noise(std::span<const double> x, double sigma,
                                          std::optional<int> class_id,
                                          std::span<double> eps_out) const {
    const auto eps = swg_negative(*inner_, x, sigma, plan_, field_, class_id);
    std::copy(eps.begin(), eps.end(), eps_out.begin());
}

void SlidingWindowDenoiser::denoise(std::span<const double> x, double sigma,
                                    std::optional<int> class_id,
                                    std::span<double> y_out) const {
    const auto eps = swg_negative(*inner_, x, sigma, plan_, field_, class_id);
    for (std::size_t j = 0; j < y_out.size(); ++j) {
        y_out[j] = x[j] - sigma * eps[j];
    }
}

GuidanceRule mswg_rule(GridDenoiserPtr positive, const WindowPlan& plan, double weight,
                       bool masked) {
    if (!positive) {
        throw ValidationError("mswg_rule needs a positive denoiser");
    }
    GuidanceRule rule;
    rule.positive = positive;
    rule.terms.push_back(
        {std::make_shared<SlidingWindowDenoiser>(positive, plan), weight, 1.0});
    if (masked) {
        const auto field = overlap_field(positive->shape(), plan);
        if (field.mask_all_zero()) {
            SWG_LOG_WARN("M-SWG mask is all zero (overlap ratio 0); "
                         "the rule degenerates to the positive prediction");
        }
        rule.mask = field.mask_for_channels(positive->shape().channels);
    }
    return rule;
}

void write_counts_csv(const OverlapField& field, const std::filesystem::path& path) {
    std::vector<std::string> header;
    header.reserve(static_cast<std::size_t>(field.width));
    for (int c = 0; c < field.width; ++c) {
        header.push_back("col_" + std::to_string(c));
    }
    CsvWriter csv(path, header);
    for (int r = 0; r < field.height; ++r) {
        auto row = csv.row();
        for (int c = 0; c < field.width; ++c) {
            row.add(field.counts[static_cast<std::size_t>(r * field.width + c)]);
        }
    }
}

std::pair<std::shared_ptr<const Dataset>, GridShape> make_corner_pair_grid(int height,
                                                                           int width) {
    if (height < 4 || width < 4) {
        throw ValidationError("corner-pair grid needs at least 4x4 cells");
    }
    const GridShape shape{height, width, 1};
    const std::size_t cells = static_cast<std::size_t>(shape.cells());
    std::vector<double> flat(2 * cells, 0.0);
    for (int img = 0; img < 2; ++img) {
        const double sign = img == 0 ? 1.0 : -1.0;
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                // top-left patch
                flat[static_cast<std::size_t>(img) * cells +
                     static_cast<std::size_t>(r * width + c)] = sign;
                // bottom-right patch
                flat[static_cast<std::size_t>(img) * cells +
                     static_cast<std::size_t>((height - 1 - r) * width +
                                              (width - 1 - c))] = sign;
            }
        }
    }
    auto dataset = std::make_shared<Dataset>(shape.dim(), std::move(flat),
                                             std::vector<int>{0, 1});
    return {std::move(dataset), shape};
}

void write_mask_pgm(const OverlapField& field, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "P2\n" << field.width << " " << field.height << "\n255\n";
    for (int r = 0; r < field.height; ++r) {
        for (int c = 0; c < field.width; ++c) {
            out << (field.mask[static_cast<std::size_t>(r * field.width + c)] ? 255 : 0);
            out << (c + 1 == field.width ? '\n' : ' ');
        }
    }
}

}  // namespace swg
