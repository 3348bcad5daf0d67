#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "swgsim/denoiser.hpp"
#include "swgsim/guidance.hpp"

namespace swg {

// Spatial annotation for a flat vector: index = ch*H*W + row*W + col.
// Windows act on spatial cells across all channels.
struct GridShape {
    int height = 0;
    int width = 0;
    int channels = 1;

    int cells() const { return height * width; }
    int dim() const { return height * width * channels; }

    void validate_for_dim(int d) const;
};

struct CropRect {
    int top = 0;
    int left = 0;
    int height = 0;
    int width = 0;

    int cells() const { return height * width; }
};

// Tiling of the grid by n = m^2 equal crops at fixed per-dimension stride.
// overlap_ratio r = 1 - stride/crop_h.
struct WindowPlan {
    int crop_h = 0;
    int crop_w = 0;
    int stride_rows = 0;
    int stride_cols = 0;
    double overlap_ratio = 0.0;
    std::vector<CropRect> rects;
};

// Places m x m crops at offsets {0, s, ..., (m-1)s} per dimension with
// s = (H - k)/(m - 1). Requirements: n_windows is a perfect square; the
// stride divides exactly (no silent rounding); crops cover every cell;
// n_windows == 1 demands a single full-frame crop. crop_w < 0 means square
// crops (crop_w = crop_h).
WindowPlan plan_windows(const GridShape& shape, int crop_h, int n_windows,
                        int crop_w = -1);

// Per-cell covering-window counts and the {0,1} mask marking cells covered
// by at least two windows (the M-SWG guidance mask).
struct OverlapField {
    int height = 0;
    int width = 0;
    std::vector<int> counts;         // H*W, row-major
    std::vector<std::uint8_t> mask;  // 1 where counts >= 2

    bool mask_all_zero() const;
    // Mask replicated across channels, matching the flat vector layout.
    std::vector<std::uint8_t> mask_for_channels(int channels) const;
};

OverlapField overlap_field(const GridShape& shape, const WindowPlan& plan);

// Analytic denoiser over a grid-structured dataset that can also evaluate
// any crop: a crop is denoised against the dataset points cropped to the
// same rect, so its receptive field ends at the window border.
class GridDenoiser final : public Denoiser {
public:
    GridDenoiser(DenoiserSpec spec, GridShape shape);

    int dim() const override { return shape_.dim(); }
    const GridShape& shape() const { return shape_; }
    const DenoiserSpec& spec() const { return spec_; }

    void denoise(std::span<const double> x, double sigma, std::optional<int> class_id,
                 std::span<double> y_out) const override;

    // x_crop and y_out have rect.height*rect.width*channels entries in the
    // same channel-major layout as the full grid.
    void denoise_crop(std::span<const double> x_crop, const CropRect& rect, double sigma,
                      std::optional<int> class_id, std::span<double> y_out) const;

private:
    DenoiserSpec spec_;
    GridShape shape_;
};

using GridDenoiserPtr = std::shared_ptr<const GridDenoiser>;

// Fixed-rect view of a grid denoiser: a Denoiser over crop-sized vectors.
DenoiserPtr crop_restricted_denoiser(GridDenoiserPtr grid, const CropRect& rect);

// The sliding-window negative prediction: every crop is denoised
// independently (no rescaling), per-crop noise predictions are superimposed
// at their source positions and overlapping cells are averaged. Returns
// the eps field over the full grid.
std::vector<double> swg_negative(const GridDenoiser& denoiser, std::span<const double> x,
                                 double sigma, const WindowPlan& plan,
                                 std::optional<int> class_id = std::nullopt);

// Same with a precomputed overlap field (saves recomputing it per step).
std::vector<double> swg_negative(const GridDenoiser& denoiser, std::span<const double> x,
                                 double sigma, const WindowPlan& plan,
                                 const OverlapField& field,
                                 std::optional<int> class_id = std::nullopt);

// Denoiser adapter around swg_negative, usable as a guidance negative.
class SlidingWindowDenoiser final : public Denoiser {
public:
    SlidingWindowDenoiser(GridDenoiserPtr inner, WindowPlan plan);

    int dim() const override { return inner_->dim(); }

    void denoise(std::span<const double> x, double sigma, std::optional<int> class_id,
                 std::span<double> y_out) const override;
    void predict_noise(std::span<const double> x, double sigma,
                       std::optional<int> class_id,
                       std::span<double> eps_out) const override;

private:
    GridDenoiserPtr inner_;
    WindowPlan plan_;
    OverlapField field_;
};

// Builds the (M-)SWG rule: positive = the grid denoiser itself, negative =
// its sliding-window composite, mask = the overlap mask when masked (a
// zero-overlap plan then degenerates to eps_pos; a warning is logged).
GuidanceRule mswg_rule(GridDenoiserPtr positive, const WindowPlan& plan, double weight,
                       bool masked);

// Inspection exports for the overlap field.
void write_counts_csv(const OverlapField& field, const std::filesystem::path& path);
void write_mask_pgm(const OverlapField& field, const std::filesystem::path& path);

// Two H x W single-channel images (labels 0 and 1) sharing a flat
// background and differing only in two far-apart 2x2 corner patches whose
// signs are correlated: (+1, +1) and (-1, -1). Coherent samples must keep
// the corners in agreement, which no small window can see at once.
std::pair<std::shared_ptr<const Dataset>, GridShape> make_corner_pair_grid(
    int height = 8, int width = 8);

}  // namespace swg
