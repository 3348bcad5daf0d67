#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace swg {

// Finite set of d-dimensional points, optionally labelled with integer
// class ids. This is the ground-truth distribution every analytic
// denoiser is built from. Points are stored row-major in one flat array.
class Dataset {
public:
    Dataset(int dim, std::vector<double> flat_points,
            std::optional<std::vector<int>> labels = std::nullopt);

    static Dataset from_points(const std::vector<std::vector<double>>& points,
                               std::optional<std::vector<int>> labels = std::nullopt);

    int dim() const { return dim_; }
    std::size_t size() const { return count_; }

    std::span<const double> point(std::size_t i) const {
        return {flat_.data() + i * static_cast<std::size_t>(dim_),
                static_cast<std::size_t>(dim_)};
    }

    bool has_labels() const { return labels_.has_value(); }
    const std::vector<int>& labels() const { return *labels_; }
    int label(std::size_t i) const { return (*labels_)[i]; }

    // Sorted distinct class ids; empty when unlabelled.
    const std::vector<int>& classes() const { return classes_; }
    bool has_class(int class_id) const;
    // Indices of the points carrying class_id. Throws if the class is unknown.
    const std::vector<std::size_t>& class_indices(int class_id) const;

    // Componentwise mean over all points.
    std::vector<double> mean() const;

private:
    int dim_;
    std::size_t count_;
    std::vector<double> flat_;
    std::optional<std::vector<int>> labels_;
    std::vector<int> classes_;
    std::vector<std::vector<std::size_t>> class_index_;
};

// Parses {"d": int, "points": [[...], ...], "labels": [...]?}.
Dataset load_dataset_json(const std::filesystem::path& path);
Dataset parse_dataset_json(const std::string& text);

// Three equidistant 2-D points on the unit circle (circumradius 1),
// labelled 0, 1, 2. Vertex coordinates are a config choice; this is the
// documented default used by the figure-reproduction configs.
Dataset make_triangle_dataset();

// n unlabelled points drawn from N(0, std^2 I_dim), deterministic in seed.
Dataset make_gaussian_cloud(std::size_t n, double stddev, int dim, std::uint64_t seed);

}  // namespace swg
