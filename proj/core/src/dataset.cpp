#include "swgsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "swgsim/errors.hpp"
#include "swgsim/rng.hpp"

namespace swg {

Dataset::Dataset(int dim, std::vector<double> flat_points,
                 std::optional<std::vector<int>> labels)
    : dim_(dim), flat_(std::move(flat_points)), labels_(std::move(labels)) {
    if (dim_ <= 0) {
        throw ValidationError("dataset dimension must be positive");
    }
    if (flat_.empty() || flat_.size() % static_cast<std::size_t>(dim_) != 0) {
        throw ShapeError("dataset points do not form an n x d array");
    }
    count_ = flat_.size() / static_cast<std::size_t>(dim_);
    for (double v : flat_) {
        if (!std::isfinite(v)) {
            throw ValidationError("dataset contains a non-finite coordinate");
        }
    }
    if (labels_) {
        if (labels_->size() != count_) {
            throw ShapeError("label count does not match point count");
        }
        classes_ = *labels_;
        std::sort(classes_.begin(), classes_.end());
        classes_.erase(std::unique(classes_.begin(), classes_.end()), classes_.end());
        class_index_.resize(classes_.size());
        for (std::size_t i = 0; i < count_; ++i) {
            const auto it =
                std::lower_bound(classes_.begin(), classes_.end(), (*labels_)[i]);
            class_index_[static_cast<std::size_t>(it - classes_.begin())].push_back(i);
        }
    }
}

Dataset Dataset::from_points(const std::vector<std::vector<double>>& points,
                             std::optional<std::vector<int>> labels) {
    if (points.empty()) {
        throw ValidationError("dataset must contain at least one point");
    }
    const std::size_t dim = points.front().size();
    std::vector<double> flat;
    flat.reserve(points.size() * dim);
    for (const auto& p : points) {
        if (p.size() != dim) {
            throw ShapeError("all dataset points must share one dimension");
        }
        flat.insert(flat.end(), p.begin(), p.end());
    }
    return Dataset(static_cast<int>(dim), std::move(flat), std::move(labels));
}

bool Dataset::has_class(int class_id) const {
    return std::binary_search(classes_.begin(), classes_.end(), class_id);
}

const std::vector<std::size_t>& Dataset::class_indices(int class_id) const {
    const auto it = std::lower_bound(classes_.begin(), classes_.end(), class_id);
    if (it == classes_.end() || *it != class_id) {
        throw ValidationError("dataset has no point with class id " +
                              std::to_string(class_id));
    }
    return class_index_[static_cast<std::size_t>(it - classes_.begin())];
}

std::vector<double> Dataset::mean() const {
    std::vector<double> m(static_cast<std::size_t>(dim_), 0.0);
    for (std::size_t i = 0; i < count_; ++i) {
        const auto p = point(i);
        for (int j = 0; j < dim_; ++j) {
            m[static_cast<std::size_t>(j)] += p[static_cast<std::size_t>(j)];
        }
    }
    for (double& v : m) {
        v /= static_cast<double>(count_);
    }
    return m;
}

namespace {

Dataset dataset_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("d") || !doc.contains("points")) {
        throw ValidationError("dataset json must be an object with \"d\" and \"points\"");
    }
    const int dim = doc.at("d").get<int>();
    std::vector<std::vector<double>> points;
    for (const auto& row : doc.at("points")) {
        points.push_back(row.get<std::vector<double>>());
        if (points.back().size() != static_cast<std::size_t>(dim)) {
            throw ShapeError("dataset json point does not match declared d");
        }
    }
    std::optional<std::vector<int>> labels;
    if (doc.contains("labels") && !doc.at("labels").is_null()) {
        labels = doc.at("labels").get<std::vector<int>>();
    }
    return Dataset::from_points(points, std::move(labels));
}

}  // namespace

Dataset parse_dataset_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("dataset json parse error: ") + e.what());
    }
    return dataset_from_json(doc);
}

Dataset load_dataset_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open dataset file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset_json(buf.str());
}

Dataset make_triangle_dataset() {
    const double s = std::sqrt(3.0) / 2.0;
    return Dataset::from_points({{0.0, 1.0}, {-s, -0.5}, {s, -0.5}},
                                std::vector<int>{0, 1, 2});
}

Dataset make_gaussian_cloud(std::size_t n, double stddev, int dim, std::uint64_t seed) {
    if (n == 0 || dim <= 0 || !(stddev >= 0.0)) {
        throw ValidationError("gaussian cloud needs n >= 1, dim >= 1, stddev >= 0");
    }
    Rng rng(derive_seed(seed, 0xc10dULL));
    std::vector<double> flat(n * static_cast<std::size_t>(dim));
    for (double& v : flat) {
        v = stddev * rng.gaussian();
    }
    return Dataset(dim, std::move(flat));
}

}  // namespace swg
