#include <doctest.h>

#include <cmath>

#include "swgsim/dataset.hpp"
#include "swgsim/errors.hpp"

using namespace swg;

TEST_SUITE("dataset") {

TEST_CASE("construction and accessors") {
    const auto data = Dataset::from_points({{1.0, 2.0}, {3.0, 4.0}},
                                           std::vector<int>{5, 7});
    CHECK(data.dim() == 2);
    CHECK(data.size() == 2);
    CHECK(data.point(1)[0] == 3.0);
    CHECK(data.label(0) == 5);
    CHECK(data.classes() == std::vector<int>{5, 7});
    CHECK(data.has_class(7));
    CHECK(!data.has_class(6));
    CHECK(data.class_indices(5) == std::vector<std::size_t>{0});
    const auto mean = data.mean();
    CHECK(mean[0] == 2.0);
    CHECK(mean[1] == 3.0);
}

TEST_CASE("invariants enforced") {
    CHECK_THROWS_AS(Dataset::from_points({}), ValidationError);
    CHECK_THROWS_AS(Dataset::from_points({{1.0, 2.0}, {3.0}}), ShapeError);
    CHECK_THROWS_AS(Dataset::from_points({{1.0}}, std::vector<int>{1, 2}), ShapeError);
    CHECK_THROWS_AS(Dataset(2, {1.0, 2.0, 3.0}), ShapeError);
    CHECK_THROWS_AS(Dataset::from_points({{std::nan(""), 0.0}}), ValidationError);
}

TEST_CASE("json loading") {
    const auto data = parse_dataset_json(R"({
        "d": 2,
        "points": [[0.0, 1.0], [1.0, 0.0]],
        "labels": [0, 1]
    })");
    CHECK(data.dim() == 2);
    CHECK(data.size() == 2);
    CHECK(data.label(1) == 1);

    CHECK_THROWS_AS(parse_dataset_json(R"({"d": 3, "points": [[1, 2]]})"), ShapeError);
    CHECK_THROWS_AS(parse_dataset_json("nonsense"), ValidationError);
    CHECK_THROWS_AS(parse_dataset_json(R"({"points": [[1, 2]]})"), ValidationError);
    CHECK_THROWS_AS(load_dataset_json("/nonexistent/data.json"), IoError);
}

TEST_CASE("triangle preset: equilateral, unit circumradius, labelled") {
    const auto tri = make_triangle_dataset();
    REQUIRE(tri.size() == 3);
    CHECK(tri.classes() == std::vector<int>{0, 1, 2});
    for (std::size_t i = 0; i < 3; ++i) {
        const auto p = tri.point(i);
        CHECK(std::abs(std::hypot(p[0], p[1]) - 1.0) < 1e-15);
    }
    const double side = std::hypot(tri.point(0)[0] - tri.point(1)[0],
                                   tri.point(0)[1] - tri.point(1)[1]);
    CHECK(side == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("gaussian cloud preset is deterministic in the seed") {
    const auto a = make_gaussian_cloud(10, 0.5, 3, 42);
    const auto b = make_gaussian_cloud(10, 0.5, 3, 42);
    const auto c = make_gaussian_cloud(10, 0.5, 3, 43);
    CHECK(a.size() == 10);
    CHECK(a.dim() == 3);
    CHECK(a.point(4)[1] == b.point(4)[1]);
    CHECK(a.point(4)[1] != c.point(4)[1]);
    CHECK_THROWS_AS(make_gaussian_cloud(0, 1.0, 2, 1), ValidationError);
}

}  // TEST_SUITE
