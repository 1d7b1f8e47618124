#include <catch2/catch_amalgamated.hpp>

#include "sreid/core.hpp"
#include "sreid/rng.hpp"

using namespace sreid;

namespace {
BoundingBox random_box(Rng& rng) {
    return {rng.uniform(-200.0, 200.0), rng.uniform(-200.0, 200.0), rng.uniform(1.0, 80.0),
            rng.uniform(1.0, 80.0)};
}
}  // namespace

TEST_CASE("box intersection area basics") {
    const BoundingBox a{0, 0, 10, 10};
    CHECK(box_intersection_area(a, a) == Catch::Approx(100.0));

    const BoundingBox far_away{100, 0, 10, 10};
    CHECK(box_intersection_area(a, far_away) == 0.0);

    const BoundingBox shifted{5, 0, 10, 10};
    CHECK(box_intersection_area(a, shifted) == Catch::Approx(50.0));
    CHECK(box_intersection_area(shifted, a) == Catch::Approx(50.0));
}

TEST_CASE("box iou basics") {
    const BoundingBox a{0, 0, 10, 10};
    CHECK(box_iou(a, a) == Catch::Approx(1.0));
    CHECK(box_iou(a, {100, 0, 10, 10}) == 0.0);
    // overlap 50, union 150
    CHECK(box_iou(a, {5, 0, 10, 10}) == Catch::Approx(50.0 / 150.0));
}

TEST_CASE("box ops are symmetric, bounded and translation invariant") {
    Rng rng(42);
    for (int i = 0; i < 300; ++i) {
        const auto a = random_box(rng);
        const auto b = random_box(rng);
        const double iou = box_iou(a, b);
        CHECK(iou >= 0.0);
        CHECK(iou <= 1.0);
        CHECK(box_iou(b, a) == Catch::Approx(iou).margin(1e-12));
        CHECK(box_intersection_area(a, a) == Catch::Approx(a.area()));

        const double dx = rng.uniform(-50.0, 50.0), dy = rng.uniform(-50.0, 50.0);
        BoundingBox at{a.cx + dx, a.cy + dy, a.w, a.h};
        BoundingBox bt{b.cx + dx, b.cy + dy, b.w, b.h};
        CHECK(box_intersection_area(at, bt) ==
              Catch::Approx(box_intersection_area(a, b)).margin(1e-9));
        CHECK(box_iou(at, bt) == Catch::Approx(iou).margin(1e-12));
    }
}

TEST_CASE("euclidean distance checks dimensions") {
    CHECK(euclidean_distance({3.0, 4.0}, {0.0, 0.0}) == Catch::Approx(5.0));
    CHECK_THROWS_AS(euclidean_distance({1.0}, {1.0, 2.0}), std::invalid_argument);
}
