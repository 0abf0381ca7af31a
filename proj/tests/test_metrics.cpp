// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <linevec/metrics.hpp>
#include <linevec/rng.hpp>

using namespace linevec;

namespace {

GrayImage random_set_image(SplitMix64& rng, int w, int h, int points) {
    GrayImage img(w, h, 0.0);
    for (int i = 0; i < points; ++i)
        img.at(static_cast<int>(rng.below(w)), static_cast<int>(rng.below(h))) = 1.0;
    return img;
}

std::vector<Vec2> centers_of(const GrayImage& img) {
    std::vector<Vec2> out;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (img.at(x, y) >= 0.5) out.push_back(pixel_center(x, y));
    return out;
}

// O(n^2) oracle for the distance metrics.
struct BruteResult {
    double hausdorff;
    double mean;
};

BruteResult brute_distances(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
    auto directed = [](const std::vector<Vec2>& from, const std::vector<Vec2>& to) {
        double worst = 0.0, sum = 0.0;
        for (Vec2 p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (Vec2 q : to) best = std::min(best, (p - q).norm());
            worst = std::max(worst, best);
            sum += best;
        }
        return std::pair<double, double>{worst, sum / static_cast<double>(from.size())};
    };
    auto [ha, ma] = directed(a, b);
    auto [hb, mb] = directed(b, a);
    return {std::max(ha, hb), 0.5 * (ma + mb)};
}

} // namespace

TEST_CASE("iou basics") {
    GrayImage a(8, 8, 1.0), b(8, 8, 1.0);
    CHECK(iou(a, b) == 1.0);

    GrayImage c(8, 8, 0.0), d(8, 8, 0.0);
    for (int x = 0; x < 4; ++x) c.at(x, 0) = 1.0;
    for (int x = 4; x < 8; ++x) d.at(x, 0) = 1.0;
    CHECK(iou(c, d) == 0.0);

    // Equal-area sets overlapping half their area: 2 / (4 + 4 - 2) = 1/3.
    GrayImage e(8, 1, 0.0), f(8, 1, 0.0);
    for (int x = 0; x < 4; ++x) e.at(x, 0) = 1.0;
    for (int x = 2; x < 6; ++x) f.at(x, 0) = 1.0;
    CHECK(iou(e, f) == Catch::Approx(1.0 / 3.0));

    GrayImage blank1(4, 4, 0.0), blank2(4, 4, 0.0);
    CHECK(iou(blank1, blank2) == 1.0); // both empty

    CHECK_THROWS_AS(iou(a, blank1), std::invalid_argument);
}

TEST_CASE("hausdorff and mean distance basics") {
    GrayImage a(8, 8, 0.0), b(8, 8, 0.0);
    a.at(0, 0) = 1.0;
    b.at(3, 4) = 1.0;
    CHECK(hausdorff(a, b).value() == Catch::Approx(5.0)); // 3-4-5
    CHECK(mean_distance(a, b).value() == Catch::Approx(5.0));

    CHECK(hausdorff(a, a).value() == 0.0);
    CHECK(mean_distance(a, a).value() == 0.0);

    GrayImage blank(8, 8, 0.0);
    CHECK_FALSE(hausdorff(a, blank).has_value());
    CHECK_FALSE(mean_distance(blank, a).has_value());
}

TEST_CASE("distances equal the brute-force oracle exactly") {
    SplitMix64 rng(27);
    for (int trial = 0; trial < 50; ++trial) {
        int w = 20 + static_cast<int>(rng.below(40));
        int h = 20 + static_cast<int>(rng.below(40));
        GrayImage a = random_set_image(rng, w, h, 1 + static_cast<int>(rng.below(2000)));
        GrayImage b = random_set_image(rng, w, h, 1 + static_cast<int>(rng.below(2000)));
        auto ca = centers_of(a), cb = centers_of(b);
        BruteResult ref = brute_distances(ca, cb);
        CHECK(hausdorff(a, b).value() == ref.hausdorff);
        CHECK(mean_distance(a, b).value() == Catch::Approx(ref.mean).margin(1e-12));
    }
}

TEST_CASE("metric symmetry and ordering") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        GrayImage a = random_set_image(rng, 32, 32, 60);
        GrayImage b = random_set_image(rng, 32, 32, 60);
        CHECK(iou(a, b) == iou(b, a));
        CHECK(hausdorff(a, b).value() == hausdorff(b, a).value());
        CHECK(mean_distance(a, b).value() == mean_distance(b, a).value());
        CHECK(mean_distance(a, b).value() <= hausdorff(a, b).value() + 1e-12);
    }
}

TEST_CASE("metrics are invariant under whole-pixel translation of both inputs") {
    SplitMix64 rng(77);
    GrayImage a = random_set_image(rng, 24, 24, 40);
    GrayImage b = random_set_image(rng, 24, 24, 40);
    GrayImage a2(32, 32, 0.0), b2(32, 32, 0.0);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) {
            a2.at(x + 5, y + 3) = a.at(x, y);
            b2.at(x + 5, y + 3) = b.at(x, y);
        }
    CHECK(hausdorff(a, b).value() == hausdorff(a2, b2).value());
    CHECK(mean_distance(a, b).value() == Catch::Approx(mean_distance(a2, b2).value()).margin(1e-12));
}

TEST_CASE("psnr closed forms") {
    GrayImage a(10, 10, 0.5), b(10, 10, 0.6);
    CHECK(psnr(a, b) == Catch::Approx(20.0));

    GrayImage checker(10, 10, 0.0);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) checker.at(x, y) = (x + y) % 2 ? 1.0 : 0.0;
    GrayImage zeros(10, 10, 0.0);
    CHECK(psnr(checker, zeros) == Catch::Approx(10.0 * std::log10(2.0)));

    CHECK(std::isinf(psnr(a, a)));
}

TEST_CASE("evaluate on scenes") {
    VectorScene s;
    s.width = 48;
    s.height = 48;
    s.primitives = {LinePrimitive{{8, 10}, {40, 10}, 3.0}, LinePrimitive{{8, 30}, {40, 34}, 2.0}};

    MetricReport self = evaluate(s, s);
    CHECK(self.iou == 1.0);
    CHECK(self.d_h.value() == 0.0);
    CHECK(self.d_m.value() == 0.0);
    CHECK(self.prim_count.value() == 2);

    VectorScene empty;
    empty.width = 48;
    empty.height = 48;
    MetricReport vs = evaluate(empty, render_scene(s));
    CHECK(vs.iou == 0.0);
    CHECK_FALSE(vs.d_h.has_value());
    CHECK_FALSE(vs.d_m.has_value());
    CHECK(vs.prim_count.value() == 0);
}
