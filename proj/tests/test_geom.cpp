// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <linevec/geom.hpp>
#include <linevec/rng.hpp>

using namespace linevec;

namespace {

// Independent oracle: locate the bisector crossing by bisection on the signed
// angular residual between B(t)-c1 and the interior bisector direction.
double bisection_midpoint_oracle(const CurvePrimitive& c) {
    Vec2 ua = (c.c0 - c.c1).normalized();
    Vec2 ub = (c.c2 - c.c1).normalized();
    Vec2 bis = (ua + ub).normalized();
    auto residual = [&](double t) { return cross(bis, (eval_bezier(c, t) - c.c1).normalized()); };
    double lo = 1e-12, hi = 1.0 - 1e-12;
    double flo = residual(lo);
    for (int i = 0; i < 100; ++i) {
        double mid = 0.5 * (lo + hi);
        if (hi - lo < 1e-10) break;
        double f = residual(mid);
        if ((f > 0.0) == (flo > 0.0))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

CurvePrimitive random_curve(SplitMix64& rng, double span = 50.0) {
    for (;;) {
        CurvePrimitive c;
        c.c0 = {rng.uniform(0, span), rng.uniform(0, span)};
        c.c1 = {rng.uniform(0, span), rng.uniform(0, span)};
        c.c2 = {rng.uniform(0, span), rng.uniform(0, span)};
        c.width = rng.uniform(0.5, 5.0);
        Vec2 a = c.c0 - c.c1, b = c.c2 - c.c1;
        if (a.norm() < 2.0 || b.norm() < 2.0) continue;
        if (std::abs(cross(a, b)) < 1e-3 * a.norm() * b.norm()) continue;
        return c;
    }
}

} // namespace

TEST_CASE("line possize conversions") {
    LinePosSize ps = line_to_possize({{0, 0}, {10, 0}, 2.0});
    CHECK(ps.midpoint.x == Catch::Approx(5.0));
    CHECK(ps.midpoint.y == Catch::Approx(0.0));
    CHECK(ps.angle == Catch::Approx(0.0));
    CHECK(ps.length == Catch::Approx(10.0));
    CHECK(ps.width == Catch::Approx(2.0));

    // Vertical line: pi/2 wraps to -pi/2 under the half-open convention.
    LinePosSize v = line_to_possize({{0, 0}, {0, 8}, 1.0});
    CHECK(v.midpoint.y == Catch::Approx(4.0));
    CHECK(v.angle == Catch::Approx(-kPi / 2));
    CHECK(v.length == Catch::Approx(8.0));

    LinePosSize z = line_to_possize({{3, 3}, {3, 3}, 1.0});
    CHECK(z.length == 0.0);
    CHECK(z.angle == 0.0);
}

TEST_CASE("line possize round trip is exact up to endpoint order") {
    SplitMix64 rng(42);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        LinePrimitive l{{rng.uniform(-50, 50), rng.uniform(-50, 50)},
                        {rng.uniform(-50, 50), rng.uniform(-50, 50)},
                        rng.uniform(0.1, 5.0)};
        LinePrimitive r = possize_to_line(line_to_possize(l));
        double direct = std::max((r.p1 - l.p1).norm(), (r.p2 - l.p2).norm());
        double swapped = std::max((r.p1 - l.p2).norm(), (r.p2 - l.p1).norm());
        worst = std::max(worst, std::min(direct, swapped));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("curve midpoint: symmetric case") {
    CurvePrimitive c{{0, 0}, {1, 1}, {2, 0}, 1.0};
    CurveMidpoint m = curve_midpoint(c);
    CHECK(m.t == Catch::Approx(0.5));
    CHECK(m.point.x == Catch::Approx(1.0));
    CHECK(m.point.y == Catch::Approx(0.5));
    CHECK_FALSE(m.degenerate);
}

TEST_CASE("curve midpoint matches bisection oracle") {
    CurvePrimitive c{{0, 0}, {0, 1}, {1, 1}, 1.0};
    double t_oracle = bisection_midpoint_oracle(c);
    CurveMidpoint m = curve_midpoint(c);
    CHECK(m.t == Catch::Approx(t_oracle).margin(1e-8));
    CHECK((m.point - eval_bezier(c, t_oracle)).norm() < 1e-6);

    SplitMix64 rng(7);
    for (int i = 0; i < 50; ++i) {
        CurvePrimitive r = random_curve(rng);
        double to = bisection_midpoint_oracle(r);
        CurveMidpoint mr = curve_midpoint(r);
        CHECK(mr.t == Catch::Approx(to).margin(1e-8));
        // The midpoint must sit on the interior bisector ray from c1.
        Vec2 bis = ((r.c0 - r.c1).normalized() + (r.c2 - r.c1).normalized()).normalized();
        Vec2 rel = mr.point - r.c1;
        CHECK(std::abs(cross(bis, rel)) < 1e-6 * std::max(1.0, rel.norm()));
        CHECK(dot(bis, rel) > 0.0);
    }
}

TEST_CASE("curve midpoint: collinear is degenerate") {
    CurvePrimitive c{{0, 0}, {1, 0}, {2, 0}, 1.0};
    CurveMidpoint m = curve_midpoint(c);
    CHECK(m.degenerate);
    CHECK(m.t == Catch::Approx(0.5));
    CHECK((m.point - Vec2{1, 0}).norm() < 1e-12);
}

TEST_CASE("curve possize round trip") {
    CurvePrimitive sym{{0, 0}, {1, 1}, {2, 0}, 1.0};
    CurvePosSize ps = curve_to_possize(sym);
    CHECK(ps.arm_len1 == Catch::Approx(ps.arm_len2));
    CHECK(ps.arm_len1 == Catch::Approx((Vec2{1, 0.5} - Vec2{0, 0}).norm()));
    // Arm angles mirror about the vertical through the midpoint.
    CHECK(ps.arm_angle1 + ps.arm_angle2 == Catch::Approx(-kPi).margin(1e-12));

    SplitMix64 rng(99);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        CurvePrimitive c = random_curve(rng);
        CurvePrimitive r = possize_to_curve(curve_to_possize(c));
        worst = std::max({worst, (r.c0 - c.c0).norm(), (r.c1 - c.c1).norm(), (r.c2 - c.c2).norm()});
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("eval_bezier basics") {
    CurvePrimitive c{{0, 0}, {2, 2}, {4, 0}, 1.0};
    CHECK((eval_bezier(c, 0) - c.c0).norm() == 0.0);
    CHECK((eval_bezier(c, 1) - c.c2).norm() == 0.0);
    Vec2 mid = eval_bezier(c, 0.5);
    CHECK(mid.x == Catch::Approx(2.0));
    CHECK(mid.y == Catch::Approx(1.0));

    // De Casteljau identity at t = 1/2.
    SplitMix64 rng(3);
    for (int i = 0; i < 100; ++i) {
        CurvePrimitive r = random_curve(rng);
        Vec2 expect = (lerp(r.c0, r.c1, 0.5) + lerp(r.c1, r.c2, 0.5)) * 0.5;
        CHECK((eval_bezier(r, 0.5) - expect).norm() <= 1e-12 * std::max(1.0, expect.norm()));
    }
}

TEST_CASE("flatten_curve honors tolerance") {
    // Control point on the chord: already flat.
    CurvePrimitive straight{{0, 0}, {1, 0}, {4, 0}, 1.0};
    CHECK(flatten_curve(straight, 0.01).size() == 2);

    CurvePrimitive sym{{0, 0}, {8, 10}, {16, 0}, 1.0};
    auto poly = flatten_curve(sym, 0.1);
    REQUIRE(poly.size() >= 2);
    CHECK((poly.front() - sym.c0).norm() == 0.0);
    CHECK((poly.back() - sym.c2).norm() == 0.0);
    for (int i = 0; i <= 1000; ++i) {
        Vec2 p = eval_bezier(sym, i / 1000.0);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j + 1 < poly.size(); ++j)
            best = std::min(best, segment_distance(poly[j], poly[j + 1], p));
        CHECK(best <= 0.1 + 1e-9);
    }

    CHECK(flatten_curve(sym, std::numeric_limits<double>::infinity()).size() == 2);
}

TEST_CASE("closest_point on lines") {
    LinePrimitive l{{0, 0}, {10, 0}, 1.0};
    ClosestPoint a = closest_point(l, {5, 3});
    CHECK((a.point - Vec2{5, 0}).norm() < 1e-12);
    CHECK((a.dir - Vec2{1, 0}).norm() < 1e-12);

    ClosestPoint b = closest_point(l, {-2, 1});
    CHECK((b.point - Vec2{0, 0}).norm() < 1e-12);
    CHECK(b.param == 0.0);
    CHECK((b.dir - Vec2{1, 0}).norm() < 1e-12);
}

TEST_CASE("closest_point on curves matches dense sampling") {
    SplitMix64 rng(17);
    for (int i = 0; i < 50; ++i) {
        CurvePrimitive c = random_curve(rng);
        Vec2 q{rng.uniform(-10, 60), rng.uniform(-10, 60)};
        ClosestPoint cp = closest_point(c, q);
        double got = (cp.point - q).norm();
        double best = std::numeric_limits<double>::infinity();
        const int n = 100000;
        for (int j = 0; j <= n; ++j)
            best = std::min(best, (eval_bezier(c, static_cast<double>(j) / n) - q).norm());
        CHECK(got <= best + 1e-4);
    }
}

TEST_CASE("split_curve halves evaluate consistently") {
    SplitMix64 rng(5);
    for (int i = 0; i < 20; ++i) {
        CurvePrimitive c = random_curve(rng);
        auto [left, right] = split_curve(c, 0.5);
        for (int j = 0; j <= 10; ++j) {
            double t = j / 10.0;
            CHECK((eval_bezier(left, t) - eval_bezier(c, t * 0.5)).norm() < 1e-10);
            CHECK((eval_bezier(right, t) - eval_bezier(c, 0.5 + t * 0.5)).norm() < 1e-10);
        }
    }
}

TEST_CASE("bezier_arclength against flattened polyline") {
    SplitMix64 rng(11);
    for (int i = 0; i < 20; ++i) {
        CurvePrimitive c = random_curve(rng);
        auto poly = flatten_curve(c, 1e-5);
        double approx = 0.0;
        for (std::size_t j = 0; j + 1 < poly.size(); ++j) approx += (poly[j + 1] - poly[j]).norm();
        CHECK(bezier_arclength(c, 0, 1) == Catch::Approx(approx).epsilon(1e-4));
    }
}
