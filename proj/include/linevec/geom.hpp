// SPDX-License-Identifier: Apache-2.0
//
// Geometric primitives: line segments and quadratic Bezier curves with a
// stroke width, their position/size parameterizations, curve evaluation,
// flattening, and closest-point queries.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <variant>
#include <vector>

namespace linevec {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    double norm2() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
    // 90-degree counterclockwise rotation.
    Vec2 perp() const { return {-y, x}; }
    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline Vec2 lerp(Vec2 a, Vec2 b, double t) { return a + (b - a) * t; }
inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

using Point = Vec2;

inline Vec2 unit_dir(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Wraps an undirected-line angle into [-pi/2, pi/2).
inline double normalize_angle_halfpi(double a) {
    a = std::fmod(a, kPi);
    if (a < -kPi / 2) a += kPi;
    if (a >= kPi / 2) a -= kPi;
    return a;
}

struct LinePrimitive {
    Vec2 p1;
    Vec2 p2;
    double width = 1.0;
};

struct CurvePrimitive {
    Vec2 c0;
    Vec2 c1;
    Vec2 c2;
    double width = 1.0;
};

using Primitive = std::variant<LinePrimitive, CurvePrimitive>;

inline bool is_line(const Primitive& p) { return std::holds_alternative<LinePrimitive>(p); }
inline bool is_curve(const Primitive& p) { return std::holds_alternative<CurvePrimitive>(p); }

inline double prim_width(const Primitive& p) {
    return is_line(p) ? std::get<LinePrimitive>(p).width : std::get<CurvePrimitive>(p).width;
}

inline Primitive translate(const Primitive& p, Vec2 d) {
    if (is_line(p)) {
        auto l = std::get<LinePrimitive>(p);
        return LinePrimitive{l.p1 + d, l.p2 + d, l.width};
    }
    auto c = std::get<CurvePrimitive>(p);
    return CurvePrimitive{c.c0 + d, c.c1 + d, c.c2 + d, c.width};
}

// ---------------------------------------------------------------------------
// Quadratic Bezier evaluation

inline Vec2 eval_bezier(const CurvePrimitive& c, double t) {
    double s = 1.0 - t;
    return c.c0 * (s * s) + c.c1 * (2.0 * s * t) + c.c2 * (t * t);
}

inline Vec2 bezier_derivative(const CurvePrimitive& c, double t) {
    return (lerp(c.c1, c.c2, t) - lerp(c.c0, c.c1, t)) * 2.0;
}

// Exact subdivision at parameter t into two quadratics covering [0,t] and [t,1].
inline std::pair<CurvePrimitive, CurvePrimitive> split_curve(const CurvePrimitive& c, double t) {
    Vec2 a = lerp(c.c0, c.c1, t);
    Vec2 b = lerp(c.c1, c.c2, t);
    Vec2 m = lerp(a, b, t);
    return {CurvePrimitive{c.c0, a, m, c.width}, CurvePrimitive{m, b, c.c2, c.width}};
}

// Arc length of the (extended) curve between parameters t0 and t1 in closed
// form: |B'(t)|^2 is a quadratic in t, so the integral has the standard
// sqrt+log antiderivative. Falls back to the piecewise-linear form at the
// degenerate (cusp) discriminant.
inline double bezier_arclength(const CurvePrimitive& c, double t0, double t1) {
    if (t1 < t0) return bezier_arclength(c, t1, t0);
    Vec2 A = (c.c0 - c.c1 * 2.0 + c.c2) * 2.0; // dB'/dt
    Vec2 B = (c.c1 - c.c0) * 2.0;              // B'(0)
    double a = A.norm2();
    double b = 2.0 * dot(A, B);
    double cc = B.norm2();
    if (a < 1e-12 * std::max(cc, 1.0)) return std::sqrt(cc) * (t1 - t0);
    double disc = 4.0 * a * cc - b * b;
    double s = std::sqrt(a);
    if (disc <= 1e-12 * a * std::max(cc, 1.0)) {
        // |B'(t)| = sqrt(a) |t - ts| with a cusp at ts.
        double ts = -b / (2.0 * a);
        auto anti = [&](double t) { return 0.5 * (t - ts) * std::abs(t - ts); };
        return s * (anti(t1) - anti(t0));
    }
    auto anti = [&](double t) {
        double q = std::sqrt(std::max(0.0, (a * t + b) * t + cc));
        double lin = 2.0 * a * t + b;
        return lin * q / (4.0 * a) + disc / (8.0 * a * s) * std::log(2.0 * s * q + lin);
    };
    return anti(t1) - anti(t0);
}

// ---------------------------------------------------------------------------
// Position/size parameterizations

struct LinePosSize {
    Vec2 midpoint;
    double angle = 0.0;   // [-pi/2, pi/2)
    double length = 0.0;
    double width = 1.0;
};

struct CurvePosSize {
    Vec2 midpoint;         // on-curve point at the bisector intersection
    double arm_len1 = 0.0; // |c0 - midpoint|
    double arm_len2 = 0.0; // |c2 - midpoint|
    double arm_angle1 = 0.0;
    double arm_angle2 = 0.0;
    double width = 1.0;
    // Derived: the curve parameter of the midpoint. The seven values above do
    // not always pin the curve down (strongly asymmetric arms admit several
    // bisector-consistent middle control points), so conversions carry it.
    // NaN requests the root-finding reconstruction.
    double t_mid = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;
};

inline LinePosSize line_to_possize(const LinePrimitive& l) {
    Vec2 d = l.p2 - l.p1;
    double len = d.norm();
    LinePosSize ps;
    ps.midpoint = (l.p1 + l.p2) * 0.5;
    ps.angle = len > 0.0 ? normalize_angle_halfpi(std::atan2(d.y, d.x)) : 0.0;
    ps.length = len;
    ps.width = l.width;
    return ps;
}

inline LinePrimitive possize_to_line(const LinePosSize& ps) {
    Vec2 h = unit_dir(ps.angle) * (ps.length * 0.5);
    return {ps.midpoint - h, ps.midpoint + h, ps.width};
}

struct CurveMidpoint {
    Vec2 point;
    double t = 0.5;
    bool degenerate = false;
};

// The curve "midpoint" is where the curve crosses the interior bisector of the
// angle at c1 between c1->c0 and c1->c2. Writing B(t)-c1 = (1-t)^2 (c0-c1) +
// t^2 (c2-c1), the crossing requires equal coefficients on the two unit legs,
// which gives t = sqrt|c0-c1| / (sqrt|c0-c1| + sqrt|c2-c1|) in closed form.
inline CurveMidpoint curve_midpoint(const CurvePrimitive& c) {
    Vec2 a = c.c0 - c.c1;
    Vec2 b = c.c2 - c.c1;
    double na = a.norm(), nb = b.norm();
    CurveMidpoint out;
    if (na == 0.0 && nb == 0.0) {
        out.t = 0.5;
        out.point = c.c1;
        out.degenerate = true;
        return out;
    }
    double p = std::sqrt(na), q = std::sqrt(nb);
    out.t = p / (p + q);
    out.point = eval_bezier(c, out.t);
    // Collinear control triangle: the bisector is undefined; the closed form
    // still lands on the curve point closest to c1.
    out.degenerate = std::abs(cross(a, b)) <= 1e-9 * na * nb || na == 0.0 || nb == 0.0;
    return out;
}

inline CurvePosSize curve_to_possize(const CurvePrimitive& c) {
    CurveMidpoint m = curve_midpoint(c);
    CurvePosSize ps;
    ps.midpoint = m.point;
    Vec2 arm1 = c.c0 - m.point;
    Vec2 arm2 = c.c2 - m.point;
    ps.arm_len1 = arm1.norm();
    ps.arm_len2 = arm2.norm();
    ps.arm_angle1 = ps.arm_len1 > 0.0 ? std::atan2(arm1.y, arm1.x) : 0.0;
    ps.arm_angle2 = ps.arm_len2 > 0.0 ? std::atan2(arm2.y, arm2.x) : 0.0;
    ps.width = c.width;
    ps.t_mid = m.t;
    ps.degenerate = m.degenerate;
    return ps;
}

namespace detail {

// The unique middle control point placing B(t) on the midpoint.
inline Vec2 curve_c1_for_t(Vec2 mid, Vec2 c0, Vec2 c2, double t) {
    double s = 1.0 - t;
    return (mid - c0 * (s * s) - c2 * (t * t)) / (2.0 * t * s);
}

} // namespace detail

// Inverse of curve_to_possize. The endpoints follow directly from the arms.
// With t_mid present the middle control point is explicit; otherwise we solve
// t_bisector(c1(t)) = t for the crossing parameter, scanning for all roots and
// taking the one nearest the sqrt-arm-ratio estimate.
inline CurvePrimitive possize_to_curve(const CurvePosSize& ps) {
    Vec2 c0 = ps.midpoint + unit_dir(ps.arm_angle1) * ps.arm_len1;
    Vec2 c2 = ps.midpoint + unit_dir(ps.arm_angle2) * ps.arm_len2;
    if (ps.arm_len1 <= 0.0 && ps.arm_len2 <= 0.0)
        return {c0, ps.midpoint, c2, ps.width};

    if (std::isfinite(ps.t_mid) && ps.t_mid > 0.0 && ps.t_mid < 1.0)
        return {c0, detail::curve_c1_for_t(ps.midpoint, c0, c2, ps.t_mid), c2, ps.width};

    auto residual = [&](double t) {
        Vec2 c1 = detail::curve_c1_for_t(ps.midpoint, c0, c2, t);
        double p = std::sqrt((c0 - c1).norm());
        double q = std::sqrt((c2 - c1).norm());
        return (p + q) > 0.0 ? p / (p + q) - t : 0.5 - t;
    };

    double guess = std::sqrt(ps.arm_len1) / (std::sqrt(ps.arm_len1) + std::sqrt(ps.arm_len2));
    double best_t = guess;
    double best_dist = std::numeric_limits<double>::infinity();
    const int n = 512;
    double prev_t = 1e-9, prev_f = residual(prev_t);
    for (int i = 1; i <= n; ++i) {
        double t = 1e-9 + (1.0 - 2e-9) * i / n;
        double f = residual(t);
        if ((f > 0.0) != (prev_f > 0.0)) {
            double lo = prev_t, hi = t, flo = prev_f;
            for (int it = 0; it < 60; ++it) {
                double m = 0.5 * (lo + hi), fm = residual(m);
                if ((fm > 0.0) == (flo > 0.0)) {
                    lo = m;
                    flo = fm;
                } else {
                    hi = m;
                }
            }
            double root = 0.5 * (lo + hi);
            if (std::abs(root - guess) < best_dist) {
                best_dist = std::abs(root - guess);
                best_t = root;
            }
        }
        prev_t = t;
        prev_f = f;
    }
    return {c0, detail::curve_c1_for_t(ps.midpoint, c0, c2, std::clamp(best_t, 1e-9, 1.0 - 1e-9)),
            c2, ps.width};
}

// ---------------------------------------------------------------------------
// Flattening

namespace detail {

inline void flatten_rec(const CurvePrimitive& c, double tol, int depth, std::vector<Vec2>& out) {
    Vec2 chord = c.c2 - c.c0;
    double clen2 = chord.norm2();
    // Max curve-to-chord-line distance for a quadratic is half the control
    // point's perpendicular deviation. Guard against control points past the
    // chord span, where the perpendicular test alone is blind.
    bool flat;
    if (clen2 > 0.0) {
        double dperp = std::abs(cross(chord, c.c1 - c.c0)) / std::sqrt(clen2);
        double u = dot(c.c1 - c.c0, chord) / clen2;
        flat = 0.5 * dperp <= tol && u >= -0.1 && u <= 1.1;
    } else {
        flat = (c.c1 - c.c0).norm() * 0.5 <= tol;
    }
    if (flat || depth >= 24) {
        out.push_back(c.c2);
        return;
    }
    auto [left, right] = split_curve(c, 0.5);
    flatten_rec(left, tol, depth + 1, out);
    flatten_rec(right, tol, depth + 1, out);
}

} // namespace detail

// Polyline within tol of the curve; endpoints are preserved exactly.
inline std::vector<Vec2> flatten_curve(const CurvePrimitive& c, double tol) {
    std::vector<Vec2> out;
    out.push_back(c.c0);
    detail::flatten_rec(c, tol, 0, out);
    return out;
}

// ---------------------------------------------------------------------------
// Cubic roots and closest points

namespace detail {

// Real roots of a x^3 + b x^2 + c x + d = 0, appended to out.
inline int solve_cubic(double a, double b, double c, double d, std::array<double, 3>& out) {
    if (std::abs(a) < 1e-14 * std::max({std::abs(b), std::abs(c), std::abs(d), 1.0})) {
        if (std::abs(b) < 1e-14 * std::max({std::abs(c), std::abs(d), 1.0})) {
            if (c == 0.0) return 0;
            out[0] = -d / c;
            return 1;
        }
        double disc = c * c - 4.0 * b * d;
        if (disc < 0.0) return 0;
        double s = std::sqrt(disc);
        out[0] = (-c + s) / (2.0 * b);
        out[1] = (-c - s) / (2.0 * b);
        return 2;
    }
    double p = b / a, q = c / a, r = d / a;
    // Depressed cubic t^3 + mt + n with x = t - p/3.
    double m = q - p * p / 3.0;
    double n = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    double shift = -p / 3.0;
    double disc = n * n / 4.0 + m * m * m / 27.0;
    int count;
    if (disc > 0.0) {
        double s = std::sqrt(disc);
        double u = std::cbrt(-n / 2.0 + s);
        double v = std::cbrt(-n / 2.0 - s);
        out[0] = u + v + shift;
        count = 1;
    } else if (m == 0.0 && n == 0.0) {
        out[0] = shift;
        count = 1;
    } else {
        double rho = std::sqrt(-m * m * m / 27.0);
        double theta = std::acos(std::clamp(-n / (2.0 * rho), -1.0, 1.0));
        double mag = 2.0 * std::sqrt(-m / 3.0);
        out[0] = mag * std::cos(theta / 3.0) + shift;
        out[1] = mag * std::cos((theta + 2.0 * kPi) / 3.0) + shift;
        out[2] = mag * std::cos((theta + 4.0 * kPi) / 3.0) + shift;
        count = 3;
    }
    // One Newton polish per root.
    for (int i = 0; i < count; ++i) {
        double x = out[i];
        double f = ((a * x + b) * x + c) * x + d;
        double fp = (3.0 * a * x + 2.0 * b) * x + c;
        if (fp != 0.0) out[i] = x - f / fp;
    }
    return count;
}

// Stationary points of |B(t) - q|^2: (B - q) . B' = 0, cubic in t.
inline int closest_param_candidates(const CurvePrimitive& c, Vec2 q, std::array<double, 3>& out) {
    Vec2 A = c.c0 - c.c1 * 2.0 + c.c2;
    Vec2 B = c.c1 - c.c0;
    Vec2 C = c.c0 - q;
    return solve_cubic(dot(A, A), 3.0 * dot(A, B), 2.0 * dot(B, B) + dot(A, C), dot(B, C), out);
}

} // namespace detail

struct ClosestPoint {
    Vec2 point;
    double param = 0.0; // parameter along the centerline in [0,1]
    Vec2 dir{1.0, 0.0}; // unit tangent at the closest point
};

inline ClosestPoint closest_point(const LinePrimitive& l, Vec2 q) {
    Vec2 d = l.p2 - l.p1;
    double len2 = d.norm2();
    ClosestPoint cp;
    if (len2 == 0.0) {
        cp.point = l.p1;
        cp.param = 0.0;
        return cp;
    }
    cp.param = std::clamp(dot(q - l.p1, d) / len2, 0.0, 1.0);
    cp.point = l.p1 + d * cp.param;
    cp.dir = d / std::sqrt(len2);
    return cp;
}

inline ClosestPoint closest_point(const CurvePrimitive& c, Vec2 q) {
    std::array<double, 3> roots{};
    int n = detail::closest_param_candidates(c, q, roots);
    double best_t = 0.0;
    double best_d2 = (c.c0 - q).norm2();
    double d2_end = (c.c2 - q).norm2();
    if (d2_end < best_d2) {
        best_d2 = d2_end;
        best_t = 1.0;
    }
    for (int i = 0; i < n; ++i) {
        double t = std::clamp(roots[i], 0.0, 1.0);
        double d2 = (eval_bezier(c, t) - q).norm2();
        if (d2 < best_d2) {
            best_d2 = d2;
            best_t = t;
        }
    }
    ClosestPoint cp;
    cp.param = best_t;
    cp.point = eval_bezier(c, best_t);
    Vec2 tangent = bezier_derivative(c, best_t);
    cp.dir = tangent.norm() > 1e-12 ? tangent.normalized() : (c.c2 - c.c0).normalized();
    if (cp.dir.norm2() == 0.0) cp.dir = {1.0, 0.0};
    return cp;
}

inline ClosestPoint closest_point(const Primitive& p, Vec2 q) {
    if (is_line(p)) return closest_point(std::get<LinePrimitive>(p), q);
    return closest_point(std::get<CurvePrimitive>(p), q);
}

// Closest parameter on the full parabola containing the curve (t unclamped).
inline double closest_param_unclamped(const CurvePrimitive& c, Vec2 q) {
    std::array<double, 3> roots{};
    int n = detail::closest_param_candidates(c, q, roots);
    if (n == 0) return 0.0;
    double best_t = roots[0];
    double best_d2 = (eval_bezier(c, roots[0]) - q).norm2();
    for (int i = 1; i < n; ++i) {
        double d2 = (eval_bezier(c, roots[i]) - q).norm2();
        if (d2 < best_d2) {
            best_d2 = d2;
            best_t = roots[i];
        }
    }
    return best_t;
}

// Distance from a point to a segment.
inline double segment_distance(Vec2 a, Vec2 b, Vec2 q) {
    Vec2 d = b - a;
    double len2 = d.norm2();
    if (len2 == 0.0) return (q - a).norm();
    double t = std::clamp(dot(q - a, d) / len2, 0.0, 1.0);
    return (q - (a + d * t)).norm();
}

// Minimum distance between two segments.
inline double segment_segment_distance(const LinePrimitive& a, const LinePrimitive& b) {
    Vec2 d1 = a.p2 - a.p1, d2 = b.p2 - b.p1;
    double c1 = cross(d1, b.p1 - a.p1), c2 = cross(d1, b.p2 - a.p1);
    double c3 = cross(d2, a.p1 - b.p1), c4 = cross(d2, a.p2 - b.p1);
    if (((c1 > 0) != (c2 > 0)) && ((c3 > 0) != (c4 > 0)) && c1 != c2 && c3 != c4)
        return 0.0; // proper crossing
    return std::min(std::min(segment_distance(a.p1, a.p2, b.p1), segment_distance(a.p1, a.p2, b.p2)),
                    std::min(segment_distance(b.p1, b.p2, a.p1), segment_distance(b.p1, b.p2, a.p2)));
}

} // namespace linevec
