// SPDX-License-Identifier: Apache-2.0
//
// Charge-interaction functional over a raster patch: two-Gaussian potentials,
// analytic stroke-rectangle integrals, connected-area masks, derived charge
// grids (size / position / redundancy), and mean-field gradients in the
// position+size parameterization.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "geom.hpp"
#include "raster.hpp"

namespace linevec {

using ChargeVector = Grid<double>;

struct PotentialParams {
    double r_close = 1.0;
    double r_far = 32.0;
    double lambda_far = 0.02;
    double truncation_radius = std::numeric_limits<double>::infinity();
};

// phi(r) = exp(-r^2/Rc^2) + lambda_f exp(-r^2/Rf^2), cut to zero past the
// truncation radius.
inline double potential(double r, const PotentialParams& p) {
    if (r > p.truncation_radius) return 0.0;
    double v = std::exp(-(r * r) / (p.r_close * p.r_close));
    if (p.lambda_far != 0.0) v += p.lambda_far * std::exp(-(r * r) / (p.r_far * p.r_far));
    return v;
}

struct RdnParams {
    double alpha_col = 15.0 * kPi / 180.0; // collinearity threshold angle
    double beta() const {
        double c = std::cos(alpha_col) - 1.0;
        return 1.0 / (c * c);
    }
};

struct EnergyParams {
    PotentialParams potential{1.0, 32.0, 0.02, 128.0};
    RdnParams rdn;
    double rdn_truncation = 8.0; // in units of r_close; the skipped Gaussian
                                 // tail must stay below gradient-test noise
    double lambda_pos = 4.0;     // in-mask amplification of positional charges
    double fill_threshold = 0.5;
    int supersample = 4;
    double flatten_tol = 0.05;
    // Quantize coverage charges to {0,1}. Keeps primitive charges on the same
    // scale as a binarized raster; fractional coverage against binary ink
    // settles visibly thin. Gradients are unaffected (charges are frozen).
    bool binary_charges = false;

    PotentialParams rdn_potential() const {
        return {potential.r_close, potential.r_far, 0.0, rdn_truncation * potential.r_close};
    }
};

// ---------------------------------------------------------------------------
// Position/size parameter blocks
//
// Lines:  [mx, my, angle | length, width]          pos = 0..2, size = 3..4
// Curves: [mx, my, arm_angle1, arm_angle2 | arm_len1, arm_len2, width]
//                                                  pos = 0..3, size = 4..6

enum class PrimKind { line, curve };

struct PrimParams {
    PrimKind kind = PrimKind::line;
    std::array<double, 7> v{};
    double t_mid = 0.5; // frozen curve parameter of the midpoint

    int count() const { return kind == PrimKind::line ? 5 : 7; }
    int pos_count() const { return kind == PrimKind::line ? 3 : 4; }
    double width() const { return kind == PrimKind::line ? v[4] : v[6]; }
    double& width_ref() { return kind == PrimKind::line ? v[4] : v[6]; }
    // Longitudinal extent used for collapse tests.
    double extent() const { return kind == PrimKind::line ? v[3] : v[4] + v[5]; }

    static PrimParams from_primitive(const Primitive& p) {
        PrimParams out;
        if (is_line(p)) {
            LinePosSize ps = line_to_possize(std::get<LinePrimitive>(p));
            out.kind = PrimKind::line;
            out.v = {ps.midpoint.x, ps.midpoint.y, ps.angle, ps.length, ps.width, 0.0, 0.0};
        } else {
            CurvePosSize ps = curve_to_possize(std::get<CurvePrimitive>(p));
            out.kind = PrimKind::curve;
            out.v = {ps.midpoint.x, ps.midpoint.y, ps.arm_angle1, ps.arm_angle2,
                     ps.arm_len1,   ps.arm_len2,   ps.width};
            out.t_mid = std::clamp(ps.t_mid, 1e-6, 1.0 - 1e-6);
        }
        return out;
    }

    Primitive to_primitive() const {
        if (kind == PrimKind::line)
            return possize_to_line({{v[0], v[1]}, v[2], v[3], v[4]});
        CurvePosSize ps;
        ps.midpoint = {v[0], v[1]};
        ps.arm_angle1 = v[2];
        ps.arm_angle2 = v[3];
        ps.arm_len1 = v[4];
        ps.arm_len2 = v[5];
        ps.width = v[6];
        ps.t_mid = t_mid;
        return possize_to_curve(ps);
    }
};

// ---------------------------------------------------------------------------
// Analytic stroke-rectangle integrals
//
// In the frame aligned with a stroke rectangle of length L and width W, the
// integral of one Gaussian over the rectangle separates into erf factors:
//   I = (pi R^2 / 4) [erf((L/2-u0)/R) + erf((L/2+u0)/R)]
//                  * [erf((W/2-v0)/R) + erf((W/2+v0)/R)].
// End caps are excluded; the finite-difference checks run against the same
// convention.

namespace detail {

inline constexpr double kInvSqrtPi = 0.5641895835477563;
inline constexpr double kMaskStripFraction = 0.8;

struct RectIntegral {
    double value = 0.0;
    double du0 = 0.0;
    double dv0 = 0.0;
    double dL = 0.0;
    double dW = 0.0;
};

inline double rect_outside_distance(double u0, double v0, double L, double W) {
    double du = std::max(0.0, std::abs(u0) - 0.5 * L);
    double dv = std::max(0.0, std::abs(v0) - 0.5 * W);
    return std::hypot(du, dv);
}

template <bool WithPartials>
inline RectIntegral rect_gauss(double u0, double v0, double L, double W,
                               const PotentialParams& pot) {
    RectIntegral out;
    if (rect_outside_distance(u0, v0, L, W) > pot.truncation_radius) return out;
    const double lambdas[2] = {1.0, pot.lambda_far};
    const double radii[2] = {pot.r_close, pot.r_far};
    for (int g = 0; g < 2; ++g) {
        double lam = lambdas[g];
        if (lam == 0.0) continue;
        double R = radii[g];
        double inv = 1.0 / R;
        double au = (0.5 * L - u0) * inv, bu = (0.5 * L + u0) * inv;
        double av = (0.5 * W - v0) * inv, bv = (0.5 * W + v0) * inv;
        double Su = std::erf(au) + std::erf(bu);
        double Sv = std::erf(av) + std::erf(bv);
        double scale = lam * (kPi * R * R * 0.25);
        out.value += scale * Su * Sv;
        if constexpr (WithPartials) {
            double gu_m = std::exp(-au * au), gu_p = std::exp(-bu * bu);
            double gv_m = std::exp(-av * av), gv_p = std::exp(-bv * bv);
            double cu = 2.0 * kInvSqrtPi * inv;
            out.du0 += scale * cu * (gu_p - gu_m) * Sv;
            out.dL += scale * kInvSqrtPi * inv * (gu_m + gu_p) * Sv;
            out.dv0 += scale * Su * cu * (gv_p - gv_m);
            out.dW += scale * Su * kInvSqrtPi * inv * (gv_m + gv_p);
        }
    }
    return out;
}

} // namespace detail

// Integral of the potential over the line's stroke rectangle against a unit
// charge at the given point.
inline double line_cell_interaction(const LinePrimitive& line, Vec2 charge_at,
                                    const PotentialParams& pot) {
    LinePosSize ps = line_to_possize(line);
    Vec2 d = unit_dir(ps.angle);
    Vec2 n = d.perp();
    Vec2 rel = charge_at - ps.midpoint;
    return detail::rect_gauss<false>(dot(rel, d), dot(rel, n), ps.length, ps.width, pot).value;
}

// Curve integral as the sum over the flattening polyline's segments.
inline double curve_cell_interaction(const CurvePrimitive& curve, Vec2 charge_at,
                                     const PotentialParams& pot, double flatten_tol) {
    auto poly = flatten_curve(curve, flatten_tol);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        Vec2 A = poly[i], B = poly[i + 1];
        Vec2 dv = B - A;
        double len = dv.norm();
        if (len < 1e-12) continue;
        Vec2 d = dv / len;
        Vec2 n = d.perp();
        Vec2 rel = charge_at - (A + B) * 0.5;
        total += detail::rect_gauss<false>(dot(rel, d), dot(rel, n), len, curve.width, pot).value;
    }
    return total;
}

inline double cell_interaction(const Primitive& prim, Vec2 charge_at, const PotentialParams& pot,
                               double flatten_tol) {
    if (is_line(prim)) return line_cell_interaction(std::get<LinePrimitive>(prim), charge_at, pot);
    return curve_cell_interaction(std::get<CurvePrimitive>(prim), charge_at, pot, flatten_tol);
}

// E_k(q) = sum_i q_i * integral over the stroke region; linear in the charges.
inline double interaction_energy(const Primitive& prim, const ChargeVector& charges,
                                 const PotentialParams& pot, double flatten_tol = 0.05) {
    double total = 0.0;
    for (int y = 0; y < charges.height; ++y)
        for (int x = 0; x < charges.width; ++x) {
            double q = charges.at(x, y);
            if (q == 0.0) continue;
            total += q * cell_interaction(prim, pixel_center(x, y), pot, flatten_tol);
        }
    return total;
}

// ---------------------------------------------------------------------------
// Curve geometry resolution for the optimizer: uniform flattening nodes with
// a frozen count plus the Jacobian of every node w.r.t. the seven parameters.

namespace detail {

struct CurveGeom {
    CurvePrimitive curve;
    int nseg = 1;
    std::vector<Vec2> nodes;
    // dnodes[j][p]: derivative of node j w.r.t. parameter p (0..5, width has
    // no effect on the centerline).
    std::vector<std::array<Vec2, 6>> dnodes;
};

inline int curve_energy_segments(const PrimParams& pp, double flatten_tol) {
    CurvePrimitive c = std::get<CurvePrimitive>(pp.to_primitive());
    Vec2 acc = c.c0 - c.c1 * 2.0 + c.c2; // B''/2
    double dev = acc.norm() * 0.25;      // max chord deviation for one segment
    int n = static_cast<int>(std::ceil(std::sqrt(std::max(dev, 0.0) / std::max(flatten_tol, 1e-6))));
    return std::clamp(n, 1, 48);
}

inline CurveGeom resolve_curve(const PrimParams& pp, int nseg, bool with_jacobian) {
    CurveGeom g;
    g.nseg = std::max(1, nseg);
    double t = std::clamp(pp.t_mid, 1e-6, 1.0 - 1e-6);
    double s = 1.0 - t;
    Vec2 mid{pp.v[0], pp.v[1]};
    double a1 = pp.v[2], a2 = pp.v[3], l1 = pp.v[4], l2 = pp.v[5];
    Vec2 u1 = unit_dir(a1), u2 = unit_dir(a2);
    Vec2 c0 = mid + u1 * l1;
    Vec2 c2 = mid + u2 * l2;
    Vec2 c1 = (mid - c0 * (s * s) - c2 * (t * t)) / (2.0 * t * s);
    g.curve = {c0, c1, c2, pp.width()};

    g.nodes.resize(g.nseg + 1);
    for (int j = 0; j <= g.nseg; ++j)
        g.nodes[j] = eval_bezier(g.curve, static_cast<double>(j) / g.nseg);

    if (!with_jacobian) return g;

    // Per-parameter control point derivatives; c1 follows from the frozen t.
    std::array<Vec2, 6> dc0{}, dc1{}, dc2{};
    Vec2 du1 = u1.perp(); // d(unit_dir)/d(angle)
    Vec2 du2 = u2.perp();
    // mx, my
    dc0[0] = {1, 0};
    dc0[1] = {0, 1};
    dc2[0] = {1, 0};
    dc2[1] = {0, 1};
    // arm angles
    dc0[2] = du1 * l1;
    dc2[3] = du2 * l2;
    // arm lengths
    dc0[4] = u1;
    dc2[5] = u2;
    double inv = 1.0 / (2.0 * t * s);
    for (int p = 0; p < 6; ++p) {
        Vec2 dmid = p == 0 ? Vec2{1, 0} : (p == 1 ? Vec2{0, 1} : Vec2{0, 0});
        dc1[p] = (dmid - dc0[p] * (s * s) - dc2[p] * (t * t)) * inv;
    }
    g.dnodes.resize(g.nseg + 1);
    for (int j = 0; j <= g.nseg; ++j) {
        double tj = static_cast<double>(j) / g.nseg;
        double sj = 1.0 - tj;
        double w0 = sj * sj, w1 = 2.0 * sj * tj, w2 = tj * tj;
        for (int p = 0; p < 6; ++p)
            g.dnodes[j][p] = dc0[p] * w0 + dc1[p] * w1 + dc2[p] * w2;
    }
    return g;
}

// Accumulator for per-node partials of the polyline integral.
struct PolyPartials {
    std::vector<Vec2> node; // dI/dP_j
    double width = 0.0;     // dI/dW
    double value = 0.0;
};

template <bool WithPartials>
inline void polyline_cell_integral(const std::vector<Vec2>& nodes, double W, Vec2 p,
                                   const PotentialParams& pot, double& value,
                                   PolyPartials* partials) {
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        Vec2 A = nodes[i], B = nodes[i + 1];
        Vec2 dv = B - A;
        double len = dv.norm();
        if (len < 1e-12) continue;
        Vec2 d = dv / len;
        Vec2 n = d.perp();
        Vec2 rel = p - (A + B) * 0.5;
        double u0 = dot(rel, d), v0 = dot(rel, n);
        RectIntegral ri = rect_gauss<WithPartials>(u0, v0, len, W, pot);
        value += ri.value;
        if constexpr (WithPartials) {
            // Frame derivatives: moving A or B shifts the midpoint, rotates
            // the frame (d phi = -n/len from A, +n/len from B) and stretches
            // the length.
            Vec2 dIdA = d * (-0.5 * ri.du0) + n * (-(v0 / len) * ri.du0) + n * (-0.5 * ri.dv0) +
                        n * ((u0 / len) * ri.dv0) + d * (-ri.dL);
            Vec2 dIdB = d * (-0.5 * ri.du0) + n * ((v0 / len) * ri.du0) + n * (-0.5 * ri.dv0) +
                        n * (-(u0 / len) * ri.dv0) + d * (ri.dL);
            partials->node[i] += dIdA;
            partials->node[i + 1] += dIdB;
            partials->width += ri.dW;
        }
    }
}

struct LinePartials {
    double value = 0.0;
    std::array<double, 5> d{}; // mx, my, angle, length, width
};

template <bool WithPartials>
inline LinePartials line_cell_integral(const PrimParams& pp, Vec2 p, const PotentialParams& pot) {
    LinePartials out;
    Vec2 mid{pp.v[0], pp.v[1]};
    Vec2 d = unit_dir(pp.v[2]);
    Vec2 n = d.perp();
    Vec2 rel = p - mid;
    double u0 = dot(rel, d), v0 = dot(rel, n);
    RectIntegral ri = rect_gauss<WithPartials>(u0, v0, pp.v[3], pp.v[4], pot);
    out.value = ri.value;
    if constexpr (WithPartials) {
        out.d[0] = -ri.du0 * d.x - ri.dv0 * n.x;
        out.d[1] = -ri.du0 * d.y - ri.dv0 * n.y;
        out.d[2] = ri.du0 * v0 - ri.dv0 * u0;
        out.d[3] = ri.dL;
        out.d[4] = ri.dW;
    }
    return out;
}

} // namespace detail

// Energy of a primitive (given as a parameter block) against a frozen charge
// grid. For curves the flattening node count is pinned by the caller so the
// map stays smooth under parameter perturbations.
inline double frozen_interaction_energy(const PrimParams& pp, const ChargeVector& q,
                                        const PotentialParams& pot, int curve_nseg) {
    double total = 0.0;
    if (pp.kind == PrimKind::line) {
        for (int y = 0; y < q.height; ++y)
            for (int x = 0; x < q.width; ++x) {
                double c = q.at(x, y);
                if (c == 0.0) continue;
                total += c * detail::line_cell_integral<false>(pp, pixel_center(x, y), pot).value;
            }
        return total;
    }
    detail::CurveGeom g = detail::resolve_curve(pp, curve_nseg, false);
    for (int y = 0; y < q.height; ++y)
        for (int x = 0; x < q.width; ++x) {
            double c = q.at(x, y);
            if (c == 0.0) continue;
            double v = 0.0;
            detail::polyline_cell_integral<false>(g.nodes, pp.width(), pixel_center(x, y), pot, v,
                                                  nullptr);
            total += c * v;
        }
    return total;
}

// ---------------------------------------------------------------------------
// Connected-area mask

namespace detail {

inline bool filled_at(const GrayImage& raster, Vec2 p, double threshold) {
    int ix = static_cast<int>(std::floor(p.x));
    int iy = static_cast<int>(std::floor(p.y));
    return raster.in_bounds(ix, iy) && raster.at(ix, iy) >= threshold;
}

struct ScanExtents {
    double u_minus = 0, u_plus = 0, v_minus = 0, v_plus = 0;
    bool any = false;
};

} // namespace detail

// Mask for a line: starting at the midpoint, march along the centerline to the
// first unfilled pixel in both directions (fixing the region's length), then
// march sideways while whole strips stay filled (fixing the sides). The scan
// base snaps to the midpoint's pixel center so samples never land on pixel
// boundaries, and the mask rectangle is padded by one pixel so the
// anti-aliased coverage fringe of an aligned stroke stays inside it.
inline MaskGrid compute_mask(const LinePrimitive& line, const GrayImage& raster,
                             double fill_threshold) {
    MaskGrid mask(raster.width, raster.height, 0);
    LinePosSize ps = line_to_possize(line);
    Vec2 d = unit_dir(ps.angle);
    Vec2 n = d.perp();
    Vec2 base = pixel_center(static_cast<int>(std::floor(ps.midpoint.x)),
                             static_cast<int>(std::floor(ps.midpoint.y)));
    if (!detail::filled_at(raster, base, fill_threshold)) return mask;

    int limit = raster.width + raster.height;
    auto march = [&](Vec2 dir) {
        int extent = 0;
        for (int s = 1; s <= limit; ++s) {
            if (!detail::filled_at(raster, base + dir * static_cast<double>(s), fill_threshold))
                break;
            extent = s;
        }
        return extent;
    };
    int up = march(d), um = march(-d);
    // Side scans cover the segment body only; past the end caps the ink
    // narrows and would cut the strips short.
    int half_len = std::max(0, static_cast<int>(std::floor(0.5 * ps.length)));
    int su = std::min(up, half_len), sm = std::min(um, half_len);
    // A strip counts as filled when most of its samples are; requiring every
    // sample makes the scan collapse on the staircase boundary of binarized
    // diagonal strokes.
    auto side = [&](Vec2 dir) {
        int extent = 0;
        for (int v = 1; v <= limit; ++v) {
            int hits = 0, total = 0;
            for (int u = -sm; u <= su; ++u, ++total)
                hits += detail::filled_at(
                    raster, base + d * static_cast<double>(u) + dir * static_cast<double>(v),
                    fill_threshold);
            if (hits < detail::kMaskStripFraction * total) break;
            extent = v;
        }
        return extent;
    };
    int vp = side(n), vm = side(-n);

    const double pad = 1.0;
    for (int y = 0; y < raster.height; ++y)
        for (int x = 0; x < raster.width; ++x) {
            Vec2 rel = pixel_center(x, y) - base;
            double u = dot(rel, d), v = dot(rel, n);
            if (u >= -um - pad && u <= up + pad && v >= -vm - pad && v <= vp + pad)
                mask.at(x, y) = 1;
        }
    return mask;
}

// Mask for a curve: the same scan in (arc length along the containing
// parabola, signed offset) coordinates.
inline MaskGrid compute_mask(const CurvePrimitive& curve, const GrayImage& raster,
                             double fill_threshold) {
    MaskGrid mask(raster.width, raster.height, 0);
    Vec2 acc = curve.c0 - curve.c1 * 2.0 + curve.c2;
    if (acc.norm() < 1e-9) // straight: fall back to the chord
        return compute_mask(LinePrimitive{curve.c0, curve.c2, curve.width}, raster, fill_threshold);

    CurveMidpoint cm = curve_midpoint(curve);
    double t_mid = cm.t;
    if (!detail::filled_at(raster, cm.point, fill_threshold)) return mask;

    int limit = raster.width + raster.height;
    auto tangent_scale = [&](double t) {
        double sp = bezier_derivative(curve, t).norm();
        return 1.0 / std::max(sp, 2.0); // step at most half a parameter unit
    };
    std::vector<double> ts;        // accepted march samples
    std::vector<double> body_ts;   // samples within the curve's own arc span
    double arc_fwd = bezier_arclength(curve, t_mid, 1.0);
    double arc_bwd = bezier_arclength(curve, 0.0, t_mid);
    auto march = [&](double dir, double body_arc) {
        int extent = 0;
        double t = t_mid;
        for (int s = 1; s <= limit; ++s) {
            t += dir * tangent_scale(t);
            if (std::abs(t - t_mid) > 20.0) break;
            if (!detail::filled_at(raster, eval_bezier(curve, t), fill_threshold)) break;
            extent = s;
            ts.push_back(t);
            if (s <= static_cast<int>(std::floor(body_arc))) body_ts.push_back(t);
        }
        return extent;
    };
    double up = march(1.0, arc_fwd), um = march(-1.0, arc_bwd);
    ts.push_back(t_mid);
    body_ts.push_back(t_mid);
    auto side = [&](double dir) {
        int extent = 0;
        for (int v = 1; v <= limit; ++v) {
            int hits = 0, total = 0;
            for (double t : body_ts) {
                Vec2 nrm = bezier_derivative(curve, t).perp().normalized();
                hits += detail::filled_at(raster, eval_bezier(curve, t) + nrm * (dir * v),
                                          fill_threshold);
                ++total;
            }
            if (hits < detail::kMaskStripFraction * total) break;
            extent = v;
        }
        return extent;
    };
    double vp = side(1.0), vm = side(-1.0);

    const double pad = 1.0;
    // Bounding box of the accepted scan region, padded.
    double minx = std::numeric_limits<double>::infinity(), miny = minx, maxx = -minx, maxy = -minx;
    for (double t : ts) {
        Vec2 p = eval_bezier(curve, t);
        minx = std::min(minx, p.x);
        miny = std::min(miny, p.y);
        maxx = std::max(maxx, p.x);
        maxy = std::max(maxy, p.y);
    }
    double reach = std::max(vp, vm) + pad + 1.0;
    int x0 = std::max(0, static_cast<int>(std::floor(minx - reach)));
    int y0 = std::max(0, static_cast<int>(std::floor(miny - reach)));
    int x1 = std::min(raster.width, static_cast<int>(std::ceil(maxx + reach)));
    int y1 = std::min(raster.height, static_cast<int>(std::ceil(maxy + reach)));

    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            Vec2 c = pixel_center(x, y);
            double tc = closest_param_unclamped(curve, c);
            Vec2 foot = eval_bezier(curve, tc);
            Vec2 tan = bezier_derivative(curve, tc);
            Vec2 off = c - foot;
            double v = cross(tan, off) >= 0.0 ? off.norm() : -off.norm();
            double u = tc >= t_mid ? bezier_arclength(curve, t_mid, tc)
                                   : -bezier_arclength(curve, tc, t_mid);
            if (u >= -um - pad && u <= up + pad && v >= -vm - pad && v <= vp + pad)
                mask.at(x, y) = 1;
        }
    return mask;
}

inline MaskGrid compute_mask(const Primitive& prim, const GrayImage& raster, double fill_threshold) {
    if (is_line(prim))
        return compute_mask(std::get<LinePrimitive>(prim), raster, fill_threshold);
    return compute_mask(std::get<CurvePrimitive>(prim), raster, fill_threshold);
}

// ---------------------------------------------------------------------------
// Derived charge grids

// q^size: (q - q_hat) inside the mask, own coverage outside. The outside
// branch always uses the true fractional coverage: quantizing it would turn
// the staircase corners of thin diagonal footprints into full shrink charges.
inline ChargeVector charges_size(const CoverageGrid& union_q, const GrayImage& raster,
                                 const CoverageGrid& own_q, const MaskGrid& mask) {
    ChargeVector out(raster.width, raster.height);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data[i] = mask.data[i] ? union_q.data[i] - raster.data[i] : own_q.data[i];
    return out;
}

// q^pos: (q - q_k - q_hat), amplified by lambda_pos inside the mask.
inline ChargeVector charges_pos(const CoverageGrid& union_q, const GrayImage& raster,
                                const CoverageGrid& own_q, const MaskGrid& mask,
                                double lambda_pos) {
    ChargeVector out(raster.width, raster.height);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double v = union_q.data[i] - own_q.data[i] - raster.data[i];
        out.data[i] = mask.data[i] ? lambda_pos * v : v;
    }
    return out;
}

// Canonical undirected tangent: flipped into the angle range [-pi/2, pi/2).
inline Vec2 canonical_dir(Vec2 d) {
    if (d.x < 0.0 || (d.x == 0.0 && d.y > 0.0)) return -d;
    return d;
}

// Tangent directions of a primitive at the closest point to each covered cell.
inline Grid<Vec2> tangent_field(const Primitive& prim, const CoverageGrid& coverage) {
    Grid<Vec2> out(coverage.width, coverage.height, Vec2{0, 0});
    for (int y = 0; y < coverage.height; ++y)
        for (int x = 0; x < coverage.width; ++x)
            if (coverage.at(x, y) > 0.0)
                out.at(x, y) = canonical_dir(closest_point(prim, pixel_center(x, y)).dir);
    return out;
}

// q^rdn: for each pixel, the presence-weighted mean direction of the other
// primitives m = sum_j l_j q_j, turned into a charge
//   exp(-(|l_k . m_hat| - 1)^2 beta) * |m|,
// so only near-collinear overlap is penalized. Tangents are undirected; each
// l_j enters with the sign that makes it agree with l_k, which keeps the sum
// frame-independent.
inline ChargeVector charges_rdn(std::size_t k, const std::vector<Primitive>& prims,
                                const std::vector<CoverageGrid>& coverage,
                                const std::vector<Grid<Vec2>>& dirs, const RdnParams& rdn) {
    if (coverage.empty()) return {};
    ChargeVector out(coverage[0].width, coverage[0].height);
    double beta = rdn.beta();
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            bool any = false;
            for (std::size_t j = 0; j < prims.size() && !any; ++j)
                any = j != k && coverage[j].at(x, y) > 0.0;
            if (!any) continue;
            Vec2 lk = dirs[k].at(x, y);
            if (lk.norm2() == 0.0)
                lk = canonical_dir(closest_point(prims[k], pixel_center(x, y)).dir);
            Vec2 m{0, 0};
            for (std::size_t j = 0; j < prims.size(); ++j) {
                if (j == k) continue;
                double q = coverage[j].at(x, y);
                if (q <= 0.0) continue;
                Vec2 lj = dirs[j].at(x, y);
                if (dot(lj, lk) < 0.0) lj = -lj;
                m += lj * q;
            }
            double norm = m.norm();
            if (norm < 1e-12) continue;
            double e = std::abs(dot(lk, m / norm)) - 1.0;
            out.at(x, y) = std::exp(-e * e * beta) * norm;
        }
    return out;
}

// ---------------------------------------------------------------------------
// Shared per-iteration state and the mean-field gradient

struct PatchState {
    std::vector<Primitive> prims;
    std::vector<CoverageGrid> coverage;     // charge scale (quantized if asked)
    std::vector<CoverageGrid> coverage_raw; // true fractional coverage
    CoverageGrid union_q;
    std::vector<MaskGrid> masks;
    std::vector<Grid<Vec2>> dirs;
};

inline PatchState build_patch_state(const std::vector<Primitive>& prims, const GrayImage& raster,
                                    const EnergyParams& params) {
    PatchState st;
    st.prims = prims;
    st.union_q = CoverageGrid(raster.width, raster.height, 0.0);
    for (const auto& p : prims) {
        CoverageGrid g = render_primitive(p, raster.width, raster.height, params.supersample,
                                          std::min(params.flatten_tol, 0.05));
        st.coverage_raw.push_back(g);
        if (params.binary_charges)
            for (double& v : g.data) v = v >= 0.5 ? 1.0 : 0.0;
        for (std::size_t i = 0; i < g.size(); ++i)
            st.union_q.data[i] = std::max(st.union_q.data[i], g.data[i]);
        st.coverage.push_back(std::move(g));
    }
    for (std::size_t k = 0; k < prims.size(); ++k) {
        st.masks.push_back(compute_mask(prims[k], raster, params.fill_threshold));
        st.dirs.push_back(tangent_field(prims[k], st.coverage[k]));
    }
    return st;
}

struct FrozenCharges {
    ChargeVector q_size;
    ChargeVector q_pos;
    ChargeVector q_rdn;
};

inline FrozenCharges frozen_charges(std::size_t k, const PatchState& st, const GrayImage& raster,
                                    const EnergyParams& params) {
    FrozenCharges fc;
    fc.q_size = charges_size(st.union_q, raster, st.coverage_raw[k], st.masks[k]);
    fc.q_pos = charges_pos(st.union_q, raster, st.coverage[k], st.masks[k], params.lambda_pos);
    fc.q_rdn = charges_rdn(k, st.prims, st.coverage, st.dirs, params.rdn);
    return fc;
}

struct EnergyTerms {
    std::vector<double> e_size;
    std::vector<double> e_pos;
    std::vector<double> e_rdn;
    double total_size = 0.0;
    double total_pos = 0.0;
    double total_rdn = 0.0;
    double total = 0.0;
};

inline EnergyTerms total_energy(const std::vector<Primitive>& prims, const GrayImage& raster,
                                const EnergyParams& params) {
    EnergyTerms out;
    PatchState st = build_patch_state(prims, raster, params);
    PotentialParams rdn_pot = params.rdn_potential();
    for (std::size_t k = 0; k < prims.size(); ++k) {
        FrozenCharges fc = frozen_charges(k, st, raster, params);
        PrimParams pp = PrimParams::from_primitive(prims[k]);
        int nseg = pp.kind == PrimKind::curve
                       ? detail::curve_energy_segments(pp, params.flatten_tol)
                       : 1;
        double es = frozen_interaction_energy(pp, fc.q_size, params.potential, nseg);
        double ep = frozen_interaction_energy(pp, fc.q_pos, params.potential, nseg);
        double er = frozen_interaction_energy(pp, fc.q_rdn, rdn_pot, nseg);
        out.e_size.push_back(es);
        out.e_pos.push_back(ep);
        out.e_rdn.push_back(er);
        out.total_size += es;
        out.total_pos += ep;
        out.total_rdn += er;
    }
    out.total = out.total_size + out.total_pos + out.total_rdn;
    return out;
}

struct PrimGradient {
    PrimKind kind = PrimKind::line;
    std::array<double, 7> d{};
    int nseg = 1;

    double norm() const {
        double s = 0.0;
        int n = kind == PrimKind::line ? 5 : 7;
        for (int i = 0; i < n; ++i) s += d[i] * d[i];
        return std::sqrt(s);
    }
};

// Mean-field gradient for primitive k: all charge grids, masks, and other
// primitives frozen. E_pos moves only position parameters; E_size and E_rdn
// move only size parameters.
inline PrimGradient gradient_from_charges(const PrimParams& pp, const FrozenCharges& fc,
                                          const EnergyParams& params, int nseg) {
    PrimGradient out;
    out.kind = pp.kind;
    out.nseg = nseg;
    PotentialParams rdn_pot = params.rdn_potential();

    if (pp.kind == PrimKind::line) {
        auto accumulate = [&](const ChargeVector& q, const PotentialParams& pot, int lo, int hi) {
            for (int y = 0; y < q.height; ++y)
                for (int x = 0; x < q.width; ++x) {
                    double c = q.at(x, y);
                    if (c == 0.0) continue;
                    auto lp = detail::line_cell_integral<true>(pp, pixel_center(x, y), pot);
                    for (int i = lo; i < hi; ++i) out.d[i] += c * lp.d[i];
                }
        };
        accumulate(fc.q_pos, params.potential, 0, 3);
        accumulate(fc.q_size, params.potential, 3, 5);
        accumulate(fc.q_rdn, rdn_pot, 3, 5);
        return out;
    }

    detail::CurveGeom g = detail::resolve_curve(pp, nseg, true);
    auto accumulate = [&](const ChargeVector& q, const PotentialParams& pot,
                          detail::PolyPartials& acc) {
        for (int y = 0; y < q.height; ++y)
            for (int x = 0; x < q.width; ++x) {
                double c = q.at(x, y);
                if (c == 0.0) continue;
                detail::PolyPartials cell;
                cell.node.assign(g.nodes.size(), Vec2{0, 0});
                double v = 0.0;
                detail::polyline_cell_integral<true>(g.nodes, pp.width(), pixel_center(x, y), pot,
                                                     v, &cell);
                for (std::size_t j = 0; j < g.nodes.size(); ++j) acc.node[j] += cell.node[j] * c;
                acc.width += cell.width * c;
            }
    };
    detail::PolyPartials acc_pos, acc_size;
    acc_pos.node.assign(g.nodes.size(), Vec2{0, 0});
    acc_size.node.assign(g.nodes.size(), Vec2{0, 0});
    accumulate(fc.q_pos, params.potential, acc_pos);
    accumulate(fc.q_size, params.potential, acc_size);
    accumulate(fc.q_rdn, rdn_pot, acc_size);
    // Chain node partials through the frozen-t control point Jacobian.
    for (int p = 0; p < 4; ++p) // mx, my, arm angles
        for (std::size_t j = 0; j < g.nodes.size(); ++j)
            out.d[p] += dot(acc_pos.node[j], g.dnodes[j][p]);
    for (int p = 4; p < 6; ++p) // arm lengths
        for (std::size_t j = 0; j < g.nodes.size(); ++j)
            out.d[p] += dot(acc_size.node[j], g.dnodes[j][p]);
    out.d[6] = acc_size.width;
    return out;
}

inline PrimGradient gradient(std::size_t k, const std::vector<Primitive>& prims,
                             const GrayImage& raster, const EnergyParams& params) {
    PatchState st = build_patch_state(prims, raster, params);
    FrozenCharges fc = frozen_charges(k, st, raster, params);
    PrimParams pp = PrimParams::from_primitive(prims[k]);
    int nseg =
        pp.kind == PrimKind::curve ? detail::curve_energy_segments(pp, params.flatten_tol) : 1;
    return gradient_from_charges(pp, fc, params, nseg);
}

} // namespace linevec
