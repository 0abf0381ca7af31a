// SPDX-License-Identifier: Apache-2.0
//
// Cross-patch post-processing: graph-based merging of lines with a total
// least-squares refit and endpoint snapping, plus iterative pairwise merging
// of quadratic Bezier curves with a brute-force correspondence search.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

#include "geom.hpp"

namespace linevec {

struct VectorScene {
    double width = 0.0;
    double height = 0.0;
    std::vector<Primitive> primitives;
};

struct MergeConfig {
    // Nonpositive gap/offset request scene-adaptive defaults proportional to
    // the mean stroke width.
    double link_max_gap = -1.0;
    double link_max_angle = 5.0 * kPi / 180.0;
    double link_max_offset = -1.0;
    double snap_fraction = 0.05;
    double curve_width_tol = 0.3;
    double curve_fit_tol = 1.0;
    int u_q1_samples = 33;

    MergeConfig resolved(const VectorScene& scene) const {
        MergeConfig out = *this;
        double mean_w = 1.0;
        if (!scene.primitives.empty()) {
            double s = 0.0;
            for (const auto& p : scene.primitives) s += prim_width(p);
            mean_w = s / static_cast<double>(scene.primitives.size());
        }
        if (out.link_max_gap <= 0.0) out.link_max_gap = 2.0 * mean_w;
        if (out.link_max_offset <= 0.0) out.link_max_offset = 0.5 * mean_w;
        return out;
    }
};

// Two segments link when they are close, collinear within the angle gate, not
// parallel side-by-side (mutual midpoint offsets from the other's supporting
// line stay small), and of comparable width.
inline bool link_predicate(const LinePrimitive& a, const LinePrimitive& b,
                           const MergeConfig& cfg) {
    if (segment_segment_distance(a, b) > cfg.link_max_gap) return false;
    LinePosSize pa = line_to_possize(a), pb = line_to_possize(b);
    double diff = std::abs(normalize_angle_halfpi(pa.angle - pb.angle));
    diff = std::min(diff, kPi - diff);
    if (diff > cfg.link_max_angle) return false;
    Vec2 na = unit_dir(pa.angle).perp(), nb = unit_dir(pb.angle).perp();
    if (std::abs(dot(pb.midpoint - pa.midpoint, na)) > cfg.link_max_offset) return false;
    if (std::abs(dot(pa.midpoint - pb.midpoint, nb)) > cfg.link_max_offset) return false;
    if (std::min(a.width, b.width) < 0.5 * std::max(a.width, b.width)) return false;
    return true;
}

namespace detail {

struct MergeUnionFind {
    std::vector<int> parent;
    explicit MergeUnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

// Total-least-squares line through a point set: centroid plus the principal
// axis of the scatter.
inline LinePosSize tls_line(const std::vector<Vec2>& pts) {
    Vec2 c{0, 0};
    for (Vec2 p : pts) c += p;
    c = c / static_cast<double>(pts.size());
    double sxx = 0, syy = 0, sxy = 0;
    for (Vec2 p : pts) {
        Vec2 d = p - c;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    LinePosSize out;
    out.midpoint = c;
    out.angle = normalize_angle_halfpi(0.5 * std::atan2(2.0 * sxy, sxx - syy));
    return out;
}

} // namespace detail

// Replaces every linked component of line segments with a single total
// least-squares fit through the members' endpoints; singletons pass through.
inline VectorScene merge_lines(const VectorScene& scene, const MergeConfig& raw_cfg) {
    MergeConfig cfg = raw_cfg.resolved(scene);
    std::vector<int> line_index;
    for (std::size_t i = 0; i < scene.primitives.size(); ++i)
        if (is_line(scene.primitives[i])) line_index.push_back(static_cast<int>(i));

    detail::MergeUnionFind uf(line_index.size());
    for (std::size_t a = 0; a < line_index.size(); ++a)
        for (std::size_t b = a + 1; b < line_index.size(); ++b)
            if (link_predicate(std::get<LinePrimitive>(scene.primitives[line_index[a]]),
                               std::get<LinePrimitive>(scene.primitives[line_index[b]]), cfg))
                uf.unite(static_cast<int>(a), static_cast<int>(b));

    std::vector<std::vector<int>> groups(line_index.size());
    for (std::size_t a = 0; a < line_index.size(); ++a)
        groups[uf.find(static_cast<int>(a))].push_back(line_index[a]);

    VectorScene out;
    out.width = scene.width;
    out.height = scene.height;
    std::vector<std::uint8_t> done(scene.primitives.size(), 0);
    for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
        if (done[i]) continue;
        if (!is_line(scene.primitives[i])) {
            out.primitives.push_back(scene.primitives[i]);
            continue;
        }
        // Locate this line's group.
        const std::vector<int>* group = nullptr;
        for (std::size_t a = 0; a < line_index.size(); ++a)
            if (line_index[a] == static_cast<int>(i)) {
                group = &groups[uf.find(static_cast<int>(a))];
                break;
            }
        if (!group || group->size() <= 1) {
            out.primitives.push_back(scene.primitives[i]);
            done[i] = 1;
            continue;
        }
        std::vector<Vec2> pts;
        double wsum = 0.0, lsum = 0.0;
        for (int idx : *group) {
            const auto& l = std::get<LinePrimitive>(scene.primitives[idx]);
            pts.push_back(l.p1);
            pts.push_back(l.p2);
            double len = (l.p2 - l.p1).norm();
            wsum += len * l.width;
            lsum += len;
            done[idx] = 1;
        }
        LinePosSize fit = detail::tls_line(pts);
        Vec2 d = unit_dir(fit.angle);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (Vec2 p : pts) {
            double u = dot(p - fit.midpoint, d);
            lo = std::min(lo, u);
            hi = std::max(hi, u);
        }
        LinePrimitive merged{fit.midpoint + d * lo, fit.midpoint + d * hi,
                             lsum > 0.0 ? wsum / lsum : 1.0};
        out.primitives.push_back(merged);
    }
    return out;
}

namespace detail {

// Proper intersection point of two segments, if any.
inline std::optional<Vec2> segment_intersection(const LinePrimitive& a, const LinePrimitive& b) {
    Vec2 r = a.p2 - a.p1, s = b.p2 - b.p1;
    double denom = cross(r, s);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    double t = cross(b.p1 - a.p1, s) / denom;
    double u = cross(b.p1 - a.p1, r) / denom;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return a.p1 + r * t;
}

} // namespace detail

// Cuts dangling ends: endpoints closer to an intersection point than
// snap_fraction of their segment's length move onto the intersection.
inline VectorScene snap_endpoints(const VectorScene& scene, const MergeConfig& raw_cfg) {
    MergeConfig cfg = raw_cfg.resolved(scene);
    VectorScene out = scene;
    for (std::size_t i = 0; i < out.primitives.size(); ++i) {
        if (!is_line(out.primitives[i])) continue;
        for (std::size_t j = i + 1; j < out.primitives.size(); ++j) {
            if (!is_line(out.primitives[j])) continue;
            auto& a = std::get<LinePrimitive>(out.primitives[i]);
            auto& b = std::get<LinePrimitive>(out.primitives[j]);
            auto hit = detail::segment_intersection(a, b);
            if (!hit) continue;
            auto trim = [&](LinePrimitive& l) {
                double len = (l.p2 - l.p1).norm();
                if (len <= 0.0) return;
                if ((l.p1 - *hit).norm() < cfg.snap_fraction * len) l.p1 = *hit;
                if ((l.p2 - *hit).norm() < cfg.snap_fraction * len) l.p2 = *hit;
            };
            trim(a);
            trim(b);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quadratic Bezier pair merging

struct CurveCorrespondence {
    double t_b;  // midpoint parameter on P
    double s_b;  // midpoint parameter on Q
    double t_q1; // parameter of Q(0) projected onto P
};

inline std::optional<CurveCorrespondence> curve_midpoint_correspondence(const CurvePrimitive& P,
                                                                        const CurvePrimitive& Q) {
    CurveMidpoint mp = curve_midpoint(P);
    CurveMidpoint mq = curve_midpoint(Q);
    if (mp.degenerate || mq.degenerate) return std::nullopt;
    CurveCorrespondence out;
    out.t_b = mp.t;
    out.s_b = mq.t;
    out.t_q1 = closest_point(P, Q.c0).param;
    return out;
}

namespace detail {

// Least-squares quadratic through six point/parameter correspondences.
inline CurvePrimitive fit_quadratic(const std::array<Vec2, 6>& pts,
                                    const std::array<double, 6>& us, double width) {
    // Normal equations for the three Bernstein weights.
    double ata[3][3] = {};
    Vec2 atb[3] = {};
    for (int m = 0; m < 6; ++m) {
        double u = us[m], s = 1.0 - u;
        double w[3] = {s * s, 2.0 * s * u, u * u};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) ata[r][c] += w[r] * w[c];
            atb[r] += pts[m] * w[r];
        }
    }
    // Gaussian elimination with partial pivoting on the 3x3 system.
    int piv[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int best = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(ata[piv[r]][col]) > std::abs(ata[piv[best]][col])) best = r;
        std::swap(piv[col], piv[best]);
        for (int r = col + 1; r < 3; ++r) {
            double f = ata[piv[r]][col] / ata[piv[col]][col];
            for (int c = col; c < 3; ++c) ata[piv[r]][c] -= f * ata[piv[col]][c];
            atb[piv[r]] -= atb[piv[col]] * f;
        }
    }
    Vec2 sol[3];
    for (int r = 2; r >= 0; --r) {
        Vec2 rhs = atb[piv[r]];
        for (int c = r + 1; c < 3; ++c) rhs -= sol[c] * ata[piv[r]][c];
        sol[r] = rhs / ata[piv[r]][r];
    }
    return {sol[0], sol[1], sol[2], width};
}

inline double curve_length(const CurvePrimitive& c) { return bezier_arclength(c, 0.0, 1.0); }

inline double distance_to_curve(const CurvePrimitive& c, Vec2 p) {
    return (closest_point(c, p).point - p).norm();
}

} // namespace detail

// Attempts to replace the pair (P, Q) with one quadratic fit through their
// endpoints and midpoints. The parameter of Q(0) on the new curve is searched
// on a uniform grid and the best fit is accepted only if its residual stays
// within curve_fit_tol.
inline std::optional<CurvePrimitive> merge_curve_pair(const CurvePrimitive& P,
                                                      const CurvePrimitive& Q,
                                                      const MergeConfig& cfg) {
    if (std::abs(P.width - Q.width) > cfg.curve_width_tol * std::max(P.width, Q.width))
        return std::nullopt;
    // The pair must touch: some endpoint of Q near P's stroke.
    double reach = 0.5 * P.width + cfg.curve_fit_tol;
    if (std::min(detail::distance_to_curve(P, Q.c0), detail::distance_to_curve(P, Q.c2)) > reach)
        return std::nullopt;
    auto corr = curve_midpoint_correspondence(P, Q);
    if (!corr) return std::nullopt;
    if (corr->t_q1 <= 1e-9) return std::nullopt;

    std::array<Vec2, 6> pts = {P.c0,         eval_bezier(P, corr->t_b), P.c2,
                               Q.c0,         eval_bezier(Q, corr->s_b), Q.c2};
    std::optional<CurvePrimitive> best;
    double best_residual = std::numeric_limits<double>::infinity();
    int n = std::max(3, cfg.u_q1_samples);
    for (int i = 1; i <= n; ++i) {
        double u1 = static_cast<double>(i) / (n + 1);
        std::array<double, 6> us = {0.0,
                                    corr->t_b * u1 / corr->t_q1,
                                    u1 / corr->t_q1,
                                    u1,
                                    1.0 - (1.0 - corr->s_b) * (1.0 - u1),
                                    1.0};
        CurvePrimitive fit = detail::fit_quadratic(pts, us, P.width);
        double residual = 0.0;
        for (int m = 0; m < 6; ++m)
            residual = std::max(residual, (eval_bezier(fit, us[m]) - pts[m]).norm());
        if (residual < best_residual) {
            best_residual = residual;
            best = fit;
        }
    }
    if (!best || best_residual > cfg.curve_fit_tol) return std::nullopt;
    double lp = detail::curve_length(P), lq = detail::curve_length(Q);
    best->width = lp + lq > 0.0 ? (lp * P.width + lq * Q.width) / (lp + lq) : P.width;
    return best;
}

// Repeatedly merges curve pairs whose dilated bounding boxes intersect until a
// full pass makes no replacement.
inline VectorScene merge_curves(const VectorScene& scene, const MergeConfig& raw_cfg) {
    MergeConfig cfg = raw_cfg.resolved(scene);
    VectorScene out = scene;
    auto bbox_overlap = [&](const CurvePrimitive& a, const CurvePrimitive& b) {
        double pad = cfg.curve_fit_tol + 0.5 * std::max(a.width, b.width);
        auto lox = [](const CurvePrimitive& c) { return std::min({c.c0.x, c.c1.x, c.c2.x}); };
        auto hix = [](const CurvePrimitive& c) { return std::max({c.c0.x, c.c1.x, c.c2.x}); };
        auto loy = [](const CurvePrimitive& c) { return std::min({c.c0.y, c.c1.y, c.c2.y}); };
        auto hiy = [](const CurvePrimitive& c) { return std::max({c.c0.y, c.c1.y, c.c2.y}); };
        return lox(a) - pad <= hix(b) && lox(b) - pad <= hix(a) && loy(a) - pad <= hiy(b) &&
               loy(b) - pad <= hiy(a);
    };

    bool merged_any = true;
    while (merged_any) {
        merged_any = false;
        for (std::size_t i = 0; i < out.primitives.size() && !merged_any; ++i) {
            if (!is_curve(out.primitives[i])) continue;
            for (std::size_t j = i + 1; j < out.primitives.size() && !merged_any; ++j) {
                if (!is_curve(out.primitives[j])) continue;
                const auto& P = std::get<CurvePrimitive>(out.primitives[i]);
                const auto& Q = std::get<CurvePrimitive>(out.primitives[j]);
                if (!bbox_overlap(P, Q)) continue;
                auto fit = merge_curve_pair(P, Q, cfg);
                if (!fit) fit = merge_curve_pair(Q, P, cfg);
                if (fit) {
                    out.primitives[i] = *fit;
                    out.primitives.erase(out.primitives.begin() + static_cast<long>(j));
                    merged_any = true;
                }
            }
        }
    }
    return out;
}

// Full post-processing pass: line graph merging, curve pair merging, then
// endpoint snapping.
inline VectorScene merge_scene(const VectorScene& scene, const MergeConfig& cfg) {
    return snap_endpoints(merge_curves(merge_lines(scene, cfg), cfg), cfg);
}

} // namespace linevec
