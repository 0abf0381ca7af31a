// SPDX-License-Identifier: Apache-2.0
//
// Synthetic scene generation, raster degradation, scene perturbation, and the
// moment-based initializer that seeds refinement from connected ink regions.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "geom.hpp"
#include "merge.hpp"
#include "metrics_edt.hpp"
#include "raster.hpp"
#include "rng.hpp"

namespace linevec {

struct SceneSpec {
    int canvas_width = 64;
    int canvas_height = 64;
    int count_min = 3;
    int count_max = 8;
    double line_fraction = 1.0; // remaining primitives are quadratic curves
    double length_min = 10.0;
    double length_max = 40.0;
    double width_min = 1.5;
    double width_max = 4.0;
    // Reject strokes that overlap an earlier one while nearly parallel to it;
    // drawings do not double-stroke, and such pairs are redundant by
    // construction.
    double min_pair_angle = 20.0 * kPi / 180.0;
    // Optional minimum clearance between strokes (0 disables). The heuristic
    // initializer seeds one primitive per connected component, so scenes for
    // that path must keep strokes apart.
    double min_separation = 0.0;
    std::uint64_t seed = 1;
};

namespace detail {

inline bool stroke_pair_ok(const LinePrimitive& a, const LinePrimitive& b, double min_angle) {
    double da = std::atan2(a.p2.y - a.p1.y, a.p2.x - a.p1.x);
    double db = std::atan2(b.p2.y - b.p1.y, b.p2.x - b.p1.x);
    double diff = std::abs(normalize_angle_halfpi(da - db));
    diff = std::min(diff, kPi - diff);
    if (diff > min_angle) return true;
    return segment_segment_distance(a, b) > 0.5 * (a.width + b.width) + 1.0;
}

inline LinePrimitive chord_of(const Primitive& p) {
    if (is_line(p)) return std::get<LinePrimitive>(p);
    const auto& c = std::get<CurvePrimitive>(p);
    return {c.c0, c.c2, c.width};
}

} // namespace detail

// Uniformly sampled primitives, fully inside the canvas, deterministic per
// seed.
inline VectorScene gen_scene(const SceneSpec& spec) {
    SplitMix64 rng(spec.seed);
    VectorScene scene;
    scene.width = spec.canvas_width;
    scene.height = spec.canvas_height;
    int count = rng.uniform_int(spec.count_min, spec.count_max);
    int guard = 0;
    while (static_cast<int>(scene.primitives.size()) < count && ++guard < 20000) {
        double width = rng.uniform(spec.width_min, spec.width_max);
        double margin = 0.5 * width + 0.5;
        double len = rng.uniform(spec.length_min, spec.length_max);
        double angle = rng.uniform(0.0, kPi);
        Vec2 p1{rng.uniform(margin, spec.canvas_width - margin),
                rng.uniform(margin, spec.canvas_height - margin)};
        Vec2 p2 = p1 + unit_dir(angle) * len;
        bool is_line_prim = rng.uniform() < spec.line_fraction;
        Vec2 bulge{0, 0};
        if (!is_line_prim)
            bulge = unit_dir(angle).perp() * rng.uniform(-len / 4.0, len / 4.0);
        Vec2 c1 = lerp(p1, p2, 0.5) + bulge;

        auto inside = [&](Vec2 p) {
            return p.x >= margin && p.x <= spec.canvas_width - margin && p.y >= margin &&
                   p.y <= spec.canvas_height - margin;
        };
        if (!inside(p2) || (!is_line_prim && !inside(c1))) continue;
        if (!is_line_prim && bulge.norm() < 1.0) continue; // keep curves curved

        Primitive prim;
        if (is_line_prim)
            prim = LinePrimitive{p1, p2, width};
        else
            prim = CurvePrimitive{p1, c1, p2, width};

        bool ok = true;
        LinePrimitive chord = detail::chord_of(prim);
        for (const auto& prev : scene.primitives) {
            LinePrimitive other = detail::chord_of(prev);
            ok = ok && detail::stroke_pair_ok(chord, other, spec.min_pair_angle);
            if (spec.min_separation > 0.0)
                ok = ok && segment_segment_distance(chord, other) >
                               0.5 * (chord.width + other.width) + spec.min_separation;
        }
        if (ok) scene.primitives.push_back(prim);
    }
    return scene;
}

struct DegradeSpec {
    double blur_sigma = 0.0;
    double noise_sigma = 0.0;
    double background = 0.0; // uniform ink floor in [0, 1]
    std::uint64_t seed = 1;
};

// Gaussian blur, additive Gaussian noise, uniform background floor, clamp.
inline GrayImage degrade(const GrayImage& img, const DegradeSpec& spec) {
    GrayImage out = img;
    if (spec.blur_sigma > 0.0) {
        int radius = std::max(1, static_cast<int>(std::ceil(3.0 * spec.blur_sigma)));
        std::vector<double> kernel(2 * radius + 1);
        double sum = 0.0;
        for (int i = -radius; i <= radius; ++i) {
            kernel[i + radius] = std::exp(-0.5 * i * i / (spec.blur_sigma * spec.blur_sigma));
            sum += kernel[i + radius];
        }
        for (double& k : kernel) k /= sum;
        GrayImage tmp(img.width, img.height, 0.0);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    int xx = x + i;
                    if (xx >= 0 && xx < img.width) acc += kernel[i + radius] * img.at(xx, y);
                }
                tmp.at(x, y) = acc;
            }
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    int yy = y + i;
                    if (yy >= 0 && yy < img.height) acc += kernel[i + radius] * tmp.at(x, yy);
                }
                out.at(x, y) = acc;
            }
    }
    SplitMix64 rng(spec.seed);
    if (spec.noise_sigma > 0.0)
        for (double& v : out.data) v += spec.noise_sigma * rng.gaussian();
    if (spec.background > 0.0)
        for (double& v : out.data) v = spec.background + (1.0 - spec.background) * v;
    for (double& v : out.data) v = std::clamp(v, 0.0, 1.0);
    return out;
}

// Control points displaced uniformly within +-jitter per coordinate, widths
// scaled within +-width_jitter; deterministic per seed.
inline VectorScene perturb_scene(const VectorScene& scene, double jitter, double width_jitter,
                                 std::uint64_t seed) {
    SplitMix64 rng(seed);
    VectorScene out = scene;
    auto nudge = [&](Vec2& p) {
        p.x += rng.uniform(-jitter, jitter);
        p.y += rng.uniform(-jitter, jitter);
    };
    for (auto& prim : out.primitives) {
        if (is_line(prim)) {
            auto& l = std::get<LinePrimitive>(prim);
            nudge(l.p1);
            nudge(l.p2);
            l.width = std::max(0.1, l.width * (1.0 + rng.uniform(-width_jitter, width_jitter)));
        } else {
            auto& c = std::get<CurvePrimitive>(prim);
            nudge(c.c0);
            nudge(c.c1);
            nudge(c.c2);
            c.width = std::max(0.1, c.width * (1.0 + rng.uniform(-width_jitter, width_jitter)));
        }
    }
    return out;
}

// One line per connected ink component: centroid plus principal axis from the
// second moments; components under four pixels are ignored.
inline std::vector<Primitive> heuristic_init(const GrayImage& patch, double threshold = 0.5) {
    int w = patch.width, h = patch.height;
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<std::vector<int>> comps;
    std::vector<int> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int idx = y * w + x;
            if (label[idx] >= 0 || patch.data[idx] < threshold) continue;
            label[idx] = static_cast<int>(comps.size());
            comps.emplace_back();
            stack.assign(1, idx);
            while (!stack.empty()) {
                int i = stack.back();
                stack.pop_back();
                comps.back().push_back(i);
                int cx = i % w, cy = i / w;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        int ni = ny * w + nx;
                        if (label[ni] < 0 && patch.data[ni] >= threshold) {
                            label[ni] = label[idx];
                            stack.push_back(ni);
                        }
                    }
            }
        }

    std::vector<Primitive> out;
    for (const auto& comp : comps) {
        if (comp.size() < 4) continue;
        double sx = 0, sy = 0;
        for (int i : comp) {
            sx += i % w + 0.5;
            sy += i / w + 0.5;
        }
        double n = static_cast<double>(comp.size());
        Vec2 centroid{sx / n, sy / n};
        double mxx = 0, myy = 0, mxy = 0;
        for (int i : comp) {
            double dx = i % w + 0.5 - centroid.x;
            double dy = i / w + 0.5 - centroid.y;
            mxx += dx * dx;
            myy += dy * dy;
            mxy += dx * dy;
        }
        double angle = 0.5 * std::atan2(2.0 * mxy, mxx - myy);
        Vec2 d = unit_dir(angle);
        double lo = 0.0, hi = 0.0;
        for (int i : comp) {
            Vec2 p{i % w + 0.5, i / w + 0.5};
            double u = dot(p - centroid, d);
            lo = std::min(lo, u);
            hi = std::max(hi, u);
        }
        double length = hi - lo + 1.0;
        double width = std::clamp(n / length, 0.5, w / 4.0);
        out.push_back(LinePrimitive{centroid + d * lo, centroid + d * hi, width});
    }
    return out;
}

} // namespace linevec
