// SPDX-License-Identifier: Apache-2.0
//
// Raster and vector-scene comparison metrics: IoU, Hausdorff distance, mean
// (chamfer) distance, PSNR, and primitive counts. Distances run on the exact
// Euclidean distance transform and match the O(n^2) definition exactly.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "merge.hpp"
#include "metrics_edt.hpp"
#include "raster.hpp"

namespace linevec {

inline double iou(const GrayImage& a, const GrayImage& b, double threshold = 0.5) {
    if (!a.same_dims(b)) throw std::invalid_argument("iou: image dimensions differ");
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        bool fa = a.data[i] >= threshold;
        bool fb = b.data[i] >= threshold;
        inter += fa && fb;
        uni += fa || fb;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace detail {

inline Grid<std::uint8_t> filled_set(const GrayImage& img, double threshold) {
    Grid<std::uint8_t> out(img.width, img.height, 0);
    for (std::size_t i = 0; i < img.size(); ++i) out.data[i] = img.data[i] >= threshold ? 1 : 0;
    return out;
}

inline bool any_filled(const Grid<std::uint8_t>& s) {
    for (auto v : s.data)
        if (v) return true;
    return false;
}

struct DirectedStats {
    double max_sq = 0.0;
    double sum = 0.0;
    std::size_t count = 0;
};

inline DirectedStats directed_distance(const Grid<std::uint8_t>& from,
                                       const Grid<double>& sq_to_other) {
    DirectedStats out;
    for (std::size_t i = 0; i < from.size(); ++i) {
        if (!from.data[i]) continue;
        double sq = sq_to_other.data[i];
        out.max_sq = std::max(out.max_sq, sq);
        out.sum += std::sqrt(sq);
        ++out.count;
    }
    return out;
}

} // namespace detail

// Symmetric Hausdorff distance between the filled-pixel-center sets.
inline std::optional<double> hausdorff(const GrayImage& a, const GrayImage& b,
                                       double threshold = 0.5) {
    if (!a.same_dims(b)) throw std::invalid_argument("hausdorff: image dimensions differ");
    auto sa = detail::filled_set(a, threshold);
    auto sb = detail::filled_set(b, threshold);
    if (!detail::any_filled(sa) || !detail::any_filled(sb)) return std::nullopt;
    auto da = squared_distance_to_set(sa);
    auto db = squared_distance_to_set(sb);
    double m = std::max(detail::directed_distance(sa, db).max_sq,
                        detail::directed_distance(sb, da).max_sq);
    return std::sqrt(m);
}

// Symmetric chamfer mean distance between the filled-pixel-center sets.
inline std::optional<double> mean_distance(const GrayImage& a, const GrayImage& b,
                                           double threshold = 0.5) {
    if (!a.same_dims(b)) throw std::invalid_argument("mean_distance: image dimensions differ");
    auto sa = detail::filled_set(a, threshold);
    auto sb = detail::filled_set(b, threshold);
    if (!detail::any_filled(sa) || !detail::any_filled(sb)) return std::nullopt;
    auto da = squared_distance_to_set(sa);
    auto db = squared_distance_to_set(sb);
    auto ab = detail::directed_distance(sa, db);
    auto ba = detail::directed_distance(sb, da);
    return 0.5 * (ab.sum / ab.count + ba.sum / ba.count);
}

// 10 log10(1 / MSE) with unit peak; identical images give +infinity.
inline double psnr(const GrayImage& a, const GrayImage& b) {
    if (!a.same_dims(b)) throw std::invalid_argument("psnr: image dimensions differ");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

struct MetricReport {
    double iou = 0.0;
    std::optional<double> d_h;
    std::optional<double> d_m;
    std::optional<std::size_t> prim_count;
    std::optional<double> psnr;
};

inline GrayImage render_scene(const VectorScene& scene, int supersample = 16) {
    int w = std::max(1, static_cast<int>(std::lround(scene.width)));
    int h = std::max(1, static_cast<int>(std::lround(scene.height)));
    return render_union(scene.primitives, w, h, supersample);
}

inline MetricReport evaluate(const GrayImage& a, const GrayImage& b, double threshold = 0.5) {
    MetricReport r;
    r.iou = iou(a, b, threshold);
    r.d_h = hausdorff(a, b, threshold);
    r.d_m = mean_distance(a, b, threshold);
    r.psnr = psnr(a, b);
    return r;
}

inline MetricReport evaluate(const VectorScene& scene, const GrayImage& reference,
                             int supersample = 16, double threshold = 0.5) {
    MetricReport r = evaluate(render_scene(scene, supersample), reference, threshold);
    r.prim_count = scene.primitives.size();
    return r;
}

inline MetricReport evaluate(const VectorScene& scene, const VectorScene& reference,
                             int supersample = 16, double threshold = 0.5) {
    GrayImage ra = render_scene(scene, supersample);
    GrayImage rb = render_scene(reference, supersample);
    MetricReport r;
    r.iou = iou(ra, rb, threshold);
    r.d_h = hausdorff(ra, rb, threshold);
    r.d_m = mean_distance(ra, rb, threshold);
    r.prim_count = scene.primitives.size();
    return r;
}

} // namespace linevec
