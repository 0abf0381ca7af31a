// SPDX-License-Identifier: Apache-2.0
//
// Exact Euclidean distance transform on the pixel grid (the two-pass lower
// envelope of parabolas), shared by the metrics and by thickness estimation.

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "raster.hpp"

namespace linevec {

namespace detail {

// One-dimensional squared-distance transform of a sampled function.
inline void edt_1d(const std::vector<double>& f, std::vector<double>& d) {
    const int n = static_cast<int>(f.size());
    d.assign(f.size(), 0.0);
    std::vector<int> v(f.size());
    std::vector<double> z(f.size() + 1);
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        for (;;) {
            int p = v[k];
            s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * q - 2.0 * p);
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

} // namespace detail

// Squared distance from every pixel center to the nearest pixel center where
// the predicate grid is set. Unreachable (empty set) comes back as infinity.
// Unset pixels start from a large finite sentinel: the envelope arithmetic
// stays finite, and the sentinel is far above any representable squared
// distance, so reachable results are exact.
inline Grid<double> squared_distance_to_set(const Grid<std::uint8_t>& set) {
    const int w = set.width, h = set.height;
    const double sentinel = 1e12;
    Grid<double> dist(w, h, sentinel);
    for (std::size_t i = 0; i < set.size(); ++i)
        if (set.data[i]) dist.data[i] = 0.0;

    std::vector<double> f, d;
    // Columns, then rows.
    f.resize(h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) f[y] = dist.at(x, y);
        detail::edt_1d(f, d);
        for (int y = 0; y < h; ++y) dist.at(x, y) = d[y];
    }
    f.resize(w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) f[x] = dist.at(x, y);
        detail::edt_1d(f, d);
        for (int x = 0; x < w; ++x) dist.at(x, y) = d[x];
    }
    for (double& v : dist.data)
        if (v >= 0.5 * sentinel) v = std::numeric_limits<double>::infinity();
    return dist;
}

// Distance from each ink pixel to the nearest background pixel (zero on the
// background itself); an interior stroke pixel sits about half a stroke width
// away from the background.
inline Grid<double> ink_distance_to_background(const GrayImage& raster, double threshold) {
    Grid<std::uint8_t> background(raster.width, raster.height, 0);
    for (std::size_t i = 0; i < raster.size(); ++i)
        background.data[i] = raster.data[i] < threshold ? 1 : 0;
    Grid<double> sq = squared_distance_to_set(background);
    for (double& v : sq.data) v = std::isfinite(v) ? std::sqrt(v) : 0.0;
    return sq;
}

} // namespace linevec
