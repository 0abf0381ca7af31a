// SPDX-License-Identifier: Apache-2.0
//
// Grayscale images, PGM I/O, patch decomposition, and coverage rendering of
// stroke primitives.

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "geom.hpp"

namespace linevec {

// Row-major grid: index (x, y) lives at data[y * width + x].
template <typename T>
struct Grid {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t size() const { return data.size(); }
    bool same_dims(const Grid& o) const { return width == o.width && height == o.height; }
};

// Ink convention: 1 is fully inked (black on paper), 0 is blank.
using GrayImage = Grid<double>;
using CoverageGrid = Grid<double>;
using MaskGrid = Grid<std::uint8_t>;

// Continuous coordinates put pixel (ix, iy) over [ix, ix+1) x [iy, iy+1).
inline Vec2 pixel_center(int ix, int iy) { return {ix + 0.5, iy + 0.5}; }

// ---------------------------------------------------------------------------
// PGM (P5, 8-bit) I/O

struct ImageIoError : std::runtime_error {
    enum class Code { missing_file, malformed_header, unsupported_depth, io_failure };
    Code code;
    ImageIoError(Code c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

namespace detail {

inline int pgm_read_token(std::istream& in) {
    // Skips whitespace and '#' comments, then parses a nonnegative integer.
    int ch = in.get();
    for (;;) {
        while (ch != EOF && std::isspace(ch)) ch = in.get();
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
            continue;
        }
        break;
    }
    if (ch == EOF || !std::isdigit(ch)) return -1;
    int value = 0;
    while (ch != EOF && std::isdigit(ch)) {
        value = value * 10 + (ch - '0');
        if (value > 1 << 28) return -1;
        ch = in.get();
    }
    return value;
}

} // namespace detail

inline GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ImageIoError(ImageIoError::Code::missing_file, "cannot open " + path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5')
        throw ImageIoError(ImageIoError::Code::malformed_header, path + ": not a P5 PGM");
    int w = detail::pgm_read_token(in);
    int h = detail::pgm_read_token(in);
    int maxval = detail::pgm_read_token(in);
    if (w <= 0 || h <= 0 || maxval <= 0)
        throw ImageIoError(ImageIoError::Code::malformed_header, path + ": bad PGM header");
    if (maxval != 255)
        throw ImageIoError(ImageIoError::Code::unsupported_depth,
                           path + ": only 8-bit PGM is supported");
    // Header ends with a single whitespace byte already consumed by the token
    // reader's terminating character.
    std::vector<char> raw(static_cast<std::size_t>(w) * h);
    in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
        throw ImageIoError(ImageIoError::Code::malformed_header, path + ": truncated pixel data");
    GrayImage img(w, h);
    for (std::size_t i = 0; i < raw.size(); ++i)
        img.data[i] = 1.0 - static_cast<unsigned char>(raw[i]) / 255.0;
    return img;
}

inline void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ImageIoError(ImageIoError::Code::io_failure, "cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<char> raw(img.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        double gray = 255.0 * (1.0 - std::clamp(img.data[i], 0.0, 1.0));
        raw[i] = static_cast<char>(static_cast<unsigned char>(std::lround(gray)));
    }
    out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
    if (!out)
        throw ImageIoError(ImageIoError::Code::io_failure, "short write to " + path);
}

// ---------------------------------------------------------------------------

inline GrayImage binarize(const GrayImage& img, double threshold) {
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.size(); ++i)
        out.data[i] = img.data[i] >= threshold ? 1.0 : 0.0;
    return out;
}

struct PatchRef {
    int origin_x = 0;
    int origin_y = 0;
    GrayImage data;
};

inline std::vector<PatchRef> split_patches(const GrayImage& img, int patch_size, int stride) {
    std::vector<PatchRef> out;
    for (int oy = 0;; oy += stride) {
        for (int ox = 0;; ox += stride) {
            PatchRef p;
            p.origin_x = ox;
            p.origin_y = oy;
            p.data = GrayImage(patch_size, patch_size, 0.0);
            for (int y = 0; y < patch_size; ++y)
                for (int x = 0; x < patch_size; ++x)
                    if (img.in_bounds(ox + x, oy + y)) p.data.at(x, y) = img.at(ox + x, oy + y);
            out.push_back(std::move(p));
            if (ox + patch_size >= img.width) break;
        }
        if (oy + patch_size >= img.height) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coverage rendering: per-pixel fraction of s x s subsample centers inside the
// stroke region (centerline dilated by width/2, round caps).

namespace detail {

struct StrokeShape {
    // Centerline as one segment (lines) or a flattened polyline (curves).
    std::vector<Vec2> pts;
    double halfw = 0.5;

    double distance(Vec2 q) const {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            best = std::min(best, segment_distance(pts[i], pts[i + 1], q));
        if (pts.size() == 1) best = (q - pts[0]).norm();
        return best;
    }

    bool contains(Vec2 q) const { return distance(q) <= halfw; }
};

inline StrokeShape stroke_shape(const Primitive& prim, double flatten_tol) {
    StrokeShape s;
    s.halfw = prim_width(prim) * 0.5;
    if (is_line(prim)) {
        const auto& l = std::get<LinePrimitive>(prim);
        s.pts = {l.p1, l.p2};
    } else {
        s.pts = flatten_curve(std::get<CurvePrimitive>(prim), flatten_tol);
    }
    return s;
}

struct PixelBox {
    int x0, y0, x1, y1; // half-open
    bool empty() const { return x0 >= x1 || y0 >= y1; }
};

inline PixelBox stroke_pixel_box(const StrokeShape& s, int w, int h, double pad = 1.0) {
    double minx = std::numeric_limits<double>::infinity(), miny = minx;
    double maxx = -minx, maxy = -minx;
    for (Vec2 p : s.pts) {
        minx = std::min(minx, p.x);
        miny = std::min(miny, p.y);
        maxx = std::max(maxx, p.x);
        maxy = std::max(maxy, p.y);
    }
    PixelBox b;
    b.x0 = std::max(0, static_cast<int>(std::floor(minx - s.halfw - pad)));
    b.y0 = std::max(0, static_cast<int>(std::floor(miny - s.halfw - pad)));
    b.x1 = std::min(w, static_cast<int>(std::ceil(maxx + s.halfw + pad)));
    b.y1 = std::min(h, static_cast<int>(std::ceil(maxy + s.halfw + pad)));
    return b;
}

} // namespace detail

namespace detail {

struct RowSpan {
    double lo, hi;
};

// x-extent of the scan row y inside the round-capped stroke of segment (A,B).
// The capsule is convex, so the slice is a single interval.
inline bool capsule_row_span(Vec2 A, Vec2 B, double r, double y, RowSpan& out) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    auto add_disc = [&](Vec2 c) {
        double dy = y - c.y;
        if (std::abs(dy) > r) return;
        double half = std::sqrt(std::max(0.0, r * r - dy * dy));
        lo = std::min(lo, c.x - half);
        hi = std::max(hi, c.x + half);
    };
    add_disc(A);
    add_disc(B);
    Vec2 d = B - A;
    double len = d.norm();
    if (len > 1e-12) {
        Vec2 du = d / len;
        Vec2 nu = du.perp();
        // Oblique slab: |(P-A).n| <= r and 0 <= (P-A).d <= len, linear in x.
        double slo = -std::numeric_limits<double>::infinity();
        double shi = std::numeric_limits<double>::infinity();
        bool empty = false;
        auto constrain = [&](double cx, double k, double b0, double b1) {
            // b0 <= cx * x + k <= b1
            if (std::abs(cx) < 1e-12) {
                if (k < b0 || k > b1) empty = true;
                return;
            }
            double x0 = (b0 - k) / cx, x1 = (b1 - k) / cx;
            if (x0 > x1) std::swap(x0, x1);
            slo = std::max(slo, x0);
            shi = std::min(shi, x1);
        };
        constrain(nu.x, nu.y * y - dot(A, nu), -r, r);
        constrain(du.x, du.y * y - dot(A, du), 0.0, len);
        if (!empty && slo <= shi) {
            lo = std::min(lo, slo);
            hi = std::max(hi, shi);
        }
    }
    if (lo > hi) return false;
    out = {lo, hi};
    return true;
}

} // namespace detail

namespace detail {

// One scanline pass: exact interval measure along x, `rows` analytic scan rows
// per pixel along y, accumulated into a w x h grid.
inline void render_scan_pass(const StrokeShape& shape, int w, int h, int rows,
                             CoverageGrid& out) {
    PixelBox box = stroke_pixel_box(shape, w, h);
    if (box.empty()) return;
    const double weight = 1.0 / rows;
    std::vector<double> acc(static_cast<std::size_t>(box.x1 - box.x0));
    std::vector<RowSpan> spans;
    spans.reserve(shape.pts.size());

    for (int py = box.y0; py < box.y1; ++py) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int j = 0; j < rows; ++j) {
            double y = py + (j + 0.5) * weight;
            spans.clear();
            RowSpan s;
            if (shape.pts.size() == 1) {
                if (capsule_row_span(shape.pts[0], shape.pts[0], shape.halfw, y, s))
                    spans.push_back(s);
            } else {
                for (std::size_t i = 0; i + 1 < shape.pts.size(); ++i)
                    if (capsule_row_span(shape.pts[i], shape.pts[i + 1], shape.halfw, y, s))
                        spans.push_back(s);
            }
            if (spans.empty()) continue;
            std::sort(spans.begin(), spans.end(),
                      [](const RowSpan& a, const RowSpan& b) { return a.lo < b.lo; });
            double lo = spans[0].lo, hi = spans[0].hi;
            auto emit = [&](double a, double b) {
                a = std::max(a, static_cast<double>(box.x0));
                b = std::min(b, static_cast<double>(box.x1));
                for (int x = static_cast<int>(std::floor(a)); x < box.x1 && x < b; ++x) {
                    if (x < box.x0) continue;
                    acc[x - box.x0] += std::min(b, x + 1.0) - std::max(a, static_cast<double>(x));
                }
            };
            for (std::size_t i = 1; i < spans.size(); ++i) {
                if (spans[i].lo <= hi) {
                    hi = std::max(hi, spans[i].hi);
                } else {
                    emit(lo, hi);
                    lo = spans[i].lo;
                    hi = spans[i].hi;
                }
            }
            emit(lo, hi);
        }
        for (int x = box.x0; x < box.x1; ++x) {
            double v = acc[x - box.x0] * weight;
            if (v > 0.0) out.at(x, py) += v;
        }
    }
}

} // namespace detail

// Coverage rendering via two symmetric scanline passes (rows and columns,
// averaged), so quarter-turns of the scene permute coverage values exactly.
// Each pass uses s*s analytic scan lines per pixel.
inline void render_primitive_into(CoverageGrid& grid, const Primitive& prim, int supersample,
                                  double flatten_tol = 0.02) {
    detail::StrokeShape shape = detail::stroke_shape(prim, flatten_tol);
    if (shape.halfw <= 0.0) return;
    const int rows = std::max(1, supersample * supersample);

    CoverageGrid horizontal(grid.width, grid.height, 0.0);
    detail::render_scan_pass(shape, grid.width, grid.height, rows, horizontal);

    detail::StrokeShape swapped = shape;
    for (Vec2& p : swapped.pts) std::swap(p.x, p.y);
    CoverageGrid vertical(grid.height, grid.width, 0.0);
    detail::render_scan_pass(swapped, grid.height, grid.width, rows, vertical);

    for (int y = 0; y < grid.height; ++y)
        for (int x = 0; x < grid.width; ++x) {
            double v = std::min(1.0, 0.5 * (horizontal.at(x, y) + vertical.at(y, x)));
            if (v > 0.0) grid.at(x, y) = std::max(grid.at(x, y), v);
        }
}

inline CoverageGrid render_primitive(const Primitive& prim, int w, int h, int supersample,
                                     double flatten_tol = 0.02) {
    CoverageGrid grid(w, h, 0.0);
    render_primitive_into(grid, prim, supersample, flatten_tol);
    return grid;
}

// Union (max-blend) rendering; overlaps saturate instead of adding up.
inline CoverageGrid render_union(const std::vector<Primitive>& prims, int w, int h, int supersample,
                                 double flatten_tol = 0.02) {
    CoverageGrid grid(w, h, 0.0);
    for (const auto& p : prims) render_primitive_into(grid, p, supersample, flatten_tol);
    return grid;
}

} // namespace linevec
