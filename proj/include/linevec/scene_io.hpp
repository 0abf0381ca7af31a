// SPDX-License-Identifier: Apache-2.0
//
// Scene file I/O: the JSON scene schema (emitted with sorted keys and fixed
// float formatting so runs diff byte-for-byte), SVG output, and the one-line
// metric record.

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "merge.hpp"
#include "metrics.hpp"

namespace linevec {

struct SceneIoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace detail

// {"canvas":[w,h],"primitives":[{"kind":...,"points":[[x,y],...],"width":w}]}
inline std::string scene_to_json(const VectorScene& scene) {
    std::ostringstream out;
    out << "{\"canvas\":[" << detail::format_number(scene.width) << ","
        << detail::format_number(scene.height) << "],\"primitives\":[";
    for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
        const Primitive& p = scene.primitives[i];
        if (i) out << ",";
        out << "{\"kind\":\"" << (is_line(p) ? "line" : "qbezier") << "\",\"points\":[";
        auto emit_point = [&](Vec2 q, bool first) {
            if (!first) out << ",";
            out << "[" << detail::format_number(q.x) << "," << detail::format_number(q.y) << "]";
        };
        if (is_line(p)) {
            const auto& l = std::get<LinePrimitive>(p);
            emit_point(l.p1, true);
            emit_point(l.p2, false);
        } else {
            const auto& c = std::get<CurvePrimitive>(p);
            emit_point(c.c0, true);
            emit_point(c.c1, false);
            emit_point(c.c2, false);
        }
        out << "],\"width\":" << detail::format_number(prim_width(p)) << "}";
    }
    out << "]}";
    return out.str();
}

inline VectorScene scene_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SceneIoError(std::string("scene JSON parse error: ") + e.what());
    }
    auto fail = [](const std::string& what) -> void { throw SceneIoError("scene schema: " + what); };
    if (!doc.is_object() || !doc.contains("canvas") || !doc.contains("primitives"))
        fail("expected object with canvas and primitives");
    const auto& canvas = doc["canvas"];
    if (!canvas.is_array() || canvas.size() != 2 || !canvas[0].is_number() ||
        !canvas[1].is_number())
        fail("canvas must be [width, height]");
    VectorScene scene;
    scene.width = canvas[0].get<double>();
    scene.height = canvas[1].get<double>();
    if (!doc["primitives"].is_array()) fail("primitives must be an array");
    for (const auto& p : doc["primitives"]) {
        if (!p.is_object() || !p.contains("kind") || !p.contains("points") ||
            !p.contains("width"))
            fail("primitive must carry kind, points, width");
        std::string kind = p["kind"].get<std::string>();
        const auto& pts = p["points"];
        double width = p["width"].get<double>();
        if (!(width > 0.0) || !std::isfinite(width)) fail("width must be positive and finite");
        auto read_point = [&](const nlohmann::json& q) -> Vec2 {
            if (!q.is_array() || q.size() != 2 || !q[0].is_number() || !q[1].is_number())
                throw SceneIoError("scene schema: point must be [x, y]");
            Vec2 v{q[0].get<double>(), q[1].get<double>()};
            if (!std::isfinite(v.x) || !std::isfinite(v.y))
                throw SceneIoError("scene schema: coordinates must be finite");
            return v;
        };
        if (kind == "line") {
            if (!pts.is_array() || pts.size() != 2) fail("line needs 2 points");
            scene.primitives.push_back(
                LinePrimitive{read_point(pts[0]), read_point(pts[1]), width});
        } else if (kind == "qbezier") {
            if (!pts.is_array() || pts.size() != 3) fail("qbezier needs 3 points");
            scene.primitives.push_back(CurvePrimitive{read_point(pts[0]), read_point(pts[1]),
                                                      read_point(pts[2]), width});
        } else {
            fail("kind must be line or qbezier");
        }
    }
    return scene;
}

inline VectorScene load_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError(ImageIoError::Code::missing_file, "cannot open " + path);
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return scene_from_json(text);
}

inline void save_scene(const VectorScene& scene, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageIoError(ImageIoError::Code::io_failure, "cannot write " + path);
    out << scene_to_json(scene) << "\n";
}

// SVG 1.1: black round-capped strokes, no fill; lines as M..L, curves as M..Q.
inline std::string scene_to_svg(const VectorScene& scene) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << detail::format_number(scene.width) << "\" height=\""
        << detail::format_number(scene.height) << "\" viewBox=\"0 0 "
        << detail::format_number(scene.width) << " " << detail::format_number(scene.height)
        << "\">\n";
    for (const Primitive& p : scene.primitives) {
        out << "  <path d=\"M ";
        if (is_line(p)) {
            const auto& l = std::get<LinePrimitive>(p);
            out << detail::format_number(l.p1.x) << " " << detail::format_number(l.p1.y) << " L "
                << detail::format_number(l.p2.x) << " " << detail::format_number(l.p2.y);
        } else {
            const auto& c = std::get<CurvePrimitive>(p);
            out << detail::format_number(c.c0.x) << " " << detail::format_number(c.c0.y) << " Q "
                << detail::format_number(c.c1.x) << " " << detail::format_number(c.c1.y) << " "
                << detail::format_number(c.c2.x) << " " << detail::format_number(c.c2.y);
        }
        out << "\" fill=\"none\" stroke=\"black\" stroke-width=\""
            << detail::format_number(prim_width(p)) << "\" stroke-linecap=\"round\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

inline void save_svg(const VectorScene& scene, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageIoError(ImageIoError::Code::io_failure, "cannot write " + path);
    out << scene_to_svg(scene);
}

// Single-line key=value record.
inline std::string metric_record(const MetricReport& r) {
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof buf, "iou=%.3f", r.iou);
    out = buf;
    auto append_px = [&](const char* key, const std::optional<double>& v) {
        if (v.has_value())
            std::snprintf(buf, sizeof buf, " %s=%.2f", key, *v);
        else
            std::snprintf(buf, sizeof buf, " %s=nan", key);
        out += buf;
    };
    append_px("d_h", r.d_h);
    append_px("d_m", r.d_m);
    if (r.prim_count.has_value()) {
        std::snprintf(buf, sizeof buf, " p=%zu", *r.prim_count);
        out += buf;
    }
    if (r.psnr.has_value()) {
        if (std::isinf(*r.psnr))
            out += " psnr=inf";
        else {
            std::snprintf(buf, sizeof buf, " psnr=%.2f", *r.psnr);
            out += buf;
        }
    }
    return out;
}

} // namespace linevec
