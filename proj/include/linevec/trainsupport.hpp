// SPDX-License-Identifier: Apache-2.0
//
// Target canonicalization and the multi-task loss used to train an external
// primitive-extraction model: binary cross-entropy on confidences plus a
// weighted L1/L2 deviation on normalized parameters.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "geom.hpp"

namespace linevec {

struct CanonicalTargets {
    // n_max rows; lines carry 5 parameters (x1,y1,x2,y2,w), curves 7. Rows
    // with confidence 0 are all-zero placeholders.
    std::vector<std::vector<double>> params;
    std::vector<double> confidences;
};

// Normalizes by the patch size, sorts the endpoints inside each primitive and
// the primitives lexicographically, and pads with zero placeholders.
inline CanonicalTargets canonicalize(const std::vector<Primitive>& prims, std::size_t n_max,
                                     double patch_size) {
    if (prims.size() > n_max)
        throw std::invalid_argument("canonicalize: more primitives than target rows");
    bool has_line = false, has_curve = false;
    for (const auto& p : prims) (is_line(p) ? has_line : has_curve) = true;
    if (has_line && has_curve)
        throw std::invalid_argument("canonicalize: mixed primitive kinds in one target set");

    std::size_t row_width = has_curve ? 7 : 5;
    std::vector<std::vector<double>> rows;
    for (const auto& p : prims) {
        std::vector<double> row;
        if (is_line(p)) {
            const auto& l = std::get<LinePrimitive>(p);
            Vec2 a = l.p1, b = l.p2;
            if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
            row = {a.x, a.y, b.x, b.y, l.width};
        } else {
            const auto& c = std::get<CurvePrimitive>(p);
            Vec2 a = c.c0, b = c.c2;
            Vec2 m = c.c1;
            if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
            row = {a.x, a.y, m.x, m.y, b.x, b.y, c.width};
        }
        for (double& v : row) v /= patch_size;
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end());

    CanonicalTargets out;
    out.params = std::move(rows);
    out.confidences.assign(out.params.size(), 1.0);
    while (out.params.size() < n_max) {
        out.params.emplace_back(row_width, 0.0);
        out.confidences.push_back(0.0);
    }
    return out;
}

// Mean over rows of BCE(confidence) + (1-lambda) L1 + lambda L2^2 on the
// parameter deviations.
inline double loss(const std::vector<double>& pred_conf, const std::vector<double>& target_conf,
                   const std::vector<std::vector<double>>& pred_params,
                   const std::vector<std::vector<double>>& target_params, double lambda) {
    if (pred_conf.size() != target_conf.size() || pred_params.size() != target_params.size() ||
        pred_conf.size() != pred_params.size())
        throw std::invalid_argument("loss: shape mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < pred_conf.size(); ++k) {
        double p = pred_conf[k];
        double t = target_conf[k];
        total += -t * std::log(p) - (1.0 - t) * std::log(1.0 - p);
        if (pred_params[k].size() != target_params[k].size())
            throw std::invalid_argument("loss: row width mismatch");
        double l1 = 0.0, l2 = 0.0;
        for (std::size_t i = 0; i < pred_params[k].size(); ++i) {
            double d = pred_params[k][i] - target_params[k][i];
            l1 += std::abs(d);
            l2 += d * d;
        }
        total += (1.0 - lambda) * l1 + lambda * l2;
    }
    return total / static_cast<double>(pred_conf.size());
}

} // namespace linevec
