// SPDX-License-Identifier: Apache-2.0
//
// Per-patch refinement: Adam over position/size parameters of the primitives,
// with periodic maintenance that joins lined-up segments and relocates
// collapsed primitives into uncovered ink.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "energy.hpp"
#include "geom.hpp"
#include "metrics_edt.hpp"
#include "raster.hpp"

namespace linevec {

struct RefineConfig {
    EnergyParams energy;
    double learning_rate = 0.05;
    double lr_decay_halflife = 250.0; // iterations; damps the tail limit cycle
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.99;
    double adam_eps = 1e-8;
    int max_iters = 500;
    int maintenance_period = 50;
    double collapse_length = 1.0;
    double join_angle = 5.0 * kPi / 180.0;
    double join_overlap = 1.0;
    double stop_grad_norm = 1e-3;
};

struct RefineState {
    std::vector<PrimParams> params;
    std::vector<std::array<double, 7>> m1;
    std::vector<std::array<double, 7>> m2;
    std::vector<int> steps; // per-primitive Adam step count
    std::vector<std::uint8_t> alive;
    long iteration = 0;
    int frozen_steps = 0; // primitives skipped on non-finite gradients

    std::size_t size() const { return params.size(); }

    std::size_t alive_count() const {
        return static_cast<std::size_t>(std::count(alive.begin(), alive.end(), 1));
    }

    void reset_moments(std::size_t k) {
        m1[k].fill(0.0);
        m2[k].fill(0.0);
        steps[k] = 0;
    }

    static RefineState from_primitives(const std::vector<Primitive>& prims) {
        RefineState st;
        for (const auto& p : prims) {
            st.params.push_back(PrimParams::from_primitive(p));
            st.m1.push_back({});
            st.m2.push_back({});
            st.steps.push_back(0);
            st.alive.push_back(1);
        }
        return st;
    }

    std::vector<Primitive> alive_primitives() const {
        std::vector<Primitive> out;
        for (std::size_t k = 0; k < params.size(); ++k)
            if (alive[k]) out.push_back(params[k].to_primitive());
        return out;
    }
};

// One bias-corrected Adam update per primitive; size parameters are clamped
// nonnegative afterwards. A non-finite gradient freezes that primitive for
// the step.
inline void adam_step(RefineState& st, const std::vector<PrimGradient>& grads,
                      const RefineConfig& cfg) {
    double lr = cfg.learning_rate;
    if (cfg.lr_decay_halflife > 0.0)
        lr *= std::pow(0.5, static_cast<double>(st.iteration) / cfg.lr_decay_halflife);
    for (std::size_t k = 0; k < st.size(); ++k) {
        if (!st.alive[k]) continue;
        const PrimGradient& g = grads[k];
        int n = st.params[k].count();
        bool finite = true;
        for (int i = 0; i < n && finite; ++i) finite = std::isfinite(g.d[i]);
        if (!finite) {
            ++st.frozen_steps;
            continue;
        }
        int t = ++st.steps[k];
        double c1 = 1.0 - std::pow(cfg.adam_beta1, t);
        double c2 = 1.0 - std::pow(cfg.adam_beta2, t);
        for (int i = 0; i < n; ++i) {
            double& m = st.m1[k][i];
            double& v = st.m2[k][i];
            m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g.d[i];
            v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g.d[i] * g.d[i];
            st.params[k].v[i] -= lr * (m / c1) / (std::sqrt(v / c2) + cfg.adam_eps);
        }
        // Lengths clamp to zero; widths keep a half-pixel floor, since a
        // zero-width primitive renders no charge at all and would freeze
        // mid-collapse.
        if (st.params[k].kind == PrimKind::line) {
            st.params[k].v[3] = std::max(0.0, st.params[k].v[3]);
            st.params[k].v[4] = std::max(0.5, st.params[k].v[4]);
        } else {
            st.params[k].v[4] = std::max(0.0, st.params[k].v[4]);
            st.params[k].v[5] = std::max(0.0, st.params[k].v[5]);
            st.params[k].v[6] = std::max(0.5, st.params[k].v[6]);
        }
    }
}

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

inline double angle_difference(double a, double b) {
    double d = std::abs(normalize_angle_halfpi(a - b));
    return std::min(d, kPi - d);
}

} // namespace detail

// Joins groups of lined-up line segments: within each group the member with
// the longest extent is stretched over the group's projected union and the
// rest collapse to zero length.
inline void join_lined_up(RefineState& st, const RefineConfig& cfg) {
    std::vector<int> lines;
    for (std::size_t k = 0; k < st.size(); ++k)
        if (st.alive[k] && st.params[k].kind == PrimKind::line && st.params[k].v[3] > 0.0)
            lines.push_back(static_cast<int>(k));
    if (lines.size() < 2) return;

    detail::UnionFind uf(lines.size());
    for (std::size_t a = 0; a < lines.size(); ++a) {
        const PrimParams& pa = st.params[lines[a]];
        Vec2 ma{pa.v[0], pa.v[1]};
        Vec2 da = unit_dir(pa.v[2]);
        Vec2 na = da.perp();
        for (std::size_t b = a + 1; b < lines.size(); ++b) {
            const PrimParams& pb = st.params[lines[b]];
            if (detail::angle_difference(pa.v[2], pb.v[2]) > cfg.join_angle) continue;
            Vec2 mb{pb.v[0], pb.v[1]};
            Vec2 db = unit_dir(pb.v[2]);
            // Mutually collinear: midpoints near each other's supporting line.
            if (std::abs(dot(mb - ma, na)) > cfg.join_overlap) continue;
            if (std::abs(dot(ma - mb, db.perp())) > cfg.join_overlap) continue;
            // Longitudinal overlap (or gap within tolerance) on a's axis.
            double ua = dot(mb - ma, da);
            double lo = ua - 0.5 * pb.v[3], hi = ua + 0.5 * pb.v[3];
            if (hi < -0.5 * pa.v[3] - cfg.join_overlap || lo > 0.5 * pa.v[3] + cfg.join_overlap)
                continue;
            uf.unite(static_cast<int>(a), static_cast<int>(b));
        }
    }

    std::vector<std::vector<int>> groups(lines.size());
    for (std::size_t a = 0; a < lines.size(); ++a)
        groups[uf.find(static_cast<int>(a))].push_back(lines[a]);
    for (const auto& group : groups) {
        if (group.size() < 2) continue;
        int keeper = group[0];
        for (int k : group)
            if (st.params[k].v[3] > st.params[keeper].v[3]) keeper = k;
        PrimParams& pk = st.params[keeper];
        Vec2 mk{pk.v[0], pk.v[1]};
        Vec2 dk = unit_dir(pk.v[2]);
        double lo = -0.5 * pk.v[3], hi = 0.5 * pk.v[3];
        for (int k : group) {
            if (k == keeper) continue;
            const PrimParams& p = st.params[k];
            Vec2 mid{p.v[0], p.v[1]};
            double u = dot(mid - mk, dk);
            lo = std::min(lo, u - 0.5 * p.v[3]);
            hi = std::max(hi, u + 0.5 * p.v[3]);
        }
        Vec2 new_mid = mk + dk * (0.5 * (lo + hi));
        pk.v[0] = new_mid.x;
        pk.v[1] = new_mid.y;
        pk.v[3] = hi - lo;
        st.reset_moments(static_cast<std::size_t>(keeper));
        for (int k : group) {
            if (k == keeper) continue;
            st.params[k].v[3] = 0.0; // collapsed; relocation decides its fate
            st.reset_moments(static_cast<std::size_t>(k));
        }
    }
}

namespace detail {

struct InkComponent {
    std::vector<int> pixels; // linear indices
    Vec2 centroid;
    double angle = 0.0;
    double thickness = 1.0;
};

// Connected components (8-neighborhood) of uncovered ink, largest first.
inline std::vector<InkComponent> uncovered_components(const GrayImage& raster,
                                                      const CoverageGrid& union_q,
                                                      double fill_threshold) {
    int w = raster.width, h = raster.height;
    std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
    auto uncovered = [&](int x, int y) {
        return raster.at(x, y) >= fill_threshold && union_q.at(x, y) < 0.25;
    };
    std::vector<InkComponent> comps;
    std::vector<int> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int idx = y * w + x;
            if (label[idx] >= 0 || !uncovered(x, y)) continue;
            InkComponent comp;
            label[idx] = static_cast<int>(comps.size());
            stack.assign(1, idx);
            while (!stack.empty()) {
                int i = stack.back();
                stack.pop_back();
                comp.pixels.push_back(i);
                int cx = i % w, cy = i / w;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        int nx = cx + dx, ny = cy + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        int ni = ny * w + nx;
                        if (label[ni] < 0 && uncovered(nx, ny)) {
                            label[ni] = label[idx];
                            stack.push_back(ni);
                        }
                    }
            }
            comps.push_back(std::move(comp));
        }

    // Second moments give the principal axis; the exact distance transform of
    // the ink gives a thickness estimate.
    Grid<double> ink_dist = ink_distance_to_background(raster, fill_threshold);
    for (auto& c : comps) {
        double sx = 0, sy = 0;
        for (int i : c.pixels) {
            sx += i % w + 0.5;
            sy += i / w + 0.5;
        }
        double n = static_cast<double>(c.pixels.size());
        c.centroid = {sx / n, sy / n};
        double mxx = 0, myy = 0, mxy = 0;
        std::vector<double> dists;
        dists.reserve(c.pixels.size());
        for (int i : c.pixels) {
            double dx = i % w + 0.5 - c.centroid.x;
            double dy = i / w + 0.5 - c.centroid.y;
            mxx += dx * dx;
            myy += dy * dy;
            mxy += dx * dy;
            dists.push_back(ink_dist.data[i]);
        }
        c.angle = 0.5 * std::atan2(2.0 * mxy, mxx - myy);
        std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
        c.thickness = std::max(0.5, 2.0 * dists[dists.size() / 2]);
    }
    std::sort(comps.begin(), comps.end(), [](const InkComponent& a, const InkComponent& b) {
        if (a.pixels.size() != b.pixels.size()) return a.pixels.size() > b.pixels.size();
        return a.pixels[0] < b.pixels[0];
    });
    return comps;
}

} // namespace detail

// Re-seeds collapsed primitives as short segments over the largest connected
// uncovered ink regions; with no region left they are dropped.
inline void relocate_collapsed(RefineState& st, const GrayImage& raster,
                               const CoverageGrid& union_q, const RefineConfig& cfg) {
    std::vector<std::size_t> collapsed;
    for (std::size_t k = 0; k < st.size(); ++k)
        if (st.alive[k] && st.params[k].extent() < cfg.collapse_length) collapsed.push_back(k);
    if (collapsed.empty()) return;

    auto comps = detail::uncovered_components(raster, union_q, cfg.energy.fill_threshold);
    std::size_t next = 0;
    for (std::size_t k : collapsed) {
        const detail::InkComponent* target = nullptr;
        while (next < comps.size()) {
            if (comps[next].pixels.size() >= 4) {
                target = &comps[next];
                ++next;
                break;
            }
            ++next;
        }
        if (!target) {
            st.alive[k] = 0;
            continue;
        }
        PrimParams& p = st.params[k];
        double width = std::clamp(target->thickness, 0.5, raster.width / 4.0);
        if (p.kind == PrimKind::line) {
            p.v = {target->centroid.x, target->centroid.y, normalize_angle_halfpi(target->angle),
                   2.0, width, 0.0, 0.0};
        } else {
            // A straight two-arm seed along the principal axis.
            double a = target->angle;
            p.v = {target->centroid.x, target->centroid.y, a + kPi, a, 1.0, 1.0, width};
            p.t_mid = 0.5;
        }
        st.reset_moments(k);
    }
}

struct RefineResult {
    std::vector<Primitive> primitives;
    long iterations = 0;
    double final_grad_norm = 0.0;
};

// One optimization step: rebuild the shared grids, take the mean-field
// gradients against them, update, and run maintenance on schedule. Returns
// the total gradient norm over alive primitives.
inline double refine_iterate(RefineState& st, const GrayImage& patch, const RefineConfig& cfg) {
    std::vector<Primitive> prims;
    std::vector<std::size_t> index;
    for (std::size_t k = 0; k < st.size(); ++k)
        if (st.alive[k]) {
            prims.push_back(st.params[k].to_primitive());
            index.push_back(k);
        }
    if (prims.empty()) {
        ++st.iteration;
        return 0.0;
    }

    PatchState shared = build_patch_state(prims, patch, cfg.energy);
    std::vector<PrimGradient> grads(st.size());
    double norm2 = 0.0;
    for (std::size_t i = 0; i < prims.size(); ++i) {
        PrimParams& pp = st.params[index[i]];
        FrozenCharges fc = frozen_charges(i, shared, patch, cfg.energy);
        int nseg = pp.kind == PrimKind::curve
                       ? detail::curve_energy_segments(pp, cfg.energy.flatten_tol)
                       : 1;
        grads[index[i]] = gradient_from_charges(pp, fc, cfg.energy, nseg);
        double n = grads[index[i]].norm();
        if (std::isfinite(n)) norm2 += n * n;
    }
    adam_step(st, grads, cfg);

    // Keep midpoints inside the patch.
    for (std::size_t k = 0; k < st.size(); ++k) {
        if (!st.alive[k]) continue;
        st.params[k].v[0] = std::clamp(st.params[k].v[0], 0.0, static_cast<double>(patch.width));
        st.params[k].v[1] = std::clamp(st.params[k].v[1], 0.0, static_cast<double>(patch.height));
    }

    ++st.iteration;
    if (st.iteration % cfg.maintenance_period == 0) {
        join_lined_up(st, cfg);
        relocate_collapsed(st, patch, shared.union_q, cfg);
    }
    return std::sqrt(norm2);
}

// Full per-patch refinement. Primitives still collapsed at the end are
// dropped from the output.
inline RefineResult refine_patch(const GrayImage& patch, const std::vector<Primitive>& init,
                                 const RefineConfig& cfg) {
    RefineResult out;
    if (init.empty()) return out;
    bool blank = true;
    for (double v : patch.data)
        if (v >= cfg.energy.fill_threshold) {
            blank = false;
            break;
        }
    if (blank) return out;

    RefineState st = RefineState::from_primitives(init);
    // Clamp stray initializations into the patch.
    for (auto& p : st.params) {
        p.v[0] = std::clamp(p.v[0], 0.0, static_cast<double>(patch.width));
        p.v[1] = std::clamp(p.v[1], 0.0, static_cast<double>(patch.height));
    }

    double gnorm = 0.0;
    for (int it = 0; it < cfg.max_iters; ++it) {
        gnorm = refine_iterate(st, patch, cfg);
        if (st.alive_count() == 0) break;
        if (gnorm < cfg.stop_grad_norm) break;
    }
    out.iterations = st.iteration;
    out.final_grad_norm = gnorm;
    for (std::size_t k = 0; k < st.size(); ++k) {
        if (!st.alive[k]) continue;
        if (st.params[k].extent() < cfg.collapse_length) continue;
        out.primitives.push_back(st.params[k].to_primitive());
    }
    return out;
}

} // namespace linevec
