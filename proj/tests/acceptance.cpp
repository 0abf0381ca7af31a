// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one pass/fail line per criterion. The first argument is
// the path of the linevec CLI binary (used by the end-to-end determinism
// check). Exit code is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <linevec/config.hpp>
#include <linevec/metrics.hpp>
#include <linevec/pipeline.hpp>
#include <linevec/rng.hpp>
#include <linevec/scene_io.hpp>
#include <linevec/trainsupport.hpp>

#include "oracles.hpp"

using namespace linevec;

namespace {

std::string g_cli_path;

struct Outcome {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

Primitive random_accept_line(SplitMix64& rng, double span) {
    for (;;) {
        LinePrimitive l{{rng.uniform(8, span - 8), rng.uniform(8, span - 8)},
                        {rng.uniform(8, span - 8), rng.uniform(8, span - 8)},
                        rng.uniform(1.5, 4.0)};
        if ((l.p2 - l.p1).norm() > 8.0) return l;
    }
}

Primitive random_accept_curve(SplitMix64& rng, double span) {
    for (;;) {
        CurvePrimitive c{{rng.uniform(8, span - 8), rng.uniform(8, span - 8)},
                         {rng.uniform(8, span - 8), rng.uniform(8, span - 8)},
                         {rng.uniform(8, span - 8), rng.uniform(8, span - 8)},
                         rng.uniform(1.5, 4.0)};
        Vec2 a = c.c0 - c.c1, b = c.c2 - c.c1;
        if (a.norm() < 5.0 || b.norm() < 5.0) continue;
        if (std::abs(cross(a, b)) < 0.05 * a.norm() * b.norm()) continue;
        if ((c.c2 - c.c0).norm() < 8.0) continue;
        return c;
    }
}

CurvePrimitive random_merge_quadratic(SplitMix64& rng, double span) {
    for (;;) {
        CurvePrimitive c{{rng.uniform(10, span), rng.uniform(10, span)},
                         {rng.uniform(10, span), rng.uniform(10, span)},
                         {rng.uniform(10, span), rng.uniform(10, span)},
                         rng.uniform(1.0, 4.0)};
        Vec2 a = c.c0 - c.c1, b = c.c2 - c.c1;
        if (a.norm() < 8 || b.norm() < 8) continue;
        if (std::abs(cross(a, b)) < 0.1 * a.norm() * b.norm()) continue;
        if ((c.c2 - c.c0).norm() < 15) continue;
        return c;
    }
}

// ---------------------------------------------------------------------------

Outcome criterion_gradient_oracle() {
    Outcome out;
    SplitMix64 rng(20240);
    EnergyParams params;
    params.supersample = 8;
    PotentialParams rdn_pot = params.rdn_potential();
    const double h = 1e-4;
    double worst_rel = 0.0, worst_abs = 0.0;
    for (int cfg_i = 0; cfg_i < 100; ++cfg_i) {
        std::vector<Primitive> ink;
        for (int i = 0; i < 3; ++i) ink.push_back(random_accept_line(rng, 64));
        GrayImage raster = binarize(render_union(ink, 64, 64, 8), 0.5);
        std::vector<Primitive> prims = {random_accept_line(rng, 64),
                                        random_accept_curve(rng, 64),
                                        random_accept_line(rng, 64)};
        PatchState st = build_patch_state(prims, raster, params);
        for (std::size_t k = 0; k < prims.size(); ++k) {
            FrozenCharges fc = frozen_charges(k, st, raster, params);
            PrimParams pp = PrimParams::from_primitive(prims[k]);
            int nseg = pp.kind == PrimKind::curve
                           ? detail::curve_energy_segments(pp, params.flatten_tol)
                           : 1;
            PrimGradient g = gradient_from_charges(pp, fc, params, nseg);
            for (int i = 0; i < pp.count(); ++i) {
                PrimParams hi = pp, lo = pp;
                hi.v[i] += h;
                lo.v[i] -= h;
                double fd;
                if (i < pp.pos_count()) {
                    fd = (frozen_interaction_energy(hi, fc.q_pos, params.potential, nseg) -
                          frozen_interaction_energy(lo, fc.q_pos, params.potential, nseg)) /
                         (2.0 * h);
                } else {
                    fd = (frozen_interaction_energy(hi, fc.q_size, params.potential, nseg) +
                          frozen_interaction_energy(hi, fc.q_rdn, rdn_pot, nseg) -
                          frozen_interaction_energy(lo, fc.q_size, params.potential, nseg) -
                          frozen_interaction_energy(lo, fc.q_rdn, rdn_pot, nseg)) /
                         (2.0 * h);
                }
                double err = std::abs(fd - g.d[i]);
                if (std::abs(g.d[i]) < 1e-8)
                    worst_abs = std::max(worst_abs, err);
                else
                    worst_rel = std::max(worst_rel, err / std::abs(g.d[i]));
            }
        }
    }
    char buf[120];
    std::snprintf(buf, sizeof buf, "worst rel %.2e (<=1e-4), worst abs %.2e (<=1e-8)", worst_rel,
                  worst_abs);
    out.detail = buf;
    out.check(worst_rel <= 1e-4, "relative error above 1e-4");
    out.check(worst_abs <= 1e-8, "absolute error above 1e-8");
    return out;
}

Outcome criterion_integral_oracle() {
    Outcome out;
    SplitMix64 rng(314);
    PotentialParams pot; // untruncated
    double worst = 0.0;
    int cases = 0;
    while (cases < 50) {
        LinePrimitive l{{rng.uniform(0, 40), rng.uniform(0, 40)},
                        {rng.uniform(0, 40), rng.uniform(0, 40)},
                        rng.uniform(0.5, 6.0)};
        if ((l.p2 - l.p1).norm() < 1.0) continue;
        ++cases;
        Vec2 near = lerp(l.p1, l.p2, rng.uniform());
        Vec2 p = near + Vec2{rng.uniform(-4, 4), rng.uniform(-4, 4)};
        double analytic = line_cell_interaction(l, p, pot);
        double reference = oracles::quadrature_line_cell(l, p, pot);
        worst = std::max(worst, std::abs(analytic - reference) / std::abs(reference));
    }
    double worst_curve = 0.0;
    for (int i = 0; i < 20; ++i) {
        CurvePrimitive c = std::get<CurvePrimitive>(random_accept_curve(rng, 40));
        Vec2 q{rng.uniform(5, 35), rng.uniform(5, 35)};
        double a = curve_cell_interaction(c, q, pot, 0.05);
        double b = curve_cell_interaction(c, q, pot, 0.025);
        if (std::abs(b) > 1e-12) worst_curve = std::max(worst_curve, std::abs(a - b) / std::abs(b));
    }
    char buf[130];
    std::snprintf(buf, sizeof buf,
                  "line vs quadrature rel %.2e (<=1e-6), halving drift %.2e (<5e-3)", worst,
                  worst_curve);
    out.detail = buf;
    out.check(worst <= 1e-6, "line integral off quadrature");
    out.check(worst_curve < 5e-3, "curve flattening not converged");
    return out;
}

Outcome criterion_recovery() {
    Outcome out;
    RefineConfig cfg;
    cfg.energy.binary_charges = true;
    double before_sum = 0.0, dm_sum = 0.0;
    int good = 0;
    const int scenes = 100;
    for (int seed = 1; seed <= scenes; ++seed) {
        SceneSpec spec;
        spec.seed = static_cast<std::uint64_t>(seed);
        VectorScene truth = gen_scene(spec);
        GrayImage clean = render_scene(truth, 16);
        GrayImage patch = binarize(clean, 0.5);
        VectorScene init = perturb_scene(truth, 2.0, 0.2, spec.seed + 1000);

        MetricReport before = evaluate(init, patch);
        before_sum += before.iou;

        RefineResult res = refine_patch(patch, init.primitives, cfg);
        VectorScene refined;
        refined.width = refined.height = 64;
        refined.primitives = res.primitives;
        MetricReport after = evaluate(refined, patch);
        if (after.iou >= 0.90) ++good;
        dm_sum += after.d_m.value_or(64.0);
    }
    double mean_before = before_sum / scenes;
    double mean_dm = dm_sum / scenes;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "before mean IoU %.3f (<=0.85), recovered %d/%d (>=90), mean d_M %.3f (<=0.5)",
                  mean_before, good, scenes, mean_dm);
    out.detail = buf;
    out.check(mean_before <= 0.85, "perturbation too weak");
    out.check(good >= 90, "too few scenes recovered");
    out.check(mean_dm <= 0.5, "mean distance too large");
    return out;
}

Outcome criterion_collapse_attraction() {
    Outcome out;
    RefineConfig cfg;

    // Blank patch: the shrink runs to collapse and the primitive is dropped;
    // the drop itself requires length < collapse_length.
    GrayImage blank(64, 64, 0.0);
    RefineState st = RefineState::from_primitives({LinePrimitive{{27, 32}, {37, 32}, 2.0}});
    double prev_len = st.params[0].v[3];
    bool monotone = true;
    for (int it = 0; it < 2000 && st.alive_count() > 0; ++it) {
        refine_iterate(st, blank, cfg);
        if (st.alive_count() > 0) {
            if (st.params[0].v[3] > prev_len + 1e-6) monotone = false;
            prev_len = st.params[0].v[3];
        }
    }
    out.check(st.alive_count() == 0, "primitive did not collapse on a blank patch");
    out.check(monotone, "length was not monotone during collapse");
    out.check(refine_patch(blank, {LinePrimitive{{20, 32}, {44, 32}, 3.0}}, cfg).primitives.empty(),
              "blank patch did not produce an empty scene");

    // A 3 px lateral offset recovers.
    cfg.energy.binary_charges = true;
    Primitive truth = LinePrimitive{{14.0, 32.5}, {50.0, 32.5}, 4.0};
    GrayImage raster = binarize(render_primitive(truth, 64, 64, 16), 0.5);
    RefineResult res = refine_patch(raster, {LinePrimitive{{14.0, 35.5}, {50.0, 35.5}, 4.0}}, cfg);
    double mean_dist = 64.0;
    if (res.primitives.size() == 1) {
        double total = 0.0;
        const int n = 50;
        for (int i = 0; i <= n; ++i) {
            Vec2 q = lerp(std::get<LinePrimitive>(truth).p1, std::get<LinePrimitive>(truth).p2,
                          static_cast<double>(i) / n);
            total += (closest_point(res.primitives[0], q).point - q).norm();
        }
        mean_dist = total / (n + 1);
    }
    out.check(mean_dist < 0.5, "offset primitive did not recover the stroke");

    // An exact self-raster is a near-fixed point.
    RefineConfig fixed_cfg;
    Primitive aligned = LinePrimitive{{12.0, 32.5}, {52.0, 32.5}, 5.0};
    GrayImage self = render_primitive(aligned, 64, 64, fixed_cfg.energy.supersample);
    double gnorm = gradient(0, {aligned}, self, fixed_cfg.energy).norm();
    char buf[120];
    std::snprintf(buf, sizeof buf, "offset recovery %.3f px, fixed-point |g| %.2e", mean_dist,
                  gnorm);
    out.detail = buf;
    out.check(gnorm < 1e-3, "gradient norm at the fixed point too large");
    return out;
}

Outcome criterion_rdn() {
    Outcome out;
    EnergyParams params; // beta from the 15-degree collinearity threshold
    GrayImage blank(64, 64, 0.0);
    std::vector<Primitive> coincident = {LinePrimitive{{12, 32}, {52, 32}, 3.0},
                                         LinePrimitive{{12, 32}, {52, 32}, 3.0}};
    std::vector<Primitive> crossing = {LinePrimitive{{12, 32}, {52, 32}, 3.0},
                                       LinePrimitive{{32, 12}, {32, 52}, 3.0}};
    double ec = total_energy(coincident, blank, params).total_rdn;
    double ex = total_energy(crossing, blank, params).total_rdn;
    char buf[120];
    std::snprintf(buf, sizeof buf, "collinear %.3e vs perpendicular %.3e", ec, ex);
    out.detail = buf;
    out.check(ec > 0.0, "collinear penalty vanished");
    out.check(ec >= 1e3 * ex, "separation below 1e3");
    return out;
}

Outcome criterion_merging() {
    Outcome out;
    MergeConfig cfg;

    // Exactly collinear chains merge to one segment with exact endpoints.
    for (int k : {2, 3, 5}) {
        VectorScene s;
        s.width = s.height = 200;
        for (int i = 0; i < k; ++i)
            s.primitives.push_back(
                LinePrimitive{{10.0 + 20.0 * i, 40}, {10.0 + 20.0 * (i + 1), 40}, 2.0});
        VectorScene m = merge_lines(s, cfg);
        bool ok = m.primitives.size() == 1;
        if (ok) {
            const auto& l = std::get<LinePrimitive>(m.primitives[0]);
            double lo = std::min(l.p1.x, l.p2.x), hi = std::max(l.p1.x, l.p2.x);
            ok = std::abs(lo - 10.0) < 1e-9 && std::abs(hi - 10.0 - 20.0 * k) < 1e-9 &&
                 std::abs(l.p1.y - 40.0) < 1e-9;
        }
        out.check(ok, "chain of " + std::to_string(k) + " did not merge exactly");
    }

    // Split-and-remerge of random quadratics.
    SplitMix64 rng(77);
    double worst_cp = 0.0;
    for (int i = 0; i < 50; ++i) {
        CurvePrimitive orig = random_merge_quadratic(rng, 100);
        auto [a, b] = split_curve(orig, 0.5);
        auto merged = merge_curve_pair(a, b, cfg);
        if (!merged) {
            out.check(false, "split pair rejected");
            continue;
        }
        worst_cp = std::max({worst_cp, (merged->c0 - orig.c0).norm(),
                             (merged->c1 - orig.c1).norm(), (merged->c2 - orig.c2).norm()});
    }
    out.check(worst_cp <= 0.5, "split-and-remerge control point error above 0.5 px");

    // A 200-primitive fragmented scene: merging cuts the count while keeping
    // the rendered geometry.
    SplitMix64 gen(5);
    VectorScene base;
    base.width = base.height = 256;
    while (base.primitives.size() < 58) {
        LinePrimitive l{{gen.uniform(10, 246), gen.uniform(10, 246)},
                        {gen.uniform(10, 246), gen.uniform(10, 246)},
                        gen.uniform(1.5, 4.0)};
        if ((l.p2 - l.p1).norm() < 40) continue;
        base.primitives.push_back(l);
    }
    for (int i = 0; i < 6; ++i) {
        CurvePrimitive c = random_merge_quadratic(gen, 200);
        c.c0 += {20, 20};
        c.c1 += {20, 20};
        c.c2 += {20, 20};
        base.primitives.push_back(c);
    }
    VectorScene fragmented;
    fragmented.width = fragmented.height = 256;
    for (const Primitive& p : base.primitives) {
        if (is_line(p)) {
            const auto& l = std::get<LinePrimitive>(p);
            int pieces = 2 + static_cast<int>(gen.below(3));
            for (int i = 0; i < pieces; ++i)
                fragmented.primitives.push_back(
                    LinePrimitive{lerp(l.p1, l.p2, static_cast<double>(i) / pieces),
                                  lerp(l.p1, l.p2, static_cast<double>(i + 1) / pieces), l.width});
        } else {
            auto [a, b] = split_curve(std::get<CurvePrimitive>(p), 0.5);
            fragmented.primitives.push_back(a);
            fragmented.primitives.push_back(b);
        }
    }
    std::size_t n0 = fragmented.primitives.size();
    VectorScene merged = merge_scene(fragmented, cfg);
    MetricReport rep = evaluate(merged, render_scene(fragmented, 16));
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "chains exact, split cp err %.3f px, scene %zu -> %zu prims, IoU %.3f", worst_cp,
                  n0, merged.primitives.size(), rep.iou);
    out.detail = buf;
    out.check(n0 >= 150, "fragmented scene too small");
    out.check(merged.primitives.size() <= n0 * 7 / 10, "merge reduced count by less than 30%");
    out.check(rep.iou >= 0.95, "merge cost more than 5% IoU");
    return out;
}

Outcome criterion_metrics() {
    Outcome out;
    SplitMix64 rng(41);
    for (int trial = 0; trial < 50 && out.pass; ++trial) {
        int w = 16 + static_cast<int>(rng.below(48));
        int h = 16 + static_cast<int>(rng.below(48));
        GrayImage a(w, h, 0.0), b(w, h, 0.0);
        int na = 1 + static_cast<int>(rng.below(2000));
        int nb = 1 + static_cast<int>(rng.below(2000));
        for (int i = 0; i < na; ++i)
            a.at(static_cast<int>(rng.below(w)), static_cast<int>(rng.below(h))) = 1.0;
        for (int i = 0; i < nb; ++i)
            b.at(static_cast<int>(rng.below(w)), static_cast<int>(rng.below(h))) = 1.0;

        // O(n^2) brute force on pixel centers with integer squared distances.
        std::vector<std::pair<int, int>> pa, pb;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (a.at(x, y) >= 0.5) pa.push_back({x, y});
                if (b.at(x, y) >= 0.5) pb.push_back({x, y});
            }
        auto directed = [](const std::vector<std::pair<int, int>>& from,
                           const std::vector<std::pair<int, int>>& to) {
            long long worst = 0;
            double sum = 0.0;
            for (auto [x, y] : from) {
                long long best = -1;
                for (auto [u, v] : to) {
                    long long d = 1LL * (x - u) * (x - u) + 1LL * (y - v) * (y - v);
                    if (best < 0 || d < best) best = d;
                }
                worst = std::max(worst, best);
                sum += std::sqrt(static_cast<double>(best));
            }
            return std::pair<double, double>{std::sqrt(static_cast<double>(worst)),
                                             sum / static_cast<double>(from.size())};
        };
        auto [ha, ma] = directed(pa, pb);
        auto [hb, mb] = directed(pb, pa);
        double brute_h = std::max(ha, hb);
        double brute_m = 0.5 * (ma + mb);

        out.check(hausdorff(a, b).value() == brute_h, "hausdorff mismatch vs brute force");
        out.check(std::abs(mean_distance(a, b).value() - brute_m) <= 1e-12,
                  "mean distance mismatch vs brute force");
    }

    // Closed forms.
    GrayImage e(8, 1, 0.0), f(8, 1, 0.0);
    for (int x = 0; x < 4; ++x) e.at(x, 0) = 1.0;
    for (int x = 2; x < 6; ++x) f.at(x, 0) = 1.0;
    out.check(iou(e, f) == 1.0 / 3.0, "half-overlap IoU is not 1/3");

    GrayImage u1(10, 10, 0.5), u2(10, 10, 0.6);
    out.check(std::abs(psnr(u1, u2) - 20.0) < 1e-9, "uniform-0.1 PSNR is not 20 dB");
    if (out.pass) out.detail = "brute-force equality on 50 sets, closed forms exact";
    return out;
}

Outcome criterion_loss() {
    Outcome out;
    std::vector<std::vector<double>> params = {{0.1, 0.2, 0.3, 0.4, 0.5}, {0, 0, 0, 0, 0}};
    double eps = 1e-12;
    double near_zero = loss({1.0 - eps, eps}, {1.0, 0.0}, params, params, 0.5);
    out.check(near_zero >= 0.0 && near_zero < 1e-10, "loss does not vanish at perfection");

    double bce = loss({0.5}, {1.0}, {{0.25}}, {{0.25}}, 0.5);
    out.check(std::abs(bce - std::log(2.0)) < 1e-12, "BCE spot value is not ln 2");

    SplitMix64 rng(13);
    std::vector<Primitive> prims;
    for (int i = 0; i < 6; ++i)
        prims.push_back(LinePrimitive{{rng.uniform(0, 64), rng.uniform(0, 64)},
                                      {rng.uniform(0, 64), rng.uniform(0, 64)},
                                      rng.uniform(0.5, 4)});
    CanonicalTargets base = canonicalize(prims, 10, 64.0);
    std::vector<Primitive> shuffled = prims;
    for (std::size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    for (std::size_t i = 0; i < shuffled.size(); i += 2) {
        auto& l = std::get<LinePrimitive>(shuffled[i]);
        std::swap(l.p1, l.p2);
    }
    CanonicalTargets again = canonicalize(shuffled, 10, 64.0);
    out.check(base.params == again.params && base.confidences == again.confidences,
              "canonicalize is not shuffle-invariant");

    std::vector<Primitive> rebuilt;
    for (std::size_t k = 0; k < base.params.size(); ++k) {
        if (base.confidences[k] == 0.0) continue;
        const auto& row = base.params[k];
        rebuilt.push_back(LinePrimitive{{row[0] * 64, row[1] * 64},
                                        {row[2] * 64, row[3] * 64},
                                        row[4] * 64});
    }
    CanonicalTargets fixed = canonicalize(rebuilt, 10, 64.0);
    bool idempotent = true;
    for (std::size_t k = 0; k < base.params.size(); ++k)
        for (std::size_t i = 0; i < base.params[k].size(); ++i)
            idempotent = idempotent && std::abs(fixed.params[k][i] - base.params[k][i]) < 1e-12;
    out.check(idempotent, "canonicalize is not idempotent");
    if (out.pass) out.detail = "perfect-limit, ln 2 spot value, shuffle/idempotence hold";
    return out;
}

std::vector<char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion_determinism() {
    Outcome out;
    if (g_cli_path.empty()) {
        out.pass = false;
        out.detail = "CLI path missing (pass it as argv[1])";
        return out;
    }
    std::string dir = "/tmp/linevec_accept";
    std::system(("mkdir -p " + dir).c_str());
    auto run = [&](const std::string& cmd) {
        int rc = std::system(cmd.c_str());
        out.check(rc == 0, "command failed: " + cmd);
    };
    std::string synth_args = " --seed=9 --synth.count_min=5 --synth.count_max=5"
                             " --synth.length_min=12 --synth.length_max=24"
                             " --synth.width_min=2 --synth.width_max=3.5"
                             " --synth.min_separation=2";
    run(g_cli_path + " synth -o " + dir + "/scene.json --clean " + dir + "/clean.pgm" + synth_args);
    run(g_cli_path + " vectorize " + dir + "/clean.pgm -o " + dir + "/a.json --workers=1");
    run(g_cli_path + " vectorize " + dir + "/clean.pgm -o " + dir + "/b.json --workers=1");
    run(g_cli_path + " vectorize " + dir + "/clean.pgm -o " + dir + "/c.json --workers=4");
    auto a = read_file(dir + "/a.json");
    out.check(!a.empty(), "no vectorize output");
    out.check(a == read_file(dir + "/b.json"), "reruns differ");
    out.check(a == read_file(dir + "/c.json"), "worker counts differ");

    // The end-to-end quality example rides on the same artifacts.
    run(g_cli_path + " vectorize " + dir + "/clean.pgm -o " + dir + "/q.json --svg " + dir +
        "/q.svg");
    VectorScene got = load_scene(dir + "/q.json");
    MetricReport rep = evaluate(got, load_pgm(dir + "/clean.pgm"));
    char buf[130];
    std::snprintf(buf, sizeof buf, "byte-identical across runs and workers; e2e IoU %.3f, #P=%zu",
                  rep.iou, got.primitives.size());
    out.detail = buf;
    out.check(got.primitives.size() <= 10, "end-to-end primitive count above 10");
    out.check(rep.iou >= 0.9, "end-to-end IoU below 0.9");
    return out;
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds; // 0 = no budget
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli_path = argv[1];
    std::vector<Criterion> criteria = {
        {1, "gradient oracle", 120.0, criterion_gradient_oracle},
        {2, "integral oracle", 60.0, criterion_integral_oracle},
        {3, "refinement recovery", 600.0, criterion_recovery},
        {4, "collapse and attraction", 0.0, criterion_collapse_attraction},
        {5, "collinear redundancy energy", 0.0, criterion_rdn},
        {6, "merging oracles", 0.0, criterion_merging},
        {7, "metrics oracles", 0.0, criterion_metrics},
        {8, "loss and canonicalization", 0.0, criterion_loss},
        {9, "end-to-end determinism", 0.0, criterion_determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome result = c.run();
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_seconds > 0.0 && secs > c.budget_seconds) {
            result.pass = false;
            result.detail += "; over time budget";
        }
        std::printf("[%s] %d. %s (%s, %.1fs)\n", result.pass ? "PASS" : "FAIL", c.id, c.name,
                    result.detail.c_str(), secs);
        std::fflush(stdout);
        if (!result.pass) ++failures;
    }
    return failures;
}
