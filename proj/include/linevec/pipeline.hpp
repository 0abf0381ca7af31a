// SPDX-License-Identifier: Apache-2.0
//
// End-to-end orchestration: binarize, split into patches, initialize (from an
// ingested scene or the heuristic), refine per patch on a worker pool, map
// back to global coordinates, and merge.

#pragma once

#include <atomic>
#include <thread>
#include <vector>

#include "config.hpp"
#include "merge.hpp"
#include "refine.hpp"
#include "synth.hpp"

namespace linevec {

namespace detail {

template <typename Fn>
inline void parallel_for(int n, int workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    int spawn = std::min(workers, n);
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int w = 0; w < spawn; ++w)
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

} // namespace detail

// Assigns each primitive of a global init scene to the patch containing its
// midpoint and translates it into patch-local coordinates.
inline std::vector<std::vector<Primitive>> distribute_init(const VectorScene& init,
                                                           const std::vector<PatchRef>& patches,
                                                           int patch_size) {
    std::vector<std::vector<Primitive>> out(patches.size());
    for (const Primitive& p : init.primitives) {
        Vec2 mid;
        if (is_line(p)) {
            const auto& l = std::get<LinePrimitive>(p);
            mid = (l.p1 + l.p2) * 0.5;
        } else {
            const auto& c = std::get<CurvePrimitive>(p);
            mid = eval_bezier(c, 0.5);
        }
        int best = -1;
        for (std::size_t i = 0; i < patches.size(); ++i) {
            if (mid.x >= patches[i].origin_x && mid.x < patches[i].origin_x + patch_size &&
                mid.y >= patches[i].origin_y && mid.y < patches[i].origin_y + patch_size)
                best = static_cast<int>(i);
        }
        if (best < 0) best = 0;
        out[static_cast<std::size_t>(best)].push_back(translate(
            p, {-static_cast<double>(patches[best].origin_x),
                -static_cast<double>(patches[best].origin_y)}));
    }
    return out;
}

// Full vectorization of a grayscale image. Deterministic for a fixed config,
// independent of the worker count: patch results are collected in index
// order before the single-threaded merge.
inline VectorScene vectorize_image(const GrayImage& img, const PipelineConfig& cfg,
                                   const VectorScene* init = nullptr) {
    GrayImage bin = binarize(img, cfg.threshold);
    std::vector<PatchRef> patches = split_patches(bin, cfg.patch_size, cfg.effective_stride());

    std::vector<std::vector<Primitive>> inits(patches.size());
    if (init) {
        inits = distribute_init(*init, patches, cfg.patch_size);
    } else {
        for (std::size_t i = 0; i < patches.size(); ++i)
            inits[i] = heuristic_init(patches[i].data, cfg.refine.energy.fill_threshold);
    }

    std::vector<std::vector<Primitive>> refined(patches.size());
    detail::parallel_for(static_cast<int>(patches.size()), cfg.workers, [&](int i) {
        refined[static_cast<std::size_t>(i)] =
            refine_patch(patches[static_cast<std::size_t>(i)].data,
                         inits[static_cast<std::size_t>(i)], cfg.refine)
                .primitives;
    });

    VectorScene scene;
    scene.width = img.width;
    scene.height = img.height;
    for (std::size_t i = 0; i < patches.size(); ++i)
        for (const Primitive& p : refined[i])
            scene.primitives.push_back(translate(p, {static_cast<double>(patches[i].origin_x),
                                                     static_cast<double>(patches[i].origin_y)}));
    return merge_scene(scene, cfg.merge);
}

// Refinement without the merge stage: the ingested scene is mapped into
// patches, refined, and returned in global coordinates.
inline VectorScene refine_scene(const GrayImage& img, const VectorScene& init,
                                const PipelineConfig& cfg) {
    GrayImage bin = binarize(img, cfg.threshold);
    std::vector<PatchRef> patches = split_patches(bin, cfg.patch_size, cfg.effective_stride());
    std::vector<std::vector<Primitive>> inits = distribute_init(init, patches, cfg.patch_size);

    std::vector<std::vector<Primitive>> refined(patches.size());
    detail::parallel_for(static_cast<int>(patches.size()), cfg.workers, [&](int i) {
        refined[static_cast<std::size_t>(i)] =
            refine_patch(patches[static_cast<std::size_t>(i)].data,
                         inits[static_cast<std::size_t>(i)], cfg.refine)
                .primitives;
    });

    VectorScene scene;
    scene.width = img.width;
    scene.height = img.height;
    for (std::size_t i = 0; i < patches.size(); ++i)
        for (const Primitive& p : refined[i])
            scene.primitives.push_back(translate(p, {static_cast<double>(patches[i].origin_x),
                                                     static_cast<double>(patches[i].origin_y)}));
    return scene;
}

} // namespace linevec
