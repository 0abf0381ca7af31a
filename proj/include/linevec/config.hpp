// SPDX-License-Identifier: Apache-2.0
//
// Pipeline configuration: defaults, the sectioned key=value config file, and
// a key registry so every knob is reachable from --key=value flags.

#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "merge.hpp"
#include "refine.hpp"
#include "synth.hpp"

namespace linevec {

struct PipelineConfig {
    int patch_size = 64;
    int stride = 0; // 0 follows patch_size (non-overlapping tiles)
    double threshold = 0.5;
    int workers = 1;
    std::uint64_t seed = 1;
    int render_supersample = 16;
    RefineConfig refine;
    MergeConfig merge;
    SceneSpec synth;
    DegradeSpec degrade;

    PipelineConfig() {
        // The pipeline refines binarized patches; coverage charges live on the
        // same binary scale.
        refine.energy.binary_charges = true;
    }

    int effective_stride() const { return stride > 0 ? stride : patch_size; }
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

struct ConfigKey {
    const char* name;
    std::function<std::string(const PipelineConfig&)> get;
    std::function<void(PipelineConfig&, const std::string&)> set;
};

inline double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("bad number: " + s);
    return v;
}

inline long long parse_int(const std::string& s) {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw ConfigError("bad integer: " + s);
    return v;
}

inline std::string show(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

inline const std::vector<ConfigKey>& config_keys() {
    auto dbl = [](const char* name, auto ref) {
        return ConfigKey{name,
                         [ref](const PipelineConfig& c) { return show(*ref(const_cast<PipelineConfig&>(c))); },
                         [ref](PipelineConfig& c, const std::string& s) { *ref(c) = parse_double(s); }};
    };
    auto deg = [](const char* name, auto ref) {
        return ConfigKey{name,
                         [ref](const PipelineConfig& c) {
                             return show(*ref(const_cast<PipelineConfig&>(c)) * 180.0 / kPi);
                         },
                         [ref](PipelineConfig& c, const std::string& s) {
                             *ref(c) = parse_double(s) * kPi / 180.0;
                         }};
    };
    auto integer = [](const char* name, auto ref) {
        return ConfigKey{name,
                         [ref](const PipelineConfig& c) {
                             return std::to_string(*ref(const_cast<PipelineConfig&>(c)));
                         },
                         [ref](PipelineConfig& c, const std::string& s) {
                             *ref(c) = static_cast<std::remove_reference_t<decltype(*ref(c))>>(
                                 parse_int(s));
                         }};
    };
    static const std::vector<ConfigKey> keys = {
        integer("patch_size", [](PipelineConfig& c) { return &c.patch_size; }),
        integer("stride", [](PipelineConfig& c) { return &c.stride; }),
        dbl("threshold", [](PipelineConfig& c) { return &c.threshold; }),
        integer("workers", [](PipelineConfig& c) { return &c.workers; }),
        integer("seed", [](PipelineConfig& c) { return &c.seed; }),
        integer("render_supersample", [](PipelineConfig& c) { return &c.render_supersample; }),

        dbl("refine.learning_rate", [](PipelineConfig& c) { return &c.refine.learning_rate; }),
        dbl("refine.lr_decay_halflife",
            [](PipelineConfig& c) { return &c.refine.lr_decay_halflife; }),
        dbl("refine.adam_beta1", [](PipelineConfig& c) { return &c.refine.adam_beta1; }),
        dbl("refine.adam_beta2", [](PipelineConfig& c) { return &c.refine.adam_beta2; }),
        dbl("refine.adam_eps", [](PipelineConfig& c) { return &c.refine.adam_eps; }),
        integer("refine.max_iters", [](PipelineConfig& c) { return &c.refine.max_iters; }),
        integer("refine.maintenance_period",
                [](PipelineConfig& c) { return &c.refine.maintenance_period; }),
        dbl("refine.collapse_length", [](PipelineConfig& c) { return &c.refine.collapse_length; }),
        deg("refine.join_angle_deg", [](PipelineConfig& c) { return &c.refine.join_angle; }),
        dbl("refine.join_overlap", [](PipelineConfig& c) { return &c.refine.join_overlap; }),
        dbl("refine.stop_grad_norm", [](PipelineConfig& c) { return &c.refine.stop_grad_norm; }),

        dbl("energy.r_close", [](PipelineConfig& c) { return &c.refine.energy.potential.r_close; }),
        dbl("energy.r_far", [](PipelineConfig& c) { return &c.refine.energy.potential.r_far; }),
        dbl("energy.lambda_far",
            [](PipelineConfig& c) { return &c.refine.energy.potential.lambda_far; }),
        dbl("energy.truncation_radius",
            [](PipelineConfig& c) { return &c.refine.energy.potential.truncation_radius; }),
        deg("energy.rdn_alpha_deg", [](PipelineConfig& c) { return &c.refine.energy.rdn.alpha_col; }),
        dbl("energy.rdn_truncation",
            [](PipelineConfig& c) { return &c.refine.energy.rdn_truncation; }),
        dbl("energy.lambda_pos", [](PipelineConfig& c) { return &c.refine.energy.lambda_pos; }),
        dbl("energy.fill_threshold",
            [](PipelineConfig& c) { return &c.refine.energy.fill_threshold; }),
        integer("energy.supersample", [](PipelineConfig& c) { return &c.refine.energy.supersample; }),
        dbl("energy.flatten_tol", [](PipelineConfig& c) { return &c.refine.energy.flatten_tol; }),
        integer("energy.binary_charges",
                [](PipelineConfig& c) { return &c.refine.energy.binary_charges; }),

        dbl("merge.link_max_gap", [](PipelineConfig& c) { return &c.merge.link_max_gap; }),
        deg("merge.link_max_angle_deg", [](PipelineConfig& c) { return &c.merge.link_max_angle; }),
        dbl("merge.link_max_offset", [](PipelineConfig& c) { return &c.merge.link_max_offset; }),
        dbl("merge.snap_fraction", [](PipelineConfig& c) { return &c.merge.snap_fraction; }),
        dbl("merge.curve_width_tol", [](PipelineConfig& c) { return &c.merge.curve_width_tol; }),
        dbl("merge.curve_fit_tol", [](PipelineConfig& c) { return &c.merge.curve_fit_tol; }),
        integer("merge.u_q1_samples", [](PipelineConfig& c) { return &c.merge.u_q1_samples; }),

        integer("synth.canvas_width", [](PipelineConfig& c) { return &c.synth.canvas_width; }),
        integer("synth.canvas_height", [](PipelineConfig& c) { return &c.synth.canvas_height; }),
        integer("synth.count_min", [](PipelineConfig& c) { return &c.synth.count_min; }),
        integer("synth.count_max", [](PipelineConfig& c) { return &c.synth.count_max; }),
        dbl("synth.line_fraction", [](PipelineConfig& c) { return &c.synth.line_fraction; }),
        dbl("synth.length_min", [](PipelineConfig& c) { return &c.synth.length_min; }),
        dbl("synth.length_max", [](PipelineConfig& c) { return &c.synth.length_max; }),
        dbl("synth.width_min", [](PipelineConfig& c) { return &c.synth.width_min; }),
        dbl("synth.width_max", [](PipelineConfig& c) { return &c.synth.width_max; }),
        deg("synth.min_pair_angle_deg", [](PipelineConfig& c) { return &c.synth.min_pair_angle; }),
        dbl("synth.min_separation", [](PipelineConfig& c) { return &c.synth.min_separation; }),

        dbl("degrade.blur_sigma", [](PipelineConfig& c) { return &c.degrade.blur_sigma; }),
        dbl("degrade.noise_sigma", [](PipelineConfig& c) { return &c.degrade.noise_sigma; }),
        dbl("degrade.background", [](PipelineConfig& c) { return &c.degrade.background; }),
    };
    return keys;
}

} // namespace detail

inline void set_config_key(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& k : detail::config_keys()) {
        if (key == k.name) {
            k.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key: " + key);
}

inline std::string dump_config(const PipelineConfig& cfg) {
    std::ostringstream out;
    for (const auto& k : detail::config_keys()) out << k.name << " = " << k.get(cfg) << "\n";
    return out.str();
}

// Sectioned key=value text: a [section] line prefixes the keys that follow
// with "section.". '#' starts a comment.
inline void load_config_text(PipelineConfig& cfg, const std::string& text) {
    std::istringstream in(text);
    std::string line, section;
    auto trim = [](std::string s) {
        std::size_t a = s.find_first_not_of(" \t\r");
        std::size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!section.empty()) key = section + "." + key;
        set_config_key(cfg, key, value);
    }
}

inline void load_config_file(PipelineConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    load_config_text(cfg, text);
}

} // namespace linevec
