// SPDX-License-Identifier: Apache-2.0
//
// linevec: raster-to-vector engine for technical line drawings.
//
//   linevec vectorize <input.pgm> -o out.json [--svg out.svg] [--init init.json]
//   linevec refine    <scene.json> <image.pgm> -o out.json
//   linevec merge     <scene.json> -o out.json
//   linevec metrics   <a.json|a.pgm> <b.json|b.pgm>
//   linevec render    <scene.json> -o out.pgm
//   linevec synth     -o scene.json [--clean clean.pgm] [--degraded noisy.pgm]
//
// Any config key may be overridden with --key=value; --config FILE loads a
// sectioned key=value file first.

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include <linevec/config.hpp>
#include <linevec/metrics.hpp>
#include <linevec/pipeline.hpp>
#include <linevec/scene_io.hpp>

namespace {

using namespace linevec;

constexpr int kExitUsage = 1;
constexpr int kExitUnreadable = 2;
constexpr int kExitBadScene = 3;

struct Args {
    std::vector<std::string> positional;
    std::string out;
    std::string svg;
    std::string init;
    std::string clean;
    std::string degraded;
    PipelineConfig config;
};

int usage() {
    std::fprintf(stderr,
                 "usage: linevec <vectorize|refine|merge|metrics|render|synth> [args]\n"
                 "  vectorize <input.pgm> -o out.json [--svg out.svg] [--init init.json]\n"
                 "  refine    <scene.json> <image.pgm> -o out.json\n"
                 "  merge     <scene.json> -o out.json\n"
                 "  metrics   <a.json|a.pgm> <b.json|b.pgm>\n"
                 "  render    <scene.json> -o out.pgm\n"
                 "  synth     -o scene.json [--clean clean.pgm] [--degraded noisy.pgm]\n"
                 "  common:   [--config FILE] [--key=value ...] [--print-config]\n");
    return kExitUsage;
}

void parse_args(int argc, char** argv, Args& args, bool& print_config) {
    for (int i = 2; i < argc; ++i) {
        std::string arg = argv[i];
        auto take_value = [&](std::string& slot) {
            if (i + 1 >= argc) throw ConfigError(arg + " needs a value");
            slot = argv[++i];
        };
        if (arg == "-o" || arg == "--out") {
            take_value(args.out);
        } else if (arg == "--svg") {
            take_value(args.svg);
        } else if (arg == "--init") {
            take_value(args.init);
        } else if (arg == "--clean") {
            take_value(args.clean);
        } else if (arg == "--degraded") {
            take_value(args.degraded);
        } else if (arg == "--config") {
            std::string path;
            take_value(path);
            load_config_file(args.config, path);
        } else if (arg == "--print-config") {
            print_config = true;
        } else if (arg.rfind("--", 0) == 0) {
            std::size_t eq = arg.find('=');
            if (eq == std::string::npos) throw ConfigError("expected --key=value, got " + arg);
            set_config_key(args.config, arg.substr(2, eq - 2), arg.substr(eq + 1));
        } else {
            args.positional.push_back(arg);
        }
    }
}

bool ends_with(const std::string& s, const char* suffix) {
    std::size_t n = std::strlen(suffix);
    return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

int cmd_vectorize(const Args& args) {
    if (args.positional.size() != 1 || args.out.empty()) return usage();
    GrayImage img = load_pgm(args.positional[0]);
    VectorScene init;
    bool has_init = !args.init.empty();
    if (has_init) init = load_scene(args.init);
    VectorScene scene = vectorize_image(img, args.config, has_init ? &init : nullptr);
    save_scene(scene, args.out);
    if (!args.svg.empty()) save_svg(scene, args.svg);
    return 0;
}

int cmd_refine(const Args& args) {
    if (args.positional.size() != 2 || args.out.empty()) return usage();
    VectorScene init = load_scene(args.positional[0]);
    GrayImage img = load_pgm(args.positional[1]);
    save_scene(refine_scene(img, init, args.config), args.out);
    return 0;
}

int cmd_merge(const Args& args) {
    if (args.positional.size() != 1 || args.out.empty()) return usage();
    VectorScene scene = load_scene(args.positional[0]);
    save_scene(merge_scene(scene, args.config.merge), args.out);
    return 0;
}

int cmd_metrics(const Args& args) {
    if (args.positional.size() != 2) return usage();
    const std::string& a = args.positional[0];
    const std::string& b = args.positional[1];
    int s = args.config.render_supersample;
    MetricReport report;
    if (ends_with(a, ".json") && ends_with(b, ".json")) {
        report = evaluate(load_scene(a), load_scene(b), s);
    } else if (ends_with(a, ".json")) {
        report = evaluate(load_scene(a), load_pgm(b), s);
    } else if (ends_with(b, ".json")) {
        report = evaluate(load_scene(b), load_pgm(a), s);
    } else {
        report = evaluate(load_pgm(a), load_pgm(b));
    }
    std::printf("%s\n", metric_record(report).c_str());
    return 0;
}

int cmd_render(const Args& args) {
    if (args.positional.size() != 1 || args.out.empty()) return usage();
    VectorScene scene = load_scene(args.positional[0]);
    save_pgm(render_scene(scene, args.config.render_supersample), args.out);
    return 0;
}

int cmd_synth(const Args& args) {
    if (!args.positional.empty() || args.out.empty()) return usage();
    PipelineConfig cfg = args.config;
    cfg.synth.seed = cfg.seed;
    cfg.degrade.seed = cfg.seed + 1;
    VectorScene scene = gen_scene(cfg.synth);
    save_scene(scene, args.out);
    if (!args.clean.empty() || !args.degraded.empty()) {
        GrayImage clean = render_scene(scene, cfg.render_supersample);
        if (!args.clean.empty()) save_pgm(clean, args.clean);
        if (!args.degraded.empty()) save_pgm(degrade(clean, cfg.degrade), args.degraded);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) return usage();
    std::string cmd = argv[1];
    Args args;
    bool print_config = false;
    try {
        parse_args(argc, argv, args, print_config);
        if (print_config) {
            std::printf("%s", dump_config(args.config).c_str());
            return 0;
        }
        if (cmd == "vectorize") return cmd_vectorize(args);
        if (cmd == "refine") return cmd_refine(args);
        if (cmd == "merge") return cmd_merge(args);
        if (cmd == "metrics") return cmd_metrics(args);
        if (cmd == "render") return cmd_render(args);
        if (cmd == "synth") return cmd_synth(args);
        return usage();
    } catch (const SceneIoError& e) {
        std::fprintf(stderr, "linevec: %s\n", e.what());
        return kExitBadScene;
    } catch (const ImageIoError& e) {
        std::fprintf(stderr, "linevec: %s\n", e.what());
        return e.code == ImageIoError::Code::missing_file ? kExitUnreadable : kExitUsage;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "linevec: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "linevec: %s\n", e.what());
        return kExitUsage;
    }
}
