// SPDX-License-Identifier: Apache-2.0
//
// rotp — encode/decode/evaluate oriented-box detection targets.
//
// Subcommands: synth, encode, decode, roundtrip, eval, tile, render.
// Exit codes: 0 success, 1 acceptance-threshold failure, 2 input error.
// Config precedence: built-in defaults < --config JSON < command-line flags;
// every run echoes its resolved configuration to stdout.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "rotp/rotp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json g_file_config;  // from --config, applied before flag parsing

template <typename T>
void config_default(const std::string& section, const std::string& key, T& var) {
    if (g_file_config.contains(section) && g_file_config[section].contains(key)) {
        var = g_file_config[section][key].get<T>();
    }
}

void echo_config(const std::string& command, const json& resolved) {
    json j;
    j["command"] = command;
    j["config"] = resolved;
    std::cout << j.dump() << "\n";
}

rotp::ClassTable load_class_table(const std::string& path) {
    rotp::ClassTable table;
    if (path.empty()) return table;
    const std::string text = rotp::read_text_file(path);
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) table.names.push_back(line);
    }
    table.closed = true;
    return table;
}

rotp::ParsedScene load_scene(const std::string& path, const std::string& classes_path,
                             int image_w, int image_h) {
    const std::string text = rotp::read_text_file(path);
    if (fs::path(path).extension() == ".json") {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw rotp::FormatError(std::string("scene json parse: ") + e.what());
        }
        return rotp::scene_from_json(j);
    }
    auto parsed = rotp::parse_dota(text, load_class_table(classes_path), image_w, image_h);
    if (parsed.scene.image_width == 0 || parsed.scene.image_height == 0) {
        // smallest multiple of 32 covering every corner
        double hi_x = 0, hi_y = 0;
        for (const auto& ann : parsed.scene.annotations) {
            for (const auto& c : ann.quad.corners) {
                hi_x = std::max(hi_x, c.x);
                hi_y = std::max(hi_y, c.y);
            }
        }
        parsed.scene.image_width = std::max(32, static_cast<int>(std::ceil(hi_x / 32.0)) * 32);
        parsed.scene.image_height = std::max(32, static_cast<int>(std::ceil(hi_y / 32.0)) * 32);
    }
    return parsed;
}

struct EncoderFlags {
    int down_ratio = 4;
    double mu = 0.125;
    int num_classes = 0;  // 0 = infer from the scene's class table
    std::string heatmap = "sch";
    double gaussian_overlap = 0.7;
    double vertex_shrink = 0.9;
    double value_floor = 1e-4;
    bool squared_denominator = false;

    void add_to(CLI::App* cmd, const std::string& section) {
        config_default(section, "down_ratio", down_ratio);
        config_default(section, "mu", mu);
        config_default(section, "num_classes", num_classes);
        config_default(section, "heatmap", heatmap);
        config_default(section, "gaussian_overlap", gaussian_overlap);
        config_default(section, "vertex_shrink", vertex_shrink);
        config_default(section, "value_floor", value_floor);
        config_default(section, "squared_denominator", squared_denominator);
        cmd->add_option("--down-ratio", down_ratio, "output stride d");
        cmd->add_option("--mu", mu, "kernel spread parameter");
        cmd->add_option("--num-classes", num_classes, "class plane count (0 = from scene)");
        cmd->add_option("--heatmap", heatmap, "center heatmap kind: sch | gaussian")
            ->check(CLI::IsMember({"sch", "gaussian"}));
        cmd->add_option("--gaussian-overlap", gaussian_overlap, "gaussian baseline min-overlap");
        cmd->add_option("--vertex-shrink", vertex_shrink, "training vertex shrink factor");
        cmd->add_option("--value-floor", value_floor, "heatmap truncation threshold");
        cmd->add_flag("--squared-denominator", squared_denominator, "use mu*side^2 kernel denominators");
    }
    rotp::EncoderConfig to_config(int classes_from_scene) const {
        rotp::EncoderConfig cfg;
        cfg.down_ratio = down_ratio;
        cfg.mu = mu;
        cfg.num_classes = num_classes > 0 ? num_classes : std::max(1, classes_from_scene);
        cfg.heatmap_kind = heatmap == "gaussian" ? rotp::HeatmapKind::Gaussian : rotp::HeatmapKind::SolarCorona;
        cfg.gaussian_min_overlap = gaussian_overlap;
        cfg.vertex_shrink = vertex_shrink;
        cfg.value_floor = value_floor;
        cfg.squared_denominator = squared_denominator;
        return cfg;
    }
};

struct DecodeFlags {
    int top_k = 200;
    double score_threshold = 0.25;
    double match_radius = 0.25;
    std::string mode = "keypoint";
    double nms_iou = 0.5;
    bool single_image_nms = false;

    void add_to(CLI::App* cmd, const std::string& section) {
        config_default(section, "top_k", top_k);
        config_default(section, "score_threshold", score_threshold);
        config_default(section, "match_radius", match_radius);
        config_default(section, "mode", mode);
        config_default(section, "nms_iou", nms_iou);
        config_default(section, "single_image_nms", single_image_nms);
        cmd->add_option("--top-k", top_k, "max peaks per plane");
        cmd->add_option("--score-threshold", score_threshold, "peak confidence cutoff");
        cmd->add_option("--match-radius", match_radius, "vertex search radius as a fraction of h");
        cmd->add_option("--mode", mode, "decode mode: keypoint | angle")
            ->check(CLI::IsMember({"keypoint", "angle"}));
        cmd->add_option("--nms-iou", nms_iou, "rotated NMS threshold");
        cmd->add_flag("--single-image-nms", single_image_nms, "apply NMS inside decode");
    }
    rotp::DecodeConfig to_config() const {
        rotp::DecodeConfig cfg;
        cfg.top_k = top_k;
        cfg.score_threshold = score_threshold;
        cfg.match_radius_factor = match_radius;
        cfg.mode = mode == "angle" ? rotp::DecodeMode::AngleOnly : rotp::DecodeMode::KeypointMatch;
        cfg.nms_iou = nms_iou;
        cfg.single_image_nms = single_image_nms;
        return cfg;
    }
    json to_json() const {
        return {{"top_k", top_k}, {"score_threshold", score_threshold},
                {"match_radius", match_radius}, {"mode", mode},
                {"nms_iou", nms_iou}, {"single_image_nms", single_image_nms}};
    }
};

struct SynthFlags {
    int image_size = 512;
    int classes = 3;
    double aspect_min = 1.0;
    double aspect_max = 12.0;
    double long_min = 32.0;
    double long_max = 160.0;
    double min_sep = 16.0;

    void add_to(CLI::App* cmd, const std::string& section) {
        config_default(section, "image_size", image_size);
        config_default(section, "classes", classes);
        config_default(section, "aspect_min", aspect_min);
        config_default(section, "aspect_max", aspect_max);
        config_default(section, "long_min", long_min);
        config_default(section, "long_max", long_max);
        config_default(section, "min_sep", min_sep);
        cmd->add_option("--image-size", image_size, "square image side, px");
        cmd->add_option("--classes-count", classes, "number of synthetic classes");
        cmd->add_option("--aspect-min", aspect_min, "min aspect ratio h/w");
        cmd->add_option("--aspect-max", aspect_max, "max aspect ratio h/w");
        cmd->add_option("--long-min", long_min, "min long side, px");
        cmd->add_option("--long-max", long_max, "max long side, px");
        cmd->add_option("--min-sep", min_sep, "min center separation, px");
    }
    rotp::SynthSpec to_spec() const {
        rotp::SynthSpec s;
        s.image_w = s.image_h = image_size;
        s.num_classes = classes;
        s.aspect_lo = aspect_min;
        s.aspect_hi = aspect_max;
        s.long_lo = long_min;
        s.long_hi = std::min(long_max, image_size / 2.5);
        s.min_separation = min_sep;
        return s;
    }
    json to_json() const {
        return {{"image_size", image_size}, {"classes", classes},
                {"aspect_min", aspect_min}, {"aspect_max", aspect_max},
                {"long_min", long_min}, {"long_max", long_max}, {"min_sep", min_sep}};
    }
};

rotp::ClassTable synthetic_class_table(int n) {
    rotp::ClassTable t;
    for (int i = 0; i < n; ++i) t.names.push_back("class_" + std::to_string(i));
    t.closed = true;
    return t;
}

int cmd_synth(std::uint64_t seed, int scenes, int count, const SynthFlags& sf, const std::string& out_dir) {
    fs::create_directories(out_dir);
    rotp::SynthSpec spec = sf.to_spec();
    const rotp::ClassTable classes = synthetic_class_table(spec.num_classes);
    for (int i = 0; i < scenes; ++i) {
        rotp::Rng meta(seed + static_cast<std::uint64_t>(i));
        rotp::SynthSpec s = spec;
        s.count = count > 0 ? count : 1 + static_cast<int>(meta.uniform_int(20));
        const rotp::Scene scene = rotp::synth_scene(meta.next_u64(), s);
        char name[32];
        std::snprintf(name, sizeof name, "scene_%04d.json", i);
        rotp::write_text_file_atomic(fs::path(out_dir) / name,
                                     rotp::scene_to_json(scene, classes).dump(2) + "\n");
    }
    json resolved = sf.to_json();
    resolved["seed"] = seed;
    resolved["scenes"] = scenes;
    resolved["instances"] = count;
    resolved["out"] = out_dir;
    echo_config("synth", resolved);
    return 0;
}

int cmd_encode(const std::string& scene_path, const std::string& classes_path, int image_w, int image_h,
               const EncoderFlags& ef, const std::string& out_dir) {
    const auto parsed = load_scene(scene_path, classes_path, image_w, image_h);
    if (!parsed.diagnostics.empty()) {
        for (const auto& d : parsed.diagnostics) {
            std::cerr << scene_path << ":" << d.line << ": " << d.kind << ": " << d.message << "\n";
        }
        return 2;
    }
    fs::create_directories(out_dir);
    const auto cfg = ef.to_config(static_cast<int>(parsed.classes.names.size()));
    const auto maps = rotp::encode_scene(parsed.scene, cfg);
    for (const auto& w : maps.warnings) std::cerr << "warning: " << w << "\n";
    rotp::write_planes(maps, fs::path(out_dir) / "planes.bin", fs::path(out_dir) / "planes.json");
    // class table ride-along so decode/eval can name classes
    json classes_json = json::array();
    for (const auto& n : parsed.classes.names) classes_json.push_back(n);
    rotp::write_text_file_atomic(fs::path(out_dir) / "classes.json", classes_json.dump() + "\n");
    json resolved = rotp::encoder_config_to_json(cfg);
    resolved["scene"] = scene_path;
    resolved["out"] = out_dir;
    echo_config("encode", resolved);
    return 0;
}

int cmd_decode(const std::string& planes_dir, const DecodeFlags& df, const std::string& out_path,
               const std::string& dota_path, const std::string& image_id) {
    const auto maps = rotp::read_planes(fs::path(planes_dir) / "planes.bin",
                                        fs::path(planes_dir) / "planes.json");
    rotp::ClassTable classes;
    const fs::path classes_path = fs::path(planes_dir) / "classes.json";
    if (fs::exists(classes_path)) {
        const json j = json::parse(rotp::read_text_file(classes_path));
        classes.names = j.get<std::vector<std::string>>();
        classes.closed = true;
    } else {
        classes = synthetic_class_table(maps.config.num_classes);
    }
    const auto dets = rotp::decode(maps, df.to_config());
    rotp::write_text_file_atomic(out_path, rotp::detections_to_jsonl(dets, classes, image_id));
    if (!dota_path.empty()) {
        rotp::write_text_file_atomic(dota_path, rotp::detections_to_dota(dets, classes));
    }
    json resolved = df.to_json();
    resolved["planes"] = planes_dir;
    resolved["out"] = out_path;
    resolved["image_id"] = image_id;
    resolved["detections"] = dets.size();
    echo_config("decode", resolved);
    return 0;
}

int cmd_roundtrip(rotp::RoundtripOptions opt, const EncoderFlags& ef, const DecodeFlags& df,
                  const SynthFlags& sf, bool strict, const std::string& report_path) {
    opt.encoder = ef.to_config(sf.classes);
    opt.decode = df.to_config();
    opt.synth = sf.to_spec();
    const auto report = rotp::run_roundtrip(opt);
    json j = rotp::roundtrip_report_to_json(report);
    j["seed"] = opt.seed;
    j["jitter"] = opt.jitter;
    j["direction_noise_deg"] = opt.direction_noise_deg;
    j["heatmap"] = ef.heatmap;
    j["mode"] = df.mode;
    echo_config("roundtrip", j);
    if (!report_path.empty()) {
        rotp::write_text_file_atomic(report_path, j.dump(2) + "\n");
    }
    return strict && report.failures > 0 ? 1 : 0;
}

int cmd_eval(const std::string& dets_path, const std::string& gt_path, double iou_threshold,
             const std::string& ap_method, const std::string& out_path, const std::string& table_path) {
    const auto dets_by_image = rotp::detections_from_jsonl(rotp::read_text_file(dets_path));

    std::vector<rotp::ImageGroundTruth> gts_by_image;
    rotp::ClassTable classes;
    auto ingest = [&](const fs::path& file) {
        const auto parsed = rotp::scene_from_json(json::parse(rotp::read_text_file(file)));
        rotp::ImageGroundTruth gt;
        gt.image_id = file.stem().string();
        gt.annotations = parsed.scene.annotations;
        gts_by_image.push_back(std::move(gt));
        if (classes.names.empty()) classes = parsed.classes;
    };
    if (fs::is_directory(gt_path)) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(gt_path)) {
            if (e.path().extension() == ".json") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) ingest(f);
    } else {
        ingest(gt_path);
    }

    rotp::EvalConfig cfg;
    cfg.iou_threshold = iou_threshold;
    cfg.ap_method = ap_method == "voc07" ? rotp::ApMethod::VOC07_11point : rotp::ApMethod::Continuous;
    const auto report = rotp::evaluate(dets_by_image, gts_by_image, cfg);
    const json rj = rotp::eval_report_to_json(report, classes);
    if (!out_path.empty()) rotp::write_text_file_atomic(out_path, rj.dump(2) + "\n");
    if (!table_path.empty()) {
        rotp::write_text_file_atomic(table_path, rotp::eval_report_to_table(report, classes));
    }
    json resolved;
    resolved["dets"] = dets_path;
    resolved["gt"] = gt_path;
    resolved["iou_threshold"] = iou_threshold;
    resolved["ap_method"] = ap_method;
    resolved["map"] = report.map;
    echo_config("eval", resolved);
    return 0;
}

int cmd_tile(const std::string& scene_path, const std::string& classes_path, int width, int height,
             int tile_size, int gap, const std::string& out_dir) {
    fs::create_directories(out_dir);
    rotp::Scene scene;
    rotp::ClassTable classes;
    if (!scene_path.empty()) {
        auto parsed = load_scene(scene_path, classes_path, width, height);
        if (!parsed.diagnostics.empty()) {
            for (const auto& d : parsed.diagnostics) {
                std::cerr << scene_path << ":" << d.line << ": " << d.kind << ": " << d.message << "\n";
            }
            return 2;
        }
        scene = parsed.scene;
        classes = parsed.classes;
        width = scene.image_width;
        height = scene.image_height;
    }
    if (width <= 0 || height <= 0) {
        std::cerr << "tile: need --scene or positive --width/--height\n";
        return 2;
    }
    const auto grid = rotp::tile_grid(width, height, tile_size, gap);
    json gj;
    gj["tile_size"] = grid.tile_size;
    gj["gap"] = grid.gap;
    gj["image_width"] = width;
    gj["image_height"] = height;
    json origins = json::array();
    for (const auto& [x, y] : grid.origins) origins.push_back({x, y});
    gj["origins"] = origins;
    rotp::write_text_file_atomic(fs::path(out_dir) / "grid.json", gj.dump(2) + "\n");
    if (!scene_path.empty()) {
        std::vector<rotp::Diagnostic> diags;
        const auto tiles = rotp::split_scene(scene, grid, &diags);
        for (const auto& d : diags) std::cerr << "warning: annotation " << d.line << ": " << d.message << "\n";
        for (std::size_t i = 0; i < tiles.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "tile_%03zu.json", i);
            json tj = rotp::scene_to_json(tiles[i].scene, classes);
            tj["tile_origin"] = {tiles[i].origin.x, tiles[i].origin.y};
            rotp::write_text_file_atomic(fs::path(out_dir) / name, tj.dump(2) + "\n");
        }
    }
    json resolved;
    resolved["scene"] = scene_path;
    resolved["tile_size"] = tile_size;
    resolved["gap"] = gap;
    resolved["tiles"] = grid.origins.size();
    resolved["out"] = out_dir;
    echo_config("tile", resolved);
    return 0;
}

int cmd_render(const std::string& planes_dir, const std::string& plane_name, const std::string& out_prefix) {
    const auto maps = rotp::read_planes(fs::path(planes_dir) / "planes.bin",
                                        fs::path(planes_dir) / "planes.json");
    const std::map<std::string, const rotp::Plane*> planes{
        {"center_hm", &maps.center_hm},   {"vertex_hm", &maps.vertex_hm},
        {"size_map", &maps.size_map},     {"offset_map", &maps.offset_map},
        {"direction_map", &maps.direction_map}, {"pos_mask", &maps.pos_mask}};
    const auto it = planes.find(plane_name);
    if (it == planes.end()) {
        std::cerr << "render: unknown plane '" << plane_name << "'\n";
        return 2;
    }
    const rotp::Plane& plane = *it->second;
    for (int c = 0; c < plane.channels; ++c) {
        std::string body = "P5\n" + std::to_string(plane.width) + " " + std::to_string(plane.height) + "\n255\n";
        for (int y = 0; y < plane.height; ++y) {
            for (int x = 0; x < plane.width; ++x) {
                const double v = std::clamp(static_cast<double>(plane.at(c, y, x)), 0.0, 1.0);
                body.push_back(static_cast<char>(static_cast<int>(std::lround(v * 255.0))));
            }
        }
        rotp::write_text_file_atomic(out_prefix + "_" + plane_name + "_c" + std::to_string(c) + ".pgm", body);
    }
    json resolved;
    resolved["planes"] = planes_dir;
    resolved["plane"] = plane_name;
    resolved["channels"] = plane.channels;
    resolved["out_prefix"] = out_prefix;
    echo_config("render", resolved);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"oriented two-keypoint detection target codec and evaluator"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file with per-subcommand defaults");
    // apply config-file defaults before flag parsing
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                g_file_config = json::parse(rotp::read_text_file(argv[i + 1]));
            } catch (const std::exception& e) {
                std::cerr << "config: " << e.what() << "\n";
                return 2;
            }
        }
    }

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate synthetic scene JSON files");
    synth->fallthrough();
    std::uint64_t synth_seed = 0;
    int synth_scenes = 1, synth_count = 0;
    std::string synth_out = "scenes";
    SynthFlags synth_sf;
    config_default("synth", "seed", synth_seed);
    config_default("synth", "scenes", synth_scenes);
    synth->add_option("--seed", synth_seed, "generator seed");
    synth->add_option("--scenes", synth_scenes, "number of scenes");
    synth->add_option("--instances", synth_count, "instances per scene (0 = random 1..20)");
    synth->add_option("--out", synth_out, "output directory")->required();
    synth_sf.add_to(synth, "synth");

    // ---- encode ----
    auto* encode = app.add_subcommand("encode", "encode a scene into training planes");
    encode->fallthrough();
    std::string enc_scene, enc_classes, enc_out = "planes";
    int enc_w = 0, enc_h = 0;
    EncoderFlags enc_ef;
    encode->add_option("--scene", enc_scene, "scene file (.json or DOTA .txt)")->required();
    encode->add_option("--classes", enc_classes, "class list file (one name per line)");
    encode->add_option("--image-width", enc_w, "image width for DOTA input");
    encode->add_option("--image-height", enc_h, "image height for DOTA input");
    encode->add_option("--out", enc_out, "output directory")->required();
    enc_ef.add_to(encode, "encode");

    // ---- decode ----
    auto* decode = app.add_subcommand("decode", "decode planes into detections");
    decode->fallthrough();
    std::string dec_planes, dec_out = "dets.jsonl", dec_dota, dec_image = "image";
    DecodeFlags dec_df;
    decode->add_option("--planes", dec_planes, "directory with planes.bin/planes.json")->required();
    decode->add_option("--out", dec_out, "detections JSONL output");
    decode->add_option("--dota", dec_dota, "also write DOTA-style text");
    decode->add_option("--image-id", dec_image, "image id stamped into JSONL");
    dec_df.add_to(decode, "decode");

    // ---- roundtrip ----
    auto* rt = app.add_subcommand("roundtrip", "seeded encode->decode fidelity report");
    rt->fallthrough();
    rotp::RoundtripOptions rt_opt;
    bool rt_strict = true;
    bool rt_no_strict = false;
    std::string rt_report;
    EncoderFlags rt_ef;
    DecodeFlags rt_df;
    SynthFlags rt_sf;
    config_default("roundtrip", "seed", rt_opt.seed);
    config_default("roundtrip", "scenes", rt_opt.scenes);
    rt->add_option("--seed", rt_opt.seed, "scene seed base");
    rt->add_option("--scenes", rt_opt.scenes, "number of scenes");
    rt->add_option("--instances-max", rt_opt.max_instances, "max instances per scene");
    rt->add_option("--iou-pass", rt_opt.iou_pass, "per-instance IoU pass threshold");
    rt->add_option("--direction-pass", rt_opt.direction_pass_deg, "per-instance direction pass, deg");
    rt->add_flag("--jitter", rt_opt.jitter, "displace center argmax by ±1 cell on slender instances");
    rt->add_option("--jitter-min-aspect", rt_opt.jitter_min_aspect, "aspect ratio from which jitter applies");
    rt->add_option("--direction-noise", rt_opt.direction_noise_deg, "uniform ± noise on direction plane, deg");
    rt->add_option("--jobs", rt_opt.jobs, "scene-level parallelism");
    rt->add_flag("--no-strict", rt_no_strict, "always exit 0, report only");
    rt->add_option("--report", rt_report, "write report JSON here");
    rt_ef.add_to(rt, "roundtrip");
    rt_df.add_to(rt, "roundtrip");
    rt_sf.add_to(rt, "roundtrip");

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "match detections against ground truth and compute AP/mAP");
    eval->fallthrough();
    std::string ev_dets, ev_gt, ev_out = "eval.json", ev_table;
    double ev_iou = 0.5;
    std::string ev_ap = "continuous";
    config_default("eval", "iou_threshold", ev_iou);
    config_default("eval", "ap_method", ev_ap);
    eval->add_option("--dets", ev_dets, "detections JSONL")->required();
    eval->add_option("--gt", ev_gt, "ground-truth scene JSON file or directory")->required();
    eval->add_option("--out", ev_out, "report JSON output");
    eval->add_option("--table", ev_table, "also write an aligned text table");
    eval->add_option("--iou-threshold", ev_iou, "match threshold");
    eval->add_option("--ap", ev_ap, "AP method: continuous | voc07")
        ->check(CLI::IsMember({"continuous", "voc07"}));

    // ---- tile ----
    auto* tile = app.add_subcommand("tile", "compute a tile grid and split a scene");
    tile->fallthrough();
    std::string tl_scene, tl_classes, tl_out = "tiles";
    int tl_w = 0, tl_h = 0, tl_size = 1024, tl_gap = 200;
    config_default("tile", "tile_size", tl_size);
    config_default("tile", "gap", tl_gap);
    tile->add_option("--scene", tl_scene, "scene file to split (.json or DOTA .txt)");
    tile->add_option("--classes", tl_classes, "class list for DOTA input");
    tile->add_option("--width", tl_w, "image width when no scene is given");
    tile->add_option("--height", tl_h, "image height when no scene is given");
    tile->add_option("--tile-size", tl_size, "tile side, px");
    tile->add_option("--gap", tl_gap, "tile overlap, px");
    tile->add_option("--out", tl_out, "output directory");

    // ---- render ----
    auto* render = app.add_subcommand("render", "render plane channels as PGM images");
    render->fallthrough();
    std::string rd_planes, rd_plane = "center_hm", rd_out = "render";
    render->add_option("--planes", rd_planes, "directory with planes.bin/planes.json")->required();
    render->add_option("--plane", rd_plane, "plane name to render");
    render->add_option("--out", rd_out, "output file prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(synth_seed, synth_scenes, synth_count, synth_sf, synth_out);
        if (encode->parsed()) return cmd_encode(enc_scene, enc_classes, enc_w, enc_h, enc_ef, enc_out);
        if (decode->parsed()) return cmd_decode(dec_planes, dec_df, dec_out, dec_dota, dec_image);
        if (rt->parsed()) {
            rt_strict = !rt_no_strict;
            return cmd_roundtrip(rt_opt, rt_ef, rt_df, rt_sf, rt_strict, rt_report);
        }
        if (eval->parsed()) return cmd_eval(ev_dets, ev_gt, ev_iou, ev_ap, ev_out, ev_table);
        if (tile->parsed()) return cmd_tile(tl_scene, tl_classes, tl_w, tl_h, tl_size, tl_gap, tl_out);
        if (render->parsed()) return cmd_render(rd_planes, rd_plane, rd_out);
    } catch (const rotp::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const rotp::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const rotp::PlacementError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
