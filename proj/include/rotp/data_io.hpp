// SPDX-License-Identifier: Apache-2.0
//
// Annotation parsing (DOTA text, scene JSON), tiling, synthetic scene
// generation, and the plane binary + JSON sidecar format.
//
// DOTA text: one annotation per line, "x1 y1 x2 y2 x3 y3 x4 y4 class [diff]";
// metadata header lines (imagesource:/gsd:) are skipped. Malformed lines
// become diagnostics, never exceptions.
//
// Plane binary: all planes concatenated in sidecar order, channel-major
// (c, y, x), little-endian float32.

#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rotp/codec.hpp"
#include "rotp/decoder.hpp"
#include "rotp/geometry.hpp"
#include "rotp/letterbox.hpp"
#include "rotp/rng.hpp"

namespace rotp {

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PlacementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Diagnostic {
    int line = 0;
    std::string kind;  // ParseError | UnknownClass | DroppedAnnotation
    std::string message;
};

struct ClassTable {
    std::vector<std::string> names;
    bool closed = false;  // closed tables reject unknown names

    int id_of(const std::string& name) {
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) return static_cast<int>(i);
        }
        if (closed) return -1;
        names.push_back(name);
        return static_cast<int>(names.size()) - 1;
    }
    const std::string& name_of(int id) const {
        static const std::string unknown = "unknown";
        if (id < 0 || id >= static_cast<int>(names.size())) return unknown;
        return names[static_cast<std::size_t>(id)];
    }
};

struct ParsedScene {
    Scene scene;
    ClassTable classes;
    std::vector<Diagnostic> diagnostics;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::optional<double> parse_double(std::string_view tok) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace detail

// Total over arbitrary bytes: every input line is either an annotation, a
// skipped header/blank, or a diagnostic.
inline ParsedScene parse_dota(std::string_view text, ClassTable classes = {},
                              int image_width = 0, int image_height = 0) {
    ParsedScene out;
    out.classes = std::move(classes);
    out.scene.image_width = image_width;
    out.scene.image_height = image_height;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const auto toks = detail::split_ws(line);
        if (toks.empty()) continue;
        if (toks[0].starts_with("imagesource") || toks[0].starts_with("gsd")) continue;
        if (toks.size() < 9) {
            out.diagnostics.push_back({line_no, "ParseError", "expected 8 coordinates and a class token"});
            continue;
        }
        double coords[8];
        bool ok = true;
        for (int k = 0; k < 8; ++k) {
            const auto v = detail::parse_double(toks[static_cast<std::size_t>(k)]);
            if (!v) {
                out.diagnostics.push_back({line_no, "ParseError",
                                           "non-numeric coordinate '" + std::string(toks[static_cast<std::size_t>(k)]) + "'"});
                ok = false;
                break;
            }
            coords[k] = *v;
        }
        if (!ok) continue;
        const std::string cls_name(toks[8]);
        const int cls = out.classes.id_of(cls_name);
        if (cls < 0) {
            out.diagnostics.push_back({line_no, "UnknownClass", "unknown class token '" + cls_name + "'"});
            continue;
        }
        bool difficult = false;
        if (toks.size() >= 10) {
            const auto v = detail::parse_double(toks[9]);
            difficult = v && *v != 0.0;
        }
        RotatedQuad quad;
        for (int k = 0; k < 4; ++k) quad.corners[static_cast<std::size_t>(k)] = {coords[2 * k], coords[2 * k + 1]};
        quad.class_id = cls;
        if (quad_area(quad) <= kAreaEpsilon) {
            out.diagnostics.push_back({line_no, "ParseError", "degenerate quadrilateral"});
            continue;
        }
        out.scene.annotations.push_back({quad, difficult});
    }
    return out;
}

inline std::string detections_to_dota(const std::vector<Detection>& dets, const ClassTable& classes) {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed;
    for (const auto& det : dets) {
        for (const Point2& c : det.quad.corners) os << c.x << " " << c.y << " ";
        os << classes.name_of(det.class_id) << " " << det.score << "\n";
    }
    return os.str();
}

// ---- scene JSON (versioned) ----

inline nlohmann::json scene_to_json(const Scene& scene, const ClassTable& classes) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["image_width"] = scene.image_width;
    j["image_height"] = scene.image_height;
    j["classes"] = classes.names;
    nlohmann::json anns = nlohmann::json::array();
    for (const auto& ann : scene.annotations) {
        nlohmann::json a;
        a["class"] = classes.name_of(ann.quad.class_id);
        a["difficult"] = ann.difficult;
        nlohmann::json corners = nlohmann::json::array();
        for (const Point2& c : ann.quad.corners) corners.push_back({c.x, c.y});
        a["corners"] = corners;
        anns.push_back(a);
    }
    j["annotations"] = anns;
    return j;
}

inline ParsedScene scene_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("schema_version")) {
        throw FormatError("scene json: missing schema_version");
    }
    if (j.at("schema_version").get<int>() != 1) {
        throw FormatError("scene json: unsupported schema_version");
    }
    ParsedScene out;
    out.scene.image_width = j.at("image_width").get<int>();
    out.scene.image_height = j.at("image_height").get<int>();
    out.classes.names = j.at("classes").get<std::vector<std::string>>();
    out.classes.closed = true;
    for (const auto& a : j.at("annotations")) {
        const int cls = out.classes.id_of(a.at("class").get<std::string>());
        if (cls < 0) throw FormatError("scene json: class not in class list");
        RotatedQuad quad;
        const auto& corners = a.at("corners");
        if (!corners.is_array() || corners.size() != 4) throw FormatError("scene json: corners must be 4 points");
        for (int k = 0; k < 4; ++k) {
            quad.corners[static_cast<std::size_t>(k)] = {corners[static_cast<std::size_t>(k)].at(0).get<double>(),
                                                         corners[static_cast<std::size_t>(k)].at(1).get<double>()};
        }
        quad.class_id = cls;
        out.scene.annotations.push_back({quad, a.value("difficult", false)});
    }
    return out;
}

// ---- detections JSONL ----

inline std::string detections_to_jsonl(const std::vector<Detection>& dets, const ClassTable& classes,
                                       const std::string& image_id) {
    std::ostringstream os;
    for (const auto& det : dets) {
        nlohmann::json j;
        j["image"] = image_id;
        j["class"] = det.class_id;
        j["class_name"] = classes.name_of(det.class_id);
        j["score"] = det.score;
        j["provenance"] = det.provenance == Provenance::MatchedVertex ? "matched_vertex" : "direction_fallback";
        nlohmann::json corners = nlohmann::json::array();
        for (const Point2& c : det.quad.corners) corners.push_back({c.x, c.y});
        j["corners"] = corners;
        os << j.dump() << "\n";
    }
    return os.str();
}

struct ImageDetections {
    std::string image_id;
    std::vector<Detection> detections;
};

inline std::vector<ImageDetections> detections_from_jsonl(std::string_view text) {
    std::vector<ImageDetections> out;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view line =
            text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("detections jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
        Detection det;
        const std::string image = j.at("image").get<std::string>();
        det.class_id = j.at("class").get<int>();
        det.score = j.at("score").get<double>();
        det.provenance = j.value("provenance", "direction_fallback") == "matched_vertex"
                             ? Provenance::MatchedVertex
                             : Provenance::DirectionFallback;
        const auto& corners = j.at("corners");
        if (!corners.is_array() || corners.size() != 4) {
            throw FormatError("detections jsonl line " + std::to_string(line_no) + ": corners must be 4 points");
        }
        for (int k = 0; k < 4; ++k) {
            det.quad.corners[static_cast<std::size_t>(k)] = {corners[static_cast<std::size_t>(k)].at(0).get<double>(),
                                                             corners[static_cast<std::size_t>(k)].at(1).get<double>()};
        }
        det.quad.class_id = det.class_id;
        ImageDetections* slot = nullptr;
        for (auto& img : out) {
            if (img.image_id == image) slot = &img;
        }
        if (!slot) {
            out.push_back({image, {}});
            slot = &out.back();
        }
        slot->detections.push_back(det);
    }
    return out;
}

// ---- tiling ----

struct TileGrid {
    int tile_size = 1024;
    int gap = 200;
    std::vector<std::pair<int, int>> origins;
};

namespace detail {
inline std::vector<int> axis_origins(int dim, int tile, int gap) {
    std::vector<int> out;
    if (dim <= tile) return {0};
    const int stride = tile - gap;
    int x = 0;
    while (true) {
        out.push_back(x);
        if (x + tile >= dim) break;
        x += stride;
        if (x + tile > dim) x = dim - tile;
    }
    return out;
}
}  // namespace detail

inline TileGrid tile_grid(int image_w, int image_h, int tile_size = 1024, int gap = 200) {
    if (tile_size <= gap || gap < 0) throw FormatError("tile_grid: need tile_size > gap >= 0");
    TileGrid grid;
    grid.tile_size = tile_size;
    grid.gap = gap;
    const auto xs = detail::axis_origins(image_w, tile_size, gap);
    const auto ys = detail::axis_origins(image_h, tile_size, gap);
    for (int y : ys) {
        for (int x : xs) grid.origins.emplace_back(x, y);
    }
    return grid;
}

struct TileScene {
    Point2 origin;
    Scene scene;
};

// Split a scene into per-tile scenes. An annotation joins a tile when at
// least half of its area lies inside; coordinates move to the tile frame.
inline std::vector<TileScene> split_scene(const Scene& scene, const TileGrid& grid,
                                          std::vector<Diagnostic>* diagnostics = nullptr) {
    std::vector<TileScene> out;
    std::vector<bool> used(scene.annotations.size(), false);
    for (const auto& [ox, oy] : grid.origins) {
        TileScene tile;
        tile.origin = {static_cast<double>(ox), static_cast<double>(oy)};
        tile.scene.image_width = grid.tile_size;
        tile.scene.image_height = grid.tile_size;
        RotatedQuad tile_rect;
        tile_rect.corners = {{{static_cast<double>(ox), static_cast<double>(oy)},
                              {static_cast<double>(ox + grid.tile_size), static_cast<double>(oy)},
                              {static_cast<double>(ox + grid.tile_size), static_cast<double>(oy + grid.tile_size)},
                              {static_cast<double>(ox), static_cast<double>(oy + grid.tile_size)}}};
        for (std::size_t i = 0; i < scene.annotations.size(); ++i) {
            const Annotation& ann = scene.annotations[i];
            const double inter = detail::intersection_area(ann.quad, tile_rect);
            if (inter < 0.5 * quad_area(ann.quad)) continue;
            Annotation moved = ann;
            for (Point2& c : moved.quad.corners) c = c - tile.origin;
            tile.scene.annotations.push_back(moved);
            used[i] = true;
        }
        out.push_back(std::move(tile));
    }
    if (diagnostics) {
        for (std::size_t i = 0; i < used.size(); ++i) {
            if (!used[i]) {
                diagnostics->push_back({static_cast<int>(i), "DroppedAnnotation",
                                        "annotation lies in no tile at the 50% area rule"});
            }
        }
    }
    return out;
}

// ---- synthetic scenes ----

struct SynthSpec {
    int image_w = 512;
    int image_h = 512;
    int count = 5;
    int num_classes = 3;
    double aspect_lo = 1.0;
    double aspect_hi = 12.0;
    double long_lo = 32.0;
    double long_hi = 160.0;
    double min_separation = 16.0;  // px between instance centers
    int max_retries = 200;
};

// Deterministic for a given seed (fixed mt19937_64 stream, manual uniform
// mapping), instances fully inside the image, pairwise center separation
// enforced.
inline Scene synth_scene(std::uint64_t seed, const SynthSpec& spec) {
    Rng rng(seed);
    Scene scene;
    scene.image_width = spec.image_w;
    scene.image_height = spec.image_h;
    std::vector<Point2> centers;
    for (int i = 0; i < spec.count; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < spec.max_retries && !placed; ++attempt) {
            const double h = rng.uniform(spec.long_lo, spec.long_hi);
            const double aspect = rng.uniform(spec.aspect_lo, spec.aspect_hi);
            const double w = std::max(2.0, h / aspect);
            const double margin = 0.5 * std::hypot(h, w) + 2.0;
            if (2.0 * margin >= spec.image_w || 2.0 * margin >= spec.image_h) continue;
            const Point2 c{rng.uniform(margin, spec.image_w - margin),
                           rng.uniform(margin, spec.image_h - margin)};
            bool separated = true;
            for (const Point2& other : centers) {
                if (norm(c - other) < spec.min_separation) separated = false;
            }
            if (!separated) continue;
            const double theta = rng.uniform(0.0, 360.0);
            ObbSpec o;
            o.center = c;
            const double rad = theta / kRadToDeg;
            o.vertex = {c.x + 0.5 * h * std::cos(rad), c.y + 0.5 * h * std::sin(rad)};
            o.h = h;
            o.w = w;
            o.theta = theta;
            scene.annotations.push_back(
                {obb_to_quad(o, static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(spec.num_classes)))),
                 false});
            centers.push_back(c);
            placed = true;
        }
        if (!placed) {
            throw PlacementError("synth_scene: could not place instance " + std::to_string(i));
        }
    }
    return scene;
}

// ---- file helpers ----

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path.string() + "'");
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// temp + rename so interrupted runs never leave half-written outputs
inline void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
    }
    std::filesystem::rename(tmp, path);
}

// ---- plane serialization ----

namespace detail {

inline void put_f32_le(std::string& out, float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    out.push_back(static_cast<char>(bits & 0xff));
    out.push_back(static_cast<char>((bits >> 8) & 0xff));
    out.push_back(static_cast<char>((bits >> 16) & 0xff));
    out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

inline float get_f32_le(const unsigned char* p) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                               (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

inline const char* heatmap_kind_name(HeatmapKind k) {
    return k == HeatmapKind::SolarCorona ? "solar_corona" : "gaussian";
}

inline HeatmapKind heatmap_kind_from(const std::string& s) {
    if (s == "solar_corona") return HeatmapKind::SolarCorona;
    if (s == "gaussian") return HeatmapKind::Gaussian;
    throw FormatError("unknown heatmap kind '" + s + "'");
}

struct PlaneRef {
    const char* name;
    const Plane* plane;
    Plane* mut = nullptr;
};

inline std::vector<PlaneRef> plane_list(const TargetMaps& m) {
    return {{"center_hm", &m.center_hm},   {"vertex_hm", &m.vertex_hm},
            {"size_map", &m.size_map},     {"offset_map", &m.offset_map},
            {"direction_map", &m.direction_map}, {"pos_mask", &m.pos_mask}};
}

inline std::vector<PlaneRef> plane_list(TargetMaps& m) {
    return {{"center_hm", &m.center_hm, &m.center_hm},
            {"vertex_hm", &m.vertex_hm, &m.vertex_hm},
            {"size_map", &m.size_map, &m.size_map},
            {"offset_map", &m.offset_map, &m.offset_map},
            {"direction_map", &m.direction_map, &m.direction_map},
            {"pos_mask", &m.pos_mask, &m.pos_mask}};
}

}  // namespace detail

inline nlohmann::json encoder_config_to_json(const EncoderConfig& cfg) {
    nlohmann::json j;
    j["down_ratio"] = cfg.down_ratio;
    j["mu"] = cfg.mu;
    j["num_classes"] = cfg.num_classes;
    j["heatmap_kind"] = detail::heatmap_kind_name(cfg.heatmap_kind);
    j["gaussian_min_overlap"] = cfg.gaussian_min_overlap;
    j["vertex_shrink"] = cfg.vertex_shrink;
    j["value_floor"] = cfg.value_floor;
    j["squared_denominator"] = cfg.squared_denominator;
    return j;
}

inline EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
    EncoderConfig cfg;
    cfg.down_ratio = j.at("down_ratio").get<int>();
    cfg.mu = j.at("mu").get<double>();
    cfg.num_classes = j.at("num_classes").get<int>();
    cfg.heatmap_kind = detail::heatmap_kind_from(j.at("heatmap_kind").get<std::string>());
    cfg.gaussian_min_overlap = j.at("gaussian_min_overlap").get<double>();
    cfg.vertex_shrink = j.at("vertex_shrink").get<double>();
    cfg.value_floor = j.at("value_floor").get<double>();
    cfg.squared_denominator = j.at("squared_denominator").get<bool>();
    return cfg;
}

inline void write_planes(const TargetMaps& maps, const std::filesystem::path& bin_path,
                         const std::filesystem::path& sidecar_path) {
    nlohmann::json side;
    side["schema_version"] = 1;
    side["dtype"] = "f32";
    side["byte_order"] = "little";
    side["width"] = maps.center_hm.width;
    side["height"] = maps.center_hm.height;
    side["config"] = encoder_config_to_json(maps.config);
    nlohmann::json planes = nlohmann::json::array();
    std::string blob;
    for (const auto& ref : detail::plane_list(maps)) {
        nlohmann::json p;
        p["name"] = ref.name;
        p["channels"] = ref.plane->channels;
        planes.push_back(p);
        blob.reserve(blob.size() + ref.plane->data.size() * 4);
        for (float v : ref.plane->data) detail::put_f32_le(blob, v);
    }
    side["planes"] = planes;

    write_text_file_atomic(bin_path, blob);
    write_text_file_atomic(sidecar_path, side.dump(2) + "\n");
}

inline TargetMaps read_planes(const std::filesystem::path& bin_path,
                              const std::filesystem::path& sidecar_path) {
    std::ifstream sc(sidecar_path);
    if (!sc) throw FormatError("cannot open '" + sidecar_path.string() + "'");
    nlohmann::json side;
    try {
        sc >> side;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("sidecar parse: ") + e.what());
    }
    if (side.value("schema_version", 0) != 1) throw FormatError("sidecar: unsupported schema_version");
    if (side.value("dtype", "") != "f32" || side.value("byte_order", "") != "little") {
        throw FormatError("sidecar: unsupported dtype/byte order");
    }

    TargetMaps maps;
    maps.config = encoder_config_from_json(side.at("config"));
    const int w = side.at("width").get<int>();
    const int h = side.at("height").get<int>();

    std::ifstream bin(bin_path, std::ios::binary);
    if (!bin) throw FormatError("cannot open '" + bin_path.string() + "'");
    std::string blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());

    auto refs = detail::plane_list(maps);
    const auto& planes = side.at("planes");
    if (planes.size() != refs.size()) throw FormatError("sidecar: unexpected plane list");
    std::size_t offset = 0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        if (planes[i].at("name").get<std::string>() != refs[i].name) {
            throw FormatError("sidecar: plane order mismatch at '" + planes[i].at("name").get<std::string>() + "'");
        }
        const int channels = planes[i].at("channels").get<int>();
        Plane plane = Plane::zeros(w, h, channels);
        const std::size_t bytes = plane.data.size() * 4;
        if (offset + bytes > blob.size()) throw FormatError("binary shorter than sidecar shape");
        for (std::size_t k = 0; k < plane.data.size(); ++k) {
            plane.data[k] = detail::get_f32_le(
                reinterpret_cast<const unsigned char*>(blob.data()) + offset + k * 4);
        }
        offset += bytes;
        *refs[i].mut = std::move(plane);
    }
    if (offset != blob.size()) throw FormatError("binary longer than sidecar shape");
    return maps;
}

}  // namespace rotp
