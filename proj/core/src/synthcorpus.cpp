#include "zocr/synthcorpus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

#include "zocr/random.hpp"

namespace zocr {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr std::uint8_t kInk = 30;
constexpr std::uint8_t kPaper = 235;
// Fraction of the canvas covered by the glyph box.
constexpr double kBoxScale = 0.76;

enum SeedStream : std::uint64_t { kPrototypeStream = 1, kSampleStream = 2 };

double segment_distance(double px, double py, double x0, double y0, double x1, double y1) {
    const double dx = x1 - x0;
    const double dy = y1 - y0;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((px - x0) * dx + (py - y0) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (x0 + t * dx), py - (y0 + t * dy));
}

double arc_distance(double px, double py, const Stroke& s) {
    const double vx = px - s.cx;
    const double vy = py - s.cy;
    // Angle of the point measured from the arc start, in the sweep direction.
    double rel = std::atan2(vy, vx) - s.start;
    if (s.sweep < 0) rel = -rel;
    rel = std::fmod(rel, 2 * std::numbers::pi);
    if (rel < 0) rel += 2 * std::numbers::pi;
    if (rel <= std::abs(s.sweep)) return std::abs(std::hypot(vx, vy) - s.radius);
    const double ex = s.cx + s.radius * std::cos(s.start + s.sweep);
    const double ey = s.cy + s.radius * std::sin(s.start + s.sweep);
    const double sx = s.cx + s.radius * std::cos(s.start);
    const double sy = s.cy + s.radius * std::sin(s.start);
    return std::min(std::hypot(px - sx, py - sy), std::hypot(px - ex, py - ey));
}

Stroke random_line(Rng& rng) {
    Stroke s;
    s.kind = StrokeKind::Line;
    do {
        s.x0 = uniform(rng, 0.1, 0.9);
        s.y0 = uniform(rng, 0.1, 0.9);
        s.x1 = uniform(rng, 0.1, 0.9);
        s.y1 = uniform(rng, 0.1, 0.9);
    } while (std::hypot(s.x1 - s.x0, s.y1 - s.y0) < 0.3);
    return s;
}

Stroke random_arc(Rng& rng) {
    Stroke s;
    s.kind = StrokeKind::Arc;
    s.radius = uniform(rng, 0.12, 0.32);
    s.cx = uniform(rng, 0.1 + s.radius, 0.9 - s.radius);
    s.cy = uniform(rng, 0.1 + s.radius, 0.9 - s.radius);
    s.start = uniform(rng, 0.0, 2 * std::numbers::pi);
    s.sweep = uniform(rng, 0.5 * std::numbers::pi, 1.5 * std::numbers::pi);
    if (uniform01(rng) < 0.5) s.sweep = -s.sweep;
    return s;
}

}  // namespace

void SynthConfig::validate() const {
    if (n_classes < 2) throw std::invalid_argument("synth: n_classes must be >= 2");
    if (samples_per_class < 2) throw std::invalid_argument("synth: samples_per_class must be >= 2");
    if (canvas < 8) throw std::invalid_argument("synth: canvas must be >= 8 pixels");
    if (max_shift < 0 || max_rotation_deg < 0 || speck_rate < 0 || pixel_noise < 0)
        throw std::invalid_argument("synth: jitter and noise settings must be non-negative");
    if (thickness_min <= 0 || thickness_max < thickness_min)
        throw std::invalid_argument("synth: need 0 < thickness_min <= thickness_max");
}

std::string synth_config_to_json(const SynthConfig& cfg) {
    json j{
        {"n_classes", cfg.n_classes},
        {"samples_per_class", cfg.samples_per_class},
        {"canvas", cfg.canvas},
        {"max_shift", cfg.max_shift},
        {"max_rotation_deg", cfg.max_rotation_deg},
        {"thickness_min", cfg.thickness_min},
        {"thickness_max", cfg.thickness_max},
        {"speck_rate", cfg.speck_rate},
        {"pixel_noise", cfg.pixel_noise},
        {"master_seed", cfg.master_seed},
    };
    return j.dump(1);
}

SynthConfig synth_config_from_json(const std::string& text) {
    SynthConfig cfg;
    try {
        const auto j = json::parse(text);
        cfg.n_classes = j.value("n_classes", cfg.n_classes);
        cfg.samples_per_class = j.value("samples_per_class", cfg.samples_per_class);
        cfg.canvas = j.value("canvas", cfg.canvas);
        cfg.max_shift = j.value("max_shift", cfg.max_shift);
        cfg.max_rotation_deg = j.value("max_rotation_deg", cfg.max_rotation_deg);
        cfg.thickness_min = j.value("thickness_min", cfg.thickness_min);
        cfg.thickness_max = j.value("thickness_max", cfg.thickness_max);
        cfg.speck_rate = j.value("speck_rate", cfg.speck_rate);
        cfg.pixel_noise = j.value("pixel_noise", cfg.pixel_noise);
        cfg.master_seed = j.value("master_seed", cfg.master_seed);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("synth config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

GlyphPrototype make_prototype(int class_id, const SynthConfig& cfg) {
    if (class_id < 0 || class_id >= cfg.n_classes)
        throw std::invalid_argument("synth: class " + std::to_string(class_id) + " out of range");
    Rng rng(derive_seed(cfg.master_seed, {kPrototypeStream, static_cast<std::uint64_t>(class_id)}));
    GlyphPrototype p;
    const auto n_strokes = uniform_int(rng, 2, 5);
    for (std::int64_t i = 0; i < n_strokes; ++i)
        p.strokes.push_back(uniform01(rng) < 0.5 ? random_line(rng) : random_arc(rng));
    const auto n_dots = uniform_int(rng, 0, 2);
    for (std::int64_t i = 0; i < n_dots; ++i)
        p.dots.push_back({uniform(rng, 0.15, 0.85), uniform(rng, 0.15, 0.85), uniform(rng, 0.045, 0.065)});
    return p;
}

GrayImage gen_glyph(int class_id, int sample_index, const SynthConfig& cfg) {
    cfg.validate();
    const auto proto = make_prototype(class_id, cfg);
    Rng rng(derive_seed(cfg.master_seed,
                        {kSampleStream, static_cast<std::uint64_t>(class_id), static_cast<std::uint64_t>(sample_index)}));

    const double shift_x = static_cast<double>(uniform_int(rng, -cfg.max_shift, cfg.max_shift));
    const double shift_y = static_cast<double>(uniform_int(rng, -cfg.max_shift, cfg.max_shift));
    const double angle = uniform(rng, -cfg.max_rotation_deg, cfg.max_rotation_deg) * std::numbers::pi / 180.0;
    const double thickness =
        cfg.thickness_max > cfg.thickness_min ? uniform(rng, cfg.thickness_min, cfg.thickness_max) : cfg.thickness_min;

    const int n = cfg.canvas;
    const double centre = n / 2.0;
    const double box = kBoxScale * n;
    const double cos_a = std::cos(angle);
    const double sin_a = std::sin(angle);
    const double half_width = thickness / 2.0 / box;  // in glyph-box units

    GrayImage img(n, n, kPaper);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            // Undo translation and rotation about the canvas centre, then map
            // into glyph-box coordinates.
            const double px = x + 0.5 - centre - shift_x;
            const double py = y + 0.5 - centre - shift_y;
            const double u = (cos_a * px + sin_a * py) / box + 0.5;
            const double v = (-sin_a * px + cos_a * py) / box + 0.5;
            bool ink = false;
            for (const auto& s : proto.strokes) {
                const double d = s.kind == StrokeKind::Line ? segment_distance(u, v, s.x0, s.y0, s.x1, s.y1)
                                                            : arc_distance(u, v, s);
                if (d <= half_width) {
                    ink = true;
                    break;
                }
            }
            if (!ink) {
                for (const auto& d : proto.dots) {
                    if (std::hypot(u - d.x, v - d.y) <= d.radius) {
                        ink = true;
                        break;
                    }
                }
            }
            if (ink) img.at(x, y) = kInk;
        }
    }

    // Specks: isolated 1-2 pixel dark spots.
    const int specks = poisson(rng, cfg.speck_rate);
    for (int i = 0; i < specks; ++i) {
        const auto sx = static_cast<int>(uniform_int(rng, 0, n - 2));
        const auto sy = static_cast<int>(uniform_int(rng, 0, n - 1));
        img.at(sx, sy) = kInk;
        if (uniform01(rng) < 0.5) img.at(sx + 1, sy) = kInk;
    }

    if (cfg.pixel_noise > 0) {
        for (auto& p : img.pixels()) {
            const auto noisy = static_cast<int>(p) + static_cast<int>(uniform_int(rng, -cfg.pixel_noise, cfg.pixel_noise));
            p = static_cast<std::uint8_t>(std::clamp(noisy, 0, 255));
        }
    }
    return img;
}

RawDataset gen_corpus(const SynthConfig& cfg, const fs::path& out) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw DatasetError(out, "cannot create directory: " + ec.message());

    std::vector<ClassInfo> classes;
    for (int c = 0; c < cfg.n_classes; ++c) classes.push_back({c, "synth_" + std::to_string(c)});
    write_classes_tsv(out / "classes.tsv", classes);

    const int width = std::max<int>(4, static_cast<int>(std::to_string(cfg.samples_per_class - 1).size()));
    for (int c = 0; c < cfg.n_classes; ++c) {
        const auto dir = out / ("class_" + std::to_string(c));
        fs::create_directories(dir, ec);
        if (ec) throw DatasetError(dir, "cannot create directory: " + ec.message());
        for (int s = 0; s < cfg.samples_per_class; ++s) {
            auto name = std::to_string(s);
            name.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(name.size()))), '0');
            write_pgm_file(dir / (name + ".pgm"), gen_glyph(c, s, cfg));
        }
    }
    return load_dataset(out);
}

}  // namespace zocr
