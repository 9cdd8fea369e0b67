#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "zocr/raster.hpp"

namespace zocr {

/// Knobs for the synthetic glyph corpus. Zeroing max_shift, max_rotation_deg,
/// pixel_noise and speck_rate, with thickness_min == thickness_max, makes
/// every sample of a class render identically.
struct SynthConfig {
    int n_classes = 44;
    int samples_per_class = 102;
    int canvas = 64;
    int max_shift = 6;               // pixels, each axis
    double max_rotation_deg = 10.0;
    double thickness_min = 2.0;      // stroke width in pixels
    double thickness_max = 4.0;
    double speck_rate = 2.0;         // expected specks per image
    int pixel_noise = 15;            // per-pixel uniform noise amplitude
    std::uint64_t master_seed = 42;

    void validate() const;
};

std::string synth_config_to_json(const SynthConfig& cfg);
/// Missing keys keep their defaults.
SynthConfig synth_config_from_json(const std::string& text);

enum class StrokeKind { Line, Arc };

/// Geometry in glyph-box coordinates, [0, 1] on both axes.
struct Stroke {
    StrokeKind kind = StrokeKind::Line;
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;                      // line
    double cx = 0, cy = 0, radius = 0, start = 0, sweep = 0;    // arc, radians

    friend bool operator==(const Stroke&, const Stroke&) = default;
};

struct Dot {
    double x = 0, y = 0, radius = 0;

    friend bool operator==(const Dot&, const Dot&) = default;
};

struct GlyphPrototype {
    std::vector<Stroke> strokes;  // 2-5
    std::vector<Dot> dots;        // 0-2

    friend bool operator==(const GlyphPrototype&, const GlyphPrototype&) = default;
};

/// Class shape, a pure function of (master_seed, class_id).
GlyphPrototype make_prototype(int class_id, const SynthConfig& cfg);

/// One jittered, noisy rendering of a class prototype; ink ~30 on paper ~235.
GrayImage gen_glyph(int class_id, int sample_index, const SynthConfig& cfg);

/// Writes classes.tsv (`synth_<id>`) and class_<id>/<index>.pgm, then loads
/// the tree back with load_dataset.
RawDataset gen_corpus(const SynthConfig& cfg, const std::filesystem::path& out);

}  // namespace zocr
