#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "zocr/raster.hpp"

namespace zocr {

struct PreprocessConfig {
    int canvas_w = 44;
    int canvas_h = 44;
    std::size_t speck_max_area = 4;
    std::optional<std::uint8_t> threshold_override;

    void validate() const;
};

/// Otsu's threshold over the 256-bin histogram. Class 0 is {p <= t}, matching
/// binarize(). Ties go to the smallest t; a single-level image returns its level.
std::uint8_t otsu_threshold(const GrayImage& img);

/// mask[i] = pixels[i] <= t, so dark pixels become ink.
BinaryImage binarize(const GrayImage& img, std::uint8_t t);

struct SpeckRemoval {
    BinaryImage image;
    std::size_t components_removed = 0;
};

/// Erases every 8-connected foreground component whose area is <= max_area.
SpeckRemoval remove_specks(const BinaryImage& img, std::size_t max_area);

struct Centering {
    BinaryImage image;
    int dx = 0;
    int dy = 0;
    std::size_t clipped = 0;  // foreground pixels shifted off the canvas
};

/// Translates the ink centroid (rounded half-up) to (w/2, h/2).
Centering centralize(const BinaryImage& img);

/// Output (x, y) copies input (x*in_w/w, y*in_h/h), integer floor.
BinaryImage resize_nearest(const BinaryImage& img, int w, int h);

struct PreprocessDiagnostics {
    std::uint8_t threshold = 0;
    std::size_t specks_removed = 0;
    std::size_t clipped = 0;
};

struct Preprocessed {
    BinaryImage image;
    PreprocessDiagnostics diagnostics;
};

/// binarize (Otsu or override) -> remove_specks -> resize_nearest -> centralize.
Preprocessed preprocess_pipeline(const GrayImage& img, const PreprocessConfig& cfg = {});

}  // namespace zocr
