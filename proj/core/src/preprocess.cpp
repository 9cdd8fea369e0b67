#include "zocr/preprocess.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

namespace zocr {

void PreprocessConfig::validate() const {
    if (canvas_w < 1 || canvas_h < 1) throw std::invalid_argument("canvas dimensions must be >= 1");
}

std::uint8_t otsu_threshold(const GrayImage& img) {
    std::array<std::uint64_t, 256> hist{};
    for (auto p : img.pixels()) ++hist[p];

    const double total = static_cast<double>(img.size());
    double total_sum = 0.0;
    for (int i = 0; i < 256; ++i) total_sum += static_cast<double>(i) * static_cast<double>(hist[i]);

    double n0 = 0.0;
    double s0 = 0.0;
    double best = -1.0;
    int best_t = -1;
    for (int t = 0; t < 256; ++t) {
        n0 += static_cast<double>(hist[t]);
        s0 += static_cast<double>(t) * static_cast<double>(hist[t]);
        const double n1 = total - n0;
        if (n0 == 0.0 || n1 == 0.0) continue;
        const double diff = s0 / n0 - (total_sum - s0) / n1;
        const double between = n0 * n1 * diff * diff;
        if (between > best) {
            best = between;
            best_t = t;
        }
    }
    if (best_t < 0) return img.pixels().front();  // single intensity level
    return static_cast<std::uint8_t>(best_t);
}

BinaryImage binarize(const GrayImage& img, std::uint8_t t) {
    std::vector<std::uint8_t> mask(img.size());
    auto px = img.pixels();
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = px[i] <= t ? 1 : 0;
    return BinaryImage(img.width(), img.height(), std::move(mask));
}

SpeckRemoval remove_specks(const BinaryImage& img, std::size_t max_area) {
    const int w = img.width();
    const int h = img.height();
    std::vector<std::uint8_t> mask(img.mask().begin(), img.mask().end());
    std::vector<std::uint8_t> seen(mask.size(), 0);
    std::vector<std::size_t> component;
    std::vector<std::size_t> stack;
    std::size_t removed = 0;

    for (std::size_t start = 0; start < mask.size(); ++start) {
        if (!mask[start] || seen[start]) continue;
        component.clear();
        stack.assign(1, start);
        seen[start] = 1;
        while (!stack.empty()) {
            const std::size_t i = stack.back();
            stack.pop_back();
            component.push_back(i);
            const int x = static_cast<int>(i % static_cast<std::size_t>(w));
            const int y = static_cast<int>(i / static_cast<std::size_t>(w));
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    const auto j = static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) +
                                   static_cast<std::size_t>(nx);
                    if (mask[j] && !seen[j]) {
                        seen[j] = 1;
                        stack.push_back(j);
                    }
                }
            }
        }
        if (component.size() <= max_area) {
            for (auto i : component) mask[i] = 0;
            ++removed;
        }
    }
    return {BinaryImage(w, h, std::move(mask)), removed};
}

Centering centralize(const BinaryImage& img) {
    const int w = img.width();
    const int h = img.height();
    long long n = 0;
    long long sx = 0;
    long long sy = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (img.at(x, y)) {
                ++n;
                sx += x;
                sy += y;
            }
        }
    }
    if (n == 0) return {img, 0, 0, 0};

    // floor(s/n + 1/2) without leaving integer arithmetic
    const auto cx = static_cast<int>((2 * sx + n) / (2 * n));
    const auto cy = static_cast<int>((2 * sy + n) / (2 * n));
    const int dx = w / 2 - cx;
    const int dy = h / 2 - cy;

    BinaryImage out(w, h);
    std::size_t clipped = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!img.at(x, y)) continue;
            if (out.contains(x + dx, y + dy))
                out.set(x + dx, y + dy, true);
            else
                ++clipped;
        }
    }
    return {std::move(out), dx, dy, clipped};
}

BinaryImage resize_nearest(const BinaryImage& img, int w, int h) {
    if (w < 1 || h < 1) throw std::invalid_argument("resize target must be >= 1x1");
    const auto in_w = static_cast<long long>(img.width());
    const auto in_h = static_cast<long long>(img.height());
    BinaryImage out(w, h);
    for (int y = 0; y < h; ++y) {
        const auto sy = static_cast<int>(y * in_h / h);
        for (int x = 0; x < w; ++x) {
            const auto sx = static_cast<int>(x * in_w / w);
            out.set(x, y, img.at(sx, sy));
        }
    }
    return out;
}

Preprocessed preprocess_pipeline(const GrayImage& img, const PreprocessConfig& cfg) {
    cfg.validate();
    PreprocessDiagnostics diag;
    diag.threshold = cfg.threshold_override ? *cfg.threshold_override : otsu_threshold(img);
    // A uniform image has no ink/paper contrast; Otsu returns its level, which
    // would turn the whole page into ink. Treat it as blank instead.
    const auto px = img.pixels();
    const bool uniform = std::all_of(px.begin(), px.end(), [&](auto p) { return p == px.front(); });
    auto binary = (uniform && !cfg.threshold_override) ? BinaryImage(img.width(), img.height())
                                                       : binarize(img, diag.threshold);
    auto cleaned = remove_specks(binary, cfg.speck_max_area);
    diag.specks_removed = cleaned.components_removed;
    auto centered = centralize(resize_nearest(cleaned.image, cfg.canvas_w, cfg.canvas_h));
    diag.clipped = centered.clipped;
    return {std::move(centered.image), diag};
}

}  // namespace zocr
