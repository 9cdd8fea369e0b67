#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace zocr {

using ClassId = int;

/// 8-bit grayscale raster, row-major, top row first. 0 is black ink, 255 white paper.
class GrayImage {
public:
    GrayImage(int width, int height, std::uint8_t fill = 255);
    GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return pixels_.size(); }

    std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
    std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
};

/// Foreground mask; a nonzero entry marks an ink pixel.
class BinaryImage {
public:
    BinaryImage(int width, int height, bool fill = false);
    BinaryImage(int width, int height, std::vector<std::uint8_t> mask);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return mask_.size(); }

    bool at(int x, int y) const { return mask_[index(x, y)] != 0; }
    void set(int x, int y, bool ink) { mask_[index(x, y)] = ink ? 1 : 0; }
    bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::size_t foreground_count() const noexcept;

    std::span<const std::uint8_t> mask() const noexcept { return mask_; }

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

private:
    std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<std::uint8_t> mask_;
};

enum class PgmErrorKind {
    UnknownMagic,
    MalformedHeader,
    MaxvalTooLarge,
    TruncatedPayload,
    BadPixel,
};

const char* to_string(PgmErrorKind kind) noexcept;

class PgmError : public std::runtime_error {
public:
    PgmError(PgmErrorKind kind, std::size_t offset, const std::string& detail);

    PgmErrorKind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    PgmErrorKind kind_;
    std::size_t offset_;
};

/// Parses a binary (P5) or ASCII (P2) PGM. maxval below 255 is rescaled
/// to the 0-255 range by round(p * 255 / maxval).
GrayImage read_pgm(std::span<const std::uint8_t> bytes);

/// Canonical P5 encoding: "P5\n<w> <h>\n255\n" then w*h payload bytes.
std::vector<std::uint8_t> write_pgm(const GrayImage& img);

GrayImage read_pgm_file(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, const GrayImage& img);

struct ClassInfo {
    ClassId id = 0;
    std::string name;

    friend bool operator==(const ClassInfo&, const ClassInfo&) = default;
};

struct RawSample {
    ClassId class_id = 0;
    std::string sample_id;
    GrayImage image;

    friend bool operator==(const RawSample&, const RawSample&) = default;
};

struct RawDataset {
    std::vector<ClassInfo> classes;
    std::vector<RawSample> samples;

    std::size_t count_for(ClassId id) const noexcept;

    friend bool operator==(const RawDataset&, const RawDataset&) = default;
};

class DatasetError : public std::runtime_error {
public:
    DatasetError(const std::filesystem::path& path, const std::string& what);

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

/// Reads `classes.tsv` plus one `class_<id>/` directory of `*.pgm` files per
/// listed class. Samples come back ordered by class id, then filename.
RawDataset load_dataset(const std::filesystem::path& root);

std::vector<ClassInfo> read_classes_tsv(const std::filesystem::path& path);
void write_classes_tsv(const std::filesystem::path& path, std::span<const ClassInfo> classes);

}  // namespace zocr
