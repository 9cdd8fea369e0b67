#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zocr/preprocess.hpp"
#include "zocr/raster.hpp"

namespace zocr {

struct GridSpec {
    int rows = 4;
    int cols = 4;

    int zones() const noexcept { return rows * cols; }
    void validate() const;

    /// Parses "RxC", e.g. "4x4".
    static GridSpec parse(std::string_view text);
    std::string to_string() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Zone densities in row-major zone order, each in [0, 1].
using FeatureVector = std::vector<double>;

/// Half-open pixel span [begin, end) of zone `index` out of `count` along an
/// axis of `extent` pixels: [floor(index*extent/count), floor((index+1)*extent/count)).
struct ZoneSpan {
    int begin = 0;
    int end = 0;
};
ZoneSpan zone_span(int index, int count, int extent) noexcept;

/// Foreground pixel count of each zone, row-major.
std::vector<std::size_t> zone_counts(const BinaryImage& img, const GridSpec& grid);

/// Foreground fraction of each zone. Throws std::invalid_argument when the
/// image is smaller than the grid.
FeatureVector zone_densities(const BinaryImage& img, const GridSpec& grid);

/// Shannon entropy (bits) of the zone-density vector after normalizing it to
/// sum 1. Returns 0 for an all-zero vector; throws std::domain_error on a
/// negative entry.
double grid_entropy(std::span<const double> values);

struct FeatureRow {
    ClassId class_id = 0;
    std::string sample_id;
    FeatureVector features;

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct FeatureTable {
    GridSpec grid;
    std::vector<ClassInfo> classes;
    std::vector<FeatureRow> rows;

    std::size_t dims() const noexcept { return static_cast<std::size_t>(grid.zones()); }
    std::size_t class_count() const noexcept { return classes.size(); }
    void validate() const;

    friend bool operator==(const FeatureTable&, const FeatureTable&) = default;
};

/// Runs preprocess_pipeline and zone_densities over every sample, in dataset
/// order. Per-sample diagnostics are appended to `diagnostics` when given.
FeatureTable extract_all(const RawDataset& ds, const PreprocessConfig& pcfg, const GridSpec& grid,
                         std::vector<PreprocessDiagnostics>* diagnostics = nullptr);

/// CSV with header `class_id,sample_id,f0,...,f{n-1}`; features use 9
/// significant digits.
void write_feature_csv(std::ostream& out, const FeatureTable& table);
void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table);

/// Reads the CSV above. The grid is taken as `grid` when it matches the
/// column count, otherwise inferred (square when possible, else 1xN).
/// Classes are 0..max_id named class_<id> unless `classes` is supplied.
FeatureTable read_feature_csv(std::istream& in, std::span<const ClassInfo> classes = {},
                              const GridSpec* grid = nullptr);
FeatureTable read_feature_csv(const std::filesystem::path& path, std::span<const ClassInfo> classes = {},
                              const GridSpec* grid = nullptr);

class CsvError : public std::runtime_error {
public:
    CsvError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Formats a feature value the way the CSV writer does.
std::string format_feature(double v);

}  // namespace zocr
