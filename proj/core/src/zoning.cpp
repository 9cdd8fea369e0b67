#include "zocr/zoning.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace zocr {

void GridSpec::validate() const {
    if (rows < 1 || cols < 1) throw std::invalid_argument("grid rows and cols must be >= 1");
}

GridSpec GridSpec::parse(std::string_view text) {
    const auto x = text.find_first_of("xX");
    if (x == std::string_view::npos) throw std::invalid_argument("grid must look like RxC, got '" + std::string(text) + "'");
    GridSpec g;
    auto parse_int = [&](std::string_view part, int& out) {
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        if (ec != std::errc{} || ptr != part.data() + part.size() || part.empty())
            throw std::invalid_argument("grid must look like RxC, got '" + std::string(text) + "'");
    };
    parse_int(text.substr(0, x), g.rows);
    parse_int(text.substr(x + 1), g.cols);
    g.validate();
    return g;
}

std::string GridSpec::to_string() const {
    return std::to_string(rows) + "x" + std::to_string(cols);
}

ZoneSpan zone_span(int index, int count, int extent) noexcept {
    const auto e = static_cast<long long>(extent);
    return {static_cast<int>(index * e / count), static_cast<int>((index + 1) * e / count)};
}

std::vector<std::size_t> zone_counts(const BinaryImage& img, const GridSpec& grid) {
    grid.validate();
    if (img.width() < grid.cols || img.height() < grid.rows)
        throw std::invalid_argument("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                                    " is smaller than grid " + grid.to_string());
    std::vector<std::size_t> counts(static_cast<std::size_t>(grid.zones()), 0);
    for (int r = 0; r < grid.rows; ++r) {
        const auto ys = zone_span(r, grid.rows, img.height());
        for (int c = 0; c < grid.cols; ++c) {
            const auto xs = zone_span(c, grid.cols, img.width());
            std::size_t n = 0;
            for (int y = ys.begin; y < ys.end; ++y)
                for (int x = xs.begin; x < xs.end; ++x) n += img.at(x, y) ? 1 : 0;
            counts[static_cast<std::size_t>(r * grid.cols + c)] = n;
        }
    }
    return counts;
}

FeatureVector zone_densities(const BinaryImage& img, const GridSpec& grid) {
    const auto counts = zone_counts(img, grid);
    FeatureVector out(counts.size());
    for (int r = 0; r < grid.rows; ++r) {
        const auto ys = zone_span(r, grid.rows, img.height());
        for (int c = 0; c < grid.cols; ++c) {
            const auto xs = zone_span(c, grid.cols, img.width());
            const auto i = static_cast<std::size_t>(r * grid.cols + c);
            const auto zone_area = static_cast<double>((ys.end - ys.begin) * (xs.end - xs.begin));
            out[i] = static_cast<double>(counts[i]) / zone_area;
        }
    }
    return out;
}

double grid_entropy(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) {
        if (v < 0.0 || std::isnan(v)) throw std::domain_error("grid_entropy: negative or NaN zone value");
        sum += v;
    }
    if (sum == 0.0) return 0.0;
    double h = 0.0;
    for (double v : values) {
        if (v == 0.0) continue;
        const double p = v / sum;
        h += p * std::log2(1.0 / p);
    }
    return h;
}

void FeatureTable::validate() const {
    grid.validate();
    for (const auto& row : rows) {
        if (row.features.size() != dims())
            throw std::invalid_argument("feature row '" + row.sample_id + "' has " +
                                        std::to_string(row.features.size()) + " values, grid needs " +
                                        std::to_string(dims()));
    }
}

FeatureTable extract_all(const RawDataset& ds, const PreprocessConfig& pcfg, const GridSpec& grid,
                         std::vector<PreprocessDiagnostics>* diagnostics) {
    if (ds.samples.empty()) throw std::invalid_argument("extract_all: dataset has no samples");
    pcfg.validate();
    grid.validate();
    FeatureTable table{grid, ds.classes, {}};
    table.rows.reserve(ds.samples.size());
    for (const auto& sample : ds.samples) {
        auto pre = preprocess_pipeline(sample.image, pcfg);
        table.rows.push_back({sample.class_id, sample.sample_id, zone_densities(pre.image, grid)});
        if (diagnostics) diagnostics->push_back(pre.diagnostics);
    }
    return table;
}

std::string format_feature(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_feature_csv(std::ostream& out, const FeatureTable& table) {
    out << "class_id,sample_id";
    for (std::size_t i = 0; i < table.dims(); ++i) out << ",f" << i;
    out << '\n';
    for (const auto& row : table.rows) {
        out << row.class_id << ',' << row.sample_id;
        for (double v : row.features) out << ',' << format_feature(v);
        out << '\n';
    }
}

void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    write_feature_csv(out, table);
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

CsvError::CsvError(std::size_t line, const std::string& what)
    : std::runtime_error("features csv line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

GridSpec infer_grid(std::size_t dims) {
    const auto side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(dims))));
    if (static_cast<std::size_t>(side * side) == dims) return {side, side};
    return {1, static_cast<int>(dims)};
}

}  // namespace

FeatureTable read_feature_csv(std::istream& in, std::span<const ClassInfo> classes, const GridSpec* grid) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw CsvError(lineno, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_commas(line);
    if (header.size() < 3 || header[0] != "class_id" || header[1] != "sample_id")
        throw CsvError(lineno, "header must start with class_id,sample_id,f0");
    const std::size_t dims = header.size() - 2;
    for (std::size_t i = 0; i < dims; ++i) {
        if (header[i + 2] != "f" + std::to_string(i)) throw CsvError(lineno, "unexpected column '" + std::string(header[i + 2]) + "'");
    }

    FeatureTable table;
    table.grid = (grid && static_cast<std::size_t>(grid->zones()) == dims) ? *grid : infer_grid(dims);

    ClassId max_id = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != dims + 2)
            throw CsvError(lineno, "expected " + std::to_string(dims + 2) + " cells, got " + std::to_string(cells.size()));
        FeatureRow row;
        auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), row.class_id);
        if (ec != std::errc{} || ptr != cells[0].data() + cells[0].size() || row.class_id < 0)
            throw CsvError(lineno, "bad class_id '" + std::string(cells[0]) + "'");
        row.sample_id = std::string(cells[1]);
        row.features.reserve(dims);
        for (std::size_t i = 0; i < dims; ++i) {
            const std::string cell(cells[i + 2]);
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
                throw CsvError(lineno, "bad feature value '" + cell + "'");
            row.features.push_back(v);
        }
        max_id = std::max(max_id, row.class_id);
        table.rows.push_back(std::move(row));
    }

    if (!classes.empty()) {
        table.classes.assign(classes.begin(), classes.end());
        if (max_id >= static_cast<ClassId>(table.classes.size()))
            throw CsvError(lineno, "class id " + std::to_string(max_id) + " not in supplied class list");
    } else {
        for (ClassId id = 0; id <= max_id; ++id) table.classes.push_back({id, "class_" + std::to_string(id)});
    }
    return table;
}

FeatureTable read_feature_csv(const std::filesystem::path& path, std::span<const ClassInfo> classes,
                              const GridSpec* grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open features csv");
    return read_feature_csv(in, classes, grid);
}

}  // namespace zocr
