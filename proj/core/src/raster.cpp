#include "zocr/raster.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

namespace zocr {

namespace fs = std::filesystem;

namespace {

void check_dims(int width, int height) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("image dimensions must be >= 1, got " + std::to_string(width) + "x" +
                                    std::to_string(height));
}

std::size_t area(int width, int height) {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
}

bool is_space(std::uint8_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Cursor over a PGM byte stream. Header tokens may be separated by any mix
// of whitespace and '#' comments running to end of line.
class PgmCursor {
public:
    explicit PgmCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::size_t offset() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    bool at_end() const noexcept { return pos_ >= bytes_.size(); }
    std::uint8_t peek() const noexcept { return bytes_[pos_]; }
    void advance(std::size_t n = 1) noexcept { pos_ += n; }
    std::span<const std::uint8_t> rest() const noexcept { return bytes_.subspan(pos_); }

    void skip_separators() {
        while (!at_end()) {
            if (is_space(peek())) {
                advance();
            } else if (peek() == '#') {
                while (!at_end() && peek() != '\n' && peek() != '\r') advance();
            } else {
                break;
            }
        }
    }

    // Returns false if no digits are present at the cursor.
    bool read_uint(long long& value) {
        std::size_t digits = 0;
        value = 0;
        while (!at_end() && peek() >= '0' && peek() <= '9') {
            if (value > (1LL << 40)) return false;
            value = value * 10 + (peek() - '0');
            advance();
            ++digits;
        }
        return digits > 0;
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

long long header_field(PgmCursor& cur, const char* name) {
    cur.skip_separators();
    const std::size_t at = cur.offset();
    long long v = 0;
    if (cur.at_end())
        throw PgmError(PgmErrorKind::MalformedHeader, at, std::string("missing ") + name);
    if (!cur.read_uint(v))
        throw PgmError(PgmErrorKind::MalformedHeader, at, std::string("expected decimal ") + name);
    if (!cur.at_end() && !is_space(cur.peek()) && cur.peek() != '#')
        throw PgmError(PgmErrorKind::MalformedHeader, cur.offset(), std::string("junk after ") + name);
    return v;
}

std::uint8_t rescale(long long p, long long maxval) {
    if (maxval == 255) return static_cast<std::uint8_t>(p);
    // round(p * 255 / maxval), half away from zero
    return static_cast<std::uint8_t>((2 * p * 255 + maxval) / (2 * maxval));
}

std::vector<std::uint8_t> slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DatasetError(path, "cannot open file");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

GrayImage::GrayImage(int width, int height, std::uint8_t fill) : width_(width), height_(height) {
    check_dims(width, height);
    pixels_.assign(area(width, height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    check_dims(width, height);
    if (pixels_.size() != area(width, height))
        throw std::invalid_argument("pixel buffer length does not match width*height");
}

BinaryImage::BinaryImage(int width, int height, bool fill) : width_(width), height_(height) {
    check_dims(width, height);
    mask_.assign(area(width, height), fill ? 1 : 0);
}

BinaryImage::BinaryImage(int width, int height, std::vector<std::uint8_t> mask)
    : width_(width), height_(height), mask_(std::move(mask)) {
    check_dims(width, height);
    if (mask_.size() != area(width, height))
        throw std::invalid_argument("mask length does not match width*height");
    for (auto& m : mask_) m = m ? 1 : 0;
}

std::size_t BinaryImage::foreground_count() const noexcept {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

const char* to_string(PgmErrorKind kind) noexcept {
    switch (kind) {
        case PgmErrorKind::UnknownMagic: return "unknown magic";
        case PgmErrorKind::MalformedHeader: return "malformed header";
        case PgmErrorKind::MaxvalTooLarge: return "maxval too large";
        case PgmErrorKind::TruncatedPayload: return "truncated payload";
        case PgmErrorKind::BadPixel: return "bad pixel";
    }
    return "unknown";
}

PgmError::PgmError(PgmErrorKind kind, std::size_t offset, const std::string& detail)
    : std::runtime_error(std::string("pgm: ") + to_string(kind) + " at byte " + std::to_string(offset) + ": " +
                         detail),
      kind_(kind),
      offset_(offset) {}

GrayImage read_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '2'))
        throw PgmError(PgmErrorKind::UnknownMagic, 0, "expected P5 or P2");
    const bool binary = bytes[1] == '5';

    PgmCursor cur(bytes);
    cur.advance(2);
    if (cur.at_end() || (!is_space(cur.peek()) && cur.peek() != '#'))
        throw PgmError(PgmErrorKind::UnknownMagic, cur.offset(), "magic not followed by whitespace");

    const long long width = header_field(cur, "width");
    const long long height = header_field(cur, "height");
    if (width < 1 || height < 1)
        throw PgmError(PgmErrorKind::MalformedHeader, cur.offset(), "zero image dimension");
    const std::size_t maxval_at = (cur.skip_separators(), cur.offset());
    const long long maxval = header_field(cur, "maxval");
    if (maxval > 255)
        throw PgmError(PgmErrorKind::MaxvalTooLarge, maxval_at, "maxval " + std::to_string(maxval) + " > 255");
    if (maxval < 1) throw PgmError(PgmErrorKind::MalformedHeader, maxval_at, "maxval must be >= 1");

    const auto w = static_cast<int>(width);
    const auto h = static_cast<int>(height);
    const std::size_t n = area(w, h);
    std::vector<std::uint8_t> pixels;

    if (binary) {
        if (cur.at_end() || !is_space(cur.peek()))
            throw PgmError(PgmErrorKind::MalformedHeader, cur.offset(), "missing whitespace after maxval");
        cur.advance();
        if (cur.remaining() < n)
            throw PgmError(PgmErrorKind::TruncatedPayload, bytes.size(),
                           "need " + std::to_string(n) + " payload bytes, have " + std::to_string(cur.remaining()));
        auto payload = cur.rest().first(n);
        pixels.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (payload[i] > maxval)
                throw PgmError(PgmErrorKind::BadPixel, cur.offset() + i, "sample exceeds maxval");
            pixels.push_back(rescale(payload[i], maxval));
        }
    } else {
        if (cur.remaining() < n)
            throw PgmError(PgmErrorKind::TruncatedPayload, bytes.size(), "payload shorter than pixel count");
        pixels.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            cur.skip_separators();
            if (cur.at_end())
                throw PgmError(PgmErrorKind::TruncatedPayload, cur.offset(),
                               "expected " + std::to_string(n) + " samples, got " + std::to_string(i));
            const std::size_t at = cur.offset();
            long long v = 0;
            if (!cur.read_uint(v)) throw PgmError(PgmErrorKind::BadPixel, at, "expected decimal sample");
            if (v > maxval) throw PgmError(PgmErrorKind::BadPixel, at, "sample exceeds maxval");
            pixels.push_back(rescale(v, maxval));
        }
    }
    return GrayImage(w, h, std::move(pixels));
}

std::vector<std::uint8_t> write_pgm(const GrayImage& img) {
    const std::string header =
        "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels().begin(), img.pixels().end());
    return out;
}

GrayImage read_pgm_file(const fs::path& path) {
    const auto bytes = slurp(path);
    try {
        return read_pgm(bytes);
    } catch (const PgmError& e) {
        throw DatasetError(path, e.what());
    }
}

void write_pgm_file(const fs::path& path, const GrayImage& img) {
    const auto bytes = write_pgm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DatasetError(path, "cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DatasetError(path, "write failed");
}

std::size_t RawDataset::count_for(ClassId id) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [id](const RawSample& s) { return s.class_id == id; }));
}

DatasetError::DatasetError(const fs::path& path, const std::string& what)
    : std::runtime_error(path.string() + ": " + what), path_(path) {}

std::vector<ClassInfo> read_classes_tsv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DatasetError(path, "cannot open classes.tsv");
    std::vector<ClassInfo> classes;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DatasetError(path, "line " + std::to_string(lineno) + ": expected <id>\\t<name>");
        ClassInfo info;
        const auto* first = line.data();
        auto [ptr, ec] = std::from_chars(first, first + tab, info.id);
        if (ec != std::errc{} || ptr != first + tab || info.id < 0)
            throw DatasetError(path, "line " + std::to_string(lineno) + ": bad class id");
        info.name = line.substr(tab + 1);
        classes.push_back(std::move(info));
    }
    std::sort(classes.begin(), classes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (classes[i].id != static_cast<ClassId>(i))
            throw DatasetError(path, "class ids must be contiguous from 0; missing or duplicate id near " +
                                         std::to_string(i));
    }
    return classes;
}

void write_classes_tsv(const fs::path& path, std::span<const ClassInfo> classes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DatasetError(path, "cannot open for writing");
    for (const auto& c : classes) out << c.id << '\t' << c.name << '\n';
    if (!out) throw DatasetError(path, "write failed");
}

RawDataset load_dataset(const fs::path& root) {
    if (!fs::is_directory(root)) throw DatasetError(root, "dataset root is not a directory");
    const auto tsv = root / "classes.tsv";
    if (!fs::exists(tsv)) throw DatasetError(tsv, "missing classes.tsv");

    RawDataset ds;
    ds.classes = read_classes_tsv(tsv);

    // Reject class directories that classes.tsv does not list.
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) continue;
        const auto name = entry.path().filename().string();
        if (name.rfind("class_", 0) != 0) continue;
        const auto digits = std::string_view(name).substr(6);
        ClassId id = -1;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), id);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || id < 0 ||
            id >= static_cast<ClassId>(ds.classes.size()))
            throw DatasetError(entry.path(), "directory for a class not listed in classes.tsv");
    }

    for (const auto& cls : ds.classes) {
        const auto dir = root / ("class_" + std::to_string(cls.id));
        if (!fs::is_directory(dir)) throw DatasetError(dir, "missing directory for listed class");
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end(),
                  [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
        for (const auto& f : files) {
            ds.samples.push_back(RawSample{cls.id, f.stem().string(), read_pgm_file(f)});
        }
    }
    return ds;
}

}  // namespace zocr
