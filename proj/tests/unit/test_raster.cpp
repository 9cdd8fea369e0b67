#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "oracle/oracles.hpp"
#include "zocr/raster.hpp"

using namespace zocr;
namespace fs = std::filesystem;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) {
    return {s.begin(), s.end()};
}

PgmErrorKind parse_error(const std::vector<std::uint8_t>& b) {
    try {
        read_pgm(b);
    } catch (const PgmError& e) {
        return e.kind();
    }
    FAIL("expected a PgmError");
    return PgmErrorKind::UnknownMagic;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("zocr_raster_" + tag + "_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("read_pgm binary payload") {
    auto b = bytes_of("P5\n2 1\n255\n");
    b.push_back(0);
    b.push_back(255);
    const auto img = read_pgm(b);
    CHECK(img.width() == 2);
    CHECK(img.height() == 1);
    CHECK(img.at(0, 0) == 0);
    CHECK(img.at(1, 0) == 255);
}

TEST_CASE("read_pgm ASCII payload") {
    const auto img = read_pgm(bytes_of("P2\n1 1\n255\n128\n"));
    CHECK(img == GrayImage(1, 1, std::vector<std::uint8_t>{128}));
}

TEST_CASE("read_pgm header comments and rescaling") {
    const auto img = read_pgm(bytes_of("P2\n# made by hand\n3 1 # trailing\n15\n0 15 7\n"));
    CHECK(img.at(0, 0) == 0);
    CHECK(img.at(1, 0) == 255);
    CHECK(img.at(2, 0) == 119);  // round(7 * 255 / 15) = round(119.0)
    const auto half = read_pgm(bytes_of("P2\n1 1\n2\n1\n"));
    CHECK(half.at(0, 0) == 128);  // round(127.5) rounds up
}

TEST_CASE("read_pgm error kinds carry offsets") {
    auto truncated = bytes_of("P5\n2 2\n255\n");
    truncated.insert(truncated.end(), {1, 2, 3});
    CHECK(parse_error(truncated) == PgmErrorKind::TruncatedPayload);
    CHECK(parse_error(bytes_of("P6\n1 1\n255\n")) == PgmErrorKind::UnknownMagic);
    CHECK(parse_error(bytes_of("")) == PgmErrorKind::UnknownMagic);
    CHECK(parse_error(bytes_of("P5\n1 1\n65535\n\x01\x02")) == PgmErrorKind::MaxvalTooLarge);
    CHECK(parse_error(bytes_of("P5\nx 1\n255\n\x01")) == PgmErrorKind::MalformedHeader);
    CHECK(parse_error(bytes_of("P5\n1\n")) == PgmErrorKind::MalformedHeader);
    CHECK(parse_error(bytes_of("P2\n2 1\n255\n1\n")) == PgmErrorKind::TruncatedPayload);
    CHECK(parse_error(bytes_of("P2\n1 1\n100\n101\n")) == PgmErrorKind::BadPixel);

    try {
        read_pgm(bytes_of("P5\n1 1\n300\n\x01"));
    } catch (const PgmError& e) {
        CHECK(e.offset() == 7);
        CHECK(std::string(e.what()).find("byte 7") != std::string::npos);
    }
}

TEST_CASE("write_pgm canonical form") {
    const auto out = write_pgm(GrayImage(1, 1, std::vector<std::uint8_t>{0}));
    auto expect = bytes_of("P5\n1 1\n255\n");
    expect.push_back(0);
    CHECK(out == expect);
    // "P5\n" + "2 1\n" + "255\n" is 3 + 4 + 4 = 11 header bytes, plus 2 payload bytes.
    const std::string header = "P5\n2 1\n255\n";
    CHECK(header.size() == 11);
    CHECK(write_pgm(GrayImage(2, 1, std::vector<std::uint8_t>{0, 255})).size() == header.size() + 2);
}

TEST_CASE("property: PGM round trip and P2/P5 agreement") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dim(1, 40);
    for (int i = 0; i < 200; ++i) {
        const auto img = oracle::random_gray(rng, dim(rng), dim(rng));
        REQUIRE(read_pgm(write_pgm(img)) == img);

        std::string ascii = "P2\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
        for (auto p : img.pixels()) ascii += std::to_string(p) + " ";
        REQUIRE(read_pgm(bytes_of(ascii)) == img);
    }
}

TEST_CASE("image invariants are enforced") {
    CHECK_THROWS_AS(GrayImage(0, 3), std::invalid_argument);
    CHECK_THROWS_AS(GrayImage(2, 2, std::vector<std::uint8_t>(3)), std::invalid_argument);
    CHECK_THROWS_AS(BinaryImage(2, 2, std::vector<std::uint8_t>(5)), std::invalid_argument);
}

namespace {

void write_tree(const fs::path& root, int classes, int per_class, bool empty_last = false) {
    std::vector<ClassInfo> cls;
    for (int c = 0; c < classes; ++c) cls.push_back({c, "letter_" + std::to_string(c)});
    write_classes_tsv(root / "classes.tsv", cls);
    for (int c = 0; c < classes; ++c) {
        fs::create_directories(root / ("class_" + std::to_string(c)));
        if (empty_last && c == classes - 1) continue;
        // Written out of order to check the lexicographic sort.
        for (int s = per_class - 1; s >= 0; --s) {
            GrayImage img(3, 2, static_cast<std::uint8_t>(c * 10 + s));
            write_pgm_file(root / ("class_" + std::to_string(c)) / ("s" + std::to_string(s) + ".pgm"), img);
        }
    }
}

}  // namespace

TEST_CASE("load_dataset ordering and counts") {
    TempDir tmp("order");
    write_tree(tmp.path, 2, 3);
    const auto ds = load_dataset(tmp.path);
    REQUIRE(ds.classes.size() == 2);
    CHECK(ds.classes[1].name == "letter_1");
    REQUIRE(ds.samples.size() == 6);
    CHECK(ds.samples[0].class_id == 0);
    CHECK(ds.samples[0].sample_id == "s0");
    CHECK(ds.samples[2].sample_id == "s2");
    CHECK(ds.samples[3].class_id == 1);
    CHECK(ds.samples[5].image.at(0, 0) == 12);
    CHECK(load_dataset(tmp.path) == ds);
}

TEST_CASE("load_dataset permits empty class directories") {
    TempDir tmp("empty");
    write_tree(tmp.path, 3, 2, true);
    const auto ds = load_dataset(tmp.path);
    CHECK(ds.samples.size() == 4);
    CHECK(ds.count_for(2) == 0);
}

TEST_CASE("load_dataset errors name the offending path") {
    TempDir tmp("errors");
    CHECK_THROWS_AS(load_dataset(tmp.path), DatasetError);  // no classes.tsv

    write_tree(tmp.path, 2, 1);
    fs::create_directories(tmp.path / "class_7");
    try {
        load_dataset(tmp.path);
        FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
        CHECK(e.path().filename() == "class_7");
    }
    fs::remove_all(tmp.path / "class_7");

    std::ofstream(tmp.path / "class_1" / "zz.pgm") << "garbage";
    try {
        load_dataset(tmp.path);
        FAIL("expected DatasetError");
    } catch (const DatasetError& e) {
        CHECK(e.path().filename() == "zz.pgm");
    }
}

TEST_CASE("classes.tsv must be contiguous from zero") {
    TempDir tmp("tsv");
    std::ofstream(tmp.path / "classes.tsv") << "0\ta\n2\tc\n";
    CHECK_THROWS_AS(read_classes_tsv(tmp.path / "classes.tsv"), DatasetError);
}
