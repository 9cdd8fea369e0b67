#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracle/oracles.hpp"
#include "zocr/zoning.hpp"

using namespace zocr;

TEST_CASE("grid parsing") {
    CHECK(GridSpec::parse("4x4") == GridSpec{4, 4});
    CHECK(GridSpec::parse("4x11") == GridSpec{4, 11});
    CHECK(GridSpec{2, 3}.to_string() == "2x3");
    CHECK_THROWS_AS(GridSpec::parse("4"), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec::parse("0x4"), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec::parse("4x"), std::invalid_argument);
}

TEST_CASE("44x44 on a 4x4 grid gives 11x11 zones") {
    for (int i = 0; i < 4; ++i) {
        const auto s = zone_span(i, 4, 44);
        CHECK(s.begin == 11 * i);
        CHECK(s.end - s.begin == 11);
    }
}

TEST_CASE("zone_densities saturated, empty and single-block images") {
    const GridSpec g{4, 4};
    const auto full = zone_densities(BinaryImage(44, 44, true), g);
    CHECK(full.size() == 16);
    for (double v : full) CHECK(v == 1.0);
    for (double v : zone_densities(BinaryImage(44, 44), g)) CHECK(v == 0.0);

    BinaryImage block(44, 44);
    for (int y = 0; y < 11; ++y)
        for (int x = 0; x < 11; ++x) block.set(x, y, true);
    const auto f = zone_densities(block, g);
    CHECK(f[0] == 1.0);
    for (std::size_t i = 1; i < 16; ++i) CHECK(f[i] == 0.0);
}

TEST_CASE("zone_densities hand-counted partial zone") {
    BinaryImage img(4, 4);
    img.set(3, 0, true);  // zone (0,1) on a 2x2 grid, 1 of 4 pixels
    img.set(2, 1, true);
    img.set(0, 3, true);  // zone (1,0)
    const auto f = zone_densities(img, {2, 2});
    CHECK(f == FeatureVector{0.0, 0.5, 0.25, 0.0});
}

TEST_CASE("zone_densities rejects images smaller than the grid") {
    CHECK_THROWS_AS(zone_densities(BinaryImage(3, 10), {4, 4}), std::invalid_argument);
}

TEST_CASE("property: conservation of foreground count") {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> dim(11, 60);
    const GridSpec grids[] = {{1, 1}, {2, 2}, {4, 4}, {4, 11}, {3, 5}};
    for (int i = 0; i < 200; ++i) {
        const auto img = oracle::random_binary(rng, dim(rng), dim(rng), 0.3);
        for (const auto& g : grids) {
            const auto f = zone_densities(img, g);
            const auto counts = zone_counts(img, g);
            std::size_t total = 0, from_density = 0;
            for (int r = 0; r < g.rows; ++r)
                for (int c = 0; c < g.cols; ++c) {
                    const auto ys = zone_span(r, g.rows, img.height());
                    const auto xs = zone_span(c, g.cols, img.width());
                    const auto i_zone = static_cast<std::size_t>(r * g.cols + c);
                    const double zone_area = (ys.end - ys.begin) * (xs.end - xs.begin);
                    total += counts[i_zone];
                    from_density += static_cast<std::size_t>(std::llround(f[i_zone] * zone_area));
                    REQUIRE(f[i_zone] >= 0.0);
                    REQUIRE(f[i_zone] <= 1.0);
                }
            REQUIRE(total == img.foreground_count());
            REQUIRE(from_density == img.foreground_count());
        }
    }
}

TEST_CASE("property: permuting pixels inside a zone keeps the features") {
    std::mt19937_64 rng(91);
    const GridSpec g{4, 4};
    for (int i = 0; i < 50; ++i) {
        const auto img = oracle::random_binary(rng, 44, 44, 0.3);
        std::vector<std::uint8_t> mask(img.mask().begin(), img.mask().end());
        // Shuffle the pixels of zone (1, 2): rows 11..21, cols 22..32.
        std::vector<std::size_t> idx;
        for (int y = 11; y < 22; ++y)
            for (int x = 22; x < 33; ++x) idx.push_back(static_cast<std::size_t>(y * 44 + x));
        std::vector<std::uint8_t> vals;
        for (auto p : idx) vals.push_back(mask[p]);
        std::shuffle(vals.begin(), vals.end(), rng);
        for (std::size_t k = 0; k < idx.size(); ++k) mask[idx[k]] = vals[k];
        REQUIRE(zone_densities(BinaryImage(44, 44, mask), g) == zone_densities(img, g));
    }
}

TEST_CASE("grid_entropy reference values") {
    CHECK(grid_entropy(std::vector<double>(16, 0.3)) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(grid_entropy(std::vector<double>(16, 0.0625)) == 4.0);
    std::vector<double> one(16, 0.0);
    one[5] = 0.7;
    CHECK(grid_entropy(one) == 0.0);
    std::vector<double> three(16, 0.0);
    three[0] = 0.5;
    three[1] = 0.25;
    three[2] = 0.25;
    // 0.5*log2(2) + 2*0.25*log2(4) = 0.5 + 1.0
    CHECK(grid_entropy(three) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(grid_entropy(std::vector<double>(16, 0.0)) == 0.0);
    CHECK_THROWS_AS(grid_entropy(std::vector<double>{0.1, -0.1}), std::domain_error);
}

TEST_CASE("property: grid_entropy scale invariance and bounds") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> val(0.0, 1.0), scale(0.01, 100.0);
    for (int i = 0; i < 500; ++i) {
        std::vector<double> p(16);
        for (auto& v : p) v = val(rng) < 0.3 ? 0.0 : val(rng);
        const double h = grid_entropy(p);
        REQUIRE(h >= 0.0);
        REQUIRE(h <= std::log2(16.0) + 1e-12);
        const double k = scale(rng);
        auto scaled = p;
        for (auto& v : scaled) v *= k;
        REQUIRE(grid_entropy(scaled) == doctest::Approx(h).epsilon(1e-12));
    }
}

namespace {

RawDataset tiny_dataset() {
    RawDataset ds;
    ds.classes = {{0, "a"}, {1, "b"}};
    GrayImage ink(20, 20, 240);
    for (int y = 4; y < 16; ++y)
        for (int x = 8; x < 12; ++x) ink.at(x, y) = 20;
    ds.samples.push_back({0, "x0", ink});
    ds.samples.push_back({1, "y0", GrayImage(20, 20, 255)});
    return ds;
}

}  // namespace

TEST_CASE("extract_all keeps order and zeroes blank samples") {
    std::vector<PreprocessDiagnostics> diag;
    const auto table = extract_all(tiny_dataset(), {}, {4, 4}, &diag);
    REQUIRE(table.rows.size() == 2);
    CHECK(diag.size() == 2);
    CHECK(table.rows[0].sample_id == "x0");
    CHECK(table.rows[1].sample_id == "y0");
    CHECK(table.rows[0].features.size() == 16);
    for (double v : table.rows[1].features) CHECK(v == 0.0);
    double ink = 0;
    for (double v : table.rows[0].features) ink += v;
    CHECK(ink > 0);

    CHECK_THROWS_AS(extract_all(RawDataset{}, {}, {4, 4}), std::invalid_argument);
}

TEST_CASE("extract_all at corpus scale") {
    RawDataset ds;
    for (int c = 0; c < 44; ++c) ds.classes.push_back({c, "c" + std::to_string(c)});
    for (int c = 0; c < 44; ++c)
        for (int s = 0; s < 102; ++s) {
            GrayImage img(8, 8, 250);
            img.at(c % 8, (c / 8 + s) % 8) = 5;
            img.at((c + 1) % 8, (c / 8 + s) % 8) = 5;
            ds.samples.push_back({c, std::to_string(s), img});
        }
    const auto table = extract_all(ds, {}, {4, 4});
    CHECK(table.rows.size() == 4488);
    CHECK(table.dims() == 16);
}

TEST_CASE("feature CSV layout and stable round trip") {
    FeatureTable t{{2, 2}, {{0, "a"}, {1, "b"}}, {}};
    t.rows.push_back({0, "s0", {0.0, 1.0, 1.0 / 3.0, 0.123456789012}});
    t.rows.push_back({1, "s1", {0.25, 2.0 / 7.0, 1e-7, 0.5}});
    std::ostringstream out;
    write_feature_csv(out, t);
    const std::string text = out.str();
    CHECK(text.rfind("class_id,sample_id,f0,f1,f2,f3\n0,s0,0,1,0.333333333,0.123456789\n", 0) == 0);

    std::istringstream in(text);
    const auto back = read_feature_csv(in, t.classes);
    CHECK(back.grid == GridSpec{2, 2});
    CHECK(back.classes == t.classes);
    std::ostringstream again;
    write_feature_csv(again, back);
    CHECK(again.str() == text);
}

TEST_CASE("property: CSV writes are a fixed point after one read") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    FeatureTable t{{4, 4}, {}, {}};
    for (int i = 0; i < 300; ++i) {
        FeatureRow r{i % 5, "r" + std::to_string(i), FeatureVector(16)};
        for (auto& v : r.features) v = val(rng);
        t.rows.push_back(r);
    }
    std::ostringstream first;
    write_feature_csv(first, t);
    std::istringstream in(first.str());
    const auto back = read_feature_csv(in);
    CHECK(back.classes.size() == 5);
    for (std::size_t i = 0; i < t.rows.size(); ++i)
        for (std::size_t j = 0; j < 16; ++j)
            REQUIRE(back.rows[i].features[j] == doctest::Approx(t.rows[i].features[j]).epsilon(1e-8));
    std::ostringstream second;
    write_feature_csv(second, back);
    CHECK(second.str() == first.str());
}

TEST_CASE("feature CSV errors report the line") {
    std::istringstream bad_header("id,sample,f0\n");
    CHECK_THROWS_AS(read_feature_csv(bad_header), CsvError);
    std::istringstream short_row("class_id,sample_id,f0,f1\n0,a,0.5\n");
    try {
        read_feature_csv(short_row);
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.line() == 2);
    }
    std::istringstream bad_value("class_id,sample_id,f0\n0,a,zero\n");
    CHECK_THROWS_AS(read_feature_csv(bad_value), CsvError);
}
