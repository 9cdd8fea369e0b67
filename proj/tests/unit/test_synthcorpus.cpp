#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "zocr/preprocess.hpp"
#include "zocr/synthcorpus.hpp"

using namespace zocr;
namespace fs = std::filesystem;

namespace {

SynthConfig still_config() {
    SynthConfig c;
    c.max_shift = 0;
    c.max_rotation_deg = 0.0;
    c.thickness_min = c.thickness_max = 3.0;
    c.pixel_noise = 0;
    c.speck_rate = 0.0;
    return c;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(e.path(), root).generic_string()] = ss.str();
    }
    return files;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("glyphs are a pure function of config, class and index") {
    SynthConfig c;
    CHECK(gen_glyph(3, 7, c) == gen_glyph(3, 7, c));
    CHECK_FALSE(gen_glyph(3, 7, c) == gen_glyph(3, 8, c));
    CHECK(make_prototype(5, c) == make_prototype(5, c));
    auto other = c;
    other.master_seed = 43;
    CHECK_FALSE(gen_glyph(3, 7, c) == gen_glyph(3, 7, other));
    // Jitter settings do not move the prototype.
    CHECK(make_prototype(5, c) == make_prototype(5, still_config()));
}

TEST_CASE("glyph size and ink levels") {
    SynthConfig c;
    const auto g = gen_glyph(0, 0, c);
    CHECK(g.width() == 64);
    CHECK(g.height() == 64);
    const auto s = gen_glyph(0, 0, still_config());
    std::size_t ink = 0, paper = 0;
    for (auto p : s.pixels()) {
        ink += p == 30;
        paper += p == 235;
    }
    CHECK(ink > 30);
    CHECK(paper > ink);
}

TEST_CASE("zero jitter renders every sample of a class identically") {
    const auto c = still_config();
    for (int cls : {0, 11, 43}) {
        const auto first = gen_glyph(cls, 0, c);
        for (int i = 1; i < 6; ++i) CHECK(gen_glyph(cls, i, c) == first);
    }
}

TEST_CASE("prototypes are distinct and well formed") {
    SynthConfig c;
    std::vector<GlyphPrototype> protos;
    for (int k = 0; k < c.n_classes; ++k) {
        const auto p = make_prototype(k, c);
        CHECK(p.strokes.size() >= 2);
        CHECK(p.strokes.size() <= 5);
        CHECK(p.dots.size() <= 2);
        for (const auto& s : p.strokes)
            if (s.kind == StrokeKind::Line) CHECK(std::hypot(s.x1 - s.x0, s.y1 - s.y0) >= 0.3 - 1e-12);
        for (const auto& q : protos) CHECK_FALSE(q == p);
        protos.push_back(p);
    }
    // Rendered shapes differ too, not just the parameters.
    const auto still = still_config();
    std::vector<GrayImage> renders;
    for (int k = 0; k < still.n_classes; ++k) renders.push_back(gen_glyph(k, 0, still));
    for (std::size_t i = 0; i < renders.size(); ++i)
        for (std::size_t j = i + 1; j < renders.size(); ++j) CHECK_FALSE(renders[i] == renders[j]);
}

TEST_CASE("every default glyph survives preprocessing with ink") {
    SynthConfig c;
    for (int k = 0; k < c.n_classes; ++k)
        for (int i = 0; i < 3; ++i) CHECK(preprocess_pipeline(gen_glyph(k, i, c)).image.foreground_count() > 0);
}

TEST_CASE("corpus on disk loads back and regenerates byte for byte") {
    TempDir dir("zocr_synth_corpus_test");
    SynthConfig c;
    c.n_classes = 2;
    c.samples_per_class = 2;
    c.master_seed = 7;
    const auto ds = gen_corpus(c, dir.path);
    CHECK(ds.classes.size() == 2);
    CHECK(ds.samples.size() == 4);
    CHECK(ds.classes[1].name == "synth_1");
    CHECK(fs::exists(dir.path / "class_0" / "0000.pgm"));
    CHECK(fs::exists(dir.path / "class_1" / "0001.pgm"));
    CHECK(ds.samples[3].image == gen_glyph(1, 1, c));

    const auto before = snapshot(dir.path);
    gen_corpus(c, dir.path);
    CHECK(snapshot(dir.path) == before);
}

TEST_CASE("config json") {
    SynthConfig c;
    c.n_classes = 9;
    c.max_rotation_deg = 3.5;
    c.master_seed = 1234567890123ULL;
    const auto back = synth_config_from_json(synth_config_to_json(c));
    CHECK(back.n_classes == 9);
    CHECK(back.max_rotation_deg == 3.5);
    CHECK(back.master_seed == 1234567890123ULL);
    CHECK(synth_config_from_json("{\"canvas\": 48}").canvas == 48);
    CHECK(synth_config_from_json("{}").samples_per_class == 102);
    CHECK_THROWS(synth_config_from_json("{\"canvas\": 4}"));
    CHECK_THROWS(synth_config_from_json("nope"));
}

TEST_CASE("config validation") {
    SynthConfig c;
    c.thickness_min = 5;
    CHECK_THROWS(c.validate());
    c = {};
    c.n_classes = 0;
    CHECK_THROWS(c.validate());
    c = {};
    c.speck_rate = -1;
    CHECK_THROWS(c.validate());
}
