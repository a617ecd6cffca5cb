// Copyright 2026 The MLTQNN Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "mltqnn/dataio.hpp"
#include "mltqnn/error.hpp"

using namespace mltqnn;
namespace fs = std::filesystem;

namespace {

fs::path fresh(const std::string &name) {
    auto p = fs::temp_directory_path() / "mltqnn_test_dataio" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string error_of(const fs::path &dir) {
    try {
        (void)load_dataset(dir);
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::Data);
        return e.what();
    }
    return "";
}

/// float32-representable values spanning exactly [0, 1] on every channel.
Split random_split(std::mt19937_64 &rng, std::size_t n, std::size_t side, std::size_t ch,
                   std::size_t classes) {
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    Split s;
    for (std::size_t i = 0; i < n; ++i) {
        ImageTensor img(side, side, ch);
        for (double &v : img.values) v = u(rng);
        s.images.push_back(img);
        s.labels.push_back(i % classes);
    }
    for (std::size_t c = 0; c < ch; ++c) {
        s.images[0].at(0, 0, c) = 0.0;
        s.images[0].at(0, 1, c) = 1.0;
    }
    return s;
}

} // namespace

TEST_CASE("golden manifest", "[dataio][golden]") {
    const auto dir = fresh("golden");
    SyntheticSpec spec{2, 4, 1, 2, 1, 1, 0.0, 0};
    (void)generate_synthetic(spec, dir);
    CHECK(slurp(dir / "manifest.json") == slurp(fs::path(MLTQNN_TEST_DATA) / "golden_manifest.json"));

    const std::string img = slurp(dir / "train_images.f32");
    REQUIRE(img.size() == 2 * 16 * 4);
    CHECK(img.substr(0, 4) == std::string("\x00\x00\x00\x3f", 4)); // 0.5f
    CHECK(slurp(dir / "train_labels.u16") == std::string("\x00\x00\x01\x00", 4));
}

TEST_CASE("write/read round trip is bit exact", "[dataio][property]") {
    std::mt19937_64 rng(1);
    const auto dir = fresh("roundtrip");
    std::map<std::string, Split> splits{{"train", random_split(rng, 7, 5, 3, 3)},
                                        {"validation", random_split(rng, 2, 5, 3, 3)},
                                        {"test", random_split(rng, 3, 5, 3, 3)}};
    write_dataset(dir, "rt", 3, splits);
    const auto d = load_dataset(dir);
    CHECK(d.manifest.name == "rt");
    CHECK(d.manifest.normalization ==
          std::vector<std::pair<double, double>>(3, std::pair<double, double>{0.0, 1.0}));
    for (auto [name, split] : {std::pair{"train", &d.train}, std::pair{"validation", &d.validation},
                               std::pair{"test", &d.test}}) {
        const auto &ref = splits.at(name);
        REQUIRE(split->size() == ref.size());
        CHECK(split->labels == ref.labels);
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(split->images[i].values == ref.images[i].values);
    }
}

TEST_CASE("manifest with a SAT-6 sized declaration loads shape-correct", "[dataio]") {
    const auto dir = fresh("sat6");
    auto make = [](std::size_t n) {
        Split s;
        ImageTensor img(32, 32, 4);
        for (std::size_t i = 0; i < n; ++i) {
            img.values[0] = static_cast<double>(i % 7);
            s.images.push_back(img);
            s.labels.push_back(i % 6);
        }
        return s;
    };
    write_dataset(dir, "sat6-like", 6,
                  {{"train", make(4200)}, {"validation", make(1200)}, {"test", make(1200)}});
    const auto d = load_dataset(dir);
    CHECK(d.manifest.num_classes == 6);
    CHECK(d.train.size() == 4200);
    CHECK(d.validation.size() == 1200);
    CHECK(d.test.size() == 1200);
    CHECK(d.train.images[5].height == 32);
    CHECK(d.train.images[5].channels == 4);
    CHECK(d.train.images[5].values[0] == 5.0 / 6.0);
    CHECK(d.train.images[5].values[1] == 0.0); // constant channel
    CHECK(d.train.images[5].values[7] == 0.0);
}

TEST_CASE("normalization", "[dataio]") {
    Split s;
    ImageTensor a(1, 2, 2);
    a.values = {2.0, 7.0, 4.0, 7.0};
    ImageTensor b(1, 2, 2);
    b.values = {3.0, 7.0, 6.0, 7.0};
    s.images = {a, b};
    s.labels = {0, 1};
    const auto r = channel_ranges(s);
    CHECK(r[0] == std::pair<double, double>{2.0, 6.0});
    CHECK(r[1] == std::pair<double, double>{7.0, 7.0});
    normalize(s, r);
    CHECK(s.images[0].values == std::vector<double>{0.0, 0.0, 0.5, 0.0});
    CHECK(s.images[1].values == std::vector<double>{0.25, 0.0, 1.0, 0.0});

    // values outside the training range are clipped
    Split t;
    t.images = {a};
    t.images[0].values[0] = 100.0;
    t.labels = {0};
    normalize(t, r);
    CHECK(t.images[0].values[0] == 1.0);

    // idempotent on already-normalized data
    std::mt19937_64 rng(2);
    auto u = random_split(rng, 5, 4, 2, 2);
    const auto before = u;
    normalize(u, channel_ranges(u));
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(u.images[i].values == before.images[i].values);
}

TEST_CASE("loader diagnostics are distinct", "[dataio][errors]") {
    std::mt19937_64 rng(3);
    const std::map<std::string, Split> splits{{"train", random_split(rng, 4, 3, 1, 2)},
                                              {"validation", random_split(rng, 2, 3, 1, 2)},
                                              {"test", random_split(rng, 2, 3, 1, 2)}};

    const auto missing_dir = fresh("nodir") / "absent";
    CHECK_THAT(error_of(missing_dir), Catch::Matchers::ContainsSubstring("not found"));
    CHECK_THAT(error_of(fresh("nomanifest")), Catch::Matchers::ContainsSubstring("manifest not found"));

    const auto tampered = fresh("tampered");
    write_dataset(tampered, "t", 2, splits);
    fs::resize_file(tampered / "train_images.f32", 4 * 9 * 4 - 4);
    CHECK_THAT(error_of(tampered), Catch::Matchers::ContainsSubstring("count mismatch"));

    const auto nofile = fresh("nofile");
    write_dataset(nofile, "t", 2, splits);
    fs::remove(nofile / "test_labels.u16");
    CHECK_THAT(error_of(nofile), Catch::Matchers::ContainsSubstring("missing test label file"));

    const auto badlabel = fresh("badlabel");
    write_dataset(badlabel, "t", 2, splits);
    {
        std::fstream f(badlabel / "validation_labels.u16", std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(2);
        f.put('\x05');
    }
    CHECK_THAT(error_of(badlabel), Catch::Matchers::ContainsSubstring("label out of range"));

    const auto badjson = fresh("badjson");
    std::ofstream(badjson / "manifest.json") << "{\"format_version\": 1}";
    CHECK_THAT(error_of(badjson), Catch::Matchers::ContainsSubstring("malformed manifest"));
}

TEST_CASE("synthetic generator", "[dataio][synthetic]") {
    const SyntheticSpec spec{4, 32, 4, 200, 100, 100, 0.1, 9};
    const auto a = fresh("synth_a");
    const auto b = fresh("synth_b");
    const auto ra = generate_synthetic(spec, a);
    (void)generate_synthetic(spec, b);
    for (const auto &e : fs::directory_iterator(a)) {
        CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
    CHECK(ra.centroid_accuracy == 1.0);

    const auto d = load_dataset(a);
    CHECK(d.train.size() == 200);
    CHECK(d.test.size() == 100);
    for (double v : d.train.images[3].values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }

    // no bitwise duplicates across splits
    std::set<std::vector<double>> seen;
    std::size_t total = 0;
    for (const Split *s : {&d.train, &d.validation, &d.test}) {
        for (const auto &img : s->images) {
            seen.insert(img.values);
            ++total;
        }
    }
    CHECK(seen.size() == total);

    const auto clean = synthesize({4, 8, 2, 8, 4, 4, 0.0, 1});
    const auto &tr = clean.at("train");
    CHECK(tr.images[0].values == tr.images[4].values);
    CHECK(tr.images[0].values != tr.images[1].values);
    CHECK(clean.at("test").images[2].values == tr.images[2].values);

    CHECK_THROWS_AS(synthesize({4, 8, 2, 8, 4, 4, -0.1, 1}), Error);
}

TEST_CASE("sub-sampling", "[dataio]") {
    const auto splits = synthesize({4, 4, 1, 200, 4, 4, 0.1, 5});
    const auto &train = splits.at("train");

    const auto tenth = subsample_fraction(train, 0.1, 4, 7);
    REQUIRE(tenth.size() == 20);
    std::vector<std::size_t> per(4, 0);
    for (std::size_t l : tenth.labels) per[l] += 1;
    CHECK(per == std::vector<std::size_t>{5, 5, 5, 5});
    CHECK(subsample_fraction(train, 0.1, 4, 7).images[3].values == tenth.images[3].values);
    CHECK(subsample_fraction(train, 1.0, 4, 7).size() == 200);
    CHECK_THROWS_AS(subsample_fraction(train, 0.0, 4, 7), Error);

    const auto minor = subsample_class(train, parse_minority("2:0.1"), 7);
    CHECK(minor.size() == 155);
    std::fill(per.begin(), per.end(), 0);
    for (std::size_t l : minor.labels) per[l] += 1;
    CHECK(per == std::vector<std::size_t>{50, 50, 5, 50});

    CHECK(parse_minority("3:0.25").label == 3);
    CHECK(parse_minority("3:0.25").fraction == 0.25);
    CHECK_THROWS_AS(parse_minority("3"), Error);
    CHECK_THROWS_AS(parse_minority("x:0.5"), Error);
    CHECK_THROWS_AS(parse_minority("1:1.5"), Error);
    CHECK_THROWS_AS(parse_minority("1:0.5z"), Error);
}

TEST_CASE("zero padding", "[dataio]") {
    ImageTensor img(2, 2, 1);
    img.values = {1, 2, 3, 4};
    const auto p = pad_image(img, 4);
    CHECK(p.height == 4);
    CHECK(p.at(1, 1, 0) == 1);
    CHECK(p.at(2, 2, 0) == 4);
    CHECK(p.at(0, 0, 0) == 0);
    CHECK(p.at(3, 3, 0) == 0);
    CHECK_THROWS_AS(pad_image(img, 1), Error);

    const auto dir = fresh("pad");
    write_dataset(dir, "pad", 4, synthesize({4, 28, 1, 8, 4, 4, 0.1, 1}));
    LoadOptions opt;
    opt.pad_to = 32;
    const auto d = load_dataset(dir, opt);
    CHECK(d.manifest.height == 32);
    CHECK(d.test.images[0].height == 32);
    CHECK(d.test.images[0].at(0, 0, 0) == 0.0);
}
