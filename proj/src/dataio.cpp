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
#include "mltqnn/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "json.hpp"
#include "mltqnn/error.hpp"

namespace mltqnn {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kFormatVersion = 1;
constexpr double kGratingFrequency = 1.0 / 8.0; // cycles per pixel
const char *const kSplitNames[] = {"train", "validation", "test"};

std::vector<unsigned char> read_bytes(const fs::path &p, const std::string &what) {
    std::ifstream in(p, std::ios::binary);
    require(in.good(), ErrorKind::Data, "missing " + what + " file: " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path &p, const std::vector<unsigned char> &bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::Data, "cannot write " + p.string());
    out.write(reinterpret_cast<const char *>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    require(out.good(), ErrorKind::Data, "failed writing " + p.string());
}

std::vector<unsigned char> encode_f32(const Split &s) {
    std::vector<unsigned char> out;
    for (const auto &img : s.images) {
        for (double v : img.values) {
            const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
            for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
        }
    }
    return out;
}

std::vector<unsigned char> encode_u16(const Split &s) {
    std::vector<unsigned char> out;
    for (std::size_t l : s.labels) {
        out.push_back(static_cast<unsigned char>(l & 0xFFU));
        out.push_back(static_cast<unsigned char>((l >> 8) & 0xFFU));
    }
    return out;
}

Split read_split(const fs::path &dir, const DatasetManifest &m, const std::string &name) {
    const auto it = m.splits.find(name);
    require(it != m.splits.end(), ErrorKind::Data, "manifest lacks the '" + name + "' split");
    const SplitFiles &f = it->second;
    const std::size_t per = m.height * m.width * m.channels;

    const auto img_bytes = read_bytes(dir / f.images, name + " image");
    require(img_bytes.size() == f.count * per * 4, ErrorKind::Data,
            "count mismatch in " + f.images + ": " + std::to_string(img_bytes.size()) +
                " bytes, manifest declares " + std::to_string(f.count) + " samples (" +
                std::to_string(f.count * per * 4) + " bytes)");
    const auto lab_bytes = read_bytes(dir / f.labels, name + " label");
    require(lab_bytes.size() == f.count * 2, ErrorKind::Data,
            "count mismatch in " + f.labels + ": " + std::to_string(lab_bytes.size()) +
                " bytes, manifest declares " + std::to_string(f.count) + " labels");

    Split s;
    s.images.reserve(f.count);
    s.labels.reserve(f.count);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < f.count; ++i) {
        ImageTensor img(m.height, m.width, m.channels);
        for (double &v : img.values) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) bits |= std::uint32_t{img_bytes[pos++]} << (8 * b);
            v = static_cast<double>(std::bit_cast<float>(bits));
            require(std::isfinite(v), ErrorKind::Data, "non-finite pixel in " + f.images);
        }
        s.images.push_back(std::move(img));
        const std::size_t label = lab_bytes[2 * i] | (std::size_t{lab_bytes[2 * i + 1]} << 8);
        require(label < m.num_classes, ErrorKind::Data,
                "label out of range in " + f.labels + ": sample " + std::to_string(i) +
                    " has label " + std::to_string(label) + ", num_classes is " +
                    std::to_string(m.num_classes));
        s.labels.push_back(label);
    }
    return s;
}

std::vector<std::size_t> pick(std::vector<std::size_t> pool, std::size_t keep,
                              std::mt19937_64 &rng) {
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(keep);
    return pool;
}

std::size_t keep_count(std::size_t n, double fraction) {
    if (n == 0) return 0;
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    return std::clamp<std::size_t>(k, 1, n);
}

Split select(const Split &s, std::vector<std::size_t> keep) {
    std::sort(keep.begin(), keep.end());
    Split out;
    for (std::size_t i : keep) {
        out.images.push_back(s.images[i]);
        out.labels.push_back(s.labels[i]);
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------- manifest

std::string DatasetManifest::to_json() const {
    json j;
    j["format_version"] = kFormatVersion;
    j["name"] = name;
    j["image_shape"] = {height, width, channels};
    j["num_classes"] = num_classes;
    j["splits"] = json::object();
    for (const auto &[k, f] : splits) {
        j["splits"][k] = {{"count", f.count}, {"images", f.images}, {"labels", f.labels}};
    }
    j["normalization"] = json::array();
    for (const auto &[lo, hi] : normalization) j["normalization"].push_back({lo, hi});
    return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(const std::string &text) {
    DatasetManifest m;
    try {
        const json j = json::parse(text);
        require(j.at("format_version") == kFormatVersion, ErrorKind::Data,
                "unsupported manifest format_version");
        m.name = j.at("name").get<std::string>();
        const auto &shape = j.at("image_shape");
        require(shape.is_array() && shape.size() == 3, ErrorKind::Data,
                "image_shape must be [height, width, channels]");
        m.height = shape[0].get<std::size_t>();
        m.width = shape[1].get<std::size_t>();
        m.channels = shape[2].get<std::size_t>();
        m.num_classes = j.at("num_classes").get<std::size_t>();
        require(m.height > 0 && m.width > 0 && m.channels > 0 && m.num_classes > 0 &&
                    m.num_classes <= 65536,
                ErrorKind::Data, "manifest declares an empty shape or class set");
        for (const auto &[k, v] : j.at("splits").items()) {
            m.splits[k] = {v.at("count").get<std::size_t>(), v.at("images").get<std::string>(),
                           v.at("labels").get<std::string>()};
        }
        if (j.contains("normalization")) {
            for (const auto &p : j.at("normalization")) {
                m.normalization.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
            }
            require(m.normalization.size() == m.channels, ErrorKind::Data,
                    "normalization must list one (min, max) pair per channel");
        }
    } catch (const json::exception &e) {
        fail(ErrorKind::Data, std::string("malformed manifest: ") + e.what());
    }
    return m;
}

DatasetManifest read_manifest(const fs::path &directory) {
    require(fs::is_directory(directory), ErrorKind::Data,
            "dataset directory not found: " + directory.string());
    const auto p = directory / "manifest.json";
    std::ifstream in(p);
    require(in.good(), ErrorKind::Data, "manifest not found: " + p.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return DatasetManifest::from_json(text);
}

// ---------------------------------------------------------------- transforms

std::vector<std::pair<double, double>> channel_ranges(const Split &split) {
    require(split.size() > 0, ErrorKind::Data, "cannot compute ranges of an empty split");
    const std::size_t ch = split.images.front().channels;
    std::vector<std::pair<double, double>> r(ch, {INFINITY, -INFINITY});
    for (const auto &img : split.images) {
        for (std::size_t i = 0; i < img.values.size(); ++i) {
            auto &[lo, hi] = r[i % ch];
            lo = std::min(lo, img.values[i]);
            hi = std::max(hi, img.values[i]);
        }
    }
    return r;
}

void normalize(Split &split, const std::vector<std::pair<double, double>> &ranges) {
    for (auto &img : split.images) {
        require(img.channels == ranges.size(), ErrorKind::Data,
                "normalization constants do not match the channel count");
        for (std::size_t i = 0; i < img.values.size(); ++i) {
            const auto [lo, hi] = ranges[i % ranges.size()];
            double &v = img.values[i];
            v = hi > lo ? std::clamp((v - lo) / (hi - lo), 0.0, 1.0) : 0.0;
        }
    }
}

Split subsample_fraction(const Split &split, double fraction, std::size_t num_classes,
                         std::uint64_t seed) {
    require(fraction > 0.0 && fraction <= 1.0, ErrorKind::Config,
            "train fraction must lie in (0, 1]");
    if (fraction == 1.0) return split;
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < num_classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < split.size(); ++i) {
            if (split.labels[i] == c) members.push_back(i);
        }
        const auto chosen = pick(members, keep_count(members.size(), fraction), rng);
        keep.insert(keep.end(), chosen.begin(), chosen.end());
    }
    return select(split, keep);
}

Split subsample_class(const Split &split, const MinorityOption &option, std::uint64_t seed) {
    require(option.fraction > 0.0 && option.fraction <= 1.0, ErrorKind::Config,
            "minority fraction must lie in (0, 1]");
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
    std::vector<std::size_t> keep;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < split.size(); ++i) {
        (split.labels[i] == option.label ? members : keep).push_back(i);
    }
    const auto chosen = pick(members, keep_count(members.size(), option.fraction), rng);
    keep.insert(keep.end(), chosen.begin(), chosen.end());
    return select(split, keep);
}

MinorityOption parse_minority(const std::string &text) {
    const auto colon = text.find(':');
    require(colon != std::string::npos, ErrorKind::Config,
            "--minority expects CLASS:FRACTION, got '" + text + "'");
    MinorityOption o;
    try {
        std::size_t used = 0;
        const long label = std::stol(text.substr(0, colon), &used);
        require(used == colon && label >= 0, ErrorKind::Config, "bad minority class");
        o.label = static_cast<std::size_t>(label);
        const std::string frac = text.substr(colon + 1);
        o.fraction = std::stod(frac, &used);
        require(used == frac.size(), ErrorKind::Config, "bad minority fraction");
    } catch (const std::logic_error &) {
        fail(ErrorKind::Config, "--minority expects CLASS:FRACTION, got '" + text + "'");
    }
    require(o.fraction > 0.0 && o.fraction <= 1.0, ErrorKind::Config,
            "minority fraction must lie in (0, 1]");
    return o;
}

ImageTensor pad_image(const ImageTensor &image, std::size_t size) {
    require(size >= image.height && size >= image.width, ErrorKind::Config,
            "padding target is smaller than the image");
    ImageTensor out(size, size, image.channels);
    const std::size_t top = (size - image.height) / 2;
    const std::size_t left = (size - image.width) / 2;
    for (std::size_t r = 0; r < image.height; ++r)
        for (std::size_t c = 0; c < image.width; ++c)
            for (std::size_t ch = 0; ch < image.channels; ++ch)
                out.at(r + top, c + left, ch) = image.at(r, c, ch);
    return out;
}

// ---------------------------------------------------------------- load / write

Dataset load_dataset(const fs::path &directory, const LoadOptions &options) {
    Dataset d;
    d.manifest = read_manifest(directory);
    d.train = read_split(directory, d.manifest, "train");
    d.validation = read_split(directory, d.manifest, "validation");
    d.test = read_split(directory, d.manifest, "test");
    require(d.train.size() > 0, ErrorKind::Data, "training split is empty");
    if (d.manifest.normalization.empty()) d.manifest.normalization = channel_ranges(d.train);
    for (Split *s : {&d.train, &d.validation, &d.test}) normalize(*s, d.manifest.normalization);

    d.train = subsample_fraction(d.train, options.train_fraction, d.manifest.num_classes,
                                 options.seed);
    if (options.minority) {
        require(options.minority->label < d.manifest.num_classes, ErrorKind::Config,
                "minority class is out of range");
        d.train = subsample_class(d.train, *options.minority, options.seed);
    }
    if (options.pad_to > d.manifest.height || options.pad_to > d.manifest.width) {
        for (Split *s : {&d.train, &d.validation, &d.test}) {
            for (auto &img : s->images) img = pad_image(img, options.pad_to);
        }
        d.manifest.height = d.manifest.width = options.pad_to;
    }
    return d;
}

void write_dataset(const fs::path &directory, const std::string &name, std::size_t num_classes,
                   const std::map<std::string, Split> &splits) {
    const auto train = splits.find("train");
    require(train != splits.end() && train->second.size() > 0, ErrorKind::Data,
            "a non-empty train split is required");
    const auto &first = train->second.images.front();
    fs::create_directories(directory);

    DatasetManifest m;
    m.name = name;
    m.height = first.height;
    m.width = first.width;
    m.channels = first.channels;
    m.num_classes = num_classes;
    for (const auto &[k, s] : splits) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            require(s.images[i].same_shape(first), ErrorKind::Data, "inconsistent image shapes");
            require(s.labels[i] < num_classes, ErrorKind::Data, "label out of range");
        }
        SplitFiles f{s.size(), k + "_images.f32", k + "_labels.u16"};
        write_bytes(directory / f.images, encode_f32(s));
        write_bytes(directory / f.labels, encode_u16(s));
        m.splits[k] = f;
    }
    // constants of the stored (float32) values
    Split stored = train->second;
    for (auto &img : stored.images)
        for (double &v : img.values) v = static_cast<double>(static_cast<float>(v));
    m.normalization = channel_ranges(stored);

    std::ofstream out(directory / "manifest.json", std::ios::trunc);
    require(out.good(), ErrorKind::Data, "cannot write manifest in " + directory.string());
    out << m.to_json();
}

// ---------------------------------------------------------------- synthetic

std::map<std::string, Split> synthesize(const SyntheticSpec &spec) {
    require(spec.noise >= 0.0 && std::isfinite(spec.noise), ErrorKind::Config,
            "noise level must be >= 0");
    require(spec.num_classes >= 2 && spec.N >= 1 && spec.channels >= 1, ErrorKind::Config,
            "synthetic spec needs >= 2 classes and a non-empty image");
    std::vector<ImageTensor> prototypes;
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
        const double theta = static_cast<double>(k) * std::numbers::pi /
                             static_cast<double>(spec.num_classes);
        ImageTensor img(spec.N, spec.N, spec.channels);
        for (std::size_t r = 0; r < spec.N; ++r)
            for (std::size_t c = 0; c < spec.N; ++c)
                for (std::size_t ch = 0; ch < spec.channels; ++ch) {
                    const double u = static_cast<double>(r) * std::cos(theta) +
                                     static_cast<double>(c) * std::sin(theta);
                    const double phase = static_cast<double>(ch) * std::numbers::pi /
                                         static_cast<double>(spec.channels);
                    img.at(r, c, ch) =
                        0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * kGratingFrequency * u +
                                             phase);
                }
        prototypes.push_back(std::move(img));
    }

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> noise(-spec.noise, spec.noise);
    std::map<std::string, Split> out;
    const std::size_t counts[] = {spec.train, spec.validation, spec.test};
    for (std::size_t s = 0; s < 3; ++s) {
        Split split;
        for (std::size_t i = 0; i < counts[s]; ++i) {
            const std::size_t label = i % spec.num_classes;
            ImageTensor img = prototypes[label];
            if (spec.noise > 0.0) {
                for (double &v : img.values) v = std::clamp(v + noise(rng), 0.0, 1.0);
            }
            split.images.push_back(std::move(img));
            split.labels.push_back(label);
        }
        out[kSplitNames[s]] = std::move(split);
    }
    return out;
}

double nearest_centroid_accuracy(const Split &train, const Split &test,
                                 std::size_t num_classes) {
    require(train.size() > 0 && test.size() > 0, ErrorKind::Data, "empty split");
    const std::size_t n = train.images.front().size();
    std::vector<std::vector<double>> centroid(num_classes, std::vector<double>(n, 0.0));
    std::vector<std::size_t> members(num_classes, 0);
    for (std::size_t i = 0; i < train.size(); ++i) {
        auto &c = centroid[train.labels[i]];
        for (std::size_t j = 0; j < n; ++j) c[j] += train.images[i].values[j];
        members[train.labels[i]] += 1;
    }
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (members[k] == 0) continue;
        for (double &v : centroid[k]) v /= static_cast<double>(members[k]);
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        std::size_t best = 0;
        double best_d = INFINITY;
        for (std::size_t k = 0; k < num_classes; ++k) {
            if (members[k] == 0) continue;
            double d = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double e = test.images[i].values[j] - centroid[k][j];
                d += e * e;
            }
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        correct += best == test.labels[i] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

SyntheticReport generate_synthetic(const SyntheticSpec &spec, const fs::path &directory) {
    const auto splits = synthesize(spec);
    write_dataset(directory, "synthetic-gratings", spec.num_classes, splits);
    SyntheticReport r;
    r.centroid_accuracy =
        nearest_centroid_accuracy(splits.at("train"), splits.at("test"), spec.num_classes);
    return r;
}

} // namespace mltqnn
