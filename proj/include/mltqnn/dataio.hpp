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
/**
 * @file dataio.hpp
 * On-disk dataset format (`manifest.json` + raw little-endian tensors),
 * per-channel min-max normalization, seeded sub-sampling and the synthetic
 * grating generator. See docs/FORMATS.md for the byte layout.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mltqnn/model.hpp"

namespace mltqnn {

struct SplitFiles {
    std::size_t count = 0;
    std::string images; ///< float32 (sample, row, col, channel), relative to the manifest
    std::string labels; ///< uint16
};

struct DatasetManifest {
    std::string name;
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::size_t num_classes = 0;
    std::map<std::string, SplitFiles> splits; ///< train, validation, test
    std::vector<std::pair<double, double>> normalization; ///< per channel (min, max)

    [[nodiscard]] std::string to_json() const;
    [[nodiscard]] static DatasetManifest from_json(const std::string &text);
};

struct Dataset {
    DatasetManifest manifest;
    Split train;
    Split validation;
    Split test;
};

struct MinorityOption {
    std::size_t label = 0;
    double fraction = 1.0;
};

struct LoadOptions {
    double train_fraction = 1.0;            ///< stratified, per class
    std::optional<MinorityOption> minority; ///< keeps a fraction of one class
    std::uint64_t seed = 0;
    std::size_t pad_to = 0; ///< zero-pad to pad_to x pad_to when larger than the images
};

/// Parses "CLASS:FRACTION".
[[nodiscard]] MinorityOption parse_minority(const std::string &text);

[[nodiscard]] DatasetManifest read_manifest(const std::filesystem::path &directory);

/// Loads, normalizes with the manifest's training-split constants, then
/// applies sub-sampling and padding. Errors are ErrorKind::Data.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path &directory,
                                   const LoadOptions &options = {});

/// Per-channel (min, max) over a split.
[[nodiscard]] std::vector<std::pair<double, double>> channel_ranges(const Split &split);

/// (v - min) / (max - min) clipped to [0, 1]; channels with max == min map to 0.
void normalize(Split &split, const std::vector<std::pair<double, double>> &ranges);

/// Seeded selection of round(fraction * count) samples of each class (at
/// least one per present class). Original order is kept.
[[nodiscard]] Split subsample_fraction(const Split &split, double fraction,
                                       std::size_t num_classes, std::uint64_t seed);

/// Keeps round(fraction * count) (at least one) samples of one class.
[[nodiscard]] Split subsample_class(const Split &split, const MinorityOption &option,
                                    std::uint64_t seed);

/// Centered zero padding.
[[nodiscard]] ImageTensor pad_image(const ImageTensor &image, std::size_t size);

/// Writes raw (unnormalized) splits plus a manifest whose normalization is
/// taken from `splits.at("train")`.
void write_dataset(const std::filesystem::path &directory, const std::string &name,
                   std::size_t num_classes, const std::map<std::string, Split> &splits);

struct SyntheticSpec {
    std::size_t num_classes = 4;
    std::size_t N = 32;
    std::size_t channels = 4;
    std::size_t train = 200;
    std::size_t validation = 100;
    std::size_t test = 100;
    double noise = 0.1;
    std::uint64_t seed = 0;
};

/// Class-k images are sinusoidal gratings at orientation k * pi / classes.
[[nodiscard]] std::map<std::string, Split> synthesize(const SyntheticSpec &spec);

struct SyntheticReport {
    double centroid_accuracy = 0.0; ///< nearest-centroid on raw pixels, train -> test
};

SyntheticReport generate_synthetic(const SyntheticSpec &spec,
                                   const std::filesystem::path &directory);

/// Accuracy of the nearest class-mean classifier fitted on `train`.
[[nodiscard]] double nearest_centroid_accuracy(const Split &train, const Split &test,
                                               std::size_t num_classes);

} // namespace mltqnn
