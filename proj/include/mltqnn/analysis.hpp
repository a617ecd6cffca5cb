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
 * @file analysis.hpp
 * Representation analyses: feature-magnitude ranking, k-means clustering and
 * adjusted mutual information.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mltqnn {

struct RankedFeature {
    std::size_t index = 0;
    double magnitude = 0.0;
};

/// Mean |value| per feature index over the batch, sorted descending (ties by
/// index).
[[nodiscard]] std::vector<RankedFeature>
feature_magnitudes(std::span<const std::vector<double>> vectors);

struct KMeansResult {
    std::vector<std::size_t> labels;
    std::vector<std::vector<double>> centroids;
    std::vector<double> inertia; ///< within-cluster sum of squares per Lloyd iteration
};

/// k-means++ seeding, then Lloyd iterations until every centroid moves less
/// than 1e-6 or 300 iterations.
[[nodiscard]] KMeansResult kmeans(std::span<const std::vector<double>> points, std::size_t k,
                                  std::uint64_t seed);

/// Mutual information (nats) of two labelings.
[[nodiscard]] double mutual_information(std::span<const std::size_t> a,
                                        std::span<const std::size_t> b);

/// Expected mutual information under the hypergeometric permutation model.
[[nodiscard]] double expected_mutual_information(std::span<const std::size_t> a,
                                                 std::span<const std::size_t> b);

/// Entropy (nats) of a labeling.
[[nodiscard]] double entropy(std::span<const std::size_t> labels);

/// Adjusted mutual information with arithmetic-mean normalization. 1 for
/// identical partitions, 0 when exactly one side is a single cluster.
[[nodiscard]] double ami(std::span<const std::size_t> a, std::span<const std::size_t> b);

} // namespace mltqnn
