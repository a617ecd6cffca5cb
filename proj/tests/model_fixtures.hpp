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
#pragma once

#include <algorithm>
#include <random>

#include "dense_oracle.hpp"
#include "mltqnn/model.hpp"

namespace fixtures {

/// 8x8 images, 2x2 patches, 4x4 superpixels, 7 qubits. With P = 2 the
/// autoencoder has no ReLU or pooling, so the whole model is smooth.
inline mltqnn::ModelConfig small_config() {
    mltqnn::ModelConfig c;
    c.N = 8;
    c.P = 2;
    c.E = 3;
    c.M = 1;
    c.K = 2;
    c.channels = 2;
    c.num_classes = 3;
    c.alpha = 5.0;
    c.threads = 1;
    return c;
}

inline mltqnn::ImageTensor random_image(std::mt19937_64 &rng, std::size_t n, std::size_t ch) {
    mltqnn::ImageTensor img(n, n, ch);
    img.values = oracle::random_vector(rng, img.size(), 0.0, 1.0);
    return img;
}

inline mltqnn::Split random_split(std::mt19937_64 &rng, const mltqnn::ModelConfig &c,
                                  std::size_t n) {
    mltqnn::Split s;
    for (std::size_t i = 0; i < n; ++i) {
        s.images.push_back(random_image(rng, c.N, c.channels));
        s.labels.push_back(i % c.num_classes);
    }
    return s;
}

/// Randomized store: initialization plus jitter on every entry, so that
/// biases are non-zero.
inline mltqnn::ParameterStore random_store(const mltqnn::HybridModel &m, std::mt19937_64 &rng) {
    auto s = m.initialize(rng());
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    for (double &v : s.values) v += jitter(rng);
    return s;
}

/// Largest relative error between backward() and central differences of
/// the batch loss over every parameter.
inline double max_fd_error(const mltqnn::HybridModel &m, const mltqnn::Split &data,
                           const mltqnn::ParameterStore &params, double eps = 1e-4) {
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const auto bg = m.backward(data, idx, params);
    double worst = 0.0;
    for (std::size_t j = 0; j < params.values.size(); ++j) {
        auto hi = params;
        auto lo = params;
        hi.values[j] += eps;
        lo.values[j] -= eps;
        const double fd =
            (m.backward(data, idx, hi).loss - m.backward(data, idx, lo).loss) / (2 * eps);
        worst = std::max(worst, oracle::relative_error(bg.grad[j], fd));
    }
    return worst;
}

} // namespace fixtures
