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

#include <cstddef>
#include <vector>

namespace mltqnn {

/// Row-major (row, col, channel) real grid.
struct ImageTensor {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<double> values;

    ImageTensor() = default;
    ImageTensor(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
        : height(h), width(w), channels(c), values(h * w * c, fill) {}

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    [[nodiscard]] double &at(std::size_t r, std::size_t col, std::size_t ch) {
        return values[(r * width + col) * channels + ch];
    }
    [[nodiscard]] double at(std::size_t r, std::size_t col, std::size_t ch) const {
        return values[(r * width + col) * channels + ch];
    }
    [[nodiscard]] bool same_shape(const ImageTensor &o) const noexcept {
        return height == o.height && width == o.width && channels == o.channels;
    }
};

/**
 * @brief Superpixel grid of rotation angles: side x side superpixels with
 * `features` angles each, stored row-major as (x, y, feature). Entries lie
 * in [0, pi].
 */
struct ProcessedImage {
    std::size_t side = 0;
    std::size_t features = 0;
    std::vector<double> angles;

    ProcessedImage() = default;
    ProcessedImage(std::size_t s, std::size_t e, double fill = 0.0)
        : side(s), features(e), angles(s * s * e, fill) {}

    [[nodiscard]] double &at(std::size_t x, std::size_t y, std::size_t f) {
        return angles[(x * side + y) * features + f];
    }
    [[nodiscard]] double at(std::size_t x, std::size_t y, std::size_t f) const {
        return angles[(x * side + y) * features + f];
    }
};

} // namespace mltqnn
