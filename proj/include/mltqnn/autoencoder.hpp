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
 * @file autoencoder.hpp
 * Patch autoencoder of the auxiliary reconstruction task.
 *
 * Encoder: [3x3 same conv -> 4 ch, ReLU, 2x2 max-pool] until the patch is
 * 2x2, flatten, dense -> E, head pi * sigmoid. Decoder: dense E -> 2x2x4,
 * [2x2 stride-2 transposed conv -> 4 ch, ReLU] until P x P, 3x3 same conv
 * -> channels, sigmoid head.
 *
 * Parameter layout (flat, encoder block first, then decoder block):
 *   conv:            W[out][in][3][3], b[out]
 *   dense:           W[out][in], b[out]
 *   transposed conv: W[in][out][2][2], b[out]
 * Tensors are (row, col, channel) row-major.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mltqnn/tensor.hpp"

namespace mltqnn {

/// side x side patches of P x P x channels, row-major over (x, y).
struct PatchGrid {
    std::size_t side = 0;
    std::size_t patch = 0;
    std::size_t channels = 0;
    std::vector<ImageTensor> patches;
};

[[nodiscard]] PatchGrid patchify(const ImageTensor &image, std::size_t patch_size);
[[nodiscard]] ImageTensor unpatchify(const PatchGrid &grid);

namespace detail {
enum class LayerKind { Conv3, Relu, MaxPool, Dense, ConvT2, AngleHead, SigmoidHead };

struct Layer {
    LayerKind kind;
    std::size_t in_h, in_w, in_c;
    std::size_t out_h, out_w, out_c;
    std::size_t offset; ///< first parameter in the segment
    std::size_t weights, biases;
    std::size_t fan_in, fan_out;
};
} // namespace detail

struct AutoencoderShape {
    std::size_t patch = 4;
    std::size_t channels = 4;
    std::size_t features = 9;
};

class PatchAutoencoder {
  public:
    static constexpr std::size_t kHiddenChannels = 4;

    explicit PatchAutoencoder(AutoencoderShape shape);

    /// Per-pass intermediates needed by the backward pass.
    struct Cache {
        std::vector<std::vector<double>> inputs; ///< input of every layer
        std::vector<double> output;
        std::vector<std::vector<std::uint32_t>> argmax; ///< max-pool winners
        std::vector<std::int64_t> kinks;

        /// ReLU on/off bits and pooling winners; equal signatures mean the
        /// network is smooth along the path between two inputs.
        [[nodiscard]] std::vector<std::int64_t> signature() const;
    };

    [[nodiscard]] const AutoencoderShape &shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t encoder_param_count() const noexcept { return encoder_params_; }
    [[nodiscard]] std::size_t decoder_param_count() const noexcept { return decoder_params_; }
    [[nodiscard]] std::size_t param_count() const noexcept {
        return encoder_params_ + decoder_params_;
    }

    /// Glorot-uniform weights, zero biases.
    void initialize(std::span<double> params, std::mt19937_64 &rng) const;

    /// E features in [0, pi]. `params` is the whole autoencoder segment.
    [[nodiscard]] std::vector<double> encode(const ImageTensor &patch,
                                             std::span<const double> params,
                                             Cache *cache = nullptr) const;

    /// Accumulates d/d encoder params into grad (whole-segment layout).
    void encode_backward(const Cache &cache, std::span<const double> dfeatures,
                         std::span<const double> params, std::span<double> grad) const;

    /// P x P x channels patch with values in [0, 1].
    [[nodiscard]] ImageTensor decode(std::span<const double> features,
                                     std::span<const double> params,
                                     Cache *cache = nullptr) const;

    /// Accumulates d/d decoder params into grad; returns d/d features.
    std::vector<double> decode_backward(const Cache &cache, const ImageTensor &doutput,
                                        std::span<const double> params,
                                        std::span<double> grad) const;

    /// Encodes every patch of `image`.
    [[nodiscard]] ProcessedImage encode_image(const ImageTensor &image,
                                              std::span<const double> params) const;

  private:
    std::vector<double> run(const std::vector<detail::Layer> &net, std::vector<double> x,
                            std::span<const double> params, Cache *cache) const;
    std::vector<double> run_backward(const std::vector<detail::Layer> &net, const Cache &cache,
                                     std::vector<double> dy, std::span<const double> params,
                                     std::span<double> grad) const;

    AutoencoderShape shape_;
    std::vector<detail::Layer> encoder_;
    std::vector<detail::Layer> decoder_;
    std::size_t encoder_params_ = 0;
    std::size_t decoder_params_ = 0;
};

/// Batch mean of per-image mean squared error.
[[nodiscard]] double reconstruction_loss(std::span<const ImageTensor> originals,
                                         std::span<const ImageTensor> reconstructed);

[[nodiscard]] double reconstruction_loss(const ImageTensor &original,
                                         const ImageTensor &reconstructed);

} // namespace mltqnn
