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
#include "mltqnn/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mltqnn/error.hpp"

namespace mltqnn {

using detail::Layer;
using detail::LayerKind;

namespace {

bool is_pow2(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

double sigmoid(double x) {
    if (x >= 0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

struct Shape3 {
    std::size_t h, w, c;
};

Layer make_layer(LayerKind kind, Shape3 in, std::size_t out_c, std::size_t &offset) {
    Layer l{kind, in.h, in.w, in.c, in.h, in.w, in.c, offset, 0, 0, 0, 0};
    switch (kind) {
    case LayerKind::Conv3:
        l.out_c = out_c;
        l.weights = out_c * in.c * 9;
        l.biases = out_c;
        l.fan_in = in.c * 9;
        l.fan_out = out_c * 9;
        break;
    case LayerKind::MaxPool:
        l.out_h = in.h / 2;
        l.out_w = in.w / 2;
        break;
    case LayerKind::Dense:
        l.out_h = 1;
        l.out_w = 1;
        l.out_c = out_c;
        l.weights = out_c * in.h * in.w * in.c;
        l.biases = out_c;
        l.fan_in = in.h * in.w * in.c;
        l.fan_out = out_c;
        break;
    case LayerKind::ConvT2:
        l.out_h = in.h * 2;
        l.out_w = in.w * 2;
        l.out_c = out_c;
        l.weights = in.c * out_c * 4;
        l.biases = out_c;
        l.fan_in = in.c * 4;
        l.fan_out = out_c * 4;
        break;
    case LayerKind::Relu:
    case LayerKind::AngleHead:
    case LayerKind::SigmoidHead:
        break;
    }
    offset += l.weights + l.biases;
    return l;
}

Shape3 out_shape(const Layer &l) { return {l.out_h, l.out_w, l.out_c}; }

// --- per-layer kernels ------------------------------------------------------

void conv3_forward(const Layer &l, std::span<const double> x, std::span<const double> p,
                   std::vector<double> &y) {
    const auto *w = p.data() + l.offset;
    const auto *b = w + l.weights;
    const std::size_t H = l.in_h, W = l.in_w, C = l.in_c, O = l.out_c;
    y.assign(H * W * O, 0.0);
    for (std::size_t r = 0; r < H; ++r) {
        for (std::size_t c = 0; c < W; ++c) {
            for (std::size_t o = 0; o < O; ++o) {
                double acc = b[o];
                for (std::size_t ky = 0; ky < 3; ++ky) {
                    const std::size_t rr = r + ky;
                    if (rr < 1 || rr > H) continue;
                    for (std::size_t kx = 0; kx < 3; ++kx) {
                        const std::size_t cc = c + kx;
                        if (cc < 1 || cc > W) continue;
                        const double *xin = x.data() + ((rr - 1) * W + (cc - 1)) * C;
                        const double *wk = w + (o * C) * 9 + ky * 3 + kx;
                        for (std::size_t i = 0; i < C; ++i) {
                            acc += wk[i * 9] * xin[i];
                        }
                    }
                }
                y[(r * W + c) * O + o] = acc;
            }
        }
    }
}

void conv3_backward(const Layer &l, std::span<const double> x, std::span<const double> dy,
                    std::span<const double> p, std::span<double> g, std::vector<double> &dx) {
    const auto *w = p.data() + l.offset;
    double *gw = g.data() + l.offset;
    double *gb = gw + l.weights;
    const std::size_t H = l.in_h, W = l.in_w, C = l.in_c, O = l.out_c;
    dx.assign(H * W * C, 0.0);
    for (std::size_t r = 0; r < H; ++r) {
        for (std::size_t c = 0; c < W; ++c) {
            for (std::size_t o = 0; o < O; ++o) {
                const double d = dy[(r * W + c) * O + o];
                gb[o] += d;
                for (std::size_t ky = 0; ky < 3; ++ky) {
                    const std::size_t rr = r + ky;
                    if (rr < 1 || rr > H) continue;
                    for (std::size_t kx = 0; kx < 3; ++kx) {
                        const std::size_t cc = c + kx;
                        if (cc < 1 || cc > W) continue;
                        const std::size_t base = ((rr - 1) * W + (cc - 1)) * C;
                        const std::size_t wbase = (o * C) * 9 + ky * 3 + kx;
                        for (std::size_t i = 0; i < C; ++i) {
                            gw[wbase + i * 9] += d * x[base + i];
                            dx[base + i] += d * w[wbase + i * 9];
                        }
                    }
                }
            }
        }
    }
}

void maxpool_forward(const Layer &l, std::span<const double> x, std::vector<double> &y,
                     std::vector<std::uint32_t> &arg) {
    const std::size_t W = l.in_w, C = l.in_c, OH = l.out_h, OW = l.out_w;
    y.assign(OH * OW * C, 0.0);
    arg.assign(OH * OW * C, 0);
    for (std::size_t r = 0; r < OH; ++r) {
        for (std::size_t c = 0; c < OW; ++c) {
            for (std::size_t ch = 0; ch < C; ++ch) {
                std::size_t best = ((2 * r) * W + 2 * c) * C + ch;
                for (std::size_t dr = 0; dr < 2; ++dr) {
                    for (std::size_t dc = 0; dc < 2; ++dc) {
                        const std::size_t idx = ((2 * r + dr) * W + 2 * c + dc) * C + ch;
                        if (x[idx] > x[best]) best = idx;
                    }
                }
                y[(r * OW + c) * C + ch] = x[best];
                arg[(r * OW + c) * C + ch] = static_cast<std::uint32_t>(best);
            }
        }
    }
}

void dense_forward(const Layer &l, std::span<const double> x, std::span<const double> p,
                   std::vector<double> &y) {
    const auto *w = p.data() + l.offset;
    const auto *b = w + l.weights;
    const std::size_t in = l.fan_in;
    const std::size_t out = l.biases;
    y.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
        double acc = b[o];
        for (std::size_t i = 0; i < in; ++i) {
            acc += w[o * in + i] * x[i];
        }
        y[o] = acc;
    }
}

void dense_backward(const Layer &l, std::span<const double> x, std::span<const double> dy,
                    std::span<const double> p, std::span<double> g, std::vector<double> &dx) {
    const auto *w = p.data() + l.offset;
    double *gw = g.data() + l.offset;
    double *gb = gw + l.weights;
    const std::size_t in = l.fan_in;
    const std::size_t out = l.biases;
    dx.assign(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
        const double d = dy[o];
        gb[o] += d;
        for (std::size_t i = 0; i < in; ++i) {
            gw[o * in + i] += d * x[i];
            dx[i] += d * w[o * in + i];
        }
    }
}

void convt2_forward(const Layer &l, std::span<const double> x, std::span<const double> p,
                    std::vector<double> &y) {
    const auto *w = p.data() + l.offset;
    const auto *b = w + l.weights;
    const std::size_t H = l.in_h, W = l.in_w, C = l.in_c, O = l.out_c, OW = l.out_w;
    y.assign(l.out_h * OW * O, 0.0);
    for (std::size_t r = 0; r < H; ++r) {
        for (std::size_t c = 0; c < W; ++c) {
            const double *xin = x.data() + (r * W + c) * C;
            for (std::size_t ky = 0; ky < 2; ++ky) {
                for (std::size_t kx = 0; kx < 2; ++kx) {
                    double *yo = y.data() + ((2 * r + ky) * OW + 2 * c + kx) * O;
                    for (std::size_t o = 0; o < O; ++o) {
                        double acc = b[o];
                        for (std::size_t i = 0; i < C; ++i) {
                            acc += xin[i] * w[((i * O + o) * 2 + ky) * 2 + kx];
                        }
                        yo[o] = acc;
                    }
                }
            }
        }
    }
}

void convt2_backward(const Layer &l, std::span<const double> x, std::span<const double> dy,
                     std::span<const double> p, std::span<double> g, std::vector<double> &dx) {
    const auto *w = p.data() + l.offset;
    double *gw = g.data() + l.offset;
    double *gb = gw + l.weights;
    const std::size_t H = l.in_h, W = l.in_w, C = l.in_c, O = l.out_c, OW = l.out_w;
    dx.assign(H * W * C, 0.0);
    for (std::size_t r = 0; r < H; ++r) {
        for (std::size_t c = 0; c < W; ++c) {
            const std::size_t xb = (r * W + c) * C;
            for (std::size_t ky = 0; ky < 2; ++ky) {
                for (std::size_t kx = 0; kx < 2; ++kx) {
                    const std::size_t yb = ((2 * r + ky) * OW + 2 * c + kx) * O;
                    for (std::size_t o = 0; o < O; ++o) {
                        const double d = dy[yb + o];
                        gb[o] += d;
                        for (std::size_t i = 0; i < C; ++i) {
                            const std::size_t wi = ((i * O + o) * 2 + ky) * 2 + kx;
                            gw[wi] += d * x[xb + i];
                            dx[xb + i] += d * w[wi];
                        }
                    }
                }
            }
        }
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Patches

PatchGrid patchify(const ImageTensor &image, std::size_t patch_size) {
    require(image.height == image.width, ErrorKind::InvalidArgument,
            "images must be square");
    require(image.values.size() == image.height * image.width * image.channels,
            ErrorKind::InvalidArgument, "image buffer size does not match its shape");
    require(patch_size >= 1 && image.height % patch_size == 0 &&
                is_pow2(image.height / patch_size),
            ErrorKind::InvalidArgument,
            "patch size " + std::to_string(patch_size) + " does not tile a " +
                std::to_string(image.height) + "-pixel image into 2^g x 2^g patches");
    PatchGrid grid;
    grid.side = image.height / patch_size;
    grid.patch = patch_size;
    grid.channels = image.channels;
    grid.patches.reserve(grid.side * grid.side);
    for (std::size_t x = 0; x < grid.side; ++x) {
        for (std::size_t y = 0; y < grid.side; ++y) {
            ImageTensor p(patch_size, patch_size, image.channels);
            for (std::size_t r = 0; r < patch_size; ++r) {
                const double *src = &image.values[((x * patch_size + r) * image.width +
                                                   y * patch_size) *
                                                  image.channels];
                std::copy(src, src + patch_size * image.channels,
                          p.values.begin() + static_cast<std::ptrdiff_t>(
                                                 r * patch_size * image.channels));
            }
            grid.patches.push_back(std::move(p));
        }
    }
    return grid;
}

ImageTensor unpatchify(const PatchGrid &grid) {
    require(grid.patches.size() == grid.side * grid.side, ErrorKind::InvalidArgument,
            "patch grid is incomplete");
    const std::size_t n = grid.side * grid.patch;
    ImageTensor image(n, n, grid.channels);
    for (std::size_t x = 0; x < grid.side; ++x) {
        for (std::size_t y = 0; y < grid.side; ++y) {
            const ImageTensor &p = grid.patches[x * grid.side + y];
            require(p.height == grid.patch && p.width == grid.patch &&
                        p.channels == grid.channels,
                    ErrorKind::InvalidArgument, "patch shape mismatch");
            for (std::size_t r = 0; r < grid.patch; ++r) {
                std::copy_n(p.values.begin() +
                                static_cast<std::ptrdiff_t>(r * grid.patch * grid.channels),
                            grid.patch * grid.channels,
                            image.values.begin() +
                                static_cast<std::ptrdiff_t>(
                                    ((x * grid.patch + r) * n + y * grid.patch) *
                                    grid.channels));
            }
        }
    }
    return image;
}

// ---------------------------------------------------------------------------
// PatchAutoencoder

PatchAutoencoder::PatchAutoencoder(AutoencoderShape shape) : shape_(shape) {
    require(shape.patch >= 2 && is_pow2(shape.patch), ErrorKind::Config,
            "autoencoder patch size must be a power of two >= 2, got " +
                std::to_string(shape.patch));
    require(shape.channels >= 1 && shape.features >= 1, ErrorKind::Config,
            "autoencoder needs at least one channel and one feature");

    std::size_t offset = 0;
    Shape3 cur{shape.patch, shape.patch, shape.channels};
    auto push = [&](std::vector<Layer> &net, LayerKind kind, std::size_t out_c) {
        net.push_back(make_layer(kind, cur, out_c, offset));
        cur = out_shape(net.back());
    };

    while (cur.h > 2) {
        push(encoder_, LayerKind::Conv3, kHiddenChannels);
        push(encoder_, LayerKind::Relu, 0);
        push(encoder_, LayerKind::MaxPool, 0);
    }
    push(encoder_, LayerKind::Dense, shape.features);
    push(encoder_, LayerKind::AngleHead, 0);
    encoder_params_ = offset;

    cur = Shape3{1, 1, shape.features};
    push(decoder_, LayerKind::Dense, 2 * 2 * kHiddenChannels);
    decoder_.back().out_h = 2;
    decoder_.back().out_w = 2;
    decoder_.back().out_c = kHiddenChannels;
    cur = out_shape(decoder_.back());
    while (cur.h < shape.patch) {
        push(decoder_, LayerKind::ConvT2, kHiddenChannels);
        push(decoder_, LayerKind::Relu, 0);
    }
    push(decoder_, LayerKind::Conv3, shape.channels);
    push(decoder_, LayerKind::SigmoidHead, 0);
    decoder_params_ = offset - encoder_params_;
}

void PatchAutoencoder::initialize(std::span<double> params, std::mt19937_64 &rng) const {
    require(params.size() == param_count(), ErrorKind::InvalidArgument,
            "autoencoder parameter segment has the wrong length");
    for (const auto *net : {&encoder_, &decoder_}) {
        for (const Layer &l : *net) {
            if (l.weights == 0) continue;
            const double limit =
                std::sqrt(6.0 / static_cast<double>(l.fan_in + l.fan_out));
            std::uniform_real_distribution<double> dist(-limit, limit);
            for (std::size_t i = 0; i < l.weights; ++i) {
                params[l.offset + i] = dist(rng);
            }
            std::fill_n(params.begin() + static_cast<std::ptrdiff_t>(l.offset + l.weights),
                        l.biases, 0.0);
        }
    }
}

std::vector<std::int64_t> PatchAutoencoder::Cache::signature() const { return kinks; }

std::vector<double> PatchAutoencoder::run(const std::vector<Layer> &net, std::vector<double> x,
                                          std::span<const double> params,
                                          Cache *cache) const {
    if (cache != nullptr) {
        cache->inputs.assign(net.size(), {});
        cache->argmax.assign(net.size(), {});
        cache->kinks.clear();
    }
    std::vector<double> y;
    std::vector<std::uint32_t> arg;
    for (std::size_t li = 0; li < net.size(); ++li) {
        const Layer &l = net[li];
        switch (l.kind) {
        case LayerKind::Conv3:
            conv3_forward(l, x, params, y);
            break;
        case LayerKind::Dense:
            dense_forward(l, x, params, y);
            break;
        case LayerKind::ConvT2:
            convt2_forward(l, x, params, y);
            break;
        case LayerKind::MaxPool:
            maxpool_forward(l, x, y, arg);
            if (cache != nullptr) {
                cache->kinks.insert(cache->kinks.end(), arg.begin(), arg.end());
                cache->argmax[li] = arg;
            }
            break;
        case LayerKind::Relu:
            if (cache != nullptr) {
                for (double v : x) cache->kinks.push_back(v > 0.0 ? 1 : 0);
            }
            y.resize(x.size());
            std::transform(x.begin(), x.end(), y.begin(),
                           [](double v) { return v > 0.0 ? v : 0.0; });
            break;
        case LayerKind::AngleHead:
            y.resize(x.size());
            std::transform(x.begin(), x.end(), y.begin(),
                           [](double v) { return std::numbers::pi * sigmoid(v); });
            break;
        case LayerKind::SigmoidHead:
            y.resize(x.size());
            std::transform(x.begin(), x.end(), y.begin(), sigmoid);
            break;
        }
        if (cache != nullptr) cache->inputs[li] = std::move(x);
        x = std::move(y);
        y.clear();
    }
    if (cache != nullptr) cache->output = x;
    return x;
}

std::vector<double> PatchAutoencoder::run_backward(const std::vector<Layer> &net,
                                                   const Cache &cache, std::vector<double> dy,
                                                   std::span<const double> params,
                                                   std::span<double> grad) const {
    require(cache.inputs.size() == net.size(), ErrorKind::InvalidArgument,
            "cache does not belong to this network");
    std::vector<double> dx;
    for (std::size_t li = net.size(); li-- > 0;) {
        const Layer &l = net[li];
        const std::vector<double> &x = cache.inputs[li];
        switch (l.kind) {
        case LayerKind::Conv3:
            conv3_backward(l, x, dy, params, grad, dx);
            break;
        case LayerKind::Dense:
            dense_backward(l, x, dy, params, grad, dx);
            break;
        case LayerKind::ConvT2:
            convt2_backward(l, x, dy, params, grad, dx);
            break;
        case LayerKind::MaxPool: {
            dx.assign(x.size(), 0.0);
            const auto &arg = cache.argmax[li];
            for (std::size_t k = 0; k < arg.size(); ++k) dx[arg[k]] += dy[k];
            break;
        }
        case LayerKind::Relu:
            dx.resize(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) dx[k] = x[k] > 0.0 ? dy[k] : 0.0;
            break;
        case LayerKind::AngleHead:
            dx.resize(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) {
                const double s = sigmoid(x[k]);
                dx[k] = dy[k] * std::numbers::pi * s * (1.0 - s);
            }
            break;
        case LayerKind::SigmoidHead:
            dx.resize(x.size());
            for (std::size_t k = 0; k < x.size(); ++k) {
                const double s = sigmoid(x[k]);
                dx[k] = dy[k] * s * (1.0 - s);
            }
            break;
        }
        dy = std::move(dx);
        dx.clear();
    }
    return dy;
}

std::vector<double> PatchAutoencoder::encode(const ImageTensor &patch,
                                             std::span<const double> params,
                                             Cache *cache) const {
    require(patch.height == shape_.patch && patch.width == shape_.patch &&
                patch.channels == shape_.channels,
            ErrorKind::InvalidArgument, "patch shape does not match the autoencoder");
    require(params.size() == param_count(), ErrorKind::InvalidArgument,
            "autoencoder parameter segment has the wrong length");
    return run(encoder_, patch.values, params, cache);
}

void PatchAutoencoder::encode_backward(const Cache &cache, std::span<const double> dfeatures,
                                       std::span<const double> params,
                                       std::span<double> grad) const {
    require(dfeatures.size() == shape_.features && grad.size() == param_count(),
            ErrorKind::InvalidArgument, "encoder backward shape mismatch");
    (void)run_backward(encoder_, cache, {dfeatures.begin(), dfeatures.end()}, params, grad);
}

ImageTensor PatchAutoencoder::decode(std::span<const double> features,
                                     std::span<const double> params, Cache *cache) const {
    require(features.size() == shape_.features, ErrorKind::InvalidArgument,
            "decoder expects " + std::to_string(shape_.features) + " features");
    require(params.size() == param_count(), ErrorKind::InvalidArgument,
            "autoencoder parameter segment has the wrong length");
    ImageTensor out(shape_.patch, shape_.patch, shape_.channels);
    out.values = run(decoder_, {features.begin(), features.end()}, params, cache);
    return out;
}

std::vector<double> PatchAutoencoder::decode_backward(const Cache &cache,
                                                      const ImageTensor &doutput,
                                                      std::span<const double> params,
                                                      std::span<double> grad) const {
    require(doutput.height == shape_.patch && doutput.width == shape_.patch &&
                doutput.channels == shape_.channels && grad.size() == param_count(),
            ErrorKind::InvalidArgument, "decoder backward shape mismatch");
    return run_backward(decoder_, cache, doutput.values, params, grad);
}

ProcessedImage PatchAutoencoder::encode_image(const ImageTensor &image,
                                              std::span<const double> params) const {
    const PatchGrid grid = patchify(image, shape_.patch);
    ProcessedImage out(grid.side, shape_.features);
    for (std::size_t k = 0; k < grid.patches.size(); ++k) {
        const auto f = encode(grid.patches[k], params);
        std::copy(f.begin(), f.end(),
                  out.angles.begin() + static_cast<std::ptrdiff_t>(k * shape_.features));
    }
    return out;
}

// ---------------------------------------------------------------------------

double reconstruction_loss(const ImageTensor &original, const ImageTensor &reconstructed) {
    require(original.same_shape(reconstructed) &&
                original.values.size() == reconstructed.values.size() &&
                !original.values.empty(),
            ErrorKind::InvalidArgument, "reconstruction loss: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < original.values.size(); ++i) {
        const double d = original.values[i] - reconstructed.values[i];
        acc += d * d;
    }
    return acc / static_cast<double>(original.values.size());
}

double reconstruction_loss(std::span<const ImageTensor> originals,
                           std::span<const ImageTensor> reconstructed) {
    require(originals.size() == reconstructed.size() && !originals.empty(),
            ErrorKind::InvalidArgument, "reconstruction loss: batch size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < originals.size(); ++i) {
        acc += reconstruction_loss(originals[i], reconstructed[i]);
    }
    return acc / static_cast<double>(originals.size());
}

} // namespace mltqnn
