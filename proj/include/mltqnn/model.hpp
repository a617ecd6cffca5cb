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
 * @file model.hpp
 * Hybrid multitask model: patch autoencoder -> quantum feature map ->
 * dense softmax classifier, with the reconstruction branch as an auxiliary
 * loss. Training uses minibatch Adam over a single flat parameter vector.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mltqnn/autoencoder.hpp"
#include "mltqnn/circuit.hpp"
#include "mltqnn/tensor.hpp"

namespace mltqnn {

struct ModelConfig {
    std::size_t N = 32;
    std::size_t P = 4;
    std::size_t E = 9;
    std::size_t M = 2;
    std::size_t K = 2;
    std::size_t channels = 4;
    std::size_t num_classes = 4;
    double alpha = 5.0;
    double learning_rate = 0.01;
    std::size_t batch_size = 50;
    std::size_t epochs = 200;
    std::size_t runs = 3;
    std::uint64_t seed = 0;
    bool reconstruction_enabled = true;
    bool lwm_enabled = true;
    std::size_t threads = 0; ///< 0: hardware concurrency; 1: sequential

    /// Throws ErrorKind::Config on violation.
    void validate() const;
    [[nodiscard]] CircuitConfig circuit() const;
    [[nodiscard]] AutoencoderShape autoencoder() const;

    /// Fields that fix the parameter layout.
    [[nodiscard]] bool same_structure(const ModelConfig &o) const noexcept;
};

/// Images with class labels.
struct Split {
    std::vector<ImageTensor> images;
    std::vector<std::size_t> labels;

    [[nodiscard]] std::size_t size() const noexcept { return images.size(); }
};

struct Segment {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
};

/// Flat trainable parameters with Adam moments.
struct ParameterStore {
    std::vector<Segment> segments; ///< autoencoder, quantum, classifier
    std::vector<double> values;
    std::vector<double> first;  ///< Adam m
    std::vector<double> second; ///< Adam v
    std::uint64_t step = 0;

    [[nodiscard]] const Segment &segment(const std::string &name) const;
    [[nodiscard]] std::span<double> view(const std::string &name);
    [[nodiscard]] std::span<const double> view(const std::string &name) const;
};

struct ForwardResult {
    std::vector<double> probabilities;
    ImageTensor reconstruction; ///< empty when the reconstruction branch is off
    ProcessedImage processed;
    std::vector<double> features;
};

/// Batch losses and the gradient of their total, in ParameterStore layout.
struct BatchGradient {
    double l_ce = 0.0;
    double l_mse = 0.0;
    double loss = 0.0;
    std::size_t correct = 0;
    std::vector<double> grad;
};

/// Mean cross entropy with probabilities clipped below at 1e-12.
[[nodiscard]] double cross_entropy(std::span<const std::vector<double>> probabilities,
                                   std::span<const std::size_t> labels);

[[nodiscard]] inline double total_loss(double l_ce, double l_mse, double alpha) noexcept {
    return l_ce + alpha * l_mse;
}

/// Softmax with max subtraction.
[[nodiscard]] std::vector<double> softmax(std::span<const double> logits);

/// Adam (0.9, 0.999, 1e-8) with bias correction; rejects non-finite gradients.
void adam_step(ParameterStore &store, std::span<const double> grads, double lr);

class HybridModel {
  public:
    explicit HybridModel(const ModelConfig &config);

    [[nodiscard]] const ModelConfig &config() const noexcept { return config_; }
    [[nodiscard]] const QuantumFeatureMap &feature_map() const noexcept { return qmap_; }
    [[nodiscard]] const PatchAutoencoder &autoencoder() const noexcept { return ae_; }
    [[nodiscard]] std::size_t num_features() const noexcept { return qmap_.num_features(); }

    /// Zero-valued store with this model's segment layout.
    [[nodiscard]] ParameterStore make_store() const;

    /// Glorot classical weights, zero biases, quantum angles in [0, 2 pi).
    [[nodiscard]] ParameterStore initialize(std::uint64_t seed) const;

    [[nodiscard]] ForwardResult forward(const ImageTensor &image,
                                        const ParameterStore &params) const;

    /// Per-sample losses and the gradient of mean(l_ce) + alpha * mean(l_mse)
    /// over samples `indices` of `data`. Reduction order is fixed, so the
    /// result does not depend on the thread count.
    [[nodiscard]] BatchGradient backward(const Split &data, std::span<const std::size_t> indices,
                                         const ParameterStore &params) const;

  private:
    struct SampleResult {
        double l_ce = 0.0;
        double l_mse = 0.0;
        bool correct = false;
        std::vector<double> grad; ///< of l_ce + alpha * l_mse for this sample
    };

    void check_image(const ImageTensor &image) const;
    SampleResult sample_gradient(const ImageTensor &image, std::size_t label,
                                 const ParameterStore &params) const;

    ModelConfig config_;
    QuantumFeatureMap qmap_;
    PatchAutoencoder ae_;
};

struct EpochMetrics {
    std::size_t epoch = 0; ///< 1-based
    double l_ce = 0.0;
    double l_mse = 0.0;
    double loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct StepRecord {
    std::size_t epoch = 0;
    std::uint64_t step = 0;
    double l_ce = 0.0;
    double l_mse = 0.0;
    double loss = 0.0;
};

struct RunResult {
    std::size_t run = 0;
    std::vector<EpochMetrics> history;
    std::vector<StepRecord> steps;
    ParameterStore best;
    std::size_t best_epoch = 0; ///< 0: no completed epoch
    bool diverged = false;
    std::string diagnostic;
};

/// Called after every completed epoch.
using EpochCallback = std::function<void(std::size_t run, const EpochMetrics &)>;

/// One training run with seed `config.seed + run`.
[[nodiscard]] RunResult train_run(const HybridModel &model, const Split &train,
                                  const Split &validation, std::size_t run,
                                  const EpochCallback &on_epoch = {});

/// `config.runs` independent runs.
[[nodiscard]] std::vector<RunResult> train(const HybridModel &model, const Split &train,
                                           const Split &validation,
                                           const EpochCallback &on_epoch = {});

struct Metrics {
    double accuracy = 0.0;
    double l_ce = 0.0;
    double l_mse = 0.0;
    double loss = 0.0;
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    std::vector<std::vector<std::size_t>> confusion; ///< [true][predicted]
    std::vector<std::size_t> predictions;
};

/// Precision, recall and F1 per class from labels and predictions, with
/// 0/0 taken as 0.
void classification_scores(std::span<const std::size_t> labels,
                           std::span<const std::size_t> predictions, std::size_t num_classes,
                           Metrics &out);

[[nodiscard]] Metrics evaluate(const HybridModel &model, const ParameterStore &params,
                               const Split &data);

/// Writes `<stem>.json` (manifest with config echo) and `<stem>.bin`
/// (values, Adam m, Adam v as little-endian float64).
void save_checkpoint(const std::filesystem::path &stem, const ModelConfig &config,
                     const ParameterStore &params);

struct Checkpoint {
    ModelConfig config;
    ParameterStore params;
};

/// Accepts the stem or either file of the pair.
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path &path);

std::string config_to_json(const ModelConfig &config);

/// Overlays keys present in `json` onto `base`. Unknown keys are an error.
[[nodiscard]] ModelConfig config_from_json(const std::string &json, ModelConfig base = {});

} // namespace mltqnn
