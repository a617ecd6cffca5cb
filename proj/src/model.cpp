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
#include "mltqnn/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

#include "json.hpp"
#include "mltqnn/error.hpp"

namespace mltqnn {

using json = nlohmann::json;

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kProbFloor = 1e-12;
constexpr int kFormatVersion = 1;

std::size_t thread_count(const ModelConfig &c, std::size_t work) {
    std::size_t t = c.threads;
    if (t == 0) {
        t = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    return std::max<std::size_t>(1, std::min(t, work));
}

/// Runs fn(i) for i in [0, n); items are independent.
template <class Fn> void parallel_for(std::size_t n, std::size_t threads, Fn &&fn) {
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = t; i < n; i += threads) fn(i);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
    }
    for (auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double sample_ce(std::span<const double> probs, std::size_t label) {
    return -std::log(std::max(probs[label], kProbFloor));
}

} // namespace

// ---------------------------------------------------------------- config

void ModelConfig::validate() const {
    require(N >= 1 && P >= 2, ErrorKind::Config, "need N >= 1 and P >= 2");
    circuit().validate();
    (void)autoencoder();
    require(channels >= 1, ErrorKind::Config, "channels must be positive");
    require(num_classes >= 2, ErrorKind::Config, "need at least two classes");
    require(std::isfinite(alpha) && alpha >= 0.0, ErrorKind::Config, "alpha must be >= 0");
    require(std::isfinite(learning_rate) && learning_rate > 0.0, ErrorKind::Config,
            "learning_rate must be positive");
    require(batch_size >= 1, ErrorKind::Config, "batch_size must be positive");
    require(runs >= 1, ErrorKind::Config, "runs must be >= 1");
}

CircuitConfig ModelConfig::circuit() const {
    CircuitConfig c;
    c.grid_log = grid_log_for(N, P);
    c.features = E;
    c.blocks = M;
    c.kernels = K;
    c.lwm_enabled = lwm_enabled;
    return c;
}

AutoencoderShape ModelConfig::autoencoder() const { return {P, channels, E}; }

bool ModelConfig::same_structure(const ModelConfig &o) const noexcept {
    return N == o.N && P == o.P && E == o.E && M == o.M && K == o.K &&
           channels == o.channels && num_classes == o.num_classes &&
           lwm_enabled == o.lwm_enabled;
}

std::string config_to_json(const ModelConfig &c) {
    json j;
    j["format_version"] = kFormatVersion;
    j["N"] = c.N;
    j["P"] = c.P;
    j["E"] = c.E;
    j["M"] = c.M;
    j["K"] = c.K;
    j["channels"] = c.channels;
    j["num_classes"] = c.num_classes;
    j["alpha"] = c.alpha;
    j["learning_rate"] = c.learning_rate;
    j["batch_size"] = c.batch_size;
    j["epochs"] = c.epochs;
    j["runs"] = c.runs;
    j["seed"] = c.seed;
    j["reconstruction_enabled"] = c.reconstruction_enabled;
    j["lwm_enabled"] = c.lwm_enabled;
    j["threads"] = c.threads;
    return j.dump(2) + "\n";
}

namespace {

template <class T> void read_key(const json &j, const char *key, T &out) {
    if (!j.contains(key)) return;
    try {
        if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
            require(j.at(key).is_number_unsigned() ||
                        (j.at(key).is_number_integer() && j.at(key).get<std::int64_t>() >= 0),
                    ErrorKind::Config, std::string("config key '") + key +
                                           "' must be a non-negative integer");
        }
        out = j.at(key).get<T>();
    } catch (const json::exception &e) {
        fail(ErrorKind::Config, std::string("config key '") + key + "': " + e.what());
    }
}

} // namespace

ModelConfig config_from_json(const std::string &text, ModelConfig c) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
    }
    require(j.is_object(), ErrorKind::Config, "config must be a JSON object");
    static const std::vector<std::string> known = {
        "format_version", "N",      "P",          "E",
        "M",              "K",      "channels",   "num_classes",
        "alpha",          "learning_rate", "batch_size", "epochs",
        "runs",           "seed",   "reconstruction_enabled", "lwm_enabled",
        "threads"};
    for (const auto &item : j.items()) {
        require(std::find(known.begin(), known.end(), item.key()) != known.end(),
                ErrorKind::Config, "unknown config key '" + item.key() + "'");
    }
    if (j.contains("format_version")) {
        require(j["format_version"] == kFormatVersion, ErrorKind::Config,
                "unsupported config format_version");
    }
    read_key(j, "N", c.N);
    read_key(j, "P", c.P);
    read_key(j, "E", c.E);
    read_key(j, "M", c.M);
    read_key(j, "K", c.K);
    read_key(j, "channels", c.channels);
    read_key(j, "num_classes", c.num_classes);
    read_key(j, "alpha", c.alpha);
    read_key(j, "learning_rate", c.learning_rate);
    read_key(j, "batch_size", c.batch_size);
    read_key(j, "epochs", c.epochs);
    read_key(j, "runs", c.runs);
    read_key(j, "seed", c.seed);
    read_key(j, "reconstruction_enabled", c.reconstruction_enabled);
    read_key(j, "lwm_enabled", c.lwm_enabled);
    read_key(j, "threads", c.threads);
    return c;
}

// ---------------------------------------------------------------- store

const Segment &ParameterStore::segment(const std::string &name) const {
    for (const auto &s : segments) {
        if (s.name == name) return s;
    }
    fail(ErrorKind::InvalidArgument, "no parameter segment named '" + name + "'");
}

std::span<double> ParameterStore::view(const std::string &name) {
    const auto &s = segment(name);
    return std::span<double>(values).subspan(s.offset, s.size);
}

std::span<const double> ParameterStore::view(const std::string &name) const {
    const auto &s = segment(name);
    return std::span<const double>(values).subspan(s.offset, s.size);
}

// ---------------------------------------------------------------- losses

std::vector<double> softmax(std::span<const double> logits) {
    require(!logits.empty(), ErrorKind::InvalidArgument, "softmax of an empty vector");
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (auto &v : p) v /= sum;
    return p;
}

double cross_entropy(std::span<const std::vector<double>> probabilities,
                     std::span<const std::size_t> labels) {
    require(probabilities.size() == labels.size() && !labels.empty(),
            ErrorKind::InvalidArgument, "cross_entropy needs matching non-empty batches");
    double sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto &p = probabilities[i];
        require(labels[i] < p.size(), ErrorKind::InvalidArgument,
                "label " + std::to_string(labels[i]) + " is out of range");
        const double total = std::accumulate(p.begin(), p.end(), 0.0);
        require(std::abs(total - 1.0) <= 1e-9, ErrorKind::InvalidArgument,
                "probability vector does not sum to 1");
        sum += sample_ce(p, labels[i]);
    }
    return sum / static_cast<double>(labels.size());
}

void adam_step(ParameterStore &store, std::span<const double> grads, double lr) {
    const std::size_t n = store.values.size();
    require(grads.size() == n && store.first.size() == n && store.second.size() == n,
            ErrorKind::InvalidArgument, "gradient layout does not match the parameter store");
    for (double g : grads) {
        require(std::isfinite(g), ErrorKind::Numeric, "non-finite gradient rejected");
    }
    store.step += 1;
    const double t = static_cast<double>(store.step);
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    for (std::size_t i = 0; i < n; ++i) {
        store.first[i] = kBeta1 * store.first[i] + (1.0 - kBeta1) * grads[i];
        store.second[i] = kBeta2 * store.second[i] + (1.0 - kBeta2) * grads[i] * grads[i];
        const double mhat = store.first[i] / c1;
        const double vhat = store.second[i] / c2;
        store.values[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
    }
}

// ---------------------------------------------------------------- model

HybridModel::HybridModel(const ModelConfig &config)
    : config_((config.validate(), config)), qmap_(config.circuit()), ae_(config.autoencoder()) {}

ParameterStore HybridModel::make_store() const {
    ParameterStore s;
    std::size_t offset = 0;
    const std::size_t classifier = config_.num_classes * (num_features() + 1);
    for (auto [name, size] : {std::pair<const char *, std::size_t>{"autoencoder", ae_.param_count()},
                              {"quantum", qmap_.num_params()},
                              {"classifier", classifier}}) {
        s.segments.push_back({name, offset, size});
        offset += size;
    }
    s.values.assign(offset, 0.0);
    s.first.assign(offset, 0.0);
    s.second.assign(offset, 0.0);
    return s;
}

ParameterStore HybridModel::initialize(std::uint64_t seed) const {
    ParameterStore s = make_store();
    std::mt19937_64 rng(seed);
    ae_.initialize(s.view("autoencoder"), rng);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (double &v : s.view("quantum")) v = angle(rng);
    const std::size_t F = num_features();
    const std::size_t C = config_.num_classes;
    const double limit = std::sqrt(6.0 / static_cast<double>(F + C));
    std::uniform_real_distribution<double> glorot(-limit, limit);
    auto cls = s.view("classifier");
    for (std::size_t i = 0; i < C * F; ++i) cls[i] = glorot(rng);
    return s;
}

void HybridModel::check_image(const ImageTensor &image) const {
    require(image.height == config_.N && image.width == config_.N &&
                image.channels == config_.channels,
            ErrorKind::InvalidArgument, "image shape does not match the model configuration");
}

ForwardResult HybridModel::forward(const ImageTensor &image, const ParameterStore &params) const {
    check_image(image);
    const auto ae = params.view("autoencoder");
    const auto cls = params.view("classifier");
    ForwardResult r;
    r.processed = ae_.encode_image(image, ae);
    r.features = qmap_.forward(r.processed, params.view("quantum"));

    const std::size_t F = num_features();
    const std::size_t C = config_.num_classes;
    std::vector<double> logits(C);
    for (std::size_t c = 0; c < C; ++c) {
        double acc = cls[C * F + c];
        for (std::size_t i = 0; i < F; ++i) acc += cls[c * F + i] * r.features[i];
        logits[c] = acc;
    }
    r.probabilities = softmax(logits);

    if (config_.reconstruction_enabled) {
        PatchGrid grid{r.processed.side, config_.P, config_.channels, {}};
        const std::size_t E = config_.E;
        for (std::size_t k = 0; k < grid.side * grid.side; ++k) {
            grid.patches.push_back(ae_.decode(
                std::span<const double>(r.processed.angles).subspan(k * E, E), ae));
        }
        r.reconstruction = unpatchify(grid);
    }
    return r;
}

HybridModel::SampleResult HybridModel::sample_gradient(const ImageTensor &image,
                                                       std::size_t label,
                                                       const ParameterStore &params) const {
    check_image(image);
    require(label < config_.num_classes, ErrorKind::InvalidArgument, "label out of range");
    const std::size_t F = num_features();
    const std::size_t C = config_.num_classes;
    const std::size_t E = config_.E;
    const auto &seg_ae = params.segment("autoencoder");
    const auto &seg_q = params.segment("quantum");
    const auto &seg_c = params.segment("classifier");
    const auto ae = params.view("autoencoder");
    const auto cls = params.view("classifier");

    SampleResult r;
    r.grad.assign(params.values.size(), 0.0);
    std::span<double> g_ae = std::span<double>(r.grad).subspan(seg_ae.offset, seg_ae.size);
    std::span<double> g_q = std::span<double>(r.grad).subspan(seg_q.offset, seg_q.size);
    std::span<double> g_c = std::span<double>(r.grad).subspan(seg_c.offset, seg_c.size);

    const PatchGrid grid = patchify(image, config_.P);
    const std::size_t npatch = grid.patches.size();
    std::vector<PatchAutoencoder::Cache> enc(npatch);
    ProcessedImage processed(grid.side, E);
    for (std::size_t k = 0; k < npatch; ++k) {
        const auto f = ae_.encode(grid.patches[k], ae, &enc[k]);
        std::copy(f.begin(), f.end(), processed.angles.begin() + static_cast<std::ptrdiff_t>(k * E));
    }

    QuantumState state(qmap_.program().num_qubits());
    const auto features = qmap_.forward(processed, params.view("quantum"), state);

    std::vector<double> logits(C);
    for (std::size_t c = 0; c < C; ++c) {
        double acc = cls[C * F + c];
        for (std::size_t i = 0; i < F; ++i) acc += cls[c * F + i] * features[i];
        logits[c] = acc;
    }
    const auto probs = softmax(logits);
    r.l_ce = sample_ce(probs, label);
    r.correct = argmax(probs) == label;

    std::vector<double> dlogits(C, 0.0);
    if (probs[label] >= kProbFloor) {
        for (std::size_t c = 0; c < C; ++c) dlogits[c] = probs[c] - (c == label ? 1.0 : 0.0);
    }
    std::vector<double> dfeatures(F, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
        g_c[C * F + c] = dlogits[c];
        for (std::size_t i = 0; i < F; ++i) {
            g_c[c * F + i] = dlogits[c] * features[i];
            dfeatures[i] += cls[c * F + i] * dlogits[c];
        }
    }

    auto qgrad = qmap_.backward(processed, params.view("quantum"), state, dfeatures);
    std::copy(qgrad.params.begin(), qgrad.params.end(), g_q.begin());
    std::vector<double> &dangles = qgrad.data;

    if (config_.reconstruction_enabled) {
        const double scale = 2.0 * config_.alpha / static_cast<double>(image.size());
        double sq = 0.0;
        for (std::size_t k = 0; k < npatch; ++k) {
            PatchAutoencoder::Cache dc;
            const auto feats = std::span<const double>(processed.angles).subspan(k * E, E);
            const ImageTensor rec = ae_.decode(feats, ae, &dc);
            const ImageTensor &orig = grid.patches[k];
            ImageTensor drec(rec.height, rec.width, rec.channels);
            for (std::size_t i = 0; i < rec.size(); ++i) {
                const double d = rec.values[i] - orig.values[i];
                sq += d * d;
                drec.values[i] = scale * d;
            }
            const auto dfeat = ae_.decode_backward(dc, drec, ae, g_ae);
            for (std::size_t e = 0; e < E; ++e) dangles[k * E + e] += dfeat[e];
        }
        r.l_mse = sq / static_cast<double>(image.size());
    }

    for (std::size_t k = 0; k < npatch; ++k) {
        ae_.encode_backward(enc[k], std::span<const double>(dangles).subspan(k * E, E), ae, g_ae);
    }
    return r;
}

BatchGradient HybridModel::backward(const Split &data, std::span<const std::size_t> indices,
                                    const ParameterStore &params) const {
    require(!indices.empty(), ErrorKind::InvalidArgument, "empty batch");
    require(params.values.size() == make_store().values.size(), ErrorKind::InvalidArgument,
            "parameter store layout does not match the model");
    for (std::size_t i : indices) {
        require(i < data.size(), ErrorKind::InvalidArgument, "batch index out of range");
    }
    std::vector<SampleResult> per(indices.size());
    parallel_for(indices.size(), thread_count(config_, indices.size()), [&](std::size_t b) {
        per[b] = sample_gradient(data.images[indices[b]], data.labels[indices[b]], params);
    });

    BatchGradient out;
    out.grad.assign(params.values.size(), 0.0);
    double ce = 0.0;
    double mse = 0.0;
    for (const auto &s : per) {
        ce += s.l_ce;
        mse += s.l_mse;
        out.correct += s.correct ? 1 : 0;
        for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += s.grad[i];
    }
    const double inv = 1.0 / static_cast<double>(indices.size());
    for (double &g : out.grad) g *= inv;
    out.l_ce = ce * inv;
    out.l_mse = mse * inv;
    out.loss = total_loss(out.l_ce, out.l_mse, config_.alpha);
    require(std::isfinite(out.loss), ErrorKind::Numeric,
            "non-finite training loss (l_ce=" + std::to_string(out.l_ce) +
                ", l_mse=" + std::to_string(out.l_mse) + ")");
    return out;
}

// ---------------------------------------------------------------- evaluation

void classification_scores(std::span<const std::size_t> labels,
                           std::span<const std::size_t> predictions, std::size_t num_classes,
                           Metrics &out) {
    require(labels.size() == predictions.size(), ErrorKind::InvalidArgument,
            "labels and predictions differ in length");
    out.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        require(labels[i] < num_classes && predictions[i] < num_classes,
                ErrorKind::InvalidArgument, "class index out of range");
        out.confusion[labels[i]][predictions[i]] += 1;
        correct += labels[i] == predictions[i] ? 1 : 0;
    }
    out.accuracy = labels.empty() ? 0.0
                                  : static_cast<double>(correct) /
                                        static_cast<double>(labels.size());
    out.precision.assign(num_classes, 0.0);
    out.recall.assign(num_classes, 0.0);
    out.f1.assign(num_classes, 0.0);
    for (std::size_t c = 0; c < num_classes; ++c) {
        const double tp = static_cast<double>(out.confusion[c][c]);
        double fp = 0.0;
        double fn = 0.0;
        for (std::size_t o = 0; o < num_classes; ++o) {
            if (o == c) continue;
            fp += static_cast<double>(out.confusion[o][c]);
            fn += static_cast<double>(out.confusion[c][o]);
        }
        const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        out.precision[c] = p;
        out.recall[c] = r;
        out.f1[c] = p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
    }
}

Metrics evaluate(const HybridModel &model, const ParameterStore &params, const Split &data) {
    require(data.size() > 0 && data.labels.size() == data.size(), ErrorKind::Data,
            "evaluation split is empty or inconsistent");
    const auto &cfg = model.config();
    std::vector<ForwardResult> out(data.size());
    parallel_for(data.size(), thread_count(cfg, data.size()),
                 [&](std::size_t i) { out[i] = model.forward(data.images[i], params); });

    Metrics m;
    m.predictions.resize(data.size());
    std::vector<std::vector<double>> probs(data.size());
    double mse = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        m.predictions[i] = argmax(out[i].probabilities);
        probs[i] = std::move(out[i].probabilities);
        if (cfg.reconstruction_enabled) {
            mse += reconstruction_loss(data.images[i], out[i].reconstruction);
        }
    }
    m.l_ce = cross_entropy(probs, data.labels);
    m.l_mse = mse / static_cast<double>(data.size());
    m.loss = total_loss(m.l_ce, m.l_mse, cfg.alpha);
    classification_scores(data.labels, m.predictions, cfg.num_classes, m);
    return m;
}

// ---------------------------------------------------------------- training

RunResult train_run(const HybridModel &model, const Split &train, const Split &validation,
                    std::size_t run, const EpochCallback &on_epoch) {
    const auto &cfg = model.config();
    require(train.size() > 0 && train.labels.size() == train.size(), ErrorKind::Data,
            "training split is empty or inconsistent");
    require(validation.size() > 0 && validation.labels.size() == validation.size(),
            ErrorKind::Data, "validation split is empty or inconsistent");

    RunResult res;
    res.run = run;
    const std::uint64_t seed = cfg.seed + run;
    ParameterStore store = model.initialize(seed);
    res.best = store;
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x5u};
    std::mt19937_64 shuffle_rng(seq);

    std::vector<std::size_t> order(train.size());
    double best_loss = std::numeric_limits<double>::infinity();
    try {
        for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::shuffle(order.begin(), order.end(), shuffle_rng);
            double ce_sum = 0.0;
            double mse_sum = 0.0;
            std::size_t correct = 0;
            for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
                const std::size_t len = std::min(cfg.batch_size, order.size() - start);
                const auto batch = std::span<const std::size_t>(order).subspan(start, len);
                const BatchGradient bg = model.backward(train, batch, store);
                adam_step(store, bg.grad, cfg.learning_rate);
                res.steps.push_back({epoch, store.step, bg.l_ce, bg.l_mse, bg.loss});
                ce_sum += bg.l_ce * static_cast<double>(len);
                mse_sum += bg.l_mse * static_cast<double>(len);
                correct += bg.correct;
            }
            EpochMetrics em;
            em.epoch = epoch;
            const double n = static_cast<double>(train.size());
            em.l_ce = ce_sum / n;
            em.l_mse = mse_sum / n;
            em.loss = total_loss(em.l_ce, em.l_mse, cfg.alpha);
            em.train_acc = static_cast<double>(correct) / n;
            const Metrics val = evaluate(model, store, validation);
            require(std::isfinite(val.loss), ErrorKind::Numeric, "non-finite validation loss");
            em.val_loss = val.loss;
            em.val_acc = val.accuracy;
            if (val.loss < best_loss) {
                best_loss = val.loss;
                res.best = store;
                res.best_epoch = epoch;
            }
            res.history.push_back(em);
            if (on_epoch) on_epoch(run, em);
        }
    } catch (const Error &e) {
        if (e.kind() != ErrorKind::Numeric) throw;
        res.diverged = true;
        res.diagnostic = "run " + std::to_string(run) + " diverged at epoch " +
                         std::to_string(res.history.size() + 1) + ": " + e.what();
    }
    return res;
}

std::vector<RunResult> train(const HybridModel &model, const Split &train,
                             const Split &validation, const EpochCallback &on_epoch) {
    std::vector<RunResult> out;
    for (std::size_t r = 0; r < model.config().runs; ++r) {
        out.push_back(train_run(model, train, validation, r, on_epoch));
    }
    return out;
}

// ---------------------------------------------------------------- checkpoints

namespace {

std::filesystem::path stem_of(const std::filesystem::path &p) {
    const auto ext = p.extension();
    if (ext == ".json" || ext == ".bin") {
        auto s = p;
        return s.replace_extension();
    }
    return p;
}

std::filesystem::path with_ext(const std::filesystem::path &stem, const char *ext) {
    return std::filesystem::path(stem.string() + ext);
}

void put_f64(std::ostream &os, double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFFU);
    os.write(bytes, 8);
}

double get_f64(const unsigned char *p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

} // namespace

void save_checkpoint(const std::filesystem::path &path, const ModelConfig &config,
                     const ParameterStore &params) {
    const auto stem = stem_of(path);
    const std::size_t n = params.values.size();
    require(params.first.size() == n && params.second.size() == n, ErrorKind::InvalidArgument,
            "parameter store is inconsistent");
    json j;
    j["format_version"] = kFormatVersion;
    j["config"] = json::parse(config_to_json(config));
    j["segments"] = json::array();
    for (const auto &s : params.segments) {
        j["segments"].push_back({{"name", s.name}, {"offset", s.offset}, {"size", s.size}});
    }
    j["adam"] = {{"step", params.step}, {"beta1", kBeta1}, {"beta2", kBeta2},
                 {"epsilon", kAdamEps}};
    j["data_file"] = with_ext(stem, ".bin").filename().string();
    j["dtype"] = "float64";
    j["byte_order"] = "little";
    j["arrays"] = json::array({json{{"name", "values"}, {"count", n}},
                               json{{"name", "adam_first"}, {"count", n}},
                               json{{"name", "adam_second"}, {"count", n}}});

    std::ofstream bin(with_ext(stem, ".bin"), std::ios::binary | std::ios::trunc);
    require(bin.good(), ErrorKind::Data, "cannot write " + with_ext(stem, ".bin").string());
    for (const auto *arr : {&params.values, &params.first, &params.second}) {
        for (double v : *arr) put_f64(bin, v);
    }
    bin.close();
    std::ofstream man(with_ext(stem, ".json"), std::ios::trunc);
    require(man.good(), ErrorKind::Data, "cannot write " + with_ext(stem, ".json").string());
    man << j.dump(2) << "\n";
    require(man.good(), ErrorKind::Data, "failed writing checkpoint manifest");
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
    const auto stem = stem_of(path);
    const auto man_path = with_ext(stem, ".json");
    std::ifstream man(man_path);
    require(man.good(), ErrorKind::Data, "checkpoint manifest not found: " + man_path.string());
    json j;
    try {
        j = json::parse(man);
    } catch (const json::exception &e) {
        fail(ErrorKind::Data, "malformed checkpoint manifest: " + std::string(e.what()));
    }
    Checkpoint ck;
    try {
        require(j.at("format_version") == kFormatVersion, ErrorKind::Data,
                "unsupported checkpoint format_version");
        ck.config = config_from_json(j.at("config").dump());
        std::size_t total = 0;
        for (const auto &s : j.at("segments")) {
            Segment seg{s.at("name").get<std::string>(), s.at("offset").get<std::size_t>(),
                        s.at("size").get<std::size_t>()};
            require(seg.offset == total, ErrorKind::Data, "checkpoint segments are not contiguous");
            total += seg.size;
            ck.params.segments.push_back(seg);
        }
        ck.params.step = j.at("adam").at("step").get<std::uint64_t>();
        const auto bin_path = stem.parent_path() / j.at("data_file").get<std::string>();
        std::ifstream bin(bin_path, std::ios::binary);
        require(bin.good(), ErrorKind::Data, "checkpoint data not found: " + bin_path.string());
        std::vector<unsigned char> raw((std::istreambuf_iterator<char>(bin)),
                                       std::istreambuf_iterator<char>());
        require(raw.size() == 3 * 8 * total, ErrorKind::Data,
                "checkpoint data has " + std::to_string(raw.size()) + " bytes, expected " +
                    std::to_string(3 * 8 * total));
        std::size_t pos = 0;
        for (auto *arr : {&ck.params.values, &ck.params.first, &ck.params.second}) {
            arr->resize(total);
            for (auto &v : *arr) {
                v = get_f64(raw.data() + pos);
                pos += 8;
            }
        }
    } catch (const json::exception &e) {
        fail(ErrorKind::Data, "malformed checkpoint manifest: " + std::string(e.what()));
    }
    return ck;
}

} // namespace mltqnn
