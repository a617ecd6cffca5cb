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
#include "mltqnn/mltqnn.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "mltqnn/analysis.hpp"
#include "mltqnn/dataio.hpp"
#include "mltqnn/error.hpp"
#include "mltqnn/model.hpp"

using namespace mltqnn;
using json = nlohmann::json;
namespace fs = std::filesystem;

struct mltq_config {
    ModelConfig model;
    double train_fraction = 1.0;
    std::string minority; ///< "CLASS:FRACTION" or empty
    bool deterministic = false;
    std::size_t pad_to = 0;
    std::set<std::string> explicit_keys;
};

struct mltq_model {
    Checkpoint checkpoint;
    std::unique_ptr<HybridModel> model;
};

struct mltq_dataset {
    Dataset data;
};

namespace {

thread_local std::string g_last_error;

const std::set<std::string> kRunKeys = {"train_fraction", "minority", "deterministic", "pad_to"};
const char *const kStructuralKeys[] = {"N", "P", "E", "M", "K", "channels", "num_classes",
                                       "lwm_enabled"};

mltq_status status_of(ErrorKind k) {
    switch (k) {
    case ErrorKind::Config: return MLTQ_ERR_CONFIG;
    case ErrorKind::Data: return MLTQ_ERR_DATA;
    case ErrorKind::Numeric: return MLTQ_ERR_NUMERIC;
    case ErrorKind::InvalidArgument: return MLTQ_ERR_ARGUMENT;
    }
    return MLTQ_ERR_INTERNAL;
}

template <class Fn> mltq_status guarded(Fn &&fn) {
    try {
        g_last_error.clear();
        fn();
        return MLTQ_OK;
    } catch (const Error &e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const fs::filesystem_error &e) {
        g_last_error = e.what();
        return MLTQ_ERR_DATA;
    } catch (const std::bad_alloc &) {
        g_last_error = "out of memory";
        return MLTQ_ERR_INTERNAL;
    } catch (const std::exception &e) {
        g_last_error = e.what();
        return MLTQ_ERR_INTERNAL;
    }
}

void need(const void *p, const char *what) {
    require(p != nullptr, ErrorKind::InvalidArgument, std::string(what) + " must not be NULL");
}

void copy_out(const std::string &s, char *buf, std::size_t cap, std::size_t *needed) {
    if (needed != nullptr) *needed = s.size() + 1;
    if (buf == nullptr && cap == 0) return;
    require(buf != nullptr && cap > s.size(), ErrorKind::InvalidArgument,
            "output buffer too small (" + std::to_string(s.size() + 1) + " bytes needed)");
    std::memcpy(buf, s.c_str(), s.size() + 1);
}

void apply_json(mltq_config &cfg, const json &j) {
    require(j.is_object(), ErrorKind::Config, "config must be a JSON object");
    json model = json::object();
    for (const auto &[k, v] : j.items()) {
        if (!kRunKeys.count(k)) {
            model[k] = v;
            if (k != "format_version") cfg.explicit_keys.insert(k);
            continue;
        }
        cfg.explicit_keys.insert(k);
        try {
            if (k == "train_fraction") {
                cfg.train_fraction = v.get<double>();
                require(cfg.train_fraction > 0.0 && cfg.train_fraction <= 1.0, ErrorKind::Config,
                        "train_fraction must lie in (0, 1]");
            } else if (k == "minority") {
                cfg.minority = v.is_null() ? std::string() : v.get<std::string>();
                if (!cfg.minority.empty()) (void)parse_minority(cfg.minority);
            } else if (k == "deterministic") {
                cfg.deterministic = v.get<bool>();
            } else if (k == "pad_to") {
                require(v.is_number_unsigned(), ErrorKind::Config, "pad_to must be an integer");
                cfg.pad_to = v.get<std::size_t>();
            }
        } catch (const json::exception &e) {
            fail(ErrorKind::Config, "config key '" + k + "': " + e.what());
        }
    }
    cfg.model = config_from_json(model.dump(), cfg.model);
}

std::string effective_json(const mltq_config &cfg) {
    json j = json::parse(config_to_json(cfg.model));
    j["train_fraction"] = cfg.train_fraction;
    j["minority"] = cfg.minority.empty() ? json(nullptr) : json(cfg.minority);
    j["deterministic"] = cfg.deterministic;
    j["pad_to"] = cfg.pad_to;
    return j.dump(2) + "\n";
}

std::string num(double v) {
    char b[40];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

LoadOptions load_options(const mltq_config &cfg) {
    LoadOptions o;
    o.train_fraction = cfg.train_fraction;
    o.seed = cfg.model.seed;
    o.pad_to = cfg.pad_to;
    if (!cfg.minority.empty()) o.minority = parse_minority(cfg.minority);
    return o;
}

Dataset load_for(const mltq_config &cfg, const char *dir) {
    need(dir, "data directory");
    return load_dataset(dir, load_options(cfg));
}

/// Model config with shape fields taken from the dataset unless set explicitly.
ModelConfig model_for(const mltq_config &cfg, const DatasetManifest &m) {
    ModelConfig c = cfg.model;
    require(m.height == m.width, ErrorKind::Config, "images must be square");
    auto adopt = [&](const char *key, std::size_t &field, std::size_t value) {
        if (cfg.explicit_keys.count(key)) {
            require(field == value, ErrorKind::Config,
                    std::string("config ") + key + "=" + std::to_string(field) +
                        " does not match the dataset (" + std::to_string(value) + ")");
        }
        field = value;
    };
    adopt("N", c.N, m.height);
    adopt("channels", c.channels, m.channels);
    adopt("num_classes", c.num_classes, m.num_classes);
    if (cfg.deterministic) c.threads = 1;
    c.validate();
    return c;
}

fs::path out_dir_of(const char *out) {
    need(out, "output directory");
    fs::path p(out);
    std::error_code ec;
    fs::create_directories(p, ec);
    require(!ec && fs::is_directory(p), ErrorKind::Config,
            "cannot create output directory " + p.string());
    return p;
}

std::ofstream open_out(const fs::path &p) {
    std::ofstream f(p, std::ios::trunc);
    require(f.good(), ErrorKind::Data, "cannot write " + p.string());
    return f;
}

void check_against(const mltq_config &cfg, const ModelConfig &ck) {
    const json mine = json::parse(config_to_json(cfg.model));
    const json theirs = json::parse(config_to_json(ck));
    for (const char *key : kStructuralKeys) {
        if (cfg.explicit_keys.count(key) && mine.at(key) != theirs.at(key)) {
            fail(ErrorKind::Config, std::string("config ") + key + "=" + mine.at(key).dump() +
                                        " does not match the checkpoint (" +
                                        theirs.at(key).dump() + ")");
        }
    }
}

void check_dataset(const ModelConfig &c, const DatasetManifest &m) {
    require(m.height == c.N && m.width == c.N && m.channels == c.channels &&
                m.num_classes == c.num_classes,
            ErrorKind::Config, "dataset shape does not match the checkpoint configuration");
}

} // namespace

extern "C" {

const char *mltq_last_error(void) { return g_last_error.c_str(); }

const char *mltq_version(void) { return "1.0.0"; }

mltq_status mltq_config_create(mltq_config **out) {
    return guarded([&] {
        need(out, "out");
        *out = new mltq_config();
    });
}

void mltq_config_destroy(mltq_config *cfg) { delete cfg; }

mltq_status mltq_config_load_file(mltq_config *cfg, const char *path) {
    return guarded([&] {
        need(cfg, "config");
        need(path, "path");
        std::ifstream in(path);
        require(in.good(), ErrorKind::Config, std::string("config file not found: ") + path);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception &e) {
            fail(ErrorKind::Config, std::string("config file is not valid JSON: ") + e.what());
        }
        mltq_config next = *cfg;
        apply_json(next, j);
        *cfg = next;
    });
}

mltq_status mltq_config_set(mltq_config *cfg, const char *key, const char *value) {
    return guarded([&] {
        need(cfg, "config");
        need(key, "key");
        need(value, "value");
        json v;
        try {
            v = json::parse(value);
            if (v.is_structured()) v = std::string(value);
        } catch (const json::exception &) {
            v = std::string(value);
        }
        mltq_config next = *cfg;
        apply_json(next, json{{key, v}});
        *cfg = next;
    });
}

mltq_status mltq_config_to_json(const mltq_config *cfg, char *buf, size_t cap, size_t *needed) {
    return guarded([&] {
        need(cfg, "config");
        copy_out(effective_json(*cfg), buf, cap, needed);
    });
}

mltq_status mltq_resources(const mltq_config *cfg, char *buf, size_t cap, size_t *needed) {
    return guarded([&] {
        need(cfg, "config");
        const auto &m = cfg->model;
        const CircuitConfig c = m.circuit();
        c.validate();
        const auto table = table_resources(m.N, m.P, c);
        if (table != resource_report(c)) {
            throw std::logic_error("closed-form resources disagree with the built circuits");
        }
        copy_out(table.to_key_value(), buf, cap, needed);
    });
}

mltq_synth_spec mltq_synth_default(void) {
    const SyntheticSpec s;
    return {s.num_classes, s.N, s.channels, s.train, s.validation, s.test, s.noise, s.seed};
}

mltq_status mltq_synth(const mltq_synth_spec *spec, const char *out_dir,
                       double *centroid_accuracy) {
    return guarded([&] {
        need(spec, "spec");
        const fs::path out = out_dir_of(out_dir);
        SyntheticSpec s{spec->num_classes, spec->image_size, spec->channels, spec->train,
                        spec->validation, spec->test, spec->noise, spec->seed};
        const auto r = generate_synthetic(s, out);
        if (centroid_accuracy != nullptr) *centroid_accuracy = r.centroid_accuracy;
    });
}

mltq_status mltq_train(const mltq_config *cfg, const char *data_dir, const char *out_dir,
                       mltq_epoch_fn progress, void *user, double *mean_test_accuracy,
                       double *std_test_accuracy) {
    return guarded([&] {
        need(cfg, "config");
        const Dataset data = load_for(*cfg, data_dir);
        const ModelConfig mc = model_for(*cfg, data.manifest);
        const fs::path out = out_dir_of(out_dir);
        {
            mltq_config echo = *cfg;
            echo.model = mc;
            open_out(out / "config.json") << effective_json(echo);
        }
        const HybridModel model(mc);

        auto summary = open_out(out / "summary.csv");
        summary << "run,best_epoch,best_val_loss,test_accuracy,test_loss\n";
        std::vector<double> accs;
        std::string diverged;
        for (std::size_t run = 0; run < mc.runs; ++run) {
            const std::string tag = "run" + std::to_string(run);
            auto metrics = open_out(out / ("metrics_" + tag + ".csv"));
            metrics << "epoch,l_ce,l_mse,loss,train_acc,val_loss,val_acc\n";
            const RunResult r = train_run(model, data.train, data.validation, run,
                                          [&](std::size_t, const EpochMetrics &e) {
                                              metrics << e.epoch << ',' << num(e.l_ce) << ','
                                                      << num(e.l_mse) << ',' << num(e.loss)
                                                      << ',' << num(e.train_acc) << ','
                                                      << num(e.val_loss) << ','
                                                      << num(e.val_acc) << '\n';
                                              metrics.flush();
                                              if (progress != nullptr) {
                                                  progress(run, e.epoch, e.loss, e.val_loss,
                                                           e.val_acc, user);
                                              }
                                          });
            auto steps = open_out(out / ("steps_" + tag + ".csv"));
            steps << "epoch,step,l_ce,l_mse,loss\n";
            for (const auto &s : r.steps) {
                steps << s.epoch << ',' << s.step << ',' << num(s.l_ce) << ',' << num(s.l_mse)
                      << ',' << num(s.loss) << '\n';
            }
            if (r.diverged) {
                diverged = r.diagnostic;
                break;
            }
            save_checkpoint(out / ("checkpoint_" + tag), mc, r.best);
            const Metrics test = evaluate(model, r.best, data.test);
            const double best_val = r.history.at(r.best_epoch - 1).val_loss;
            summary << run << ',' << r.best_epoch << ',' << num(best_val) << ','
                    << num(test.accuracy) << ',' << num(test.loss) << '\n';
            accs.push_back(test.accuracy);
        }
        require(diverged.empty(), ErrorKind::Numeric, diverged);

        double mean = 0.0;
        for (double a : accs) mean += a;
        mean /= static_cast<double>(accs.size());
        double var = 0.0;
        for (double a : accs) var += (a - mean) * (a - mean);
        const double sd =
            accs.size() > 1 ? std::sqrt(var / static_cast<double>(accs.size() - 1)) : 0.0;
        open_out(out / "summary.txt") << "runs=" << accs.size() << "\n"
                                      << "test_accuracy_mean=" << num(mean) << "\n"
                                      << "test_accuracy_std=" << num(sd) << "\n";
        if (mean_test_accuracy != nullptr) *mean_test_accuracy = mean;
        if (std_test_accuracy != nullptr) *std_test_accuracy = sd;
    });
}

mltq_status mltq_eval(const mltq_config *cfg, const char *checkpoint, const char *data_dir,
                      const char *out_dir, double *accuracy) {
    return guarded([&] {
        need(cfg, "config");
        need(checkpoint, "checkpoint");
        Checkpoint ck = load_checkpoint(checkpoint);
        check_against(*cfg, ck.config);
        if (cfg->deterministic) ck.config.threads = 1;
        const HybridModel model(ck.config);
        require(ck.params.values.size() == model.make_store().values.size(), ErrorKind::Config,
                "checkpoint parameter count does not match its configuration");
        ck.params.segments = model.make_store().segments;
        const Dataset data = load_for(*cfg, data_dir);
        check_dataset(ck.config, data.manifest);
        const fs::path out = out_dir_of(out_dir);

        const Metrics m = evaluate(model, ck.params, data.test);
        open_out(out / "eval_summary.csv")
            << "samples,accuracy,l_ce,l_mse,loss\n"
            << data.test.size() << ',' << num(m.accuracy) << ',' << num(m.l_ce) << ','
            << num(m.l_mse) << ',' << num(m.loss) << '\n';
        auto pc = open_out(out / "eval_per_class.csv");
        pc << "class,support,precision,recall,f1\n";
        for (std::size_t c = 0; c < m.f1.size(); ++c) {
            std::size_t support = 0;
            for (std::size_t v : m.confusion[c]) support += v;
            pc << c << ',' << support << ',' << num(m.precision[c]) << ',' << num(m.recall[c])
               << ',' << num(m.f1[c]) << '\n';
        }
        if (accuracy != nullptr) *accuracy = m.accuracy;
    });
}

mltq_status mltq_analyze(const mltq_config *cfg, const char *checkpoint, const char *data_dir,
                         const char *out_dir, int with_ami) {
    return guarded([&] {
        need(cfg, "config");
        need(checkpoint, "checkpoint");
        Checkpoint ck = load_checkpoint(checkpoint);
        check_against(*cfg, ck.config);
        const HybridModel model(ck.config);
        require(ck.params.values.size() == model.make_store().values.size(), ErrorKind::Config,
                "checkpoint parameter count does not match its configuration");
        const Dataset data = load_for(*cfg, data_dir);
        check_dataset(ck.config, data.manifest);
        const fs::path out = out_dir_of(out_dir);

        const Split &split = data.test;
        require(split.size() > 0, ErrorKind::Data, "test split is empty");
        std::vector<std::vector<double>> processed;
        std::vector<std::vector<double>> features;
        for (const auto &img : split.images) {
            auto r = model.forward(img, ck.params);
            processed.push_back(std::move(r.processed.angles));
            features.push_back(std::move(r.features));
        }
        auto mags = open_out(out / "magnitudes.csv");
        mags << "rank,feature,magnitude\n";
        const auto ranked = feature_magnitudes(features);
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            mags << i + 1 << ',' << ranked[i].index << ',' << num(ranked[i].magnitude) << '\n';
        }
        if (with_ami != 0) {
            const std::size_t k = ck.config.num_classes;
            require(k <= split.size(), ErrorKind::Data, "fewer test samples than classes");
            const auto kp = kmeans(processed, k, cfg->model.seed);
            const auto kf = kmeans(features, k, cfg->model.seed);
            open_out(out / "ami.csv")
                << "split,samples,k,ami_processed_image,ami_feature_vector\n"
                << "test," << split.size() << ',' << k << ','
                << num(ami(split.labels, kp.labels)) << ','
                << num(ami(split.labels, kf.labels)) << '\n';
        }
    });
}

mltq_status mltq_model_load(const char *checkpoint, mltq_model **out) {
    return guarded([&] {
        need(checkpoint, "checkpoint");
        need(out, "out");
        auto m = std::make_unique<mltq_model>();
        m->checkpoint = load_checkpoint(checkpoint);
        m->model = std::make_unique<HybridModel>(m->checkpoint.config);
        require(m->checkpoint.params.values.size() == m->model->make_store().values.size(),
                ErrorKind::Config, "checkpoint parameter count does not match its configuration");
        *out = m.release();
    });
}

void mltq_model_destroy(mltq_model *model) { delete model; }

size_t mltq_model_image_size(const mltq_model *m) { return m ? m->checkpoint.config.N : 0; }
size_t mltq_model_channels(const mltq_model *m) { return m ? m->checkpoint.config.channels : 0; }
size_t mltq_model_num_classes(const mltq_model *m) {
    return m ? m->checkpoint.config.num_classes : 0;
}
size_t mltq_model_num_features(const mltq_model *m) { return m ? m->model->num_features() : 0; }

mltq_status mltq_model_forward(const mltq_model *model, const double *image, size_t len,
                               double *probs, double *features) {
    return guarded([&] {
        need(model, "model");
        need(image, "image");
        need(probs, "probs");
        const auto &c = model->checkpoint.config;
        require(len == c.N * c.N * c.channels, ErrorKind::InvalidArgument,
                "image length does not match the model");
        ImageTensor img(c.N, c.N, c.channels);
        std::copy(image, image + len, img.values.begin());
        const auto r = model->model->forward(img, model->checkpoint.params);
        std::copy(r.probabilities.begin(), r.probabilities.end(), probs);
        if (features != nullptr) std::copy(r.features.begin(), r.features.end(), features);
    });
}

mltq_status mltq_dataset_load(const char *dir, const mltq_config *cfg, mltq_dataset **out) {
    return guarded([&] {
        need(out, "out");
        const mltq_config defaults;
        auto ds = std::make_unique<mltq_dataset>();
        ds->data = load_for(cfg != nullptr ? *cfg : defaults, dir);
        *out = ds.release();
    });
}

void mltq_dataset_destroy(mltq_dataset *ds) { delete ds; }

namespace {
const Split *split_of(const mltq_dataset *ds, mltq_split s) {
    if (ds == nullptr) return nullptr;
    switch (s) {
    case MLTQ_TRAIN: return &ds->data.train;
    case MLTQ_VALIDATION: return &ds->data.validation;
    case MLTQ_TEST: return &ds->data.test;
    }
    return nullptr;
}
} // namespace

size_t mltq_dataset_count(const mltq_dataset *ds, mltq_split split) {
    const Split *s = split_of(ds, split);
    return s ? s->size() : 0;
}

size_t mltq_dataset_num_classes(const mltq_dataset *ds) {
    return ds ? ds->data.manifest.num_classes : 0;
}

mltq_status mltq_dataset_get(const mltq_dataset *ds, mltq_split split, size_t index,
                             double *image, size_t len, size_t *label) {
    return guarded([&] {
        const Split *s = split_of(ds, split);
        need(s, "dataset");
        require(index < s->size(), ErrorKind::InvalidArgument, "sample index out of range");
        const auto &img = s->images[index];
        if (image != nullptr) {
            require(len == img.size(), ErrorKind::InvalidArgument,
                    "image buffer length does not match the dataset");
            std::copy(img.values.begin(), img.values.end(), image);
        }
        if (label != nullptr) *label = s->labels[index];
    });
}

} // extern "C"
