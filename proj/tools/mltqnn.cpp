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
 * @file mltqnn.cpp
 * Command-line front end over the C API.
 *
 * Exit codes: 0 success, 1 internal error, 2 configuration error, 3 data
 * error, 4 numerical divergence.
 */
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mltqnn/mltqnn.h"

namespace {

int exit_code(mltq_status s) {
    switch (s) {
    case MLTQ_OK: return 0;
    case MLTQ_ERR_CONFIG:
    case MLTQ_ERR_ARGUMENT: return 2;
    case MLTQ_ERR_DATA: return 3;
    case MLTQ_ERR_NUMERIC: return 4;
    default: return 1;
    }
}

/// Prints the diagnostic for a failed call and maps it to an exit code.
int report(const char *cmd, mltq_status s) {
    if (s != MLTQ_OK) std::cerr << "mltqnn " << cmd << ": " << mltq_last_error() << "\n";
    return exit_code(s);
}

struct Common {
    std::string config;
    std::string data;
    std::string out;
    std::optional<unsigned long long> seed;
    bool deterministic = false;
    std::optional<double> alpha;
    std::optional<double> train_fraction;
    std::optional<std::string> minority;
    bool no_reconstruction = false;
    bool no_lwm = false;
    std::optional<std::size_t> N, P, E, M, K;
    std::optional<std::size_t> epochs, runs, batch_size, threads, pad_to;
    std::optional<double> lr;
};

void add_common(CLI::App *app, Common &c) {
    app->add_option("--config", c.config, "JSON config file (flags override it)");
    app->add_option("--data", c.data, "Dataset directory (manifest.json)");
    app->add_option("--out", c.out, "Output directory");
    app->add_option("--seed", c.seed, "Base seed; run r uses seed + r");
    app->add_flag("--deterministic", c.deterministic, "Sequential evaluation");
    app->add_option("--alpha", c.alpha, "Weight of the reconstruction loss");
    app->add_option("--train-fraction", c.train_fraction, "Fraction of training data per class");
    app->add_option("--minority", c.minority, "CLASS:FRACTION, keep a fraction of one class");
    app->add_flag("--no-reconstruction", c.no_reconstruction, "Disable the reconstruction branch");
    app->add_flag("--no-lwm", c.no_lwm, "Disable the location weight module");
    app->add_option("-N,--image-size", c.N, "Image side length");
    app->add_option("-P,--patch-size", c.P, "Patch side length");
    app->add_option("-E,--features", c.E, "Features per superpixel (multiple of 3)");
    app->add_option("-M,--blocks", c.M, "Convolution blocks");
    app->add_option("-K,--kernels", c.K, "Kernels per block");
    app->add_option("--epochs", c.epochs, "Training epochs");
    app->add_option("--runs", c.runs, "Independent training runs");
    app->add_option("--batch-size", c.batch_size, "Minibatch size");
    app->add_option("--lr", c.lr, "Adam learning rate");
    app->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
    app->add_option("--pad-to", c.pad_to, "Zero-pad images to this size");
}

template <class T> std::string text(const T &v) {
    if constexpr (std::is_same_v<T, std::string>) {
        return v;
    } else {
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    }
}

/// Builds the effective configuration: defaults, then file, then flags.
mltq_status build_config(const Common &c, mltq_config **out) {
    mltq_status s = mltq_config_create(out);
    if (s != MLTQ_OK) return s;
    mltq_config *cfg = *out;
    if (!c.config.empty() && (s = mltq_config_load_file(cfg, c.config.c_str())) != MLTQ_OK) {
        return s;
    }
    std::vector<std::pair<std::string, std::string>> kv;
    auto put = [&](const char *key, const auto &opt) {
        if (opt) kv.emplace_back(key, text(*opt));
    };
    put("seed", c.seed);
    put("alpha", c.alpha);
    put("train_fraction", c.train_fraction);
    put("minority", c.minority);
    put("N", c.N);
    put("P", c.P);
    put("E", c.E);
    put("M", c.M);
    put("K", c.K);
    put("epochs", c.epochs);
    put("runs", c.runs);
    put("batch_size", c.batch_size);
    put("learning_rate", c.lr);
    put("threads", c.threads);
    put("pad_to", c.pad_to);
    if (c.deterministic) kv.emplace_back("deterministic", "true");
    if (c.no_reconstruction) kv.emplace_back("reconstruction_enabled", "false");
    if (c.no_lwm) kv.emplace_back("lwm_enabled", "false");
    for (const auto &[k, v] : kv) {
        if ((s = mltq_config_set(cfg, k.c_str(), v.c_str())) != MLTQ_OK) return s;
    }
    return MLTQ_OK;
}

std::string config_json(const mltq_config *cfg) {
    std::size_t needed = 0;
    mltq_config_to_json(cfg, nullptr, 0, &needed);
    std::string buf(needed, '\0');
    mltq_config_to_json(cfg, buf.data(), buf.size(), &needed);
    buf.resize(needed - 1);
    return buf;
}

/// Writes `<out>/config.json` after the command has created `out`.
void echo_config(const mltq_config *cfg, const std::string &out) {
    if (out.empty() || !std::filesystem::is_directory(out)) return;
    std::ofstream(std::filesystem::path(out) / "config.json") << config_json(cfg);
}

struct ConfigHolder {
    mltq_config *cfg = nullptr;
    ~ConfigHolder() { mltq_config_destroy(cfg); }
};

int require_paths(const char *cmd, std::initializer_list<std::pair<const char *, std::string>> p) {
    for (const auto &[flag, value] : p) {
        if (value.empty()) {
            std::cerr << "mltqnn " << cmd << ": " << flag << " is required\n";
            return 2;
        }
    }
    return 0;
}

void on_epoch(size_t run, size_t epoch, double loss, double val_loss, double val_acc,
              void *user) {
    if (*static_cast<bool *>(user)) return;
    std::fprintf(stderr, "run %zu epoch %zu loss=%.6f val_loss=%.6f val_acc=%.4f\n", run, epoch,
                 loss, val_loss, val_acc);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Hybrid quantum-classical multitask image classifier"};
    app.require_subcommand(1);

    Common train_opt;
    bool quiet = false;
    auto *train = app.add_subcommand("train", "Train models and write checkpoints and metrics");
    add_common(train, train_opt);
    train->add_flag("-q,--quiet", quiet, "No per-epoch progress");

    Common eval_opt;
    std::string eval_ckpt;
    auto *eval = app.add_subcommand("eval", "Evaluate a checkpoint on the test split");
    add_common(eval, eval_opt);
    eval->add_option("--checkpoint", eval_ckpt, "Checkpoint (.json, .bin or stem)")->required();

    Common an_opt;
    std::string an_ckpt;
    bool with_ami = false;
    auto *analyze = app.add_subcommand("analyze", "Feature magnitudes and clustering AMI");
    add_common(analyze, an_opt);
    analyze->add_option("--checkpoint", an_ckpt, "Checkpoint (.json, .bin or stem)")->required();
    analyze->add_flag("--ami", with_ami, "Also cluster and score with AMI");

    Common res_opt;
    auto *resources = app.add_subcommand("resources", "Print quantum resource counts");
    add_common(resources, res_opt);

    mltq_synth_spec spec = mltq_synth_default();
    std::string synth_out;
    auto *synth = app.add_subcommand("synth", "Write a synthetic grating dataset");
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--classes", spec.num_classes, "Number of classes");
    synth->add_option("--size", spec.image_size, "Image side length");
    synth->add_option("--channels", spec.channels, "Channels");
    synth->add_option("--train", spec.train, "Training samples");
    synth->add_option("--validation", spec.validation, "Validation samples");
    synth->add_option("--test", spec.test, "Test samples");
    synth->add_option("--noise", spec.noise, "Uniform noise amplitude");
    synth->add_option("--seed", spec.seed, "Seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        std::cerr << "mltqnn: " << e.what() << "\n";
        return 2;
    }

    ConfigHolder h;
    if (*synth) {
        double acc = 0.0;
        const mltq_status s = mltq_synth(&spec, synth_out.c_str(), &acc);
        if (s != MLTQ_OK) return report("synth", s);
        std::printf("nearest_centroid_accuracy=%.6f\n", acc);
        return 0;
    }
    if (*resources) {
        mltq_status s = build_config(res_opt, &h.cfg);
        if (s != MLTQ_OK) return report("resources", s);
        std::size_t needed = 0;
        if ((s = mltq_resources(h.cfg, nullptr, 0, &needed)) != MLTQ_OK) {
            return report("resources", s);
        }
        std::string buf(needed, '\0');
        s = mltq_resources(h.cfg, buf.data(), buf.size(), &needed);
        if (s != MLTQ_OK) return report("resources", s);
        buf.resize(needed - 1);
        std::cout << buf;
        if (!res_opt.out.empty()) {
            std::filesystem::create_directories(res_opt.out);
            std::ofstream(std::filesystem::path(res_opt.out) / "resources.txt") << buf;
            echo_config(h.cfg, res_opt.out);
        }
        return 0;
    }
    if (*train) {
        if (int rc = require_paths("train", {{"--data", train_opt.data}, {"--out", train_opt.out}})) {
            return rc;
        }
        mltq_status s = build_config(train_opt, &h.cfg);
        if (s != MLTQ_OK) return report("train", s);
        double mean = 0.0;
        double sd = 0.0;
        s = mltq_train(h.cfg, train_opt.data.c_str(), train_opt.out.c_str(), on_epoch, &quiet,
                       &mean, &sd);
        if (s != MLTQ_OK) return report("train", s);
        std::printf("test_accuracy=%.6f +/- %.6f\n", mean, sd);
        return 0;
    }
    if (*eval) {
        if (int rc = require_paths("eval", {{"--data", eval_opt.data}, {"--out", eval_opt.out}})) {
            return rc;
        }
        mltq_status s = build_config(eval_opt, &h.cfg);
        if (s != MLTQ_OK) return report("eval", s);
        double acc = 0.0;
        s = mltq_eval(h.cfg, eval_ckpt.c_str(), eval_opt.data.c_str(), eval_opt.out.c_str(), &acc);
        if (s != MLTQ_OK) return report("eval", s);
        echo_config(h.cfg, eval_opt.out);
        std::printf("accuracy=%.6f\n", acc);
        return 0;
    }
    if (*analyze) {
        if (int rc = require_paths("analyze", {{"--data", an_opt.data}, {"--out", an_opt.out}})) {
            return rc;
        }
        mltq_status s = build_config(an_opt, &h.cfg);
        if (s != MLTQ_OK) return report("analyze", s);
        s = mltq_analyze(h.cfg, an_ckpt.c_str(), an_opt.data.c_str(), an_opt.out.c_str(),
                         with_ami ? 1 : 0);
        if (s != MLTQ_OK) return report("analyze", s);
        echo_config(h.cfg, an_opt.out);
        return 0;
    }
    return 2;
}
