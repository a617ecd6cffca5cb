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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "mltqnn/mltqnn.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    fs::path p = fs::path(MLTQNN_TEST_TMP) / "capi" / name;
    fs::remove_all(p);
    return p;
}

std::string to_json(const mltq_config *cfg) {
    std::size_t needed = 0;
    REQUIRE(mltq_config_to_json(cfg, nullptr, 0, &needed) == MLTQ_OK);
    std::string s(needed, '\0');
    REQUIRE(mltq_config_to_json(cfg, s.data(), s.size(), &needed) == MLTQ_OK);
    s.resize(needed - 1);
    return s;
}

std::string resources(const mltq_config *cfg, mltq_status *status) {
    std::size_t needed = 0;
    *status = mltq_resources(cfg, nullptr, 0, &needed);
    if (*status != MLTQ_OK) return {};
    std::string s(needed, '\0');
    *status = mltq_resources(cfg, s.data(), s.size(), &needed);
    s.resize(needed - 1);
    return s;
}

struct Config {
    mltq_config *p = nullptr;
    Config() { REQUIRE(mltq_config_create(&p) == MLTQ_OK); }
    ~Config() { mltq_config_destroy(p); }
};

mltq_synth_spec tiny_spec() {
    mltq_synth_spec s = mltq_synth_default();
    s.num_classes = 2;
    s.image_size = 8;
    s.channels = 2;
    s.train = 20;
    s.validation = 8;
    s.test = 8;
    return s;
}

void small_model(mltq_config *cfg) {
    for (auto [k, v] : {std::pair{"P", "2"}, {"E", "3"}, {"M", "1"}, {"K", "2"}, {"epochs", "2"},
                        {"runs", "1"}, {"batch_size", "10"}, {"deterministic", "true"}}) {
        REQUIRE(mltq_config_set(cfg, k, v) == MLTQ_OK);
    }
}

std::string slurp(const fs::path &p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

} // namespace

TEST_CASE("config handle", "[capi]") {
    Config c;
    CHECK(std::string(mltq_version()).size() > 0);
    const std::string j = to_json(c.p);
    CHECK(j.find("\"N\": 32") != std::string::npos);
    CHECK(j.find("\"alpha\": 5.0") != std::string::npos);

    CHECK(mltq_config_set(c.p, "alpha", "0.5") == MLTQ_OK);
    CHECK(mltq_config_set(c.p, "minority", "1:0.25") == MLTQ_OK);
    const std::string j2 = to_json(c.p);
    CHECK(j2.find("\"alpha\": 0.5") != std::string::npos);
    CHECK(j2.find("\"minority\": \"1:0.25\"") != std::string::npos);

    CHECK(mltq_config_set(c.p, "no_such_key", "1") == MLTQ_ERR_CONFIG);
    CHECK(std::string(mltq_last_error()).find("no_such_key") != std::string::npos);
    CHECK(mltq_config_set(c.p, "train_fraction", "1.5") == MLTQ_ERR_CONFIG);
    CHECK(mltq_config_set(c.p, "minority", "bad") == MLTQ_ERR_CONFIG);
    CHECK(mltq_config_set(nullptr, "alpha", "1") == MLTQ_ERR_ARGUMENT);

    char small[4];
    std::size_t needed = 0;
    CHECK(mltq_config_to_json(c.p, small, sizeof small, &needed) == MLTQ_ERR_ARGUMENT);
    CHECK(needed > sizeof small);

    const fs::path dir = scratch("cfg");
    fs::create_directories(dir);
    std::ofstream(dir / "c.json") << R"({"E": 6, "seed": 11, "train_fraction": 0.5})";
    CHECK(mltq_config_load_file(c.p, (dir / "c.json").c_str()) == MLTQ_OK);
    const std::string j3 = to_json(c.p);
    CHECK(j3.find("\"E\": 6") != std::string::npos);
    CHECK(j3.find("\"train_fraction\": 0.5") != std::string::npos);
    CHECK(mltq_config_load_file(c.p, (dir / "missing.json").c_str()) != MLTQ_OK);
    std::ofstream(dir / "bad.json") << R"({"E": 6, "mystery": 1})";
    CHECK(mltq_config_load_file(c.p, (dir / "bad.json").c_str()) == MLTQ_ERR_CONFIG);
}

TEST_CASE("resources through the C interface", "[capi]") {
    Config c;
    mltq_status s;
    const std::string r = resources(c.p, &s);
    REQUIRE(s == MLTQ_OK);
    CHECK(r.find("trainable_quantum_params=198\n") != std::string::npos);
    CHECK(r.find("encoding_qubits=9\n") != std::string::npos);
    CHECK(r.find("measurement_operators=64\n") != std::string::npos);

    Config big;
    REQUIRE(mltq_config_set(big.p, "N", "64") == MLTQ_OK);
    REQUIRE(mltq_config_set(big.p, "P", "8") == MLTQ_OK);
    CHECK(resources(big.p, &s) == r);

    Config bad;
    REQUIRE(mltq_config_set(bad.p, "E", "10") == MLTQ_OK);
    resources(bad.p, &s);
    CHECK(s == MLTQ_ERR_CONFIG);
}

TEST_CASE("synthesize, load, train, evaluate, analyze", "[capi][e2e]") {
    const fs::path root = scratch("e2e");
    const mltq_synth_spec spec = tiny_spec();
    double centroid = 0.0;
    REQUIRE(mltq_synth(&spec, (root / "data").c_str(), &centroid) == MLTQ_OK);
    CHECK(centroid == 1.0);

    mltq_dataset *ds = nullptr;
    REQUIRE(mltq_dataset_load((root / "data").c_str(), nullptr, &ds) == MLTQ_OK);
    CHECK(mltq_dataset_count(ds, MLTQ_TRAIN) == 20);
    CHECK(mltq_dataset_count(ds, MLTQ_VALIDATION) == 8);
    CHECK(mltq_dataset_count(ds, MLTQ_TEST) == 8);
    CHECK(mltq_dataset_num_classes(ds) == 2);
    std::vector<double> img(8 * 8 * 2);
    std::size_t label = 99;
    REQUIRE(mltq_dataset_get(ds, MLTQ_TRAIN, 3, img.data(), img.size(), &label) == MLTQ_OK);
    CHECK(label == 1);
    for (double v : img) CHECK((v >= 0.0 && v <= 1.0));
    CHECK(mltq_dataset_get(ds, MLTQ_TRAIN, 20, img.data(), img.size(), &label) ==
          MLTQ_ERR_ARGUMENT);
    CHECK(mltq_dataset_get(ds, MLTQ_TRAIN, 0, img.data(), 5, &label) == MLTQ_ERR_ARGUMENT);

    Config c;
    small_model(c.p);
    double mean = -1.0;
    double sd = -1.0;
    REQUIRE(mltq_train(c.p, (root / "data").c_str(), (root / "run").c_str(), nullptr, nullptr,
                       &mean, &sd) == MLTQ_OK);
    CHECK((mean >= 0.0 && mean <= 1.0));
    CHECK(sd == 0.0);
    for (const char *f : {"config.json", "metrics_run0.csv", "steps_run0.csv",
                          "checkpoint_run0.json", "checkpoint_run0.bin", "summary.csv"}) {
        CHECK(fs::exists(root / "run" / f));
    }
    CHECK(slurp(root / "run" / "metrics_run0.csv")
              .starts_with("epoch,l_ce,l_mse,loss,train_acc,val_loss,val_acc\n"));

    mltq_model *m = nullptr;
    REQUIRE(mltq_model_load((root / "run" / "checkpoint_run0").c_str(), &m) == MLTQ_OK);
    CHECK(mltq_model_image_size(m) == 8);
    CHECK(mltq_model_channels(m) == 2);
    CHECK(mltq_model_num_classes(m) == 2);
    REQUIRE(mltq_config_set(c.p, "N", "8") == MLTQ_OK);
    mltq_status rs;
    const std::string rep = resources(c.p, &rs);
    REQUIRE(rs == MLTQ_OK);
    CHECK(rep.find("measurement_operators=" + std::to_string(mltq_model_num_features(m)) + "\n") !=
          std::string::npos);
    std::vector<double> probs(2);
    std::vector<double> feats(mltq_model_num_features(m));
    REQUIRE(mltq_model_forward(m, img.data(), img.size(), probs.data(), feats.data()) == MLTQ_OK);
    CHECK(std::abs(probs[0] + probs[1] - 1.0) <= 1e-12);
    CHECK(mltq_model_forward(m, img.data(), 3, probs.data(), nullptr) == MLTQ_ERR_ARGUMENT);
    mltq_model_destroy(m);
    mltq_dataset_destroy(ds);

    double acc = -1.0;
    REQUIRE(mltq_eval(c.p, (root / "run" / "checkpoint_run0.json").c_str(),
                      (root / "data").c_str(), (root / "eval").c_str(), &acc) == MLTQ_OK);
    CHECK((acc >= 0.0 && acc <= 1.0));
    CHECK(slurp(root / "eval" / "eval_per_class.csv").starts_with("class,support,precision,recall,f1\n"));

    Config other;
    small_model(other.p);
    REQUIRE(mltq_config_set(other.p, "E", "6") == MLTQ_OK);
    CHECK(mltq_eval(other.p, (root / "run" / "checkpoint_run0").c_str(), (root / "data").c_str(),
                    (root / "eval2").c_str(), &acc) == MLTQ_ERR_CONFIG);

    REQUIRE(mltq_analyze(c.p, (root / "run" / "checkpoint_run0").c_str(), (root / "data").c_str(),
                         (root / "an").c_str(), 1) == MLTQ_OK);
    CHECK(slurp(root / "an" / "ami.csv")
              .starts_with("split,samples,k,ami_processed_image,ami_feature_vector\n"));
    CHECK(slurp(root / "an" / "magnitudes.csv").starts_with("rank,feature,magnitude\n"));
}

TEST_CASE("error paths", "[capi]") {
    Config c;
    const fs::path root = scratch("errors");
    double mean = 0.0;
    double sd = 0.0;
    CHECK(mltq_train(c.p, (root / "nowhere").c_str(), (root / "out").c_str(), nullptr, nullptr,
                     &mean, &sd) == MLTQ_ERR_DATA);
    CHECK(std::string(mltq_last_error()).find("not found") != std::string::npos);

    mltq_dataset *ds = nullptr;
    CHECK(mltq_dataset_load((root / "nowhere").c_str(), nullptr, &ds) == MLTQ_ERR_DATA);
    CHECK(ds == nullptr);
    mltq_model *m = nullptr;
    CHECK(mltq_model_load((root / "nothing").c_str(), &m) == MLTQ_ERR_DATA);
    CHECK(mltq_dataset_load(nullptr, nullptr, &ds) == MLTQ_ERR_ARGUMENT);

    const mltq_synth_spec spec = tiny_spec();
    REQUIRE(mltq_synth(&spec, (root / "data").c_str(), nullptr) == MLTQ_OK);
    Config mismatch;
    small_model(mismatch.p);
    REQUIRE(mltq_config_set(mismatch.p, "N", "16") == MLTQ_OK);
    CHECK(mltq_train(mismatch.p, (root / "data").c_str(), (root / "out").c_str(), nullptr,
                     nullptr, &mean, &sd) == MLTQ_ERR_CONFIG);

    Config diverge;
    small_model(diverge.p);
    REQUIRE(mltq_config_set(diverge.p, "learning_rate", "1e300") == MLTQ_OK);
    REQUIRE(mltq_config_set(diverge.p, "epochs", "5") == MLTQ_OK);
    CHECK(mltq_train(diverge.p, (root / "data").c_str(), (root / "div").c_str(), nullptr,
                     nullptr, &mean, &sd) == MLTQ_ERR_NUMERIC);
    CHECK(fs::exists(root / "div" / "metrics_run0.csv"));

    mltq_config_destroy(nullptr);
    mltq_model_destroy(nullptr);
    mltq_dataset_destroy(nullptr);
}
