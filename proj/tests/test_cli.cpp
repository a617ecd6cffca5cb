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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::path(MLTQNN_TEST_TMP) / "cli";

/// Runs the CLI with stdout captured to `<root>/stdout.txt`; returns the exit code.
int run(const std::string &args) {
    fs::create_directories(kRoot);
    const std::string cmd = std::string(MLTQNN_CLI) + " " + args + " > " +
                            (kRoot / "stdout.txt").string() + " 2> " +
                            (kRoot / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

std::size_t count_lines(const std::string &s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

const std::string kSmall = "-P 2 -E 3 -M 1 -K 2 --batch-size 10 -q";

std::string data_dir() {
    const fs::path d = kRoot / "data";
    if (!fs::exists(d / "manifest.json")) {
        REQUIRE(run("synth --out " + d.string() +
                    " --classes 2 --size 8 --channels 2 --train 20 --validation 8 --test 8") == 0);
    }
    return d.string();
}

} // namespace

TEST_CASE("exit codes", "[cli]") {
    CHECK(run("") == 2);
    CHECK(run("train --no-such-flag") == 2);
    CHECK(run("train --data " + (kRoot / "absent").string() + " --out " +
              (kRoot / "o").string()) == 3);
    CHECK(slurp(kRoot / "stderr.txt").find("not found") != std::string::npos);
    CHECK(count_lines(slurp(kRoot / "stderr.txt")) == 1);
    CHECK(run("resources -E 10") == 2);
    CHECK(run("train --data " + data_dir() + " --out " + (kRoot / "o").string() + " -N 16") == 2);
    CHECK(run("train --data " + data_dir() + " --out " + (kRoot / "div").string() + " " + kSmall +
              " --epochs 3 --runs 1 --lr 1e300") == 4);
    CHECK(run("--help") == 0);
}

TEST_CASE("resources", "[cli]") {
    REQUIRE(run("resources") == 0);
    const std::string a = slurp(kRoot / "stdout.txt");
    CHECK(a.find("trainable_quantum_params=198\n") != std::string::npos);
    CHECK(a.find("total_qubits=12\n") != std::string::npos);
    REQUIRE(run("resources -N 64 -P 8") == 0);
    CHECK(slurp(kRoot / "stdout.txt") == a);

    const fs::path cfg = kRoot / "cfg.json";
    std::ofstream(cfg) << R"({"E": 6})";
    REQUIRE(run("resources --config " + cfg.string()) == 0);
    CHECK(slurp(kRoot / "stdout.txt").find("encoding_qubits=8\n") != std::string::npos);
    REQUIRE(run("resources --config " + cfg.string() + " -E 9") == 0);
    CHECK(slurp(kRoot / "stdout.txt") == a);
}

TEST_CASE("train writes one file set per run and is reproducible", "[cli]") {
    const std::string data = data_dir();
    const fs::path a = kRoot / "run_a";
    const fs::path b = kRoot / "run_b";
    fs::remove_all(a);
    fs::remove_all(b);
    REQUIRE(run("train --data " + data + " --out " + a.string() + " " + kSmall +
                " --epochs 1 --runs 1 --deterministic --seed 7") == 0);
    std::size_t checkpoints = 0;
    std::size_t metrics = 0;
    for (const auto &e : fs::directory_iterator(a)) {
        const std::string n = e.path().filename().string();
        checkpoints += n.starts_with("checkpoint_") && n.ends_with(".json");
        metrics += n.starts_with("metrics_");
    }
    CHECK(checkpoints == 1);
    CHECK(metrics == 1);
    CHECK(count_lines(slurp(a / "metrics_run0.csv")) == 2);
    CHECK(slurp(a / "config.json").find("\"seed\": 7") != std::string::npos);

    REQUIRE(run("train --data " + data + " --out " + b.string() + " " + kSmall +
                " --epochs 1 --runs 1 --deterministic --seed 7") == 0);
    for (const char *f : {"metrics_run0.csv", "steps_run0.csv", "checkpoint_run0.json",
                          "checkpoint_run0.bin", "summary.csv"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }

    REQUIRE(run("eval --checkpoint " + (a / "checkpoint_run0").string() + " --data " + data +
                " --out " + (kRoot / "eval").string()) == 0);
    CHECK(fs::exists(kRoot / "eval" / "eval_summary.csv"));
    CHECK(run("eval --checkpoint " + (a / "checkpoint_run0").string() + " --data " + data +
              " --out " + (kRoot / "eval").string() + " -E 6") == 2);
    CHECK(run("eval --checkpoint " + (a / "missing").string() + " --data " + data + " --out " +
              (kRoot / "eval").string()) == 3);

    REQUIRE(run("analyze --ami --checkpoint " + (a / "checkpoint_run0.bin").string() +
                " --data " + data + " --out " + (kRoot / "an").string()) == 0);
    const std::string ami = slurp(kRoot / "an" / "ami.csv");
    CHECK(ami.starts_with("split,samples,k,ami_processed_image,ami_feature_vector\n"));
    CHECK(count_lines(ami) == 2);
}

TEST_CASE("synth is deterministic", "[cli]") {
    const fs::path a = kRoot / "syn_a";
    const fs::path b = kRoot / "syn_b";
    fs::remove_all(a);
    fs::remove_all(b);
    const std::string args = " --size 8 --channels 2 --train 12 --validation 4 --test 4 --seed 3";
    REQUIRE(run("synth --out " + a.string() + args) == 0);
    REQUIRE(run("synth --out " + b.string() + args) == 0);
    for (const auto &e : fs::directory_iterator(a)) {
        CHECK(slurp(e.path()) == slurp(b / e.path().filename()));
    }
}
