// Copyright 2026 The DeepClean Authors
// SPDX-License-Identifier: Apache-2.0

// Runs the command-line binary as a subprocess.

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path& scratch() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / ("dctest_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Cleanup {
  ~Cleanup() {
    std::error_code ec;
    fs::remove_all(scratch(), ec);
  }
} cleanup;

Run cli(const std::string& args) {
  static int counter = 0;
  const auto err_path = scratch() / ("stderr_" + std::to_string(counter++));
  const std::string cmd = std::string(DEEPCLEAN_CLI_PATH) + " " + args + " 2>" + err_path.string();
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  return r;
}

std::string p(const std::string& rel) { return (scratch() / rel).string(); }

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

// Shared fixture: three clean scenes, the seen dataset and a briefly trained model.
void ensure_fixture() {
  static bool ready = false;
  if (ready) return;
  REQUIRE(cli("scenes --out " + p("clean") + " --count 3 --size 32").code == 0);
  REQUIRE(cli("synth --clean-dir " + p("clean") + " --out " + p("ds") + " --image-size 32").code == 0);
  REQUIRE(cli("train --manifest " + p("ds/manifest.jsonl") + " --out " + p("mtl.dcln") +
              " --epochs 3 --lr 0.001 --threads 1")
              .code == 0);
  REQUIRE(cli("train --manifest " + p("ds/manifest.jsonl") + " --out " + p("hcc.dcln") +
              " --epochs 1 --arch hcc --threads 1")
              .code == 0);
  ready = true;
}

}  // namespace

TEST_CASE("synth reports counts and honours the test variant") {
  ensure_fixture();
  const auto r = cli("synth --clean-dir " + p("clean") + " --out " + p("s1") + " --image-size 32");
  CHECK(r.code == 0);
  CHECK(r.out.find("123 samples") != std::string::npos);

  const auto u = cli("synth --clean-dir " + p("clean") + " --out " + p("su") + " --image-size 32 --test-variant");
  REQUIRE(u.code == 0);
  std::set<double> params;
  std::ifstream in(p("su/manifest.jsonl"));
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["split"] == "test");
    for (const auto& d : j["sequence"]) params.insert(d["param"].get<double>());
  }
  CHECK(params == std::set<double>{0.3, 0.9, 2.2, 3.2, 0.06, 0.1, 0.17, 0.25});

  const auto custom = cli("synth --clean-dir " + p("clean") + " --out " + p("sc") +
                          " --image-size 32 --gammas-dark 2.5 --gammas-bright 0.5 --sigmas-low 0.05 --sigmas-high 0.3");
  CHECK(custom.code == 0);
  CHECK(custom.out.find("39 samples") != std::string::npos);  // 13 per image
}

TEST_CASE("synth errors") {
  const auto missing = cli("synth --out " + p("x"));
  CHECK(missing.code != 0);
  const auto bad_dir = cli("synth --clean-dir " + p("nope") + " --out " + p("x"));
  CHECK(bad_dir.code != 0);
  CHECK(lines(bad_dir.err) == 1u);
  const auto bad_list = cli("synth --clean-dir " + p("clean") + " --out " + p("x") + " --sigmas-low abc");
  CHECK(bad_list.code != 0);
  const auto overlap = cli("synth --clean-dir " + p("clean") + " --out " + p("x") + " --sigmas-low 0.3");
  CHECK(overlap.code != 0);
  CHECK(lines(overlap.err) == 1u);
}

TEST_CASE("train: zero epochs, determinism, architecture header") {
  ensure_fixture();
  const std::string m = " --manifest " + p("ds/train.jsonl");
  CHECK(cli("train" + m + " --out " + p("e0a.dcln") + " --epochs 0").code == 0);
  CHECK(cli("train" + m + " --out " + p("e0b.dcln") + " --epochs 0 --seed 42").code == 0);
  CHECK(slurp(p("e0a.dcln")) == slurp(p("e0b.dcln")));
  CHECK(slurp(p("e0a.dcln")).size() > 1000u);

  const auto r1 = cli("train" + m + " --out " + p("d1.dcln") + " --epochs 1 --threads 1");
  CHECK(r1.code == 0);
  CHECK(r1.out.find("final train accuracy") != std::string::npos);
  CHECK(cli("train" + m + " --out " + p("d2.dcln") + " --epochs 1 --threads 1").code == 0);
  CHECK(slurp(p("d1.dcln")) == slurp(p("d2.dcln")));
  CHECK(slurp(p("d1.dcln")) != slurp(p("e0a.dcln")));
  CHECK(lines(slurp(p("d1.dcln.log.jsonl"))) == 1u);

  const auto hcc = slurp(p("hcc.dcln"));
  CHECK(hcc.find("\"arch\":\"hcc\"") != std::string::npos);
  CHECK(slurp(p("mtl.dcln")).find("\"arch\":\"mtl\"") != std::string::npos);

  const auto bad = cli("train --manifest " + p("nope.jsonl") + " --out " + p("z.dcln"));
  CHECK(bad.code != 0);
  CHECK(lines(bad.err) == 1u);
  CHECK(cli("train" + m + " --out " + p("z.dcln") + " --arch vgg").code != 0);
  CHECK(cli("train" + m + " --out " + p("no_dir/z.dcln") + " --epochs 0").code != 0);
}

TEST_CASE("identify prints a kind") {
  ensure_fixture();
  const auto r = cli("identify --model " + p("mtl.dcln") + " --image " + p("ds/clean/scene_0000.png"));
  CHECK(r.code == 0);
  CHECK(r.out.find("clean=") != std::string::npos);
  const auto a = cli("identify --model " + p("mtl.dcln") + " --manifest " + p("ds/test.jsonl"));
  CHECK(a.code == 0);
  CHECK(a.out.rfind("accuracy ", 0) == 0);
}

TEST_CASE("clean: traces, caps and errors") {
  ensure_fixture();
  const std::string model = " --model " + p("mtl.dcln");
  const auto any = fs::directory_iterator(p("ds/images"))->path().string();
  const auto r = cli("clean" + model + " --image " + any + " --max-iters 1 --out " + p("r1.png") + " --trace " +
                     p("r1.json"));
  REQUIRE(r.code == 0);
  const auto tj = nlohmann::json::parse(slurp(p("r1.json")));
  CHECK(tj["iterations"].get<int>() <= 1);
  std::size_t corrections = 0;
  for (const auto& s : tj["steps"]) corrections += s["chosen"].is_null() ? 0 : 1;
  CHECK(corrections <= 1u);
  CHECK(fs::exists(p("r1.png")));

  // a model trained only on clean samples calls everything clean, so the loop must stop at once
  {
    std::ifstream in(p("ds/manifest.jsonl"));
    std::ofstream out(p("ds/only_clean.jsonl"));
    for (std::string line; std::getline(in, line);)
      if (line.find("\"label\":\"clean\"") != std::string::npos) out << line << "\n";
  }
  REQUIRE(cli("train --manifest " + p("ds/only_clean.jsonl") + " --out " + p("clean_only.dcln") +
              " --epochs 20 --lr 0.001 --threads 1")
              .code == 0);
  const std::string clean_model = " --model " + p("clean_only.dcln");
  const std::string clean_fixture = any;
  REQUIRE(cli("identify" + clean_model + " --image " + clean_fixture).out.rfind("clean ", 0) == 0);
  REQUIRE(cli("clean" + clean_model + " --image " + clean_fixture + " --out " + p("c0.png") + " --trace " + p("c0.json"))
              .code == 0);
  const auto cj = nlohmann::json::parse(slurp(p("c0.json")));
  CHECK(cj["terminated"] == "predicted_clean");
  CHECK(cj["steps"].size() == 1u);
  CHECK(cj["steps"][0]["chosen"].is_null());

  const auto man = cli("clean" + model + " --manifest " + p("ds/test.jsonl") + " --out " + p("restored"));
  REQUIRE(man.code == 0);
  std::size_t traces = 0;
  for (const auto& e : fs::directory_iterator(p("restored")))
    if (e.path().string().ends_with(".trace.json")) {
      ++traces;
      const auto j = nlohmann::json::parse(slurp(e.path()));
      for (const auto& s : j["steps"]) CHECK(s.contains("psnr_vs_reference"));
    }
  CHECK(traces > 0u);

  const auto missing = cli("clean --model " + p("none.dcln") + " --image " + any + " --out " + p("x.png"));
  CHECK(missing.code != 0);
  CHECK(lines(missing.err) == 1u);
  CHECK(cli("clean" + model + " --out " + p("x.png")).code != 0);
  CHECK(cli("clean" + model + " --image " + any + " --out " + p("x.png") + " --pool gamma_0.5,warp_2").code != 0);
}

TEST_CASE("eval: anchors, rows, ranking and errors") {
  ensure_fixture();
  const std::string base = "eval --manifest " + p("ds/test.jsonl") + " --model " + p("mtl.dcln") + " --hcc-model " +
                           p("hcc.dcln");
  const auto a = cli(base + " --strategies oracle,fixed1 --report " + p("ra"));
  REQUIRE(a.code == 0);
  const auto ja = nlohmann::json::parse(slurp(p("ra.json")));
  for (const auto& row : ja["strategies"]) {
    if (row["strategy"] == "oracle") CHECK(row["normalized_score"].get<double>() == doctest::Approx(1.0));
    if (row["strategy"] == "fixed1") CHECK(row["normalized_score"].get<double>() == doctest::Approx(0.0));
  }
  CHECK(a.out.find("oracle") < a.out.find("fixed1"));

  const auto six = cli(base + " --strategies deepclean,oracle,random,hcc,fixed1,fixed2 --report " + p("rb"));
  REQUIRE(six.code == 0);
  CHECK(lines(slurp(p("rb.csv"))) == 7u);
  CHECK(slurp(p("rb.csv")).rfind("strategy,mean_psnr,id_accuracy,normalized_score,n_samples\n", 0) == 0);

  const auto bad = cli(base + " --strategies oracle,greedy --report " + p("rc"));
  CHECK(bad.code != 0);
  CHECK(lines(bad.err) == 1u);
  for (const char* name : {"deepclean", "oracle", "random", "hcc", "fixed1", "fixed2"})
    CHECK(bad.err.find(name) != std::string::npos);

  const auto nomodel = cli("eval --manifest " + p("ds/test.jsonl") + " --strategies deepclean --report " + p("rd"));
  CHECK(nomodel.code != 0);
  CHECK(lines(nomodel.err) == 1u);
}

TEST_CASE("subcommands do not modify their inputs and reproduce their outputs") {
  ensure_fixture();
  const auto manifest_before = slurp(p("ds/test.jsonl"));
  const auto model_before = slurp(p("mtl.dcln"));
  const auto clean_before = slurp(p("clean/scene_0000.png"));
  const std::string base = "eval --manifest " + p("ds/test.jsonl") + " --model " + p("mtl.dcln") + " --hcc-model " +
                           p("hcc.dcln") + " --strategies deepclean,oracle,random,hcc,fixed1,fixed2";
  REQUIRE(cli(base + " --report " + p("e1")).code == 0);
  REQUIRE(cli(base + " --report " + p("e2") + " --threads 3").code == 0);
  CHECK(slurp(p("e1.json")) == slurp(p("e2.json")));
  CHECK(slurp(p("e1.csv")) == slurp(p("e2.csv")));
  REQUIRE(cli("synth --clean-dir " + p("clean") + " --out " + p("ds_again") + " --image-size 32").code == 0);
  CHECK(slurp(p("ds_again/manifest.jsonl")) == slurp(p("ds/manifest.jsonl")));
  CHECK(slurp(p("ds/test.jsonl")) == manifest_before);
  CHECK(slurp(p("mtl.dcln")) == model_before);
  CHECK(slurp(p("clean/scene_0000.png")) == clean_before);
}

TEST_CASE("usage errors") {
  CHECK(cli("").code != 0);
  CHECK(cli("frobnicate").code != 0);
  CHECK(cli("--version").code == 0);
}
