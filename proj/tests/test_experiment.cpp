/*
Copyright 2026 The auxvi Authors
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "doctest.h"

#include "auxvi/experiment.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace auxvi;
using namespace auxvi::experiment;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() /
                       ("auxvi_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    out.push_back(l);
  }
  return out;
}

/// Drops the wall_ms column from a trace.
std::string strip_wall(const std::string& trace) {
  std::string out;
  for (const auto& l : lines(trace)) {
    std::vector<std::string> cols;
    std::stringstream ss(l);
    for (std::string c; std::getline(ss, c, ',');) {
      cols.push_back(c);
    }
    cols.erase(cols.begin() + 4);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      out += (i ? "," : "") + cols[i];
    }
    out += "\n";
  }
  return out;
}

ExperimentConfig small_conjugate(const fs::path& out) {
  ExperimentConfig cfg;
  cfg.train.steps = 150;
  cfg.final_samples = 2000;
  cfg.histogram_samples = 2000;
  cfg.out_dir = out.string();
  return cfg;
}

ExperimentConfig small_bimodal(const fs::path& out, EstimatorKind kind) {
  ExperimentConfig cfg = small_conjugate(out);
  cfg.model.name = "bimodal";
  cfg.family = Family::hierarchical;
  cfg.estimator = kind;
  cfg.aux_dim = 1;
  cfg.hidden = {8};
  cfg.train.steps = 100;
  cfg.z_points = 501;
  cfg.lambda_points = 501;
  return cfg;
}

} // namespace

TEST_CASE("config text round trips") {
  ExperimentConfig cfg;
  cfg.model.name = "bimodal";
  cfg.model.lik_std = 0.25;
  cfg.x = 1.5;
  cfg.family = Family::hierarchical;
  cfg.estimator = EstimatorKind::adgm;
  cfg.hidden = {16, 4};
  cfg.train.optimizer = OptimizerKind::sgd;
  cfg.train.alternate = true;
  const std::string text = cfg.to_text();
  CHECK(ExperimentConfig::parse(text).to_text() == text);
}

TEST_CASE("config parsing") {
  const auto cfg = ExperimentConfig::parse(R"(
# comment
[model]
name = bimodal   # trailing comment
x = 0.8

[posterior]
family = hierarchical
hidden = none

[estimator]
kind = hvm_x

[train]
seed = 12
)");
  CHECK(cfg.model.name == "bimodal");
  CHECK(cfg.x == 0.8);
  CHECK(cfg.hidden.empty());
  CHECK(cfg.estimator == EstimatorKind::hvm_x);
  CHECK(cfg.train.seed == 12);
}

TEST_CASE("config errors name the field") {
  auto field_of = [](const std::string& text) {
    try {
      ExperimentConfig::parse(text).validate();
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  CHECK(field_of("[model]\ncolour = red\n") == "model.colour");
  CHECK(field_of("[train]\nsteps = many\n") == "train.steps");
  CHECK(field_of("[train]\nlearning_rate = 0\n") == "train.learning_rate");
  CHECK(field_of("[train]\nsamples = 0\n") == "train.samples");
  CHECK(field_of("[model]\nname = banana\n") == "model.name");
  CHECK(field_of("[estimator]\nkind = hvm\n") == "estimator.kind");
  CHECK(field_of("[oracle]\nz_points = 1000\n") == "oracle.z_points");
  CHECK(field_of("[oracle]\nenabled = false\nz_points = 1000\n") == "<none>");
  CHECK(field_of("[model]\nx = nan\n") == "model.x");
  CHECK(field_of("orphan = 1\n") != "<none>");
}

TEST_CASE("set overrides individual fields") {
  ExperimentConfig cfg;
  cfg.set("train.seed", "99");
  cfg.set("output.dir", "elsewhere");
  cfg.set("oracle.enabled", "false");
  CHECK(cfg.train.seed == 99);
  CHECK(cfg.out_dir == "elsewhere");
  CHECK_FALSE(cfg.oracle);
  CHECK_THROWS_AS(cfg.set("train.seed", "-3"), ConfigError);
}

TEST_CASE("hvm_x setup starts equal to hvm") {
  auto base = small_bimodal("unused", EstimatorKind::hvm);
  auto with_x = base;
  with_x.estimator = EstimatorKind::hvm_x;
  const Setup a = build_setup(base);
  const Setup b = build_setup(with_x);
  const auto pa = ad::constants(a.params.values());
  const auto pb = ad::constants(b.params.values());
  const auto ea = make_objective(a, EstimatorKind::hvm)(pa, 64, 5);
  const auto eb = make_objective(b, EstimatorKind::hvm_x)(pb, 64, 5);
  CHECK(ea.terms == eb.terms);
}

TEST_CASE("checkpoint round trip") {
  const fs::path dir = scratch("ckpt");
  const auto cfg = small_bimodal(dir, EstimatorKind::adgm);
  const Setup s = build_setup(cfg);
  write_checkpoint(dir / "c.txt", cfg, s.params);
  const Checkpoint ck = read_checkpoint(dir / "c.txt");
  CHECK(ck.config.to_text() == cfg.to_text());
  REQUIRE(ck.setup.params.size() == s.params.size());
  for (std::size_t i = 0; i < s.params.size(); ++i) {
    CHECK(ck.setup.params[i] == s.params[i]);
  }
}

TEST_CASE("corrupted checkpoints are rejected") {
  const fs::path dir = scratch("corrupt");
  const auto cfg = small_conjugate(dir);
  write_checkpoint(dir / "c.txt", cfg, build_setup(cfg).params);
  const std::string good = slurp(dir / "c.txt");
  auto write = [&](const std::string& text) {
    std::ofstream(dir / "bad.txt", std::ios::binary) << text;
    return dir / "bad.txt";
  };
  auto replace = [&](std::string s, const std::string& from, const std::string& to) {
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  CHECK_THROWS_AS(read_checkpoint(dir / "missing.txt"), CheckpointError);
  CHECK_THROWS_AS(read_checkpoint(write("hello\n")), CheckpointError);
  CHECK_THROWS_AS(read_checkpoint(write(replace(good, "count = 2", "count = 3"))),
                  CheckpointError);
  CHECK_THROWS_AS(read_checkpoint(write(replace(good, "--- end ---", ""))), CheckpointError);
  CHECK_THROWS_AS(read_checkpoint(write(replace(good, "q.mean[0]", "q.mu[0]"))),
                  CheckpointError);
  CHECK_THROWS_AS(read_checkpoint(write(replace(good, "q.mean[0] = 0", "q.mean[0] = zero"))),
                  CheckpointError);
  CHECK_THROWS_AS(read_checkpoint(write(replace(good, "name = conjugate", "name = nope"))),
                  CheckpointError);
}

TEST_CASE("run writes every artifact") {
  const fs::path dir = scratch("run");
  const auto cfg = small_conjugate(dir);
  const RunSummary s = run(cfg);
  CHECK(s.train_ok);
  CHECK(s.steps_completed == cfg.train.steps);
  for (const char* f : {"trace.csv", "summary.json", "elbo.svg", "posterior.svg",
                        "checkpoint.txt", "checkpoint_init.txt"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  const auto trace = lines(slurp(dir / "trace.csv"));
  CHECK(trace.size() == cfg.train.steps + 1);
  CHECK(trace[0] == kTraceHeader);
  CHECK(trace[1].substr(0, 2) == "0,");
  CHECK(trace[1].substr(trace[1].size() - 9) == ",standard");
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(j["oracle"]["status"] == "certified");
  CHECK(j["oracle"]["chain_holds"] == true);
  CHECK(j["elbo_mc"].get<double>() == s.elbo_mc);
  CHECK(slurp(dir / "elbo.svg").find("<svg") != std::string::npos);
}

TEST_CASE("runs are reproducible apart from timing") {
  const fs::path a = scratch("rep_a");
  const fs::path b = scratch("rep_b");
  const auto sa = run(small_bimodal(a, EstimatorKind::hvm));
  const auto sb = run(small_bimodal(b, EstimatorKind::hvm));
  CHECK(strip_wall(slurp(a / "trace.csv")) == strip_wall(slurp(b / "trace.csv")));
  auto params_of = [](const fs::path& d) {
    const std::string text = slurp(d / "checkpoint.txt");
    return text.substr(text.find("--- params ---"));
  };
  CHECK(params_of(a) == params_of(b));
  CHECK(sa.elbo_mc == sb.elbo_mc);
}

TEST_CASE("HVM and ADGM runs produce identical traces") {
  const fs::path a = scratch("eq_hvm");
  const fs::path b = scratch("eq_adgm");
  run(small_bimodal(a, EstimatorKind::hvm));
  const auto sb = run(small_bimodal(b, EstimatorKind::adgm));
  auto body = [&](const fs::path& d) {
    std::string out;
    for (const auto& l : lines(strip_wall(slurp(d / "trace.csv")))) {
      out += l.substr(0, l.rfind(',')) + "\n";
    }
    return out;
  };
  CHECK(body(a) == body(b));
  REQUIRE(sb.equivalence_discrepancy.has_value());
  CHECK(*sb.equivalence_discrepancy <= 1e-12);
}

TEST_CASE("verify recomputes the run certificate") {
  const fs::path dir = scratch("verify");
  const auto s = run(small_bimodal(dir, EstimatorKind::hvm));
  const VerifyReport r = verify(dir / "checkpoint.txt");
  CHECK(r.certificate.certified);
  CHECK(r.certificate.elbo_theta == s.certificate.elbo_theta);
  CHECK(*r.certificate.kl_gap == *s.certificate.kl_gap);
  CHECK(r.text.find("chain: holds") != std::string::npos);
}

TEST_CASE("training shrinks the certified gap") {
  const fs::path dir = scratch("gap");
  auto cfg = ExperimentConfig::load(fs::path(AUXVI_SOURCE_DIR) / "configs" / "bimodal_hvm.cfg");
  cfg.out_dir = dir.string();
  cfg.train.steps = 1500;
  cfg.z_points = 1001;
  cfg.lambda_points = 1001;
  run(cfg);
  const VerifyReport init = verify(dir / "checkpoint_init.txt");
  const VerifyReport trained = verify(dir / "checkpoint.txt");
  REQUIRE(init.certificate.certified);
  REQUIRE(trained.certificate.certified);
  CHECK(init.certificate.chain_holds);
  CHECK(trained.certificate.chain_holds);
  CHECK(*trained.certificate.kl_gap < *init.certificate.kl_gap);
}

TEST_CASE("oracle can be disabled") {
  const fs::path dir = scratch("no_oracle");
  auto cfg = small_conjugate(dir);
  cfg.oracle = false;
  const auto s = run(cfg);
  CHECK_FALSE(s.certificate.certified);
  CHECK(s.certificate.status == "uncertified: oracle disabled");
}

TEST_CASE("numerical abort keeps the partial trace") {
  const fs::path dir = scratch("abort");
  auto cfg = small_conjugate(dir);
  cfg.train.optimizer = OptimizerKind::sgd;
  cfg.train.learning_rate = 1e6;
  const auto s = run(cfg);
  CHECK_FALSE(s.train_ok);
  CHECK(s.failure.find("non-finite") != std::string::npos);
  CHECK(lines(slurp(dir / "trace.csv")).size() == s.steps_completed + 1);
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(j["train_ok"] == false);
  CHECK(j["oracle"]["status"] == "uncertified: training aborted");
}

TEST_CASE("line plot svg") {
  const std::vector<double> xs{0, 1, 2};
  const std::vector<double> ys{-3, -2, -2.5};
  const std::string svg = line_plot_svg(xs, ys, "t", "x", "y");
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}
