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

// auxvi command-line driver. Links only the C API.

#include "auxvi/auxvi.h"

#include "CLI11.hpp"

#include <cstdio>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitNumerical = 2;

int report_error(const char* what, auxvi_status status) {
  std::fprintf(stderr, "auxvi: %s: %s\n", what, auxvi_last_error());
  return status == AUXVI_ERR_NUMERICAL ? kExitNumerical : kExitInvalid;
}

void print_field(const auxvi_summary* s, const char* label, const char* field) {
  double v = 0.0;
  if (auxvi_summary_get(s, field, &v) == AUXVI_OK) {
    std::printf("%-24s %.10g\n", label, v);
  }
}

int cmd_run(const std::string& path, const std::string* seed,
            const std::string* out_dir, bool no_oracle) {
  auxvi_config* cfg = nullptr;
  auxvi_status st = auxvi_config_load(path.c_str(), &cfg);
  if (st != AUXVI_OK) {
    return report_error("config", st);
  }
  if (seed != nullptr && (st = auxvi_config_set(cfg, "train.seed", seed->c_str())) != AUXVI_OK) {
    auxvi_config_free(cfg);
    return report_error("--seed", st);
  }
  if (out_dir != nullptr &&
      (st = auxvi_config_set(cfg, "output.dir", out_dir->c_str())) != AUXVI_OK) {
    auxvi_config_free(cfg);
    return report_error("--out-dir", st);
  }
  if (no_oracle && (st = auxvi_config_set(cfg, "oracle.enabled", "false")) != AUXVI_OK) {
    auxvi_config_free(cfg);
    return report_error("--no-oracle", st);
  }

  auxvi_summary* summary = nullptr;
  st = auxvi_run(cfg, &summary);
  auxvi_config_free(cfg);
  if (summary == nullptr) {
    return report_error("run", st);
  }
  int code = kExitOk;
  if (st == AUXVI_ERR_NUMERICAL) {
    std::fprintf(stderr, "auxvi: numerical abort: %s\n", auxvi_last_error());
    code = kExitNumerical;
  } else {
    print_field(summary, "elbo (MC)", "elbo_mc");
    print_field(summary, "std error", "elbo_std_error");
    print_field(summary, "log P(x)", "log_evidence");
    print_field(summary, "L(theta)", "elbo_theta");
    print_field(summary, "L(theta,phi)", "elbo_theta_phi");
    print_field(summary, "E_Q[KL] gap", "kl_gap");
    print_field(summary, "HVM/ADGM discrepancy", "equivalence_discrepancy");
    print_field(summary, "dip", "dip");
    print_field(summary, "dip p-value", "dip_p_value");
    double certified = 0.0;
    double holds = 0.0;
    auxvi_summary_get(summary, "certified", &certified);
    auxvi_summary_get(summary, "chain_holds", &holds);
    if (certified != 0.0 && holds == 0.0) {
      std::fprintf(stderr, "auxvi: bound chain violated\n");
      code = kExitInvalid;
    }
    std::printf("%-24s %s\n", "certificate",
                certified == 0.0 ? "uncertified" : holds != 0.0 ? "holds" : "VIOLATED");
  }
  auxvi_summary_free(summary);
  return code;
}

int cmd_verify(const std::string& path) {
  auxvi_report* report = nullptr;
  const auxvi_status st = auxvi_verify(path.c_str(), &report);
  if (st != AUXVI_OK) {
    return report_error("verify", st);
  }
  std::fputs(auxvi_report_text(report), stdout);
  const int code = auxvi_report_certified(report) && !auxvi_report_chain_holds(report)
                       ? kExitInvalid
                       : kExitOk;
  auxvi_report_free(report);
  return code;
}

void print_check(const char* name, int passed, const char* detail, void*) {
  std::printf("[%s] %s: %s\n", passed ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
}

int cmd_selftest() {
  int failures = 0;
  const auxvi_status st = auxvi_selftest(print_check, nullptr, &failures);
  if (st != AUXVI_OK) {
    return report_error("selftest", st);
  }
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? kExitOk : kExitInvalid;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Auxiliary-variable variational inference with exact certificates"};
  app.set_version_flag("--version", auxvi_version());
  app.require_subcommand(1);

  std::string config_path;
  std::string seed;
  std::string out_dir;
  bool no_oracle = false;
  auto* run = app.add_subcommand("run", "Train from a config and write artifacts");
  run->add_option("config", config_path, "Config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Override train.seed");
  auto* out_opt = run->add_option("--out-dir", out_dir, "Override output.dir");
  run->add_flag("--no-oracle", no_oracle, "Skip quadrature certification");

  std::string checkpoint;
  auto* verify = app.add_subcommand("verify", "Recompute certificates for a checkpoint");
  verify->add_option("checkpoint", checkpoint, "Checkpoint file")->required();

  auto* selftest = app.add_subcommand("selftest", "Run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  if (run->parsed()) {
    return cmd_run(config_path, seed_opt->count() ? &seed : nullptr,
                   out_opt->count() ? &out_dir : nullptr, no_oracle);
  }
  if (verify->parsed()) {
    return cmd_verify(checkpoint);
  }
  if (selftest->parsed()) {
    return cmd_selftest();
  }
  return kExitInvalid;
}
