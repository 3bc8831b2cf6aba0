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

#include "auxvi/auxvi.h"

#include "auxvi/experiment.hpp"
#include "auxvi/selftest.hpp"

#include <cstring>
#include <filesystem>
#include <map>
#include <string>

namespace ex = auxvi::experiment;

struct auxvi_config {
  ex::ExperimentConfig cfg;
  std::string text;
};

struct auxvi_summary {
  ex::RunSummary summary;
  std::string json;
};

struct auxvi_report {
  ex::VerifyReport report;
};

namespace {

thread_local std::string last_error;

auxvi_status fail(auxvi_status code, const std::string& message) {
  last_error = message;
  return code;
}

template <class F>
auxvi_status guarded(F&& body) {
  try {
    last_error.clear();
    return body();
  } catch (const ex::ConfigError& e) {
    return fail(AUXVI_ERR_CONFIG, e.what());
  } catch (const ex::CheckpointError& e) {
    return fail(AUXVI_ERR_CHECKPOINT, e.what());
  } catch (const auxvi::ad::NumericalError& e) {
    return fail(AUXVI_ERR_NUMERICAL, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(AUXVI_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(AUXVI_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(AUXVI_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(AUXVI_ERR_INTERNAL, "unknown error");
  }
}

double flag(bool b) { return b ? 1.0 : 0.0; }

auxvi_status lookup(const std::map<std::string, double>& fields,
                    const char* field, double* out) {
  if (field == nullptr || out == nullptr) {
    return fail(AUXVI_ERR_INVALID_ARGUMENT, "null argument");
  }
  const auto it = fields.find(field);
  if (it == fields.end()) {
    return fail(AUXVI_ERR_INVALID_ARGUMENT,
                std::string("unknown or unavailable field: ") + field);
  }
  *out = it->second;
  return AUXVI_OK;
}

void certificate_fields(const ex::Certificate& c,
                        std::map<std::string, double>& f) {
  f["certified"] = flag(c.certified);
  f["chain_holds"] = flag(c.chain_holds);
  if (!c.certified) {
    return;
  }
  f["log_evidence"] = c.log_evidence;
  f["elbo_theta"] = c.elbo_theta;
  if (c.elbo_theta_phi) {
    f["elbo_theta_phi"] = *c.elbo_theta_phi;
  }
  if (c.kl_gap) {
    f["kl_gap"] = *c.kl_gap;
  }
}

} // namespace

extern "C" {

const char* auxvi_version(void) { return "0.1.0"; }

const char* auxvi_last_error(void) { return last_error.c_str(); }

auxvi_status auxvi_config_load(const char* path, auxvi_config** out) {
  if (path == nullptr || out == nullptr) {
    return fail(AUXVI_ERR_INVALID_ARGUMENT, "null argument");
  }
  *out = nullptr;
  return guarded([&] {
    if (!std::filesystem::exists(path)) {
      return fail(AUXVI_ERR_IO, std::string("no such file: ") + path);
    }
    *out = new auxvi_config{ex::ExperimentConfig::load(path), {}};
    return AUXVI_OK;
  });
}

auxvi_status auxvi_config_parse(const char* text, auxvi_config** out) {
  if (text == nullptr || out == nullptr) {
    return fail(AUXVI_ERR_INVALID_ARGUMENT, "null argument");
  }
  *out = nullptr;
  return guarded([&] {
    *out = new auxvi_config{ex::ExperimentConfig::parse(text), {}};
    return AUXVI_OK;
  });
}

auxvi_status auxvi_config_set(auxvi_config* cfg, const char* key,
                              const char* value) {
  if (cfg == nullptr || key == nullptr || value == nullptr) {
    return fail(AUXVI_ERR_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    cfg->cfg.set(key, value);
    return AUXVI_OK;
  });
}

const char* auxvi_config_text(auxvi_config* cfg) {
  if (cfg == nullptr) {
    return "";
  }
  cfg->text = cfg->cfg.to_text();
  return cfg->text.c_str();
}

void auxvi_config_free(auxvi_config* cfg) { delete cfg; }

auxvi_status auxvi_run(const auxvi_config* cfg, auxvi_summary** out) {
  if (cfg == nullptr || out == nullptr) {
    return fail(AUXVI_ERR_INVALID_ARGUMENT, "null argument");
  }
  *out = nullptr;
  return guarded([&] {
    auto* s = new auxvi_summary{ex::run(cfg->cfg), {}};
    s->json = s->summary.to_json();
    *out = s;
    if (!s->summary.train_ok) {
      return fail(AUXVI_ERR_NUMERICAL, s->summary.failure);
    }
    return AUXVI_OK;
  });
}

auxvi_status auxvi_summary_get(const auxvi_summary* s, const char* field,
                               double* out) {
  if (s == nullptr) {
    return fail(AUXVI_ERR_INVALID_ARGUMENT, "null argument");
  }
  const ex::RunSummary& r = s->summary;
  std::map<std::string, double> f{
      {"elbo_mc", r.elbo_mc},
      {"elbo_std_error", r.elbo_std_error},
      {"dip", r.dip},
      {"dip_p_value", r.dip_p_value},
      {"wall_ms", r.wall_ms},
      {"steps_completed", static_cast<double>(r.steps_completed)},
      {"train_ok", flag(r.train_ok)},
  };
  if (r.equivalence_discrepancy) {
    f["equivalence_discrepancy"] = *r.equivalence_discrepancy;
  }
  certificate_fields(r.certificate, f);
  return lookup(f, field, out);
}

const char* auxvi_summary_json(const auxvi_summary* s) {
  return s == nullptr ? "" : s->json.c_str();
}

void auxvi_summary_free(auxvi_summary* s) { delete s; }

auxvi_status auxvi_verify(const char* checkpoint_path, auxvi_report** out) {
  if (checkpoint_path == nullptr || out == nullptr) {
    return fail(AUXVI_ERR_INVALID_ARGUMENT, "null argument");
  }
  *out = nullptr;
  return guarded([&] {
    if (!std::filesystem::exists(checkpoint_path)) {
      return fail(AUXVI_ERR_IO,
                  std::string("no such file: ") + checkpoint_path);
    }
    *out = new auxvi_report{ex::verify(checkpoint_path)};
    return AUXVI_OK;
  });
}

int auxvi_report_certified(const auxvi_report* r) {
  return r != nullptr && r->report.certificate.certified ? 1 : 0;
}

int auxvi_report_chain_holds(const auxvi_report* r) {
  return r != nullptr && r->report.certificate.chain_holds ? 1 : 0;
}

auxvi_status auxvi_report_get(const auxvi_report* r, const char* field,
                              double* out) {
  if (r == nullptr) {
    return fail(AUXVI_ERR_INVALID_ARGUMENT, "null argument");
  }
  std::map<std::string, double> f;
  certificate_fields(r->report.certificate, f);
  return lookup(f, field, out);
}

const char* auxvi_report_text(const auxvi_report* r) {
  return r == nullptr ? "" : r->report.text.c_str();
}

void auxvi_report_free(auxvi_report* r) { delete r; }

auxvi_status auxvi_selftest(auxvi_selftest_callback cb, void* user,
                            int* failures) {
  return guarded([&] {
    const int n = auxvi::run_selftest([&](const auxvi::CheckResult& r) {
      if (cb != nullptr) {
        cb(r.name.c_str(), r.passed ? 1 : 0, r.detail.c_str(), user);
      }
    });
    if (failures != nullptr) {
      *failures = n;
    }
    return AUXVI_OK;
  });
}

} // extern "C"
