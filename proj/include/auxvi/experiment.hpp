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

// Experiment runner: config parsing, training, oracle certification and the
// on-disk artifacts (trace.csv, summary.json, elbo.svg, posterior.svg,
// checkpoints).

#pragma once

#include "auxvi/estimators.hpp"
#include "auxvi/oracle.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace auxvi::experiment {

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

/// Malformed or inconsistent checkpoint file.
class CheckpointError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Family { simple, hierarchical };
enum class EstimatorKind { standard, hvm, adgm, hvm_x };

const char* to_string(Family f);
const char* to_string(EstimatorKind k);

struct ModelSpec {
  std::string name = "conjugate";
  double prior_var = 1.0;
  double lik_var = 1.0;
  double sep = 1.0;
  double lik_std = 0.3;
};

struct ExperimentConfig {
  ModelSpec model;
  double x = 1.0;
  Family family = Family::simple;
  double init_mean = 0.0; ///< initial mean of the simple family
  EstimatorKind estimator = EstimatorKind::standard;
  std::size_t aux_dim = 2;
  std::vector<std::size_t> hidden{32};
  TrainConfig train;
  bool oracle = true;
  std::size_t z_points = 1001;
  std::size_t lambda_points = 1001;
  std::size_t final_samples = 10000;
  std::size_t histogram_samples = 20000;
  std::string out_dir = "out";

  /// Flat "[section]" + "key = value" text. Unknown keys are errors.
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Sets one "section.key" field from its text form.
  void set(const std::string& key, const std::string& value);

  /// Throws ConfigError when fields are out of range or inconsistent.
  void validate() const;

  /// Canonical text form; parse(to_text()) reproduces the config.
  std::string to_text() const;
};

/// Model, variational parameters and families built from a config.
struct Setup {
  std::shared_ptr<const GenerativeModel> model;
  std::vector<double> x;
  ad::ParamVector params;
  std::optional<SimplePosterior> simple;
  std::optional<HierarchicalPosterior> hier;
  std::optional<AuxPosterior> aux;
  std::vector<bool> phi_mask;
};

std::shared_ptr<const GenerativeModel> make_model(const ModelSpec& spec);

/// Builds and initializes parameters from train.seed. For hvm_x the aux net
/// starts with the same weights as the hvm aux net and zero x-weights.
Setup build_setup(const ExperimentConfig& cfg);

Objective make_objective(const Setup& setup, EstimatorKind kind);

struct Certificate {
  bool certified = false;
  std::string status; ///< "certified", "uncertified: <reason>"
  double log_evidence = 0.0;
  double elbo_theta = 0.0;
  std::optional<double> elbo_theta_phi;
  std::optional<double> kl_gap;
  double slack_evidence = 0.0; ///< log P(x) - L(theta)
  std::optional<double> slack_aux; ///< L(theta) - L(theta, phi)
  bool chain_holds = false;

  static constexpr double kTolerance = 1e-6;
};

Certificate certify(const Setup& setup, const ExperimentConfig& cfg);

/// Draws from the learned posterior over z (first coordinate when n > 1).
std::vector<double> posterior_samples(const Setup& setup, std::size_t count,
                                      std::uint64_t seed);

struct RunSummary {
  bool train_ok = true;
  std::string failure;
  std::size_t steps_completed = 0;
  double elbo_mc = 0.0;
  double elbo_std_error = 0.0;
  Certificate certificate;
  std::optional<double> equivalence_discrepancy;
  double dip = 0.0;
  double dip_p_value = 1.0;
  double wall_ms = 0.0;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

/// Trains, certifies and writes every artifact under cfg.out_dir. Training
/// aborts are recorded in the summary (train_ok = false) with the partial
/// trace already on disk.
RunSummary run(const ExperimentConfig& cfg);

void write_checkpoint(const std::filesystem::path& path,
                      const ExperimentConfig& cfg,
                      const ad::ParamVector& params);

struct Checkpoint {
  ExperimentConfig config;
  Setup setup;
};

Checkpoint read_checkpoint(const std::filesystem::path& path);

struct VerifyReport {
  Certificate certificate;
  std::string text;
};

VerifyReport verify(const std::filesystem::path& checkpoint);

/// CSV header for trace files.
inline constexpr std::string_view kTraceHeader =
    "step,elbo_mc,std_error,grad_norm,wall_ms,estimator";

std::string trace_row(const TraceRow& row, EstimatorKind kind);

std::string line_plot_svg(std::span<const double> xs,
                          std::span<const double> ys, const std::string& title,
                          const std::string& x_label,
                          const std::string& y_label);

} // namespace auxvi::experiment
