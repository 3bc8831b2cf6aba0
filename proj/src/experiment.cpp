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

#include "auxvi/experiment.hpp"

#include "auxvi/diagnostics.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace auxvi::experiment {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(field, "expected a finite number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& field, const std::string& text) {
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(field,
                      "expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& field, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") {
    return true;
  }
  if (text == "false" || text == "0" || text == "no" || text == "off") {
    return false;
  }
  throw ConfigError(field, "expected true or false, got '" + text + "'");
}

std::vector<std::size_t> parse_widths(const std::string& field,
                                      const std::string& text) {
  std::vector<std::size_t> out;
  if (text.empty() || text == "none") {
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_uint(field, trim(item)));
  }
  return out;
}

void require_grid_points(const std::string& field, std::size_t points) {
  if (points < 101 || points % 2 == 0) {
    throw ConfigError(field, "grid point count must be odd and >= 101");
  }
}

} // namespace

const char* to_string(Family f) {
  return f == Family::simple ? "simple" : "hierarchical";
}

const char* to_string(EstimatorKind k) {
  switch (k) {
  case EstimatorKind::standard: return "standard";
  case EstimatorKind::hvm: return "hvm";
  case EstimatorKind::adgm: return "adgm";
  case EstimatorKind::hvm_x: return "hvm_x";
  }
  return "?";
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "model.name") {
    model.name = value;
  } else if (key == "model.prior_var") {
    model.prior_var = parse_double(key, value);
  } else if (key == "model.lik_var") {
    model.lik_var = parse_double(key, value);
  } else if (key == "model.sep") {
    model.sep = parse_double(key, value);
  } else if (key == "model.lik_std") {
    model.lik_std = parse_double(key, value);
  } else if (key == "model.x") {
    x = parse_double(key, value);
  } else if (key == "posterior.family") {
    if (value == "simple") {
      family = Family::simple;
    } else if (value == "hierarchical") {
      family = Family::hierarchical;
    } else {
      throw ConfigError(key, "expected simple or hierarchical");
    }
  } else if (key == "posterior.init_mean") {
    init_mean = parse_double(key, value);
  } else if (key == "posterior.aux_dim") {
    aux_dim = parse_uint(key, value);
  } else if (key == "posterior.hidden") {
    hidden = parse_widths(key, value);
  } else if (key == "estimator.kind") {
    if (value == "standard") {
      estimator = EstimatorKind::standard;
    } else if (value == "hvm") {
      estimator = EstimatorKind::hvm;
    } else if (value == "adgm") {
      estimator = EstimatorKind::adgm;
    } else if (value == "hvm_x") {
      estimator = EstimatorKind::hvm_x;
    } else {
      throw ConfigError(key, "expected standard, hvm, adgm or hvm_x");
    }
  } else if (key == "train.steps") {
    train.steps = parse_uint(key, value);
  } else if (key == "train.samples") {
    train.samples = parse_uint(key, value);
  } else if (key == "train.learning_rate") {
    train.learning_rate = parse_double(key, value);
  } else if (key == "train.optimizer") {
    if (value == "adam") {
      train.optimizer = OptimizerKind::adam;
    } else if (value == "sgd") {
      train.optimizer = OptimizerKind::sgd;
    } else {
      throw ConfigError(key, "expected adam or sgd");
    }
  } else if (key == "train.seed") {
    train.seed = parse_uint(key, value);
  } else if (key == "train.alternate") {
    train.alternate = parse_bool(key, value);
  } else if (key == "oracle.enabled") {
    oracle = parse_bool(key, value);
  } else if (key == "oracle.z_points") {
    z_points = parse_uint(key, value);
  } else if (key == "oracle.lambda_points") {
    lambda_points = parse_uint(key, value);
  } else if (key == "evaluation.final_samples") {
    final_samples = parse_uint(key, value);
  } else if (key == "evaluation.histogram_samples") {
    histogram_samples = parse_uint(key, value);
  } else if (key == "output.dir") {
    out_dir = value;
  } else {
    throw ConfigError(key, "unknown field");
  }
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(raw.substr(0, hash));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no),
                          "unterminated section header");
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no),
                        "expected 'key = value'");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    cfg.set(section.empty() ? key : section + "." + key, value);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config", "cannot open " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void ExperimentConfig::validate() const {
  if (model.name == "conjugate") {
    if (!(model.prior_var > 0.0)) {
      throw ConfigError("model.prior_var", "must be positive");
    }
    if (!(model.lik_var > 0.0)) {
      throw ConfigError("model.lik_var", "must be positive");
    }
  } else if (model.name == "bimodal") {
    if (!(model.lik_std > 0.0)) {
      throw ConfigError("model.lik_std", "must be positive");
    }
  } else {
    throw ConfigError("model.name", "expected conjugate or bimodal, got '" +
                                        model.name + "'");
  }
  const bool standard = estimator == EstimatorKind::standard;
  if (standard != (family == Family::simple)) {
    throw ConfigError("estimator.kind",
                      std::string(to_string(estimator)) +
                          " is inconsistent with posterior.family = " +
                          to_string(family));
  }
  if (aux_dim < 1) {
    throw ConfigError("posterior.aux_dim", "must be at least 1");
  }
  for (auto w : hidden) {
    if (w < 1) {
      throw ConfigError("posterior.hidden", "widths must be at least 1");
    }
  }
  if (train.samples < 1) {
    throw ConfigError("train.samples", "must be at least 1");
  }
  if (!(train.learning_rate > 0.0)) {
    throw ConfigError("train.learning_rate", "must be positive");
  }
  if (oracle) {
    require_grid_points("oracle.z_points", z_points);
    require_grid_points("oracle.lambda_points", lambda_points);
  }
  if (final_samples < 1) {
    throw ConfigError("evaluation.final_samples", "must be at least 1");
  }
  if (histogram_samples < 1) {
    throw ConfigError("evaluation.histogram_samples", "must be at least 1");
  }
  if (out_dir.empty()) {
    throw ConfigError("output.dir", "must not be empty");
  }
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  os << "[model]\n"
     << "name = " << model.name << "\n"
     << "prior_var = " << fmt_double(model.prior_var) << "\n"
     << "lik_var = " << fmt_double(model.lik_var) << "\n"
     << "sep = " << fmt_double(model.sep) << "\n"
     << "lik_std = " << fmt_double(model.lik_std) << "\n"
     << "x = " << fmt_double(x) << "\n\n"
     << "[posterior]\n"
     << "family = " << to_string(family) << "\n"
     << "init_mean = " << fmt_double(init_mean) << "\n"
     << "aux_dim = " << aux_dim << "\n"
     << "hidden = ";
  if (hidden.empty()) {
    os << "none";
  }
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    os << (i ? "," : "") << hidden[i];
  }
  os << "\n\n"
     << "[estimator]\n"
     << "kind = " << to_string(estimator) << "\n\n"
     << "[train]\n"
     << "steps = " << train.steps << "\n"
     << "samples = " << train.samples << "\n"
     << "learning_rate = " << fmt_double(train.learning_rate) << "\n"
     << "optimizer = "
     << (train.optimizer == OptimizerKind::adam ? "adam" : "sgd") << "\n"
     << "seed = " << train.seed << "\n"
     << "alternate = " << (train.alternate ? "true" : "false") << "\n\n"
     << "[oracle]\n"
     << "enabled = " << (oracle ? "true" : "false") << "\n"
     << "z_points = " << z_points << "\n"
     << "lambda_points = " << lambda_points << "\n\n"
     << "[evaluation]\n"
     << "final_samples = " << final_samples << "\n"
     << "histogram_samples = " << histogram_samples << "\n\n"
     << "[output]\n"
     << "dir = " << out_dir << "\n";
  return os.str();
}

std::shared_ptr<const GenerativeModel> make_model(const ModelSpec& spec) {
  if (spec.name == "conjugate") {
    return conjugate_gaussian_model(spec.prior_var, spec.lik_var);
  }
  if (spec.name == "bimodal") {
    return bimodal_model(spec.sep, spec.lik_std);
  }
  throw ConfigError("model.name", "unknown model '" + spec.name + "'");
}

Setup build_setup(const ExperimentConfig& cfg) {
  Setup s;
  s.model = make_model(cfg.model);
  s.x = {cfg.x};
  const std::size_t n = s.model->latent_dim();
  const std::size_t xd = s.model->data_dim();
  const std::uint64_t seed = cfg.train.seed;
  if (cfg.family == Family::simple) {
    s.simple = add_simple_posterior(s.params, n);
    for (std::size_t i = 0; i < n; ++i) {
      s.params[s.simple->offset + i] = cfg.init_mean;
    }
  } else {
    s.hier = make_hierarchical(s.params, cfg.aux_dim, n, cfg.hidden,
                               mix_seed(seed, 1));
    const std::size_t aux_begin = s.params.size();
    if (cfg.estimator != EstimatorKind::hvm_x) {
      s.aux = make_aux(s.params, n, cfg.aux_dim, cfg.hidden, false, xd,
                       mix_seed(seed, 2));
    } else {
      // Same starting point as the unconditioned aux net; x enters with zero
      // weights.
      ad::ParamVector plain;
      const AuxPosterior base = make_aux(plain, n, cfg.aux_dim, cfg.hidden,
                                         false, xd, mix_seed(seed, 2));
      AuxPosterior r;
      r.conditions_on_x = true;
      r.latent_dim = n;
      r.data_dim = xd;
      r.r_net = add_mlp(s.params, "r", net_shape(n + xd, cfg.hidden,
                                                 cfg.aux_dim));
      const Mlp& a = base.r_net;
      for (std::size_t l = 0; l < a.layer_count(); ++l) {
        for (std::size_t o = 0; o < a.widths[l + 1]; ++o) {
          for (std::size_t i = 0; i < a.widths[l]; ++i) {
            s.params[r.r_net.weight_index(l, o, i)] =
                plain[a.weight_index(l, o, i)];
          }
          s.params[r.r_net.bias_index(l, o)] = plain[a.bias_index(l, o)];
        }
      }
      s.aux = r;
    }
    s.phi_mask.assign(s.params.size(), false);
    std::fill(s.phi_mask.begin() + static_cast<std::ptrdiff_t>(aux_begin),
              s.phi_mask.end(), true);
  }
  if (s.phi_mask.empty()) {
    s.phi_mask.assign(s.params.size(), false);
  }
  return s;
}

Objective make_objective(const Setup& setup, EstimatorKind kind) {
  auto model = setup.model;
  auto x = setup.x;
  switch (kind) {
  case EstimatorKind::standard: {
    const SimplePosterior q = setup.simple.value();
    return [model, x, q](std::span<const Var> p, std::size_t n,
                         std::uint64_t seed) {
      return elbo_standard(*model, q, p, x, n, seed);
    };
  }
  case EstimatorKind::hvm:
  case EstimatorKind::hvm_x: {
    const HierarchicalPosterior h = setup.hier.value();
    const AuxPosterior r = setup.aux.value();
    const bool with_x = kind == EstimatorKind::hvm_x;
    return [model, x, h, r, with_x](std::span<const Var> p, std::size_t n,
                                    std::uint64_t seed) {
      return with_x ? elbo_hvm_x(*model, h, r, p, x, n, seed)
                    : elbo_hvm(*model, h, r, p, x, n, seed);
    };
  }
  case EstimatorKind::adgm: {
    const HierarchicalPosterior h = setup.hier.value();
    const ExtendedModel ext =
        extend(model, setup.aux.value().r_net, setup.aux.value().conditions_on_x);
    return [ext, x, h](std::span<const Var> p, std::size_t n,
                       std::uint64_t seed) {
      return elbo_adgm(ext, h, p, x, n, seed);
    };
  }
  }
  throw std::logic_error("make_objective: unknown estimator");
}

Certificate certify(const Setup& setup, const ExperimentConfig& cfg) {
  Certificate c;
  if (!cfg.oracle) {
    c.status = "uncertified: oracle disabled";
    return c;
  }
  try {
    const std::size_t n = setup.model->latent_dim();
    const oracle::Grid z_grid = oracle::Grid::uniform(n, cfg.z_points);
    const auto p = setup.params.values();
    if (setup.simple) {
      c.log_evidence = oracle::quad_evidence(*setup.model, setup.x, z_grid);
      c.elbo_theta = oracle::quad_elbo_simple(*setup.model, *setup.simple, p,
                                              setup.x, z_grid);
      c.slack_evidence = c.log_evidence - c.elbo_theta;
      c.chain_holds = c.slack_evidence >= -Certificate::kTolerance;
    } else {
      const oracle::Grid l_grid =
          oracle::Grid::uniform(setup.hier->aux_dim, cfg.lambda_points);
      const auto hc = oracle::certify(*setup.model, *setup.hier, *setup.aux, p,
                                      setup.x, z_grid, l_grid);
      c.log_evidence = hc.log_evidence;
      c.elbo_theta = hc.elbo_marginal;
      c.elbo_theta_phi = hc.elbo_hier;
      c.kl_gap = hc.kl_gap;
      c.slack_evidence = hc.log_evidence - hc.elbo_marginal;
      c.slack_aux = hc.elbo_marginal - hc.elbo_hier;
      c.chain_holds = c.slack_evidence >= -Certificate::kTolerance &&
                      *c.slack_aux >= -Certificate::kTolerance;
    }
    c.certified = true;
    c.status = "certified";
  } catch (const oracle::OracleInfeasible& e) {
    c.status = std::string("uncertified: ") + e.what();
  }
  return c;
}

std::vector<double> posterior_samples(const Setup& setup, std::size_t count,
                                      std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(count);
  const auto p = ad::constants(setup.params.values());
  for (std::size_t k = 0; k < count; ++k) {
    if (setup.simple) {
      const DiagGaussian g = setup.simple->distribution(p);
      out.push_back(
          reparam_sample(g, draw_noise(seed, 2 * k + 1, g.dim()))[0].value());
    } else {
      const auto& h = *setup.hier;
      const JointSample s =
          h.sample_joint(p, draw_noise(seed, 2 * k, h.aux_dim),
                         draw_noise(seed, 2 * k + 1, h.latent_dim));
      out.push_back(s.z[0].value());
    }
  }
  return out;
}

std::string trace_row(const TraceRow& row, EstimatorKind kind) {
  std::ostringstream os;
  os << row.step << "," << fmt_double(row.elbo) << ","
     << fmt_double(row.std_error) << "," << fmt_double(row.grad_norm) << ","
     << fmt_double(row.wall_ms) << "," << to_string(kind);
  return os.str();
}

// ---------------------------------------------------------------------------
// SVG

namespace {

struct Series {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
  std::string color;
};

struct Bars {
  std::vector<double> edges;   // size = heights + 1
  std::vector<double> heights;
};

std::string render_svg(const std::string& title, const std::vector<Series>& series,
                       const Bars* bars, const std::string& x_label,
                       const std::string& y_label) {
  constexpr double W = 720, H = 420, L = 70, R = 20, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  auto extend_x = [&](double v) { x0 = std::min(x0, v); x1 = std::max(x1, v); };
  auto extend_y = [&](double v) { y0 = std::min(y0, v); y1 = std::max(y1, v); };
  for (const auto& s : series) {
    for (double v : s.xs) extend_x(v);
    for (double v : s.ys) extend_y(v);
  }
  if (bars != nullptr) {
    for (double v : bars->edges) extend_x(v);
    for (double v : bars->heights) extend_y(v);
    extend_y(0.0);
  }
  if (!std::isfinite(x0)) {
    x0 = 0; x1 = 1; y0 = 0; y1 = 1;
  }
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) { y1 = y0 + 1; }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream os;
  os.precision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" "
     << "font-size=\"15\">" << title << "</text>\n"
     << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R
     << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\""
     << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0;
    const double fy = y0 + (y1 - y0) * i / 4.0;
    os << "<text x=\"" << px(fx) << "\" y=\"" << H - B + 16
       << "\" text-anchor=\"middle\">" << fx << "</text>\n"
       << "<text x=\"" << L - 6 << "\" y=\"" << py(fy) + 4
       << "\" text-anchor=\"end\">" << fy << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
     << "\" text-anchor=\"middle\">" << x_label << "</text>\n"
     << "<text x=\"16\" y=\"" << (T + H - B) / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (T + H - B) / 2 << ")\">" << y_label << "</text>\n";
  if (bars != nullptr) {
    for (std::size_t i = 0; i < bars->heights.size(); ++i) {
      const double left = px(bars->edges[i]);
      const double right = px(bars->edges[i + 1]);
      const double top = py(bars->heights[i]);
      os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\""
         << std::max(0.0, right - left) << "\" height=\""
         << std::max(0.0, py(0.0) - top)
         << "\" fill=\"#9ecae1\" stroke=\"none\"/>\n";
    }
  }
  double legend_y = T + 8;
  for (const auto& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t i = 0; i < s.xs.size(); ++i) {
      os << px(s.xs[i]) << "," << py(s.ys[i]) << " ";
    }
    os << "\"/>\n"
       << "<text x=\"" << W - R - 200 << "\" y=\"" << legend_y << "\" fill=\""
       << s.color << "\">" << s.name << "</text>\n";
    legend_y += 16;
  }
  if (bars != nullptr) {
    os << "<text x=\"" << W - R - 200 << "\" y=\"" << legend_y
       << "\" fill=\"#3182bd\">sample histogram</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << content;
}

std::string posterior_svg(const Setup& setup, const ExperimentConfig& cfg,
                          std::span<const double> samples) {
  const auto& model = *setup.model;
  const double log_z = model.oracle_log_evidence(setup.x);
  // Plot range: where the true posterior carries visible mass.
  const oracle::Axis wide{-12.0, 12.0, 2401};
  double lo = 12.0, hi = -12.0, peak = -std::numeric_limits<double>::infinity();
  std::vector<double> lp(wide.points);
  for (std::size_t i = 0; i < wide.points; ++i) {
    const double z = wide.node(i);
    lp[i] = model.log_joint_value(setup.x, std::span<const double>(&z, 1)) - log_z;
    peak = std::max(peak, lp[i]);
  }
  for (std::size_t i = 0; i < wide.points; ++i) {
    if (lp[i] > peak - 9.0) {
      lo = std::min(lo, wide.node(i));
      hi = std::max(hi, wide.node(i));
    }
  }
  const double span = hi - lo;
  lo -= 0.25 * span;
  hi += 0.25 * span;
  const oracle::Grid plot_grid({oracle::Axis{lo, hi, 401}});
  Series truth{"true posterior (quadrature)", {}, {}, "#000000"};
  Series learned{"learned marginal Q(z)", {}, {}, "#d62728"};
  std::vector<double> learned_log;
  if (setup.hier) {
    const oracle::Grid l_grid =
        oracle::Grid::uniform(setup.hier->aux_dim, cfg.oracle ? cfg.lambda_points : 1001);
    learned_log = oracle::marginal_log_density(*setup.hier, setup.params.values(),
                                               plot_grid, l_grid);
  }
  const auto q = setup.simple ? std::optional<DiagGaussian>(
                                    setup.simple->distribution(setup.params.values()))
                              : std::nullopt;
  for (std::size_t i = 0; i < plot_grid.size(); ++i) {
    const double z = plot_grid.axes()[0].node(i);
    const std::span<const double> zs(&z, 1);
    truth.xs.push_back(z);
    truth.ys.push_back(std::exp(model.log_joint_value(setup.x, zs) - log_z));
    learned.xs.push_back(z);
    learned.ys.push_back(setup.hier ? std::exp(learned_log[i])
                                    : std::exp(logpdf(*q, zs)));
  }
  constexpr std::size_t kBins = 60;
  Bars bars;
  const double width = (hi - lo) / kBins;
  for (std::size_t b = 0; b <= kBins; ++b) {
    bars.edges.push_back(lo + width * static_cast<double>(b));
  }
  bars.heights.assign(kBins, 0.0);
  for (double s : samples) {
    if (s >= lo && s < hi) {
      bars.heights[static_cast<std::size_t>((s - lo) / width)] += 1.0;
    }
  }
  for (auto& h : bars.heights) {
    h /= static_cast<double>(samples.size()) * width;
  }
  return render_svg("posterior over z (x = " + fmt_double(cfg.x) + ")",
                    {truth, learned}, &bars, "z", "density");
}

} // namespace

std::string line_plot_svg(std::span<const double> xs, std::span<const double> ys,
                          const std::string& title, const std::string& x_label,
                          const std::string& y_label) {
  Series s{"MC ELBO", {xs.begin(), xs.end()}, {ys.begin(), ys.end()}, "#1f77b4"};
  return render_svg(title, {s}, nullptr, x_label, y_label);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::string_view kCheckpointMagic = "auxvi-checkpoint v1";
constexpr std::string_view kConfigMarker = "--- config ---";
constexpr std::string_view kParamsMarker = "--- params ---";
constexpr std::string_view kEndMarker = "--- end ---";

} // namespace

void write_checkpoint(const fs::path& path, const ExperimentConfig& cfg,
                      const ad::ParamVector& params) {
  std::ostringstream os;
  os << kCheckpointMagic << "\n"
     << kConfigMarker << "\n"
     << cfg.to_text() << kParamsMarker << "\n"
     << "count = " << params.size() << "\n";
  for (std::size_t i = 0; i < params.size(); ++i) {
    os << params.names()[i] << " = " << fmt_double(params[i]) << "\n";
  }
  os << kEndMarker << "\n";
  write_file(path, os.str());
}

Checkpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw CheckpointError("cannot open checkpoint " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || trim(line) != kCheckpointMagic) {
    throw CheckpointError("not an auxvi checkpoint (bad header)");
  }
  if (!std::getline(in, line) || trim(line) != kConfigMarker) {
    throw CheckpointError("missing config section");
  }
  std::string config_text;
  bool found_params = false;
  while (std::getline(in, line)) {
    if (trim(line) == kParamsMarker) {
      found_params = true;
      break;
    }
    config_text += line + "\n";
  }
  if (!found_params) {
    throw CheckpointError("missing params section");
  }
  Checkpoint ck;
  try {
    ck.config = ExperimentConfig::parse(config_text);
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("invalid embedded config: ") + e.what());
  }
  ck.setup = build_setup(ck.config);
  auto& params = ck.setup.params;

  if (!std::getline(in, line)) {
    throw CheckpointError("missing parameter count");
  }
  const auto eq = line.find('=');
  if (eq == std::string::npos || trim(line.substr(0, eq)) != "count") {
    throw CheckpointError("expected 'count = N'");
  }
  std::size_t count = 0;
  try {
    count = parse_uint("count", trim(line.substr(eq + 1)));
  } catch (const ConfigError&) {
    throw CheckpointError("unreadable parameter count");
  }
  if (count != params.size()) {
    throw CheckpointError("parameter count " + std::to_string(count) +
                          " does not match the configured shape (" +
                          std::to_string(params.size()) + ")");
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) {
      throw CheckpointError("truncated parameter list at entry " +
                            std::to_string(i));
    }
    const auto e = line.find('=');
    if (e == std::string::npos) {
      throw CheckpointError("malformed parameter line " + std::to_string(i));
    }
    const std::string name = trim(line.substr(0, e));
    if (name != params.names()[i]) {
      throw CheckpointError("parameter " + std::to_string(i) + " is '" + name +
                            "', expected '" + params.names()[i] + "'");
    }
    try {
      params[i] = parse_double(name, trim(line.substr(e + 1)));
    } catch (const ConfigError& err) {
      throw CheckpointError(err.what());
    }
  }
  if (!std::getline(in, line) || trim(line) != kEndMarker) {
    throw CheckpointError("missing end marker");
  }
  return ck;
}

// ---------------------------------------------------------------------------
// Run / verify

std::string RunSummary::to_json() const {
  nlohmann::ordered_json j;
  j["train_ok"] = train_ok;
  if (!train_ok) {
    j["failure"] = failure;
  }
  j["steps_completed"] = steps_completed;
  if (train_ok) {
    j["elbo_mc"] = elbo_mc;
    j["elbo_std_error"] = elbo_std_error;
  }
  auto& c = j["oracle"];
  c["status"] = certificate.status;
  if (certificate.certified) {
    c["log_evidence"] = certificate.log_evidence;
    c["elbo_theta"] = certificate.elbo_theta;
    if (certificate.elbo_theta_phi) {
      c["elbo_theta_phi"] = *certificate.elbo_theta_phi;
      c["kl_gap"] = *certificate.kl_gap;
      c["slack_aux"] = *certificate.slack_aux;
    }
    c["slack_evidence"] = certificate.slack_evidence;
    c["chain_holds"] = certificate.chain_holds;
  }
  if (equivalence_discrepancy) {
    j["equivalence_discrepancy"] = *equivalence_discrepancy;
  }
  if (train_ok) {
    j["dip"] = dip;
    j["dip_p_value"] = dip_p_value;
  }
  j["wall_ms"] = wall_ms;
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

RunSummary run(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const fs::path out_dir(cfg.out_dir);
  fs::create_directories(out_dir);

  Setup setup = build_setup(cfg);
  write_checkpoint(out_dir / "checkpoint_init.txt", cfg, setup.params);

  RunSummary summary;
  summary.seed = cfg.train.seed;
  const Objective objective = make_objective(setup, cfg.estimator);

  std::ofstream trace(out_dir / "trace.csv", std::ios::binary);
  if (!trace) {
    throw std::runtime_error("cannot write trace.csv");
  }
  trace << kTraceHeader << "\n" << std::flush;
  const TrainResult result =
      train(objective, setup.params, cfg.train, setup.phi_mask,
            [&](const TraceRow& row) {
              trace << trace_row(row, cfg.estimator) << "\n" << std::flush;
            });
  trace.close();
  summary.steps_completed = result.trace.size();
  summary.train_ok = result.ok;
  summary.failure = result.error;
  write_checkpoint(out_dir / "checkpoint.txt", cfg, setup.params);
  summary.certificate.status = "uncertified: training aborted";

  if (result.ok) {
    try {
      const auto p = ad::constants(setup.params.values());
      const ElboEstimate final_est =
          objective(p, cfg.final_samples, mix_seed(cfg.train.seed, 0xf1a1));
      summary.elbo_mc = final_est.value();
      summary.elbo_std_error = final_est.std_error;

      summary.certificate = certify(setup, cfg);
      if (setup.hier) {
        summary.equivalence_discrepancy = check_equivalence(
            setup.model, *setup.hier, *setup.aux, setup.params.values(),
            setup.x, 64, cfg.train.seed, AuxDensityPath::independent);
      }
      const auto samples = posterior_samples(setup, cfg.histogram_samples,
                                             mix_seed(cfg.train.seed, 0x4157));
      const std::size_t dip_n = std::min<std::size_t>(samples.size(), 5000);
      const auto dt = diag::dip_test(
          std::span<const double>(samples).first(dip_n), 200, cfg.train.seed);
      summary.dip = dt.dip;
      summary.dip_p_value = dt.p_value;

      std::vector<double> steps;
      std::vector<double> elbos;
      for (const auto& row : result.trace) {
        steps.push_back(static_cast<double>(row.step));
        elbos.push_back(row.elbo);
      }
      write_file(out_dir / "elbo.svg",
                 line_plot_svg(steps, elbos,
                               std::string("training ELBO (") +
                                   to_string(cfg.estimator) + ")",
                               "step", "MC ELBO"));
      if (setup.model->latent_dim() == 1) {
        write_file(out_dir / "posterior.svg", posterior_svg(setup, cfg, samples));
      }
    } catch (const ad::NumericalError& e) {
      summary.train_ok = false;
      summary.certificate = Certificate{};
      summary.certificate.status = "uncertified: evaluation aborted";
      summary.failure = std::string("evaluation: ") + e.what();
    }
  }
  summary.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  write_file(out_dir / "summary.json", summary.to_json());
  return summary;
}

VerifyReport verify(const fs::path& checkpoint) {
  const Checkpoint ck = read_checkpoint(checkpoint);
  VerifyReport report;
  report.certificate = certify(ck.setup, ck.config);
  const Certificate& c = report.certificate;
  std::ostringstream os;
  os << "checkpoint: " << checkpoint.string() << "\n"
     << "model: " << ck.config.model.name << " x=" << fmt_double(ck.config.x)
     << " family=" << to_string(ck.config.family)
     << " estimator=" << to_string(ck.config.estimator) << "\n"
     << "status: " << c.status << "\n";
  if (c.certified) {
    auto ok = [](double slack) {
      return slack >= -Certificate::kTolerance ? "ok" : "VIOLATED";
    };
    os << "log P(x)        = " << fmt_double(c.log_evidence) << "\n"
       << "L(theta)        = " << fmt_double(c.elbo_theta) << "\n";
    if (c.elbo_theta_phi) {
      os << "L(theta,phi)    = " << fmt_double(*c.elbo_theta_phi) << "\n"
         << "E_Q[KL] gap     = " << fmt_double(*c.kl_gap) << "\n";
    }
    os << "log P(x) - L(theta)       = " << fmt_double(c.slack_evidence)
       << " [" << ok(c.slack_evidence) << "]\n";
    if (c.slack_aux) {
      os << "L(theta) - L(theta,phi)   = " << fmt_double(*c.slack_aux) << " ["
         << ok(*c.slack_aux) << "]\n";
    }
    os << "chain: " << (c.chain_holds ? "holds" : "violated") << "\n";
  }
  report.text = os.str();
  return report;
}

} // namespace auxvi::experiment
