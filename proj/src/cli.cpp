#include "hmmfp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hmmfp/attention.hpp"
#include "hmmfp/dual_control.hpp"
#include "hmmfp/fixed_point.hpp"
#include "hmmfp/model_io.hpp"
#include "hmmfp/predictor_rep.hpp"
#include "hmmfp/report.hpp"

namespace hmmfp {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat configuration keys with their defaults. Config files may only use these.
json default_config() {
  return json{
      {"model", ""},
      {"seed", 0},
      {"T", 0},
      {"K", 20},
      {"enum_budget", static_cast<std::uint64_t>(kDefaultEnumBudget)},
      {"zero_convention", false},
      {"out", "."},
      {"path", ""},
      {"mode", "path"},
      {"z_query", 0},
      {"draws", 20},
      {"d", 8},
      {"heads", 2},
      {"layers", 4},
      {"m", 0},
      {"misc", true},
      {"tol_fixed_point", 1e-10},
      {"tol_duality", 1e-9},
      {"tol_bsde", 1e-12},
      {"tol_representation", 1e-12},
      {"tol_attention", 1e-12},
  };
}

/// Resolved settings for one command run.
struct ExperimentConfig {
  json values;

  std::string str(const char* key) const { return values.at(key).get<std::string>(); }
  long long integer(const char* key) const { return values.at(key).get<long long>(); }
  double real(const char* key) const { return values.at(key).get<double>(); }
  bool flag(const char* key) const { return values.at(key).get<bool>(); }

  std::uint64_t seed() const { return values.at("seed").get<std::uint64_t>(); }
  fs::path out_dir() const { return fs::path(str("out")); }
  ZeroPolicy zero_policy() const {
    return flag("zero_convention") ? ZeroPolicy::kZeroConvention : ZeroPolicy::kRaise;
  }
  std::size_t enum_budget() const { return values.at("enum_budget").get<std::size_t>(); }

  // The output directory is where reports go, not part of the experiment.
  ReportHeader header() const {
    json hashed = values;
    hashed.erase("out");
    return {seed(), fnv1a_hex(hashed.dump())};
  }

  json header_json() const {
    const ReportHeader h = header();
    return json{{"version", std::string(kVersion)},
                {"seed", h.seed},
                {"config_hash", h.config_hash},
                {"line", h.line()}};
  }

  void validate() const {
    for (const auto& [key, value] : values.items()) {
      if (key.rfind("tol_", 0) == 0 && !(value.get<double>() > 0.0))
        throw UsageError("tolerance '" + key + "' must be positive");
    }
    if (values.at("enum_budget").get<long long>() < 1) throw UsageError("enum_budget must be >= 1");
    if (integer("T") < 0) throw UsageError("T must be >= 0");
  }
};

void merge_value(json& cfg, const std::string& key, const json& value) {
  if (!cfg.contains(key)) throw UsageError("unknown configuration key '" + key + "'");
  const json& current = cfg[key];
  const bool ok = (current.is_string() && value.is_string()) ||
                  (current.is_boolean() && value.is_boolean()) ||
                  (current.is_number_float() && value.is_number()) ||
                  (current.is_number_integer() && value.is_number_integer());
  if (!ok) throw UsageError("configuration key '" + key + "' has the wrong type");
  cfg[key] = value;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  json j;
  try {
    j = json::parse(buffer.str());
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config: JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config: top level must be an object of flat keys");
  return j;
}

/// CLI11 options that override config values when given.
struct Overrides {
  std::string config_path;
  std::vector<std::function<void(json&)>> setters;

  template <typename T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    setters.push_back([opt, value, key](json& cfg) {
      if (opt->count() > 0) merge_value(cfg, key, json(*value));
    });
  }

  void add_flag(CLI::App* app, const std::string& flag, const std::string& key, bool set_to,
                const std::string& help) {
    CLI::Option* opt = app->add_flag(flag, help);
    setters.push_back([opt, key, set_to](json& cfg) {
      if (opt->count() > 0) merge_value(cfg, key, json(set_to));
    });
  }

  ExperimentConfig resolve() const {
    json cfg = default_config();
    if (!config_path.empty()) {
      const json file = load_config_file(config_path);
      for (const auto& [key, value] : file.items()) merge_value(cfg, key, value);
    }
    for (const auto& set : setters) set(cfg);
    ExperimentConfig c{cfg};
    c.validate();
    return c;
  }
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "JSON config file with flat keys");
  o.add<std::string>(app, "--model", "model", "HMM model JSON file");
  o.add<std::uint64_t>(app, "--seed", "seed", "seed of the single random generator");
  o.add<std::string>(app, "--out", "out", "output directory");
  o.add<long long>(app, "--T", "T", "horizon override (0 keeps the model value)");
  o.add<std::uint64_t>(app, "--enum-budget", "enum_budget", "maximum exact-enumeration terms");
  o.add_flag(app, "--zero-convention", "zero_convention", true,
             "treat zero-probability prefixes with the 0/0 = 0 convention");
}

Model require_model(const ExperimentConfig& cfg) {
  const std::string path = cfg.str("model");
  if (path.empty()) throw UsageError("--model is required");
  Model model = load_model(path);
  if (cfg.integer("T") > 0) model = model.with_horizon(static_cast<int>(cfg.integer("T")));
  return model;
}

std::vector<Token> require_path(const ExperimentConfig& cfg, int m) {
  const std::string text = cfg.str("path");
  if (text.empty()) throw UsageError("--path is required");
  return parse_path(text, m);
}

fs::path prepare_out(const ExperimentConfig& cfg) {
  const fs::path dir = cfg.out_dir();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory " + dir.string());
  return dir;
}

// ---------------------------------------------------------------- oracle

int cmd_oracle(const ExperimentConfig& cfg, std::ostream& out) {
  const Model model = require_model(cfg);
  const std::vector<Token> z = require_path(cfg, model.m());
  const FilterTrajectory traj = forward_filter(model, z, cfg.zero_policy());
  const fs::path dir = prepare_out(cfg);
  const ReportHeader header = cfg.header();

  CsvWriter filter(dir / "filter.csv", header, {"t", "x", "pi"});
  CsvWriter tokens(dir / "next_token.csv", header, {"t", "z", "p"});
  for (int t = 1; t <= traj.horizon(); ++t) {
    const VectorXd& pi = traj.at(t);
    for (State x = 0; x < model.d(); ++x)
      filter.row({std::to_string(t), std::to_string(x + 1), format_double(pi(x))});
    const VectorXd p = next_token_prob(model, pi);
    for (Token k = 0; k <= model.m(); ++k)
      tokens.row({std::to_string(t), std::to_string(k), format_double(p(k))});
  }
  out << "oracle: wrote filter.csv and next_token.csv for T=" << traj.horizon() << "\n";
  return kExitOk;
}

// ------------------------------------------------------------ fixedpoint

int cmd_fixedpoint(const ExperimentConfig& cfg, std::ostream& out) {
  const Model model = require_model(cfg);
  const std::vector<Token> z = require_path(cfg, model.m());
  const std::string mode = cfg.str("mode");
  if (mode != "path" && mode != "adapted") throw UsageError("--mode must be 'path' or 'adapted'");
  const long long K = cfg.integer("K");
  if (K < 1) throw UsageError("K must be >= 1");
  const double tol = cfg.real("tol_fixed_point");
  const int T = static_cast<int>(z.size());

  double residual = 0.0;
  bool in_domain = true;
  int rank_deficient = 0;
  if (mode == "path") {
    const MeasurePath pi = filter_measure_path(model, z);
    const PathMapResult image = apply_N_path(model, pi, z);
    for (std::size_t t = 0; t < pi.size(); ++t)
      residual = std::max(residual, total_variation(pi[t], image.measures[t]));
    in_domain = image.all_in_domain;
  } else {
    forward_filter(model, z);  // the supplied path itself must be possible
    const FilterProcess pi = filter_process(model, T);
    const AdaptedMapResult image = apply_N_adapted(model, pi.pi);
    for (int t = 1; t <= T; ++t)
      for (std::size_t i = 0; i < pi.pi.size(t); ++i)
        if (pi.possible(t, i))
          residual = std::max(residual, total_variation(pi.pi.at(t, i), image.measures.at(t, i)));
    in_domain = image.all_in_domain;
    rank_deficient = image.rank_deficient_gains;
  }
  const bool pass = residual <= tol;

  const fs::path dir = prepare_out(cfg);
  json report{{"header", cfg.header_json()},
              {mode, json{{"residual", residual},
                          {"tolerance", tol},
                          {"pass", pass},
                          {"in_domain", in_domain},
                          {"rank_deficient_gains", rank_deficient}}}};
  write_text_file(dir / "residual.json", report.dump(2));

  const IterationTrace trace =
      iterate(model, z, uniform_measure_path(model.d(), T), static_cast<int>(K));
  CsvWriter csv(dir / "trace.csv", cfg.header(), {"iter", "t", "residual_tv", "kl_bar", "in_domain"});
  for (std::size_t k = 0; k < trace.residuals.size(); ++k)
    for (std::size_t t = 0; t < trace.residual_by_t[k].size(); ++t)
      csv.row({std::to_string(k + 1), std::to_string(t + 1), format_double(trace.residual_by_t[k][t]),
               format_double(trace.kl_per_iter[k]), trace.in_domain_by_t[k][t] ? "1" : "0"});

  out << "fixedpoint[" << mode << "]: residual at the exact filter = " << format_double(residual)
      << " (tolerance " << format_double(tol) << ")\n";
  if (!pass) {
    json findings{{"header", cfg.header_json()},
                  {"finding", "fixed-point residual at the exact filter exceeds tolerance"},
                  {"mode", mode},
                  {"m", model.m()},
                  {"residual", residual},
                  {"tolerance", tol},
                  {"note", mode == "path" && model.m() > 1
                               ? "the per-path map uses the binary observation function 2C(x,z)-1"
                               : ""}};
    write_text_file(dir / "findings.json", findings.dump(2));
    return kExitInvariantViolation;
  }
  return kExitOk;
}

// --------------------------------------------------------------- duality

AdaptedWeightProcess random_control(const Model& model, int T, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  AdaptedWeightProcess U(model.tokens(), 0, T - 1);
  for (int t = 0; t < T; ++t)
    for (VectorXd& u : U.level(t)) {
      u.resize(model.m());
      for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = normal(rng);
    }
  return U;
}

TerminalFunction random_terminal(const Model& model, int T, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  TerminalFunction F(model.tokens(), T, T);
  for (VectorXd& f : F.level(T)) {
    f.resize(model.d());
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = normal(rng);
  }
  return F;
}

int cmd_duality(const ExperimentConfig& cfg, std::ostream& out) {
  const Model model = require_model(cfg);
  const int T = model.T();
  const long long draws = cfg.integer("draws");
  if (draws < 1) throw UsageError("draws must be >= 1");
  const double tol = cfg.real("tol_duality");
  const double tol_bsde = cfg.real("tol_bsde");
  const std::size_t budget = cfg.enum_budget();
  std::mt19937_64 rng(cfg.seed());

  const fs::path dir = prepare_out(cfg);
  CsvWriter diag(dir / "diagnostics.csv", cfg.header(), {"check", "t", "prefix", "max_residual"});
  json draws_json = json::array();
  double max_gap = 0.0;
  double max_residual = 0.0;
  for (long long k = 0; k < draws; ++k) {
    const AdaptedWeightProcess U = random_control(model, T, rng);
    const TerminalFunction F = random_terminal(model, T, rng);
    const DualTrajectory traj = solve_bsde(model, U, F);
    DualityReport r;
    r.J_T = total_cost(model, traj, budget);
    r.mse = estimator_mse(model, traj, F, budget);
    r.gap = std::abs(r.J_T - r.mse);
    max_gap = std::max(max_gap, r.gap);
    draws_json.push_back({{"J_T", r.J_T}, {"mse", r.mse}, {"gap", r.gap}});
    for (const NodeResidual& n : bsde_residuals(model, traj)) {
      max_residual = std::max(max_residual, n.max_residual);
      diag.row({"bsde_draw_" + std::to_string(k), std::to_string(n.t), n.prefix,
                format_double(n.max_residual)});
    }
  }

  // Feedback control at the exact filter for the last random terminal condition.
  const TerminalFunction F = random_terminal(model, T, rng);
  const FilterProcess pi = filter_process(model, T);
  const DualTrajectory opt = solve_optimal(model, pi.pi, F);
  const double J_opt = total_cost(model, opt, budget);
  const double mmse = exact_expectation(
      model, T,
      [&](std::span<const State> x, std::span<const Token> z) {
        const std::size_t idx = prefix_index(z, model.tokens());
        const double err = F.at(T, idx)(x.back()) - pi.pi.at(T, idx).dot(F.at(T, idx));
        return err * err;
      },
      budget);
  const AdaptedProcess<double> S = estimator_process(model, opt);
  double identity = 0.0;
  for (int t = 0; t <= T; ++t)
    for (std::size_t i = 0; i < S.size(t); ++i)
      if (pi.possible(t, i)) identity = std::max(identity, std::abs(pi.pi.at(t, i).dot(opt.Y.at(t, i)) - S.at(t, i)));
  diag.row({"estimator_identity", std::to_string(T), "*", format_double(identity)});
  const double opt_residual = max_bsde_residual(model, opt);
  diag.row({"bsde_optimal", "*", "*", format_double(opt_residual)});

  const bool pass = max_gap <= tol && max_residual <= tol_bsde && opt_residual <= tol_bsde &&
                    std::abs(J_opt - mmse) <= tol && identity <= tol;
  json report{{"header", cfg.header_json()},
              {"tolerance", tol},
              {"draws", draws_json},
              {"max_gap", max_gap},
              {"max_bsde_residual", max_residual},
              {"optimal",
               {{"J_T", J_opt},
                {"mmse", mmse},
                {"gap", std::abs(J_opt - mmse)},
                {"estimator_identity_max", identity},
                {"rank_deficient_gains", opt.rank_deficient_gains},
                {"singular_eliminations", opt.singular_eliminations}}},
              {"pass", pass}};
  write_text_file(dir / "duality.json", report.dump(2));
  out << "duality: " << draws << " draws, max gap " << format_double(max_gap) << "\n";
  return pass ? kExitOk : kExitInvariantViolation;
}

// ------------------------------------------------------------- represent

int cmd_represent(const ExperimentConfig& cfg, std::ostream& out) {
  const Model model = require_model(cfg);
  const long long zq = cfg.integer("z_query");
  if (zq < 0 || zq > model.m()) throw UsageError("--z-query must lie in {0..m}");
  const Token z_query = static_cast<Token>(zq);
  const ZeroPolicy policy = cfg.zero_policy();
  const PathFunction<double> target = conditional_target(model, z_query, policy);
  const PredictorRepresentation rep = build_weights(target);

  double worst = 0.0;
  for (std::size_t i = 0; i < target.size(model.T()); ++i) {
    const auto z = prefix_tokens(i, model.tokens(), model.T());
    worst = std::max(worst, std::abs(evaluate(rep, z) - target.at(model.T(), i)));
  }
  const double tol = cfg.real("tol_representation");
  const fs::path dir = prepare_out(cfg);
  json report = json::parse(representation_to_json(rep));
  report["header"] = cfg.header_json();
  report["z_query"] = z_query;
  report["max_reconstruction_error"] = worst;
  write_text_file(dir / "representation.json", report.dump(2));
  out << "represent: z_query=" << z_query << " constant=" << format_double(rep.constant) << "\n";
  return worst <= tol ? kExitOk : kExitInvariantViolation;
}

// -------------------------------------------------------- attention-demo

int cmd_attention_demo(const ExperimentConfig& cfg, std::ostream& out) {
  std::mt19937_64 rng(cfg.seed());
  const int d = static_cast<int>(cfg.integer("d"));
  const int heads = static_cast<int>(cfg.integer("heads"));
  const int L = static_cast<int>(cfg.integer("layers"));
  if (d < 2 || d % 2 != 0) throw UsageError("d must be even and >= 2");
  if (heads < 1 || d % heads != 0) throw UsageError("heads must divide d");
  if (L < 1) throw UsageError("layers must be >= 1");

  int m = static_cast<int>(cfg.integer("m"));
  int T = static_cast<int>(cfg.integer("T"));
  if (!cfg.str("model").empty()) {
    const Model model = require_model(cfg);
    if (m == 0) m = model.m();
    if (T == 0) T = model.T();
  }
  if (m == 0) m = 3;
  if (T == 0) T = 6;
  if (m < 1) throw UsageError("m must be >= 1");

  std::vector<Token> z;
  if (!cfg.str("path").empty()) {
    z = parse_path(cfg.str("path"), m);
    T = static_cast<int>(z.size());
  } else {
    std::uniform_int_distribution<int> pick(0, m);
    for (int t = 0; t < T; ++t) z.push_back(pick(rng));
  }

  const MatrixXd embedding = random_embedding(d, m, rng);
  std::vector<LayerParams<double>> layers;
  for (int l = 0; l < L; ++l) {
    layers.push_back(random_layer_params(d, heads, rng));
    if (!cfg.flag("misc")) layers.back().misc = MiscOps::none();
  }
  const MatrixXd sigma0 = embed_sequence(embedding, positional_encoding(d, T), std::span<const Token>(z));
  const std::vector<MatrixXd> sigmas = forward_stack(layers, sigma0);

  // Simplified form against the bare layer, and attention weight sanity.
  const double tol = cfg.real("tol_attention");
  double sf_max = 0.0;
  double weight_err = 0.0;
  for (int l = 0; l < L; ++l) {
    LayerParams<double> bare = layers[static_cast<std::size_t>(l)];
    bare.misc = MiscOps::none();
    const MatrixXd& in = sigmas[static_cast<std::size_t>(l)];
    const MatrixXd direct = layer_forward(bare, in);
    for (int t = 1; t <= T; ++t) {
      for (int k = 0; k < d; ++k) {
        const VectorXd f = VectorXd::Unit(d, k);
        sf_max = std::max(sf_max, std::abs(simplified_form(bare, in, t, f) - direct(k, t - 1)));
      }
      for (const auto& head : bare.heads) {
        const VectorXd a = attention_weights(head, in, t);
        weight_err = std::max(weight_err, std::abs(a.sum() - 1.0));
        if (a.minCoeff() < 0.0) weight_err = std::numeric_limits<double>::infinity();
      }
    }
  }

  const fs::path dir = prepare_out(cfg);
  const ReportHeader header = cfg.header();
  std::vector<MatrixXd> probs;
  for (const MatrixXd& s : sigmas) {
    MatrixXd p(m + 1, T);
    for (int t = 0; t < T; ++t) p.col(t) = unembed(embedding, VectorXd(s.col(t)));
    probs.push_back(std::move(p));
  }
  CsvWriter table(dir / "layer_probs.csv", header, {"layer", "t", "z", "prob"});
  for (std::size_t l = 0; l < probs.size(); ++l)
    for (int t = 0; t < T; ++t)
      for (int k = 0; k <= m; ++k)
        table.row({std::to_string(l), std::to_string(t + 1), std::to_string(k),
                   format_double(probs[l](k, t))});
  CsvWriter curve(dir / "kl_bar.csv", header, {"layer", "kl_bar"});
  bool kl_ok = true;
  for (int l = 0; l < L; ++l) {
    const double kl = kl_divergence_bar(probs.back(), probs[static_cast<std::size_t>(l)]);
    kl_ok = kl_ok && kl >= 0.0 && std::isfinite(kl);
    curve.row({std::to_string(l), format_double(kl)});
  }

  const bool simplified_form_equal = sf_max <= tol;
  const bool weights_ok = weight_err <= tol;
  json report{{"header", cfg.header_json()},
              {"d", d},
              {"heads", heads},
              {"layers", L},
              {"m", m},
              {"T", T},
              {"misc", cfg.flag("misc")},
              {"prompt", z},
              {"simplified_form_max_diff", sf_max},
              {"simplified_form_equal", simplified_form_equal},
              {"attention_weights_ok", weights_ok},
              {"kl_nonnegative", kl_ok}};
  write_text_file(dir / "attention.json", report.dump(2));
  out << "attention-demo: " << L << " layers, simplified-form max diff " << format_double(sf_max) << "\n";
  return simplified_form_equal && weights_ok && kl_ok ? kExitOk : kExitInvariantViolation;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact HMM filtering, dual control and fixed-point inference checks"};
  app.require_subcommand(1);

  struct Command {
    CLI::App* app;
    Overrides overrides;
    std::function<int(const ExperimentConfig&, std::ostream&)> run;
  };
  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const std::string& name, const std::string& help, auto run) -> Command& {
    auto cmd = std::make_unique<Command>();
    cmd->app = app.add_subcommand(name, help);
    cmd->run = run;
    add_common(cmd->app, cmd->overrides);
    commands.push_back(std::move(cmd));
    return *commands.back();
  };

  Command& oracle = add("oracle", "exact filter and next-token probabilities along a path", cmd_oracle);
  oracle.overrides.add<std::string>(oracle.app, "--path", "path", "observation tokens, e.g. 1,1,0");

  Command& fp = add("fixedpoint", "fixed-point residual of the inference map and iteration trace",
                    cmd_fixedpoint);
  fp.overrides.add<std::string>(fp.app, "--path", "path", "observation tokens, e.g. 1,1,0");
  fp.overrides.add<std::string>(fp.app, "--mode", "mode", "path or adapted");
  fp.overrides.add<long long>(fp.app, "--K", "K", "number of iterations for the trace");
  fp.overrides.add<double>(fp.app, "--tol", "tol_fixed_point", "residual tolerance");

  Command& dual = add("duality", "duality principle on random (U, F) draws", cmd_duality);
  dual.overrides.add<long long>(dual.app, "--draws", "draws", "number of random (U, F) draws");
  dual.overrides.add<double>(dual.app, "--tol", "tol_duality", "gap tolerance");

  Command& rep = add("represent", "nonlinear-predictor weights of a conditional probability",
                     cmd_represent);
  rep.overrides.add<long long>(rep.app, "--z-query", "z_query", "queried next token");

  Command& attn = add("attention-demo", "toy causal attention stack with per-layer predictions",
                      cmd_attention_demo);
  attn.overrides.add<long long>(attn.app, "--d", "d", "embedding dimension (even)");
  attn.overrides.add<long long>(attn.app, "--heads", "heads", "number of heads");
  attn.overrides.add<long long>(attn.app, "--layers", "layers", "number of layers");
  attn.overrides.add<long long>(attn.app, "--m", "m", "largest token (alphabet is 0..m)");
  attn.overrides.add<std::string>(attn.app, "--path", "path", "prompt tokens");
  attn.overrides.add_flag(attn.app, "--no-misc", "misc", false,
                          "disable residual, layer norm and feed-forward");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitInputError;
  }

  for (const auto& cmd : commands) {
    if (!cmd->app->parsed()) continue;
    try {
      const ExperimentConfig cfg = cmd->overrides.resolve();
      return cmd->run(cfg, out);
    } catch (const ImpossibleObservation& e) {
      err << "error: " << e.what() << "\n";
      return kExitImpossibleObservation;
    } catch (const InvariantViolation& e) {
      err << "invariant violation: " << e.what() << "\n";
      return kExitInvariantViolation;
    } catch (const UsageError& e) {
      err << "usage error: " << e.what() << "\n";
      return kExitInputError;
    } catch (const InputError& e) {
      err << "input error: " << e.what() << "\n";
      return kExitInputError;
    } catch (const DomainError& e) {
      err << "input error: " << e.what() << "\n";
      return kExitInputError;
    } catch (const BudgetExceeded& e) {
      err << "input error: " << e.what() << "\n";
      return kExitInputError;
    } catch (const json::exception& e) {
      err << "input error: " << e.what() << "\n";
      return kExitInputError;
    }
  }
  return kExitInputError;
}

}  // namespace hmmfp
