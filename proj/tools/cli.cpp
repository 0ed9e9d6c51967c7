#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gbc/bench.hpp"
#include "gbc/calibrate.hpp"
#include "gbc/dataset.hpp"
#include "gbc/dgp.hpp"
#include "gbc/errors.hpp"
#include "gbc/gibbs_ate.hpp"
#include "gbc/gibbs_cate.hpp"
#include "gbc/nuisance.hpp"
#include "gbc/parallel.hpp"
#include "gbc/pseudo.hpp"
#include "gbc/report.hpp"

namespace gbc::cli {

namespace {

using json = nlohmann::ordered_json;

// Stream purposes for fit.
constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kFoldStream = 1;
constexpr std::uint64_t kCalibrationStream = 2;
constexpr std::uint64_t kEngineStream = 3;
constexpr std::uint64_t kQueryStream = 4;
constexpr std::uint64_t kInducingStream = 5;

const std::vector<std::string> kDgpIds{"D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8", "D9"};

struct DgpArgs {
  std::string id;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
};

struct FitArgs {
  std::string data;
  std::string dgp;
  std::size_t n = 1000;
  std::string estimand = "ate";
  std::string strategy = "AIPW";
  std::string engine = "closed";
  std::string calibration = "plugin";
  double alpha = 0.05;
  double prior_mean = 0.0;
  double prior_var = 1.0;
  bool diffuse = false;
  std::size_t folds = 5;
  double clip_eps = 0.01;
  double lambda_prop = 1.0;
  double lambda_out = 1e-3;
  int b_boot = 200;
  int max_iter = 50;
  bool refit_nuisances = false;
  std::string kernel = "matern52";
  double lengthscale = 2.0;
  double kernel_variance = 2.0;
  double jitter = 1e-4;
  std::size_t inducing = 20;
  std::size_t grid_points = 100;
  int epochs = 2000;
  double lr = 0.03;
  int batch_size = 200;
  std::uint64_t seed = 0;
  std::string out;
};

struct BenchArgs {
  std::string config;
  std::string out_dir = ".";
  std::size_t parallelism = 0;
};

struct ExperimentArgs {
  std::string kind;
  std::string dgp = "D1";
  std::size_t n = 100000;
  std::string deltas = "0.2,0.1,0.05,0.025";
  double beta = 0.3;
  std::string strategy = "AIPW";
  std::string n_grid = "500,2000,8000";
  std::size_t reps = 20;
  double error_scale = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

std::uint64_t seed_override(std::uint64_t seed) {
  const char* env = std::getenv("GBC_SEED");
  if (env == nullptr || *env == '\0') return seed;
  try {
    std::size_t pos = 0;
    const std::string text(env);
    const auto value = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("GBC_SEED: not an unsigned integer: '" + std::string(env) + "'");
  }
}

// Writes through a file when a path is given, else to the fallback stream.
template <typename Writer>
void emit(const std::string& path, std::ostream& fallback, Writer&& writer) {
  if (path.empty()) {
    writer(fallback);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot write '" + path + "'");
  writer(file);
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& field) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      if constexpr (std::is_floating_point_v<T>) {
        out.push_back(static_cast<T>(std::stod(item, &pos)));
      } else {
        out.push_back(static_cast<T>(std::stoull(item, &pos)));
      }
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(field + ": cannot parse '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(field + ": empty list");
  return out;
}

int cmd_dgp(const DgpArgs& args, std::ostream& out) {
  const auto spec = default_spec(parse_dgp_id(args.id));
  if (args.n < 1) throw ConfigError("--n: must be >= 1");
  Rng rng(seed_override(args.seed), stream_id(0, kDataStream));
  const auto ds = generate(spec, args.n, rng);
  emit(args.out, out, [&](std::ostream& os) { write_csv(ds, os); });
  return kExitOk;
}

NuisanceConfig nuisance_from(const FitArgs& a) {
  NuisanceConfig c;
  c.folds = a.folds;
  c.clip_eps = a.clip_eps;
  c.lambda_prop = a.lambda_prop;
  c.lambda_out = a.lambda_out;
  c.validate();
  return c;
}

int cmd_fit(const FitArgs& args, std::ostream& out) {
  const std::uint64_t seed = seed_override(args.seed);
  const bool ate = args.estimand == "ate";
  if (ate && args.engine != "closed" && args.engine != "vi") {
    throw ConfigError("--engine: ate accepts closed or vi, got '" + args.engine + "'");
  }
  if (!ate && args.engine != "vi" && args.engine != "exact-gp") {
    throw ConfigError("--engine: cate requires vi or exact-gp, got '" + args.engine + "'");
  }
  if (args.data.empty() == args.dgp.empty()) {
    throw ConfigError("--data/--dgp: exactly one data source is required");
  }

  Dataset ds;
  if (!args.dgp.empty()) {
    Rng rng(seed, stream_id(0, kDataStream));
    ds = generate(default_spec(parse_dgp_id(args.dgp)), args.n, rng);
  } else {
    ds = read_csv(std::filesystem::path(args.data));
  }

  const Strategy strategy = parse_strategy(args.strategy);
  const CalibrationMode calibration = parse_calibration_mode(args.calibration);
  const NuisanceConfig nuisance = nuisance_from(args);
  const NormalPrior prior = args.diffuse ? NormalPrior::diffuse() : NormalPrior{args.prior_mean, args.prior_var};
  prior.validate();
  if (!(args.alpha > 0.0 && args.alpha < 1.0)) throw ConfigError("--alpha: must lie in (0, 1)");

  GpcConfig gpc;
  gpc.alpha = args.alpha;
  gpc.b_boot = args.b_boot;
  gpc.max_iter = args.max_iter;
  gpc.refit_nuisances = args.refit_nuisances;
  if (calibration == CalibrationMode::Gpc) gpc.validate();

  OptimizerConfig opt;
  opt.learning_rate = args.lr;
  opt.epochs = args.epochs;
  opt.batch_size = args.batch_size;
  opt.validate();

  Rng fold_rng(seed, stream_id(0, kFoldStream));
  const auto cf = cross_fit(ds, nuisance, fold_rng);
  const auto pseudo = cross_fitted_pseudo(ds, cf, strategy);

  json summary;
  summary["estimand"] = args.estimand;
  summary["strategy"] = strategy_label(strategy, ate);
  summary["engine"] = args.engine;
  summary["calibration"] = to_string(calibration);
  summary["n"] = ds.size();
  summary["seed"] = seed;
  summary["alpha"] = args.alpha;

  if (ate) {
    double omega = plugin_omega(pseudo);
    if (calibration == CalibrationMode::Gpc) {
      Rng cal_rng(seed, stream_id(0, kCalibrationStream));
      CalibrationResult cal;
      if (gpc.refit_nuisances) {
        cal = gpc_omega(ds, strategy, prior, gpc, nuisance, cal_rng);
      } else {
        cal = gpc_omega(pseudo, prior, gpc, cal_rng);
      }
      omega = cal.omega;
      summary["calibration_detail"] = {{"iterations", cal.iterations},
                                       {"bootstrap_coverage", cal.achieved_bootstrap_coverage},
                                       {"converged", cal.converged}};
    }
    GaussianPosterior post;
    if (args.engine == "closed") {
      post = closed_form_posterior(pseudo, prior, omega);
    } else {
      Rng vi_rng(seed, stream_id(0, kEngineStream));
      post = vi_posterior(pseudo, prior, omega, opt, vi_rng);
    }
    const auto ci = credible_interval(post, args.alpha);
    summary["omega"] = omega;
    summary["point_estimate"] = mean(pseudo.values);
    summary["posterior"] = {{"mean", post.m_p}, {"sd", post.sd()}};
    summary["cri"] = {{"lo", ci.lo}, {"hi", ci.hi}};
    if (ds.truth) summary["truth"] = {{"ate", ds.truth->ate}};
  } else {
    KernelParams kernel;
    kernel.family = parse_kernel_family(args.kernel);
    kernel.lengthscale = args.lengthscale;
    kernel.variance = args.kernel_variance;
    kernel.jitter = args.jitter;
    kernel.validate();

    // Pointwise summaries at a seeded subsample of the observed covariates.
    const std::size_t k = std::min(args.grid_points, ds.size());
    if (k < 1) throw ConfigError("--grid-points: must be >= 1");
    Rng query_rng(seed, stream_id(0, kQueryStream));
    const Matrix query = select_inducing(ds.x, k, query_rng);

    double omega = plugin_omega(pseudo);
    Matrix inducing;
    if (args.engine == "vi") {
      Rng inducing_rng(seed, stream_id(0, kInducingStream));
      inducing = select_inducing(ds.x, std::min(args.inducing, ds.size()), inducing_rng);
    }
    if (calibration == CalibrationMode::Gpc) {
      const Matrix cal_inducing = args.engine == "vi" ? inducing : ds.x;
      Rng cal_rng(seed, stream_id(0, kCalibrationStream));
      const auto cal = gpc_cate_omega(ds.x, pseudo, kernel, cal_inducing, query, gpc, cal_rng);
      omega = cal.omega;
      summary["calibration_detail"] = {{"iterations", cal.iterations},
                                       {"bootstrap_coverage", cal.achieved_bootstrap_coverage},
                                       {"converged", cal.converged}};
    }
    GpPrediction pred;
    if (args.engine == "vi") {
      Rng fit_rng(seed, stream_id(0, kEngineStream));
      pred = predict(svgp_fit(ds.x, pseudo, kernel, omega, inducing, opt, fit_rng), query);
    } else {
      pred = exact_gp_posterior(ds.x, pseudo, kernel, omega).predict(query);
    }
    summary["omega"] = omega;
    json grid = json::array();
    for (Eigen::Index q = 0; q < query.rows(); ++q) {
      const auto ci = pred.interval(static_cast<std::size_t>(q), args.alpha);
      json point;
      std::vector<double> xs;
      for (Eigen::Index j = 0; j < query.cols(); ++j) xs.push_back(query(q, j));
      point["x"] = xs;
      point["mean"] = pred.mean[q];
      point["sd"] = std::sqrt(pred.variance[q]);
      point["lo"] = ci.lo;
      point["hi"] = ci.hi;
      if (ds.truth) point["truth"] = ds.truth->cate(query.row(q).transpose());
      grid.push_back(point);
    }
    summary["posterior"] = {{"grid", grid}};
    summary["cri"] = "pointwise";
  }

  emit(args.out, out, [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
  return kExitOk;
}

// Bench configuration, validated key by key.
struct BenchConfig {
  std::vector<DgpId> datasets;
  std::vector<Strategy> strategies;
  std::vector<std::size_t> n_grid;
  std::size_t reps = 50;
  std::string estimand = "ate";
  std::uint64_t seed = 0;
  std::size_t parallelism = default_parallelism();
  BenchOptions options;
  CateBenchOptions cate;
};

const std::set<std::string> kBenchKeys{"datasets",  "strategies", "n",       "n_grid",   "reps",
                                       "alpha",     "estimand",   "calibration", "seed", "parallelism",
                                       "engine",    "prior",      "nuisance", "kernel",  "inducing",
                                       "k_points",  "gpc"};

template <typename T>
T get_key(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "': missing or wrong type");
  }
}

BenchConfig parse_bench_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("--config: invalid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!kBenchKeys.count(key)) throw ConfigError("config key '" + key + "': unknown key");
  }

  BenchConfig c;
  for (const auto& id : get_key<std::vector<std::string>>(j, "datasets")) {
    try {
      c.datasets.push_back(parse_dgp_id(id));
    } catch (const ConfigError& e) {
      throw ConfigError("config key 'datasets': " + std::string(e.what()));
    }
  }
  if (c.datasets.empty()) throw ConfigError("config key 'datasets': must not be empty");
  for (const auto& s : get_key<std::vector<std::string>>(j, "strategies")) {
    try {
      c.strategies.push_back(parse_strategy(s));
    } catch (const ConfigError& e) {
      throw ConfigError("config key 'strategies': " + std::string(e.what()));
    }
  }
  if (c.strategies.empty()) throw ConfigError("config key 'strategies': must not be empty");

  if (j.contains("n") == j.contains("n_grid")) {
    throw ConfigError("config key 'n': exactly one of 'n' or 'n_grid' is required");
  }
  if (j.contains("n")) {
    c.n_grid = {get_key<std::size_t>(j, "n")};
  } else {
    c.n_grid = get_key<std::vector<std::size_t>>(j, "n_grid");
    if (c.n_grid.empty()) throw ConfigError("config key 'n_grid': must not be empty");
    for (std::size_t i = 1; i < c.n_grid.size(); ++i) {
      if (c.n_grid[i] <= c.n_grid[i - 1]) throw ConfigError("config key 'n_grid': must be increasing");
    }
  }
  for (std::size_t n : c.n_grid) {
    if (n < 10) throw ConfigError("config key 'n': sample size must be >= 10");
  }

  c.reps = get_key<std::size_t>(j, "reps");
  if (c.reps < 2) throw ConfigError("config key 'reps': must be >= 2");
  if (j.contains("alpha")) c.options.alpha = get_key<double>(j, "alpha");
  if (!(c.options.alpha > 0.0 && c.options.alpha < 1.0)) {
    throw ConfigError("config key 'alpha': must lie in (0, 1)");
  }
  if (j.contains("estimand")) c.estimand = get_key<std::string>(j, "estimand");
  if (c.estimand != "ate" && c.estimand != "cate") {
    throw ConfigError("config key 'estimand': expected 'ate' or 'cate'");
  }
  if (j.contains("calibration")) {
    try {
      c.options.calibration = parse_calibration_mode(get_key<std::string>(j, "calibration"));
    } catch (const ConfigError& e) {
      throw ConfigError("config key 'calibration': " + std::string(e.what()));
    }
  }
  if (j.contains("engine")) {
    try {
      c.options.engine = parse_engine(get_key<std::string>(j, "engine"));
    } catch (const ConfigError& e) {
      throw ConfigError("config key 'engine': " + std::string(e.what()));
    }
  }
  if (j.contains("seed")) c.seed = get_key<std::uint64_t>(j, "seed");
  if (j.contains("parallelism")) {
    c.parallelism = get_key<std::size_t>(j, "parallelism");
    if (c.parallelism < 1) throw ConfigError("config key 'parallelism': must be >= 1");
  }
  if (j.contains("prior")) {
    const auto& p = j.at("prior");
    if (p.is_string() && p.get<std::string>() == "diffuse") {
      c.options.prior = NormalPrior::diffuse();
    } else if (p.is_object()) {
      c.options.prior = {get_key<double>(p, "mean"), get_key<double>(p, "var")};
      if (!(c.options.prior.s0_sq > 0.0)) throw ConfigError("config key 'prior': var must be > 0");
    } else {
      throw ConfigError("config key 'prior': expected \"diffuse\" or {mean, var}");
    }
  }
  if (j.contains("nuisance")) {
    const auto& nu = j.at("nuisance");
    if (nu.contains("folds")) c.options.nuisance.folds = get_key<std::size_t>(nu, "folds");
    if (nu.contains("clip_eps")) c.options.nuisance.clip_eps = get_key<double>(nu, "clip_eps");
    if (nu.contains("lambda_prop")) c.options.nuisance.lambda_prop = get_key<double>(nu, "lambda_prop");
    if (nu.contains("lambda_out")) c.options.nuisance.lambda_out = get_key<double>(nu, "lambda_out");
    try {
      c.options.nuisance.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("config key 'nuisance': " + std::string(e.what()));
    }
  }
  if (j.contains("gpc")) {
    const auto& g = j.at("gpc");
    if (g.contains("b_boot")) c.options.gpc.b_boot = get_key<int>(g, "b_boot");
    if (g.contains("max_iter")) c.options.gpc.max_iter = get_key<int>(g, "max_iter");
    if (g.contains("tolerance")) c.options.gpc.tolerance = get_key<double>(g, "tolerance");
  }
  c.options.gpc.alpha = c.options.alpha;
  if (c.options.calibration == CalibrationMode::Gpc) {
    try {
      c.options.gpc.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("config key 'gpc': " + std::string(e.what()));
    }
  }
  if (j.contains("kernel")) {
    const auto& k = j.at("kernel");
    if (k.contains("family")) c.cate.kernel.family = parse_kernel_family(get_key<std::string>(k, "family"));
    if (k.contains("lengthscale")) c.cate.kernel.lengthscale = get_key<double>(k, "lengthscale");
    if (k.contains("variance")) c.cate.kernel.variance = get_key<double>(k, "variance");
    if (k.contains("jitter")) c.cate.kernel.jitter = get_key<double>(k, "jitter");
    try {
      c.cate.kernel.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("config key 'kernel': " + std::string(e.what()));
    }
  }
  if (j.contains("inducing")) c.cate.m_inducing = get_key<std::size_t>(j, "inducing");
  if (j.contains("k_points")) c.cate.k_points = get_key<std::size_t>(j, "k_points");
  if (c.cate.m_inducing < 1) throw ConfigError("config key 'inducing': must be >= 1");
  if (c.cate.k_points < 1) throw ConfigError("config key 'k_points': must be >= 1");
  return c;
}

int cmd_bench(const BenchArgs& args, std::ostream& out) {
  BenchConfig c = parse_bench_config(args.config);
  c.seed = seed_override(c.seed);
  c.options.parallelism = args.parallelism > 0 ? args.parallelism : c.parallelism;

  std::vector<BenchReport> reports;
  for (std::size_t n : c.n_grid) {
    for (DgpId id : c.datasets) {
      const auto spec = default_spec(id);
      auto batch = c.estimand == "ate"
                       ? run_ate_bench(spec, c.strategies, n, c.reps, c.options, c.seed)
                       : run_cate_bench(spec, c.strategies, n, c.reps, c.cate, c.options, c.seed);
      for (auto& r : batch) reports.push_back(std::move(r));
    }
  }

  const std::filesystem::path dir(args.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  emit((dir / "bench.csv").string(), out, [&](std::ostream& os) { write_bench_csv(reports, os); });
  emit((dir / "bench_runs.csv").string(), out, [&](std::ostream& os) { write_runs_csv(reports, os); });
  emit((dir / "bench.md").string(), out, [&](std::ostream& os) { write_bench_markdown(reports, os); });
  out << "wrote " << reports.size() << " rows to " << (dir / "bench.csv").string() << '\n';
  return kExitOk;
}

int cmd_experiment(const ExperimentArgs& args, std::ostream& out) {
  const std::uint64_t seed = seed_override(args.seed);
  const auto spec = default_spec(parse_dgp_id(args.dgp));
  if (args.kind == "slopes") {
    const auto deltas = parse_list<double>(args.deltas, "--deltas");
    const auto results = orthogonality_slopes(spec, deltas, args.n, seed);
    emit(args.out, out, [&](std::ostream& os) { write_slopes_csv(results, os); });
  } else {
    const auto grid = parse_list<std::size_t>(args.n_grid, "--n-grid");
    const auto points =
        tv_stability(spec, parse_strategy(args.strategy), args.beta, grid, args.reps, seed, args.error_scale);
    emit(args.out, out, [&](std::ostream& os) { write_tv_csv(points, os); });
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized Bayesian posteriors for causal effects", "gbc"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", "gbc 0.1.0");

  DgpArgs dgp;
  auto* dgp_cmd = app.add_subcommand("dgp", "Simulate a back-door dataset and write it as CSV");
  dgp_cmd->add_option("--id", dgp.id, "Dataset id")->required()->check(CLI::IsMember(kDgpIds));
  dgp_cmd->add_option("--n", dgp.n, "Number of observations")->required();
  dgp_cmd->add_option("--seed", dgp.seed, "Random seed (GBC_SEED overrides)");
  dgp_cmd->add_option("--out", dgp.out, "Output CSV path (stdout when empty)");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a generalized posterior for the ATE or CATE");
  auto* data_opt = fit_cmd->add_option("--data", fit.data, "Input CSV with header x1..xd,a,y");
  auto* dgp_opt = fit_cmd->add_option("--dgp", fit.dgp, "Simulate from a dataset id instead")
                      ->check(CLI::IsMember(kDgpIds));
  data_opt->excludes(dgp_opt);
  fit_cmd->add_option("--n", fit.n, "Sample size when simulating");
  fit_cmd->add_option("--estimand", fit.estimand, "Target estimand")->check(CLI::IsMember({"ate", "cate"}));
  fit_cmd->add_option("--strategy", fit.strategy, "Pseudo-outcome strategy")
      ->check(CLI::IsMember({"RA", "IPW", "AIPW", "DR"}));
  fit_cmd->add_option("--engine", fit.engine, "Posterior engine: closed|vi (ate), vi|exact-gp (cate)")
      ->check(CLI::IsMember({"closed", "vi", "exact-gp"}));
  fit_cmd->add_option("--calibration", fit.calibration, "Learning-rate calibration")
      ->check(CLI::IsMember({"plugin", "gpc"}));
  fit_cmd->add_option("--alpha", fit.alpha, "Credible level is 1 - alpha");
  fit_cmd->add_option("--prior-mean", fit.prior_mean, "ATE prior mean");
  fit_cmd->add_option("--prior-var", fit.prior_var, "ATE prior variance");
  fit_cmd->add_flag("--diffuse", fit.diffuse, "Use a flat ATE prior (off by default)");
  fit_cmd->add_option("--folds", fit.folds, "Cross-fitting folds");
  fit_cmd->add_option("--clip-eps", fit.clip_eps, "Propensity clipping bound");
  fit_cmd->add_option("--lambda-prop", fit.lambda_prop, "Propensity ridge penalty");
  fit_cmd->add_option("--lambda-out", fit.lambda_out, "Outcome ridge penalty");
  fit_cmd->add_option("--b-boot", fit.b_boot, "Bootstrap resamples for gpc");
  fit_cmd->add_option("--max-iter", fit.max_iter, "Maximum gpc iterations");
  fit_cmd->add_flag("--refit-nuisances", fit.refit_nuisances, "Refit nuisances in each gpc resample (off by default)");
  fit_cmd->add_option("--kernel", fit.kernel, "GP kernel family")->check(CLI::IsMember({"matern52", "rbf"}));
  fit_cmd->add_option("--lengthscale", fit.lengthscale, "GP kernel lengthscale");
  fit_cmd->add_option("--kernel-variance", fit.kernel_variance, "GP kernel variance");
  fit_cmd->add_option("--jitter", fit.jitter, "GP diagonal jitter");
  fit_cmd->add_option("--inducing", fit.inducing, "Inducing points for the vi CATE engine");
  fit_cmd->add_option("--grid-points", fit.grid_points, "Covariate rows reported for CATE");
  fit_cmd->add_option("--epochs", fit.epochs, "Optimizer epochs");
  fit_cmd->add_option("--lr", fit.lr, "Optimizer learning rate");
  fit_cmd->add_option("--batch-size", fit.batch_size, "Monte Carlo draws per VI step");
  fit_cmd->add_option("--seed", fit.seed, "Random seed (GBC_SEED overrides)");
  fit_cmd->add_option("--out", fit.out, "Output JSON path (stdout when empty)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a Monte Carlo coverage study from a JSON config");
  bench_cmd->add_option("--config", bench.config, "JSON study configuration")->required();
  bench_cmd->add_option("--out-dir", bench.out_dir, "Directory for bench.csv, bench_runs.csv, bench.md");
  bench_cmd->add_option("--parallelism", bench.parallelism, "Worker threads (0 = config or all cores)");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Nuisance-sensitivity experiments");
  exp_cmd->add_option("--kind", exp.kind, "Experiment to run")->required()->check(CLI::IsMember({"slopes", "tv"}));
  exp_cmd->add_option("--dgp", exp.dgp, "Dataset id")->check(CLI::IsMember(kDgpIds));
  exp_cmd->add_option("--n", exp.n, "Sample size (slopes)");
  exp_cmd->add_option("--deltas", exp.deltas, "Decreasing perturbation sizes (slopes)");
  exp_cmd->add_option("--beta", exp.beta, "Nuisance error exponent r_n = n^-beta (tv)");
  exp_cmd->add_option("--strategy", exp.strategy, "Pseudo-outcome strategy (tv)")
      ->check(CLI::IsMember({"RA", "IPW", "AIPW", "DR"}));
  exp_cmd->add_option("--n-grid", exp.n_grid, "Sample sizes (tv)");
  exp_cmd->add_option("--reps", exp.reps, "Repetitions per sample size (tv)");
  exp_cmd->add_option("--error-scale", exp.error_scale, "Multiplier on r_n (tv)");
  exp_cmd->add_option("--seed", exp.seed, "Random seed (GBC_SEED overrides)");
  exp_cmd->add_option("--out", exp.out, "Output CSV path (stdout when empty)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << "gbc 0.1.0\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    // Subcommand help requests surface as CallForHelp from the subcommand.
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*dgp_cmd) return cmd_dgp(dgp, out);
    if (*fit_cmd) return cmd_fit(fit, out);
    if (*bench_cmd) return cmd_bench(bench, out);
    if (*exp_cmd) return cmd_experiment(exp, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitConfig;
}

}  // namespace gbc::cli
