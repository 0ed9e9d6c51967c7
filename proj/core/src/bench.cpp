#include "gbc/bench.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "gbc/errors.hpp"
#include "gbc/parallel.hpp"

namespace gbc {

namespace {

// Stream purposes within a repetition; strategy-specific purposes are offset
// so that multi-strategy and single-strategy runs draw identical numbers.
constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kFoldStream = 1;
constexpr std::uint64_t kQueryStream = 2;
constexpr std::uint64_t kInducingStream = 3;

std::uint64_t strategy_stream(Strategy s, std::uint64_t purpose) {
  return 8 + 4 * static_cast<std::uint64_t>(s) + purpose;
}

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

std::vector<RunResult> failed_runs(std::size_t rep, std::size_t count, const std::string& what) {
  std::vector<RunResult> out(count);
  for (auto& r : out) {
    r.rep = rep;
    r.failed = true;
    r.error = what;
  }
  return out;
}

// Per-repetition ATE pipeline for several strategies on one dataset.
std::vector<RunResult> ate_repetition(const DgpSpec& spec, const std::vector<Strategy>& strategies,
                                      std::size_t n, std::size_t rep, const BenchOptions& options,
                                      std::uint64_t base_seed) {
  std::vector<RunResult> out;
  Dataset ds;
  CrossFit cf;
  try {
    Rng data_rng(base_seed, stream_id(rep, kDataStream));
    ds = generate(spec, n, data_rng);
    Rng fold_rng(base_seed, stream_id(rep, kFoldStream));
    cf = cross_fit(ds, options.nuisance, fold_rng);
  } catch (const NumericError& e) {
    return failed_runs(rep, strategies.size(), e.what());
  }
  const double truth = ds.truth->ate;

  for (Strategy s : strategies) {
    RunResult run;
    run.rep = rep;
    try {
      const auto pseudo = cross_fitted_pseudo(ds, cf, s);
      double omega = plugin_omega(pseudo);
      if (options.calibration == CalibrationMode::Gpc) {
        Rng cal_rng(base_seed, stream_id(rep, strategy_stream(s, 0)));
        omega = gpc_omega(pseudo, options.prior, options.gpc, cal_rng).omega;
      }
      GaussianPosterior post;
      if (options.engine == PosteriorEngine::Closed) {
        post = closed_form_posterior(pseudo, options.prior, omega);
      } else {
        Rng vi_rng(base_seed, stream_id(rep, strategy_stream(s, 1)));
        post = vi_posterior(pseudo, options.prior, omega, options.vi, vi_rng);
      }
      const auto ci = credible_interval(post, options.alpha);
      run.theta_hat = mean(pseudo.values);
      run.cri_lo = ci.lo;
      run.cri_hi = ci.hi;
      run.covered = ci.contains(truth);
      run.coverage = run.covered ? 1.0 : 0.0;
      run.length = ci.length();
      run.omega = omega;
    } catch (const NumericError& e) {
      run.failed = true;
      run.error = e.what();
    }
    out.push_back(run);
  }
  return out;
}

std::vector<RunResult> cate_repetition(const DgpSpec& spec, const std::vector<Strategy>& strategies,
                                       std::size_t n, std::size_t rep, const CateBenchOptions& cate,
                                       const BenchOptions& options, std::uint64_t base_seed) {
  std::vector<RunResult> out;
  Dataset ds;
  CrossFit cf;
  Matrix query;
  Matrix inducing;
  try {
    Rng data_rng(base_seed, stream_id(rep, kDataStream));
    ds = generate(spec, n, data_rng);
    Rng fold_rng(base_seed, stream_id(rep, kFoldStream));
    cf = cross_fit(ds, options.nuisance, fold_rng);
    Rng query_rng(base_seed, stream_id(rep, kQueryStream));
    query = sample_covariates(spec, cate.k_points, query_rng);
    Rng inducing_rng(base_seed, stream_id(rep, kInducingStream));
    inducing = select_inducing(ds.x, std::min(cate.m_inducing, n), inducing_rng);
  } catch (const NumericError& e) {
    return failed_runs(rep, strategies.size(), e.what());
  }
  std::vector<double> truth(static_cast<std::size_t>(query.rows()));
  for (Eigen::Index q = 0; q < query.rows(); ++q) {
    truth[static_cast<std::size_t>(q)] = ds.truth->cate(query.row(q).transpose());
  }

  for (Strategy s : strategies) {
    RunResult run;
    run.rep = rep;
    try {
      const auto pseudo = cross_fitted_pseudo(ds, cf, s);
      double omega = plugin_omega(pseudo);
      if (options.calibration == CalibrationMode::Gpc) {
        Rng cal_rng(base_seed, stream_id(rep, strategy_stream(s, 0)));
        omega = gpc_cate_omega(ds.x, pseudo, cate.kernel, inducing, query, options.gpc, cal_rng).omega;
      }
      Rng fit_rng(base_seed, stream_id(rep, strategy_stream(s, 1)));
      const auto gp = svgp_fit(ds.x, pseudo, cate.kernel, omega, inducing, options.svgp, fit_rng);
      const auto pred = predict(gp, query);
      std::size_t hits = 0;
      double total_length = 0.0;
      for (Eigen::Index q = 0; q < query.rows(); ++q) {
        const auto ci = pred.interval(static_cast<std::size_t>(q), options.alpha);
        if (ci.contains(truth[static_cast<std::size_t>(q)])) ++hits;
        total_length += ci.length();
      }
      const auto k = static_cast<double>(query.rows());
      run.theta_hat = pred.mean.mean();
      run.coverage = static_cast<double>(hits) / k;
      run.covered = hits == static_cast<std::size_t>(query.rows());
      run.length = total_length / k;
      run.omega = omega;
    } catch (const NumericError& e) {
      run.failed = true;
      run.error = e.what();
    }
    out.push_back(run);
  }
  return out;
}

template <typename Repetition>
std::vector<BenchReport> run_reps(const DgpSpec& spec, const std::vector<Strategy>& strategies,
                                  std::size_t n, std::size_t r_reps, const BenchOptions& options,
                                  const std::string& estimand, Repetition&& repetition) {
  spec.validate();
  options.validate();
  if (r_reps < 2) throw DomainError("bench needs at least 2 repetitions");
  if (strategies.empty()) throw DomainError("bench needs at least one strategy");
  std::vector<std::vector<RunResult>> per_rep(r_reps);
  parallel_for(r_reps, options.parallelism, [&](std::size_t rep) { per_rep[rep] = repetition(rep); });

  std::vector<BenchReport> reports;
  const bool ate = estimand == "ate";
  for (std::size_t j = 0; j < strategies.size(); ++j) {
    std::vector<RunResult> runs;
    runs.reserve(r_reps);
    for (const auto& rep_runs : per_rep) runs.push_back(rep_runs[j]);
    reports.push_back(aggregate_runs(to_string(spec.id), strategy_label(strategies[j], ate), estimand,
                                     n, options.alpha, std::move(runs)));
  }
  return reports;
}

}  // namespace

PosteriorEngine parse_engine(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "closed") return PosteriorEngine::Closed;
  if (lower == "vi") return PosteriorEngine::Vi;
  throw ConfigError("unknown engine '" + std::string(name) + "' (expected closed or vi)");
}

std::string to_string(PosteriorEngine engine) {
  return engine == PosteriorEngine::Closed ? "closed" : "vi";
}

void BenchOptions::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  prior.validate();
  nuisance.validate();
  if (calibration == CalibrationMode::Gpc) gpc.validate();
  vi.validate();
  svgp.validate();
}

Interval wilson_interval(double p_hat, std::size_t count, double level) {
  if (count == 0) return {0.0, 1.0};
  const double z = normal_quantile(0.5 + 0.5 * level);
  const double r = static_cast<double>(count);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / r;
  const double center = (p_hat + z2 / (2.0 * r)) / denom;
  const double half = z / denom * std::sqrt(p_hat * (1.0 - p_hat) / r + z2 / (4.0 * r * r));
  return {std::max(0.0, std::min(center - half, p_hat)), std::min(1.0, std::max(center + half, p_hat))};
}

BenchReport aggregate_runs(std::string dataset_id, std::string strategy, std::string estimand,
                           std::size_t n, double alpha, std::vector<RunResult> runs) {
  BenchReport report;
  report.dataset_id = std::move(dataset_id);
  report.strategy = std::move(strategy);
  report.estimand = std::move(estimand);
  report.n = n;
  report.alpha = alpha;

  std::vector<double> lengths;
  double coverage_sum = 0.0;
  for (const auto& run : runs) {
    if (run.failed) {
      ++report.failures;
      continue;
    }
    coverage_sum += run.coverage;
    lengths.push_back(run.length);
  }
  report.r_total = lengths.size();
  if (report.r_total > 0) {
    const auto r = static_cast<double>(report.r_total);
    report.coverage = coverage_sum / r;
    double sum = 0.0;
    for (double l : lengths) sum += l;
    report.mean_length = sum / r;
    if (report.r_total > 1) {
      double ss = 0.0;
      for (double l : lengths) ss += (l - report.mean_length) * (l - report.mean_length);
      report.sd_length = std::sqrt(ss / (r - 1.0));
    }
    std::vector<double> sorted = lengths;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    report.median_length =
        sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  }
  report.coverage_ci = wilson_interval(report.coverage, report.r_total);
  report.faithful = report.r_total > 0 && report.coverage_ci.hi >= 1.0 - alpha;
  report.runs = std::move(runs);
  return report;
}

std::vector<BenchReport> run_ate_bench(const DgpSpec& spec, const std::vector<Strategy>& strategies,
                                       std::size_t n, std::size_t r_reps, const BenchOptions& options,
                                       std::uint64_t base_seed) {
  return run_reps(spec, strategies, n, r_reps, options, "ate", [&](std::size_t rep) {
    return ate_repetition(spec, strategies, n, rep, options, base_seed);
  });
}

BenchReport run_ate_bench(const DgpSpec& spec, Strategy strategy, std::size_t n, std::size_t r_reps,
                          const BenchOptions& options, std::uint64_t base_seed) {
  return run_ate_bench(spec, std::vector<Strategy>{strategy}, n, r_reps, options, base_seed).front();
}

std::vector<BenchReport> run_cate_bench(const DgpSpec& spec, const std::vector<Strategy>& strategies,
                                        std::size_t n, std::size_t r_reps,
                                        const CateBenchOptions& cate, const BenchOptions& options,
                                        std::uint64_t base_seed) {
  cate.kernel.validate();
  if (cate.k_points < 1) throw DomainError("CATE bench needs at least one query point");
  if (cate.m_inducing < 1) throw DomainError("CATE bench needs at least one inducing point");
  return run_reps(spec, strategies, n, r_reps, options, "cate", [&](std::size_t rep) {
    return cate_repetition(spec, strategies, n, rep, cate, options, base_seed);
  });
}

BenchReport run_cate_bench(const DgpSpec& spec, Strategy strategy, std::size_t n, std::size_t r_reps,
                           const CateBenchOptions& cate, const BenchOptions& options,
                           std::uint64_t base_seed) {
  return run_cate_bench(spec, std::vector<Strategy>{strategy}, n, r_reps, cate, options, base_seed)
      .front();
}

std::vector<BenchReport> length_sweep(const DgpSpec& spec, const std::vector<Strategy>& strategies,
                                      const std::vector<std::size_t>& n_grid, std::size_t r_reps,
                                      const BenchOptions& options, std::uint64_t base_seed) {
  if (n_grid.empty()) throw DomainError("length sweep needs a non-empty n grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) throw DomainError("n grid must be strictly increasing");
  }
  std::vector<std::vector<BenchReport>> by_n;
  for (std::size_t n : n_grid) by_n.push_back(run_ate_bench(spec, strategies, n, r_reps, options, base_seed));
  std::vector<BenchReport> out;
  for (std::size_t j = 0; j < strategies.size(); ++j) {
    for (auto& reports : by_n) out.push_back(std::move(reports[j]));
  }
  return out;
}

TrueNuisances perturb_nuisances(const TrueNuisances& truth, const Matrix& x, double delta) {
  if (delta == 0.0) return truth;
  TrueNuisances out = truth;
  const Vector logit = truth.logit();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double g = 1.0 + x(i, 0);
    out.propensity[i] = sigmoid(logit[i] + delta * g);
    out.mu1[i] = truth.mu1[i] + delta * g;
    out.mu0[i] = truth.mu0[i] - delta * g;
  }
  return out;
}

namespace {

NuisancePredictions as_predictions(const TrueNuisances& t) { return {t.propensity, t.mu0, t.mu1}; }

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto k = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= k;
  my /= k;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

std::vector<SlopeResult> orthogonality_slopes(const DgpSpec& spec, const std::vector<double>& delta_grid,
                                              std::size_t n, std::uint64_t base_seed) {
  if (delta_grid.size() < 2) throw DomainError("slope fit needs at least two deltas");
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    if (!(delta_grid[i] > 0.0)) throw DomainError("deltas must be positive");
    if (i > 0 && !(delta_grid[i] < delta_grid[i - 1])) throw DomainError("deltas must be decreasing");
  }
  Rng rng(base_seed, stream_id(0, kDataStream));
  const DgpDraw draw = simulate(spec, n, rng);

  std::vector<SlopeResult> out;
  for (Strategy s : {Strategy::RA, Strategy::IPW, Strategy::DR}) {
    const double oracle = mean(pseudo_from_nuisances(draw.data, as_predictions(draw.nuisances), s).values);
    SlopeResult result;
    result.strategy = s;
    result.deltas = delta_grid;
    std::vector<double> log_delta;
    std::vector<double> log_shift;
    for (double delta : delta_grid) {
      const auto perturbed = perturb_nuisances(draw.nuisances, draw.data.x, delta);
      const double feasible = mean(pseudo_from_nuisances(draw.data, as_predictions(perturbed), s).values);
      const double shift = std::abs(feasible - oracle);
      if (!(shift > 0.0)) throw NumericError("orthogonality slope: zero shift at a positive delta");
      result.shifts.push_back(shift);
      log_delta.push_back(std::log(delta));
      log_shift.push_back(std::log(shift));
    }
    result.slope = least_squares_slope(log_delta, log_shift);
    out.push_back(std::move(result));
  }
  return out;
}

std::vector<TvPoint> tv_stability(const DgpSpec& spec, Strategy strategy, double beta,
                                  const std::vector<std::size_t>& n_grid, std::size_t reps,
                                  std::uint64_t base_seed, double error_scale) {
  if (n_grid.empty()) throw DomainError("tv_stability needs a non-empty n grid");
  if (reps < 2) throw DomainError("tv_stability needs at least 2 repetitions");
  if (!(error_scale >= 0.0)) throw DomainError("error scale must be non-negative");
  const NormalPrior flat = NormalPrior::diffuse();
  std::vector<TvPoint> out;
  for (std::size_t g = 0; g < n_grid.size(); ++g) {
    TvPoint point;
    point.n = n_grid[g];
    point.error_rate = error_scale * std::pow(static_cast<double>(point.n), -beta);
    for (std::size_t rep = 0; rep < reps; ++rep) {
      Rng rng(base_seed, stream_id(rep, 32 + g));
      const DgpDraw draw = simulate(spec, point.n, rng);
      const auto oracle = pseudo_from_nuisances(draw.data, as_predictions(draw.nuisances), strategy);
      const auto feasible = pseudo_from_nuisances(
          draw.data, as_predictions(perturb_nuisances(draw.nuisances, draw.data.x, point.error_rate)),
          strategy);
      const double omega = plugin_omega(oracle);
      const auto q_or = closed_form_posterior(oracle, flat, omega);
      const auto q_fe = closed_form_posterior(feasible, flat, omega);
      point.tv.push_back(gaussian_tv(q_fe.m_p, q_or.m_p, q_or.sd()));
    }
    const auto r = static_cast<double>(reps);
    double sum = 0.0;
    for (double v : point.tv) sum += v;
    point.mean_tv = sum / r;
    double ss = 0.0;
    for (double v : point.tv) ss += (v - point.mean_tv) * (v - point.mean_tv);
    point.se_tv = std::sqrt(ss / (r - 1.0) / r);
    out.push_back(std::move(point));
  }
  return out;
}

}  // namespace gbc
