#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gbc/calibrate.hpp"
#include "gbc/dgp.hpp"
#include "gbc/gibbs_ate.hpp"
#include "gbc/gibbs_cate.hpp"
#include "gbc/nuisance.hpp"
#include "gbc/pseudo.hpp"

namespace gbc {

enum class PosteriorEngine { Closed, Vi };

PosteriorEngine parse_engine(std::string_view name);
std::string to_string(PosteriorEngine engine);

struct BenchOptions {
  double alpha = 0.05;
  NormalPrior prior{0.0, 1.0};
  CalibrationMode calibration = CalibrationMode::Plugin;
  PosteriorEngine engine = PosteriorEngine::Closed;
  NuisanceConfig nuisance;
  GpcConfig gpc;
  OptimizerConfig vi = default_vi_config();
  OptimizerConfig svgp = default_svgp_config();
  std::size_t parallelism = 1;

  void validate() const;
};

// One Monte Carlo repetition. For CATE runs, coverage is the fraction of
// query points covered and length the mean pointwise interval length.
struct RunResult {
  std::size_t rep = 0;
  bool failed = false;
  std::string error;
  double theta_hat = 0.0;
  double cri_lo = 0.0;
  double cri_hi = 0.0;
  bool covered = false;
  double coverage = 0.0;
  double length = 0.0;
  double omega = 0.0;
};

struct BenchReport {
  std::string dataset_id;
  std::string strategy;
  std::string estimand = "ate";
  std::size_t n = 0;
  std::size_t r_total = 0;  // successful repetitions
  std::size_t failures = 0;
  double alpha = 0.05;
  double coverage = 0.0;
  Interval coverage_ci;
  double mean_length = 0.0;
  double sd_length = 0.0;
  double median_length = 0.0;
  bool faithful = false;
  std::vector<RunResult> runs;  // in repetition order
};

// Wilson score interval at the given level for a proportion p_hat over count
// trials.
Interval wilson_interval(double p_hat, std::size_t count, double level = 0.95);

// Folds per-repetition results (in rep order) into a report.
BenchReport aggregate_runs(std::string dataset_id, std::string strategy, std::string estimand,
                           std::size_t n, double alpha, std::vector<RunResult> runs);

BenchReport run_ate_bench(const DgpSpec& spec, Strategy strategy, std::size_t n, std::size_t r_reps,
                          const BenchOptions& options, std::uint64_t base_seed);
// Several strategies on shared per-repetition data and cross-fits; each
// report equals the corresponding single-strategy run.
std::vector<BenchReport> run_ate_bench(const DgpSpec& spec, const std::vector<Strategy>& strategies,
                                       std::size_t n, std::size_t r_reps, const BenchOptions& options,
                                       std::uint64_t base_seed);

struct CateBenchOptions {
  KernelParams kernel;
  std::size_t m_inducing = 20;
  std::size_t k_points = 100;
};

BenchReport run_cate_bench(const DgpSpec& spec, Strategy strategy, std::size_t n, std::size_t r_reps,
                           const CateBenchOptions& cate, const BenchOptions& options,
                           std::uint64_t base_seed);
std::vector<BenchReport> run_cate_bench(const DgpSpec& spec, const std::vector<Strategy>& strategies,
                                        std::size_t n, std::size_t r_reps,
                                        const CateBenchOptions& cate, const BenchOptions& options,
                                        std::uint64_t base_seed);

// One report per (strategy, n), strategies outermost.
std::vector<BenchReport> length_sweep(const DgpSpec& spec, const std::vector<Strategy>& strategies,
                                      const std::vector<std::size_t>& n_grid, std::size_t r_reps,
                                      const BenchOptions& options, std::uint64_t base_seed);

// Nuisances perturbed by magnitude delta along a fixed direction
// g(x) = 1 + x1: logit e + delta g, m1 + delta g, m0 - delta g.
// delta == 0 returns the input unchanged.
TrueNuisances perturb_nuisances(const TrueNuisances& truth, const Matrix& x, double delta);

struct SlopeResult {
  Strategy strategy = Strategy::DR;
  std::vector<double> deltas;
  std::vector<double> shifts;  // |theta_fe(delta) - theta_or|
  double slope = 0.0;          // log-log least-squares slope
};

std::vector<SlopeResult> orthogonality_slopes(const DgpSpec& spec, const std::vector<double>& delta_grid,
                                              std::size_t n, std::uint64_t base_seed);

struct TvPoint {
  std::size_t n = 0;
  double error_rate = 0.0;  // r_n
  double mean_tv = 0.0;
  double se_tv = 0.0;
  std::vector<double> tv;  // per repetition
};

// Feasible vs oracle closed-form posteriors (flat prior, shared plug-in omega
// from the oracle pseudo-outcomes) under injected nuisance error
// r_n = error_scale * n^-beta.
std::vector<TvPoint> tv_stability(const DgpSpec& spec, Strategy strategy, double beta,
                                  const std::vector<std::size_t>& n_grid, std::size_t reps,
                                  std::uint64_t base_seed, double error_scale = 1.0);

}  // namespace gbc
