#pragma once

#include <functional>
#include <vector>

#include "gbc/dataset.hpp"
#include "gbc/gibbs_ate.hpp"
#include "gbc/gibbs_cate.hpp"
#include "gbc/nuisance.hpp"
#include "gbc/pseudo.hpp"

namespace gbc {

enum class CalibrationMode { Plugin, Gpc };

CalibrationMode parse_calibration_mode(std::string_view name);
std::string to_string(CalibrationMode mode);

struct CalibrationResult {
  double omega = 1.0;
  int iterations = 0;
  double achieved_bootstrap_coverage = 0.0;
  bool converged = false;
  std::vector<double> omega_path;     // omega at each coverage evaluation
  std::vector<double> coverage_path;  // matching bootstrap coverage
};

// omega = 1 / Var(pseudo) with the unbiased sample variance.
double plugin_omega(const PseudoOutcomes& pseudo);

struct GpcConfig {
  double alpha = 0.05;
  int b_boot = 200;
  int max_iter = 50;
  double tolerance = 0.01;
  // Refit cross-fitted nuisances inside each bootstrap resample instead of
  // resampling the original pseudo-outcomes.
  bool refit_nuisances = false;

  void validate() const;
};

// Stochastic-approximation loop: log omega += (c_hat - (1 - alpha)) / t until
// |c_hat - (1 - alpha)| <= tolerance or max_iter evaluations.
CalibrationResult gpc_iterate(double initial_omega, const std::function<double(double)>& coverage,
                              const GpcConfig& config);

// ATE calibration from cross-fitted pseudo-outcomes (resamples their values).
CalibrationResult gpc_omega(const PseudoOutcomes& pseudo, const NormalPrior& prior,
                            const GpcConfig& config, Rng& rng);

// Full pipeline: cross-fit, pseudo-outcomes, then calibrate. Honors
// config.refit_nuisances.
CalibrationResult gpc_omega(const Dataset& ds, Strategy strategy, const NormalPrior& prior,
                            const GpcConfig& config, const NuisanceConfig& nuisance, Rng& rng);

// CATE calibration on pointwise coverage averaged over query points, using the
// closed-form variational optimum for fixed inducing locations.
CalibrationResult gpc_cate_omega(const Matrix& x, const PseudoOutcomes& pseudo,
                                 const KernelParams& kernel, const Matrix& inducing_x,
                                 const Matrix& query_x, const GpcConfig& config, Rng& rng);

}  // namespace gbc
