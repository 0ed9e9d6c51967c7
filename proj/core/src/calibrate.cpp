#include "gbc/calibrate.hpp"

#include <cctype>
#include <cmath>

#include "gbc/errors.hpp"

namespace gbc {

namespace {

std::vector<std::vector<std::size_t>> draw_resamples(std::size_t n, int count, Rng& rng) {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(count));
  for (auto& rows : out) {
    rows.resize(n);
    for (auto& r : rows) r = rng.index(n);
  }
  return out;
}

// Fraction of bootstrap estimates whose credible interval at omega contains
// the full-data estimate.
double ate_bootstrap_coverage(const std::vector<double>& boot_estimates, double theta_hat,
                              std::size_t n, const NormalPrior& prior, double omega, double alpha) {
  std::size_t hits = 0;
  for (double est : boot_estimates) {
    const auto ci = credible_interval(closed_form_posterior(est, n, prior, omega), alpha);
    if (ci.contains(theta_hat)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(boot_estimates.size());
}

}  // namespace

CalibrationMode parse_calibration_mode(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "plugin") return CalibrationMode::Plugin;
  if (lower == "gpc") return CalibrationMode::Gpc;
  throw ConfigError("unknown calibration '" + std::string(name) + "' (expected plugin or gpc)");
}

std::string to_string(CalibrationMode mode) {
  return mode == CalibrationMode::Plugin ? "plugin" : "gpc";
}

double plugin_omega(const PseudoOutcomes& pseudo) {
  if (pseudo.size() < 2) throw DegenerateVariance("plug-in omega needs at least two values");
  const double var = sample_variance(pseudo.values);
  if (!(var > 0.0)) throw DegenerateVariance("pseudo-outcomes have zero variance");
  return 1.0 / var;
}

void GpcConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (b_boot < 50) throw DomainError("b_boot must be >= 50");
  if (max_iter < 1) throw DomainError("max_iter must be >= 1");
  if (!(tolerance > 0.0)) throw DomainError("tolerance must be positive");
}

CalibrationResult gpc_iterate(double initial_omega, const std::function<double(double)>& coverage,
                              const GpcConfig& config) {
  config.validate();
  if (!(initial_omega > 0.0) || !std::isfinite(initial_omega)) {
    throw DomainError("initial omega must be positive and finite");
  }
  const double target = 1.0 - config.alpha;
  CalibrationResult result;
  double omega = initial_omega;
  for (int t = 1; t <= config.max_iter; ++t) {
    const double c_hat = coverage(omega);
    result.omega = omega;
    result.iterations = t;
    result.achieved_bootstrap_coverage = c_hat;
    result.omega_path.push_back(omega);
    result.coverage_path.push_back(c_hat);
    // Coverage is a ratio of counts; allow for rounding in the subtraction (0.96 - 0.95 > 0.01 in doubles).
    if (std::abs(c_hat - target) <= config.tolerance + 1e-12) {
      result.converged = true;
      return result;
    }
    // Under-coverage lowers omega (wider posterior); over-coverage raises it.
    omega = std::exp(std::log(omega) + (c_hat - target) / static_cast<double>(t));
  }
  return result;
}

CalibrationResult gpc_omega(const PseudoOutcomes& pseudo, const NormalPrior& prior,
                            const GpcConfig& config, Rng& rng) {
  config.validate();
  const std::size_t n = pseudo.size();
  const double theta_hat = mean(pseudo.values);
  // Resamples are drawn once and reused at every omega (common random numbers).
  std::vector<double> estimates;
  estimates.reserve(static_cast<std::size_t>(config.b_boot));
  for (const auto& rows : draw_resamples(n, config.b_boot, rng)) {
    double s = 0.0;
    for (std::size_t r : rows) s += pseudo.values[static_cast<Eigen::Index>(r)];
    estimates.push_back(s / static_cast<double>(n));
  }
  return gpc_iterate(
      plugin_omega(pseudo),
      [&](double omega) {
        return ate_bootstrap_coverage(estimates, theta_hat, n, prior, omega, config.alpha);
      },
      config);
}

CalibrationResult gpc_omega(const Dataset& ds, Strategy strategy, const NormalPrior& prior,
                            const GpcConfig& config, const NuisanceConfig& nuisance, Rng& rng) {
  config.validate();
  const auto cf = cross_fit(ds, nuisance, rng);
  const auto pseudo = cross_fitted_pseudo(ds, cf, strategy);
  if (!config.refit_nuisances) return gpc_omega(pseudo, prior, config, rng);

  const std::size_t n = ds.size();
  const double theta_hat = mean(pseudo.values);
  std::vector<double> estimates;
  for (const auto& rows : draw_resamples(n, config.b_boot, rng)) {
    const Dataset boot = ds.subset(rows);
    const auto boot_cf = cross_fit(boot, nuisance, rng);
    estimates.push_back(mean(cross_fitted_pseudo(boot, boot_cf, strategy).values));
  }
  return gpc_iterate(
      plugin_omega(pseudo),
      [&](double omega) {
        return ate_bootstrap_coverage(estimates, theta_hat, n, prior, omega, config.alpha);
      },
      config);
}

CalibrationResult gpc_cate_omega(const Matrix& x, const PseudoOutcomes& pseudo,
                                 const KernelParams& kernel, const Matrix& inducing_x,
                                 const Matrix& query_x, const GpcConfig& config, Rng& rng) {
  config.validate();
  kernel.validate();
  const std::size_t n = pseudo.size();
  if (static_cast<std::size_t>(x.rows()) != n) throw DomainError("GP: size mismatch");
  const auto resamples = draw_resamples(n, config.b_boot, rng);

  auto coverage = [&](double omega) {
    const auto full = predict(svgp_optimal(x, pseudo.values, kernel, omega, inducing_x), query_x);
    std::size_t hits = 0;
    std::size_t total = 0;
    for (const auto& rows : resamples) {
      Matrix xb(static_cast<Eigen::Index>(n), x.cols());
      Vector yb(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        xb.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
        yb[static_cast<Eigen::Index>(i)] = pseudo.values[static_cast<Eigen::Index>(rows[i])];
      }
      const auto boot = predict(svgp_optimal(xb, yb, kernel, omega, inducing_x), query_x);
      for (Eigen::Index q = 0; q < query_x.rows(); ++q) {
        if (boot.interval(static_cast<std::size_t>(q), config.alpha).contains(full.mean[q])) ++hits;
        ++total;
      }
    }
    return static_cast<double>(hits) / static_cast<double>(total);
  };
  return gpc_iterate(plugin_omega(pseudo), coverage, config);
}

}  // namespace gbc
