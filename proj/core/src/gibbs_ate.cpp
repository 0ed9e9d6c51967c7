#include "gbc/gibbs_ate.hpp"

#include <algorithm>
#include <cmath>

#include "gbc/errors.hpp"

namespace gbc {

void NormalPrior::validate() const {
  if (!std::isfinite(m0)) throw DomainError("prior mean must be finite");
  if (!(s0_sq > 0.0)) throw DomainError("prior variance must be positive");
}

double GaussianPosterior::sd() const { return std::sqrt(s_p_sq); }

GaussianPosterior closed_form_posterior(double theta_hat, std::size_t n, const NormalPrior& prior,
                                        double omega) {
  if (!(omega > 0.0)) throw DomainError("omega must be positive");
  if (n < 1) throw DomainError("posterior needs at least one observation");
  prior.validate();
  const double data_precision = omega * static_cast<double>(n);
  const double prior_precision = prior.precision();
  GaussianPosterior post;
  post.s_p_sq = 1.0 / (prior_precision + data_precision);
  post.m_p = post.s_p_sq * (prior_precision * prior.m0 + data_precision * theta_hat);
  return post;
}

GaussianPosterior closed_form_posterior(const PseudoOutcomes& pseudo, const NormalPrior& prior,
                                        double omega) {
  return closed_form_posterior(mean(pseudo.values), pseudo.size(), prior, omega);
}

Interval credible_interval(const GaussianPosterior& post, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  const double half = normal_quantile(1.0 - 0.5 * alpha) * post.sd();
  return {post.m_p - half, post.m_p + half};
}

OptimizerConfig default_vi_config() { return OptimizerConfig{}; }

GaussianPosterior vi_posterior(const PseudoOutcomes& pseudo, const NormalPrior& prior, double omega,
                               const OptimizerConfig& config, Rng& rng) {
  if (!(omega > 0.0)) throw DomainError("omega must be positive");
  prior.validate();
  config.validate();
  const auto n = static_cast<double>(pseudo.size());
  if (n < 1) throw DomainError("posterior needs at least one observation");

  const double theta_hat = mean(pseudo.values);
  const double data_precision = omega * n;
  const double prior_precision = prior.precision();
  const int draws = config.batch_size;

  // Start at the prior mean (or the point estimate under a flat prior) with a
  // scale well below the data's so early gradients stay bounded.
  const double spread = pseudo.size() > 1 ? std::sqrt(sample_variance(pseudo.values) / n) : 1.0;
  double init_sd = 0.1 * (spread > 0.0 ? spread : 1.0);
  if (!prior.is_diffuse()) init_sd = std::min(init_sd, 0.1 * std::sqrt(prior.s0_sq));
  Vector init(2);
  init << (prior.is_diffuse() ? theta_hat : prior.m0), std::log(init_sd);

  // d/dtheta of omega n L_n(theta) is omega n (theta - theta_hat).
  auto gradient = [&](const Vector& params, Rng& r) {
    const double mu = params[0];
    const double sigma = std::exp(params[1]);
    double g_mu = 0.0;
    double g_log_sigma = 0.0;
    for (int b = 0; b < draws; ++b) {
      const double eps = r.normal();
      const double g = data_precision * (mu + sigma * eps - theta_hat);
      g_mu += g;
      g_log_sigma += g * eps * sigma;
    }
    Vector grad(2);
    grad[0] = g_mu / draws + prior_precision * (mu - prior.m0);
    // KL gradient in log sigma: sigma^2 / s0^2 - 1 (entropy term alone when flat).
    grad[1] = g_log_sigma / draws + prior_precision * sigma * sigma - 1.0;
    return grad;
  };

  const Vector fitted = adam_minimize(gradient, init, config, rng);
  return {fitted[0], std::exp(2.0 * fitted[1])};
}

}  // namespace gbc
