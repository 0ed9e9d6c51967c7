#pragma once

#include <limits>

#include "gbc/numerics.hpp"
#include "gbc/pseudo.hpp"

namespace gbc {

// N(m0, s0_sq) prior on the ATE. s0_sq = +inf is the flat (diffuse) prior.
struct NormalPrior {
  double m0 = 0.0;
  double s0_sq = 1.0;

  static NormalPrior diffuse() { return {0.0, std::numeric_limits<double>::infinity()}; }
  bool is_diffuse() const { return s0_sq == std::numeric_limits<double>::infinity(); }
  double precision() const { return is_diffuse() ? 0.0 : 1.0 / s0_sq; }
  void validate() const;
};

struct GaussianPosterior {
  double m_p = 0.0;
  double s_p_sq = 1.0;

  double sd() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double v) const { return lo <= v && v <= hi; }
};

// Conjugate Gibbs posterior for the squared ATE loss scaled by omega * n:
//   s_p^2 = (s0^-2 + omega n)^-1,  m_p = s_p^2 (s0^-2 m0 + omega n theta_hat)
GaussianPosterior closed_form_posterior(const PseudoOutcomes& pseudo, const NormalPrior& prior,
                                        double omega);
// Same from sufficient statistics.
GaussianPosterior closed_form_posterior(double theta_hat, std::size_t n, const NormalPrior& prior,
                                        double omega);

// Central (1 - alpha) interval.
Interval credible_interval(const GaussianPosterior& post, double alpha);

// Variational optimizer defaults: lr 0.03, 2000 epochs, 200 draws per step.
OptimizerConfig default_vi_config();

// Gaussian variational approximation of the Gibbs posterior, minimizing
// omega n E_q[L_n] + KL(q || prior) over (mu, log sigma) with reparameterized
// draws.
GaussianPosterior vi_posterior(const PseudoOutcomes& pseudo, const NormalPrior& prior, double omega,
                               const OptimizerConfig& config, Rng& rng);

}  // namespace gbc
