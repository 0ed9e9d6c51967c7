#pragma once

#include <string>
#include <string_view>

#include "gbc/gibbs_ate.hpp"
#include "gbc/numerics.hpp"
#include "gbc/pseudo.hpp"

namespace gbc {

enum class KernelFamily { Matern52, RBF };

KernelFamily parse_kernel_family(std::string_view name);
std::string to_string(KernelFamily family);

// Fixed GP prior hyperparameters; never optimized.
struct KernelParams {
  KernelFamily family = KernelFamily::Matern52;
  double lengthscale = 2.0;
  double variance = 2.0;
  double jitter = 1e-4;

  void validate() const;
  // Covariance at Euclidean distance r (no jitter).
  double at_distance(double r) const;
  // Prior marginal variance of a single evaluation, jitter included.
  double marginal_variance() const { return variance + jitter; }
};

// Cross-covariance K(xa, xb).
Matrix kernel_matrix(const KernelParams& params, const Matrix& xa, const Matrix& xb);
// K(x, x) with jitter added on the diagonal.
Matrix kernel_matrix(const KernelParams& params, const Matrix& x);

struct GpPrediction {
  Vector mean;
  Vector variance;

  Interval interval(std::size_t i, double alpha) const;
};

// Dense GP regression with Gaussian working noise 1/omega after centering the
// pseudo-outcomes at their mean.
class ExactGpPosterior {
 public:
  ExactGpPosterior(const Matrix& x, const PseudoOutcomes& pseudo, const KernelParams& params,
                   double omega);

  GpPrediction predict(const Matrix& x_query) const;
  double const_mean() const { return const_mean_; }

 private:
  KernelParams params_;
  Matrix x_;
  double omega_;
  double const_mean_;
  CholeskyFactor factor_;  // K + omega^-1 I
  Vector weights_;         // (K + omega^-1 I)^-1 (y - const_mean)
};

inline constexpr std::size_t kExactGpMaxRows = 2000;

ExactGpPosterior exact_gp_posterior(const Matrix& x, const PseudoOutcomes& pseudo,
                                    const KernelParams& params, double omega);

// Sparse variational GP posterior over the CATE function.
struct GpPosterior {
  KernelParams kernel;
  Matrix inducing_x;  // M x d
  Vector q_mean;      // mean of the inducing values u
  Matrix q_cov;       // covariance of u
  double const_mean = 0.0;
  double omega = 1.0;
};

// First m rows of a seeded random permutation of the training covariates.
Matrix select_inducing(const Matrix& x, std::size_t m, Rng& rng);

// GP-specific optimizer defaults (full batch, batch_size unused).
OptimizerConfig default_svgp_config();

// Maximizes the uncollapsed inducing-point evidence bound with Gaussian noise
// 1/omega over q(u) = N(q_mean, q_cov). Kernel and inducing locations stay
// fixed.
GpPosterior svgp_fit(const Matrix& x, const PseudoOutcomes& pseudo, const KernelParams& params,
                     double omega, std::size_t m_inducing, const OptimizerConfig& config, Rng& rng);
GpPosterior svgp_fit(const Matrix& x, const PseudoOutcomes& pseudo, const KernelParams& params,
                     double omega, const Matrix& inducing_x, const OptimizerConfig& config, Rng& rng);

// Closed-form maximizer of the same bound for fixed inducing locations.
GpPosterior svgp_optimal(const Matrix& x, const Vector& y, const KernelParams& params, double omega,
                         const Matrix& inducing_x);

GpPrediction predict(const GpPosterior& gp, const Matrix& x_query);

}  // namespace gbc
