#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include <Eigen/Core>
#include <Eigen/Cholesky>

namespace gbc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Deterministic generator keyed by (seed, stream). Each repetition, fold and
// purpose gets its own stream so results never depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform();
  // Standard normal via inverse CDF of uniform().
  double normal();
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n);
  // Gamma(shape, 1), Marsaglia-Tsang.
  double gamma(double shape);
  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }
  double student_t(double dof);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

// Stream identifier for (repetition, purpose) pairs.
constexpr std::uint64_t stream_id(std::uint64_t rep, std::uint64_t purpose) {
  return rep * 64 + purpose;
}

struct CholeskyFactor {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;  // diagonal jitter that was needed for success

  Matrix solve(const Matrix& b) const { return llt.solve(b); }
  Matrix lower() const { return llt.matrixL(); }
};

// Cholesky factorization with jitter escalation: 0, then 1e-10 growing x10 up
// to 1e-4. Throws NotPositiveDefinite once the ceiling fails.
CholeskyFactor cholesky_factor(const Matrix& a);

// Solves A X = B for symmetric positive-definite A.
Matrix cholesky_solve(const Matrix& a, const Matrix& b);

double normal_cdf(double z);
double normal_pdf(double z);
// Inverse of normal_cdf; DomainError outside (0, 1).
double normal_quantile(double p);

// Total-variation distance between N(mean1, sd^2) and N(mean2, sd^2).
double gaussian_tv(double mean1, double mean2, double shared_sd);

double mean(const Vector& v);
// Unbiased (n - 1) sample variance.
double sample_variance(const Vector& v);

struct OptimizerConfig {
  double learning_rate = 0.03;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 2000;
  int batch_size = 200;
  // Step size is held at learning_rate for the first decay_start fraction of
  // epochs, then decays geometrically to learning_rate * final_lr_fraction.
  // final_lr_fraction = 1 disables the decay.
  double decay_start = 0.5;
  double final_lr_fraction = 1e-3;

  void validate() const;
  double step_size(int epoch) const;  // epoch is 1-based
};

// Returns a gradient of the objective at the given parameters. May draw from
// the generator (stochastic gradients).
using GradientFn = std::function<Vector(const Vector&, Rng&)>;

// Bias-corrected Adam for config.epochs updates. Throws NonFiniteGradient
// carrying the last finite iterate when the objective returns NaN/inf.
Vector adam_minimize(const GradientFn& gradient, const Vector& init, const OptimizerConfig& config,
                     Rng& rng);

}  // namespace gbc
