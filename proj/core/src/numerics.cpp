#include "gbc/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gbc/errors.hpp"

namespace gbc {

namespace {

constexpr double kInitialJitter = 1e-10;
constexpr double kMaxJitter = 1e-4;

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(stream),
                       static_cast<std::uint32_t>(stream >> 32), 0x9e3779b9u};
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  auto seq = make_seed_seq(seed, stream);
  return std::mt19937_64(seq);
}

// Acklam's rational approximation, refined below with Halley steps.
double quantile_initial(double p) {
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549732539343734e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(make_engine(seed, stream)) {}

double Rng::uniform() {
  // 53 random bits, shifted by half an ulp so 0 and 1 are unreachable.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_quantile(uniform()); }

std::size_t Rng::index(std::size_t n) {
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw DomainError("gamma shape must be positive");
  if (shape < 1.0) {
    // Boost to shape + 1 and rescale.
    const double u = uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::student_t(double dof) {
  const double z = normal();
  return z / std::sqrt(chi_square(dof) / dof);
}

CholeskyFactor cholesky_factor(const Matrix& a) {
  if (a.rows() != a.cols()) throw DomainError("cholesky: matrix is not square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError("cholesky: matrix is not symmetric");
  }
  CholeskyFactor f;
  f.llt.compute(a);
  if (f.llt.info() == Eigen::Success) return f;

  const Matrix identity = Matrix::Identity(a.rows(), a.cols());
  for (double jitter = kInitialJitter; jitter <= kMaxJitter * (1.0 + 1e-9); jitter *= 10.0) {
    f.llt.compute(a + jitter * identity);
    if (f.llt.info() == Eigen::Success) {
      f.jitter = jitter;
      return f;
    }
  }
  throw NotPositiveDefinite("cholesky: not positive definite after jitter 1e-4");
}

Matrix cholesky_solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DomainError("cholesky_solve: row mismatch");
  return cholesky_factor(a).solve(b);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: p must lie in (0, 1), got " + std::to_string(p));
  }
  if (p == 0.5) return 0.0;
  double x = quantile_initial(p);
  // Halley refinement against the erfc-based CDF; work in the tail closer to
  // zero to avoid cancellation.
  for (int iter = 0; iter < 2; ++iter) {
    const double e = (p < 0.5) ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double gaussian_tv(double mean1, double mean2, double shared_sd) {
  if (!(shared_sd > 0.0)) throw DomainError("gaussian_tv: shared_sd must be positive");
  // 2 Phi(|d| / (2 sd)) - 1 == erf(|d| / (2 sqrt(2) sd))
  return std::erf(std::abs(mean1 - mean2) / (2.0 * std::numbers::sqrt2 * shared_sd));
}

double mean(const Vector& v) {
  if (v.size() == 0) throw DomainError("mean of empty vector");
  return v.mean();
}

double sample_variance(const Vector& v) {
  if (v.size() < 2) throw DomainError("sample variance needs at least two values");
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw DomainError("optimizer: learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw DomainError("optimizer: beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw DomainError("optimizer: beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw DomainError("optimizer: epsilon must be > 0");
  if (epochs < 1) throw DomainError("optimizer: epochs must be >= 1");
  if (batch_size < 1) throw DomainError("optimizer: batch_size must be >= 1");
  if (!(decay_start >= 0.0 && decay_start <= 1.0)) {
    throw DomainError("optimizer: decay_start must lie in [0, 1]");
  }
  if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0)) {
    throw DomainError("optimizer: final_lr_fraction must lie in (0, 1]");
  }
}

double OptimizerConfig::step_size(int epoch) const {
  const double progress = static_cast<double>(epoch) / epochs;
  if (final_lr_fraction == 1.0 || progress <= decay_start || decay_start >= 1.0) {
    return learning_rate;
  }
  const double t = (progress - decay_start) / (1.0 - decay_start);
  return learning_rate * std::pow(final_lr_fraction, t);
}

Vector adam_minimize(const GradientFn& gradient, const Vector& init, const OptimizerConfig& config,
                     Rng& rng) {
  config.validate();
  Vector theta = init;
  Vector m = Vector::Zero(init.size());
  Vector v = Vector::Zero(init.size());
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const Vector g = gradient(theta, rng);
    if (g.size() != theta.size()) throw DomainError("adam: gradient has wrong dimension");
    if (!g.allFinite()) {
      throw NonFiniteGradient("adam: non-finite gradient at epoch " + std::to_string(epoch),
                              std::vector<double>(theta.data(), theta.data() + theta.size()));
    }
    m = config.beta1 * m + (1.0 - config.beta1) * g;
    v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
    beta1_pow *= config.beta1;
    beta2_pow *= config.beta2;
    const double lr = config.step_size(epoch);
    const Vector m_hat = m / (1.0 - beta1_pow);
    const Vector v_hat = v / (1.0 - beta2_pow);
    theta.array() -= lr * m_hat.array() / (v_hat.array().sqrt() + config.epsilon);
  }
  return theta;
}

}  // namespace gbc
