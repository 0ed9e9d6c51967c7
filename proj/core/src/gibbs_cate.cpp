#include "gbc/gibbs_cate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "gbc/errors.hpp"

namespace gbc {

namespace {

constexpr double kVarianceFloor = 1e-14;

// Quantities shared by the bound and its maximizer, in whitened coordinates
// u = L v with K_mm = L L^T.
struct WhitenedProblem {
  Matrix chol_lower;  // L
  Matrix proj;        // A = L^-1 K_mn
  Matrix precision;   // I + omega A A^T
  Vector rhs;         // omega A y
};

WhitenedProblem whiten(const Matrix& x, const Vector& y, const KernelParams& params, double omega,
                       const Matrix& inducing_x) {
  WhitenedProblem w;
  const auto m = inducing_x.rows();
  w.chol_lower = cholesky_factor(kernel_matrix(params, inducing_x)).lower();
  w.proj = w.chol_lower.triangularView<Eigen::Lower>().solve(kernel_matrix(params, inducing_x, x));
  w.precision = Matrix::Identity(m, m);
  w.precision.selfadjointView<Eigen::Lower>().rankUpdate(w.proj, omega);
  w.precision = w.precision.selfadjointView<Eigen::Lower>();
  w.rhs = omega * (w.proj * y);
  return w;
}

GpPosterior unwhiten(const WhitenedProblem& w, const KernelParams& params, const Matrix& inducing_x,
                     const Vector& mean_w, const Matrix& cov_w, double const_mean, double omega) {
  GpPosterior gp;
  gp.kernel = params;
  gp.inducing_x = inducing_x;
  gp.q_mean = w.chol_lower * mean_w;
  gp.q_cov = w.chol_lower * cov_w * w.chol_lower.transpose();
  gp.q_cov = 0.5 * (gp.q_cov + gp.q_cov.transpose());
  gp.const_mean = const_mean;
  gp.omega = omega;
  return gp;
}

void check_inputs(const Matrix& x, const PseudoOutcomes& pseudo, double omega) {
  if (x.rows() != static_cast<Eigen::Index>(pseudo.size())) {
    throw DomainError("GP: covariates and pseudo-outcomes differ in length");
  }
  if (x.rows() < 1) throw DomainError("GP: no training data");
  if (!(omega > 0.0)) throw DomainError("omega must be positive");
}

}  // namespace

KernelFamily parse_kernel_family(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "matern52" || lower == "matern") return KernelFamily::Matern52;
  if (lower == "rbf") return KernelFamily::RBF;
  throw ConfigError("unknown kernel '" + std::string(name) + "' (expected matern52 or rbf)");
}

std::string to_string(KernelFamily family) {
  return family == KernelFamily::Matern52 ? "matern52" : "rbf";
}

void KernelParams::validate() const {
  if (!(lengthscale > 0.0)) throw DomainError("kernel lengthscale must be positive");
  if (!(variance > 0.0)) throw DomainError("kernel variance must be positive");
  if (!(jitter >= 0.0)) throw DomainError("kernel jitter must be non-negative");
}

double KernelParams::at_distance(double r) const {
  if (family == KernelFamily::RBF) {
    return variance * std::exp(-0.5 * r * r / (lengthscale * lengthscale));
  }
  const double s = std::sqrt(5.0) * r / lengthscale;
  return variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

Matrix kernel_matrix(const KernelParams& params, const Matrix& xa, const Matrix& xb) {
  if (xa.cols() != xb.cols()) throw DomainError("kernel_matrix: column dimension mismatch");
  Matrix k(xa.rows(), xb.rows());
  for (Eigen::Index j = 0; j < xb.rows(); ++j) {
    for (Eigen::Index i = 0; i < xa.rows(); ++i) {
      k(i, j) = params.at_distance((xa.row(i) - xb.row(j)).norm());
    }
  }
  return k;
}

Matrix kernel_matrix(const KernelParams& params, const Matrix& x) {
  Matrix k(x.rows(), x.rows());
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    k(j, j) = params.variance + params.jitter;
    for (Eigen::Index i = j + 1; i < x.rows(); ++i) {
      k(i, j) = k(j, i) = params.at_distance((x.row(i) - x.row(j)).norm());
    }
  }
  return k;
}

Interval GpPrediction::interval(std::size_t i, double alpha) const {
  const auto idx = static_cast<Eigen::Index>(i);
  return credible_interval(GaussianPosterior{mean[idx], variance[idx]}, alpha);
}

ExactGpPosterior::ExactGpPosterior(const Matrix& x, const PseudoOutcomes& pseudo,
                                   const KernelParams& params, double omega)
    : params_(params), x_(x), omega_(omega) {
  params.validate();
  check_inputs(x, pseudo, omega);
  if (pseudo.size() > kExactGpMaxRows) {
    throw DomainError("exact GP is limited to " + std::to_string(kExactGpMaxRows) + " rows");
  }
  const_mean_ = pseudo.values.mean();
  Matrix k = kernel_matrix(params, x);
  k.diagonal().array() += 1.0 / omega;
  factor_ = cholesky_factor(k);
  weights_ = factor_.solve(pseudo.values.array() - const_mean_);
}

GpPrediction ExactGpPosterior::predict(const Matrix& x_query) const {
  const Matrix k_cross = kernel_matrix(params_, x_, x_query);  // n x q
  GpPrediction out;
  out.mean = (k_cross.transpose() * weights_).array() + const_mean_;
  const Matrix v = factor_.llt.matrixL().solve(k_cross);
  out.variance = (params_.marginal_variance() - v.colwise().squaredNorm().array())
                     .max(kVarianceFloor)
                     .matrix()
                     .transpose();
  return out;
}

ExactGpPosterior exact_gp_posterior(const Matrix& x, const PseudoOutcomes& pseudo,
                                    const KernelParams& params, double omega) {
  return ExactGpPosterior(x, pseudo, params, omega);
}

Matrix select_inducing(const Matrix& x, std::size_t m, Rng& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (m < 1 || m > n) throw DomainError("inducing count must satisfy 1 <= M <= n");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
  Matrix z(static_cast<Eigen::Index>(m), x.cols());
  for (std::size_t i = 0; i < m; ++i) {
    z.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(perm[i]));
  }
  return z;
}

OptimizerConfig default_svgp_config() { return OptimizerConfig{}; }

GpPosterior svgp_fit(const Matrix& x, const PseudoOutcomes& pseudo, const KernelParams& params,
                     double omega, std::size_t m_inducing, const OptimizerConfig& config, Rng& rng) {
  return svgp_fit(x, pseudo, params, omega, select_inducing(x, m_inducing, rng), config, rng);
}

GpPosterior svgp_fit(const Matrix& x, const PseudoOutcomes& pseudo, const KernelParams& params,
                     double omega, const Matrix& inducing_x, const OptimizerConfig& config, Rng& rng) {
  params.validate();
  config.validate();
  check_inputs(x, pseudo, omega);
  if (inducing_x.cols() != x.cols() || inducing_x.rows() < 1) {
    throw DomainError("inducing locations have the wrong shape");
  }
  const double const_mean = pseudo.values.mean();
  const Vector centered = pseudo.values.array() - const_mean;
  const WhitenedProblem w = whiten(x, centered, params, omega, inducing_x);
  const auto m = inducing_x.rows();

  // Parameter layout: [mean (m) | strict lower factor, row-major (m(m-1)/2) |
  // log of factor diagonal (m)].
  const Eigen::Index n_lower = m * (m - 1) / 2;
  auto unpack_factor = [m](const Vector& p) {
    Matrix r = Matrix::Zero(m, m);
    Eigen::Index k = m;
    for (Eigen::Index i = 1; i < m; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) r(i, j) = p[k++];
    }
    for (Eigen::Index i = 0; i < m; ++i) r(i, i) = std::exp(p[k++]);
    return r;
  };

  // Gradient of the negative bound. With S = R R^T:
  //   d/dmean = P mean - b,  d/dR = P R - R^-T (lower part: diag 1/R_ii).
  auto gradient = [&](const Vector& p, Rng&) {
    const Vector mean_w = p.head(m);
    const Matrix r = unpack_factor(p);
    const Matrix pr = w.precision * r;
    Vector g(p.size());
    g.head(m) = w.precision * mean_w - w.rhs;
    Eigen::Index k = m;
    for (Eigen::Index i = 1; i < m; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) g[k++] = pr(i, j);
    }
    for (Eigen::Index i = 0; i < m; ++i) g[k++] = pr(i, i) * r(i, i) - 1.0;
    return g;
  };

  Vector init = Vector::Zero(m + n_lower + m);  // q(v) = N(0, I): the prior
  const Vector fitted = adam_minimize(gradient, init, config, rng);
  const Matrix r = unpack_factor(fitted);
  return unwhiten(w, params, inducing_x, fitted.head(m), r * r.transpose(), const_mean, omega);
}

GpPosterior svgp_optimal(const Matrix& x, const Vector& y, const KernelParams& params, double omega,
                         const Matrix& inducing_x) {
  params.validate();
  if (x.rows() != y.size() || x.rows() < 1) throw DomainError("GP: bad training data");
  if (!(omega > 0.0)) throw DomainError("omega must be positive");
  const double const_mean = y.mean();
  const Vector centered = y.array() - const_mean;
  const WhitenedProblem w = whiten(x, centered, params, omega, inducing_x);
  const Eigen::LLT<Matrix> llt(w.precision);
  const Matrix cov_w = llt.solve(Matrix::Identity(w.precision.rows(), w.precision.cols()));
  return unwhiten(w, params, inducing_x, llt.solve(w.rhs), cov_w, const_mean, omega);
}

GpPrediction predict(const GpPosterior& gp, const Matrix& x_query) {
  if (x_query.cols() != gp.inducing_x.cols()) throw DomainError("predict: dimension mismatch");
  const Matrix lower = cholesky_factor(kernel_matrix(gp.kernel, gp.inducing_x)).lower();
  const auto tri = lower.triangularView<Eigen::Lower>();
  const Matrix b = tri.solve(kernel_matrix(gp.kernel, gp.inducing_x, x_query));  // m x q
  const Vector mean_w = tri.solve(gp.q_mean);
  Matrix cov_w = tri.solve(gp.q_cov);
  cov_w = tri.solve(cov_w.transpose()).transpose();  // L^-1 S L^-T

  GpPrediction out;
  out.mean = (b.transpose() * mean_w).array() + gp.const_mean;
  const Matrix sb = cov_w * b;
  out.variance.resize(x_query.rows());
  for (Eigen::Index j = 0; j < x_query.rows(); ++j) {
    const double v = gp.kernel.marginal_variance() - b.col(j).squaredNorm() + b.col(j).dot(sb.col(j));
    out.variance[j] = std::max(v, kVarianceFloor);
  }
  return out;
}

}  // namespace gbc
