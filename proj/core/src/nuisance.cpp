#include "gbc/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gbc/errors.hpp"

namespace gbc {

namespace {

constexpr int kMaxNewtonIterations = 100;
constexpr double kGradientTolerance = 1e-6;

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

// log(1 + exp(u)) without overflow.
double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double penalized_loglik(const Matrix& design, const Eigen::VectorXi& a, const Vector& w,
                        double lambda) {
  const Vector eta = design * w;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += a[i] * eta[i] - softplus(eta[i]);
  }
  return ll - 0.5 * lambda * w.squaredNorm();
}

NuisanceFit fit_on_rows(const Matrix& design, const Dataset& ds, const std::vector<std::size_t>& rows,
                        const NuisanceConfig& config) {
  std::vector<std::size_t> treated;
  std::vector<std::size_t> control;
  for (std::size_t r : rows) {
    (ds.a[static_cast<Eigen::Index>(r)] == 1 ? treated : control).push_back(r);
  }
  if (treated.empty() || control.empty()) {
    throw DegenerateTreatment("propensity fit requires both treatment arms");
  }

  Eigen::VectorXi a(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a[static_cast<Eigen::Index>(i)] = ds.a[static_cast<Eigen::Index>(rows[i])];
  }
  Vector y1(static_cast<Eigen::Index>(treated.size()));
  for (std::size_t i = 0; i < treated.size(); ++i) {
    y1[static_cast<Eigen::Index>(i)] = ds.y[static_cast<Eigen::Index>(treated[i])];
  }
  Vector y0(static_cast<Eigen::Index>(control.size()));
  for (std::size_t i = 0; i < control.size(); ++i) {
    y0[static_cast<Eigen::Index>(i)] = ds.y[static_cast<Eigen::Index>(control[i])];
  }

  NuisanceFit fit;
  fit.dim = ds.dim();
  fit.clip_eps = config.clip_eps;
  fit.lambda_prop = config.lambda_prop;
  fit.lambda_out = config.lambda_out;
  fit.propensity_coef = fit_propensity(select_rows(design, rows), a, config.lambda_prop);
  fit.outcome_coef_treated = fit_outcome(select_rows(design, treated), y1, config.lambda_out);
  fit.outcome_coef_control = fit_outcome(select_rows(design, control), y0, config.lambda_out);
  return fit;
}

}  // namespace

FeatureMap::FeatureMap(std::size_t d) : d_(d) {
  if (d < 1) throw DomainError("feature map needs at least one covariate");
}

Vector FeatureMap::operator()(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != d_) throw DomainError("feature map: dimension mismatch");
  const auto d = static_cast<Eigen::Index>(d_);
  Vector phi(static_cast<Eigen::Index>(output_dim()));
  phi.segment(0, d) = x;
  phi.segment(d, d) = x.array().square().matrix();
  phi.segment(2 * d, d) = x.array().sin().matrix();
  phi[3 * d] = d_ >= 2 ? x[0] * x[1] : x[0] * x[0] * x[0];
  phi[3 * d + 1] = 1.0;
  return phi;
}

Matrix FeatureMap::design(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != d_) throw DomainError("feature map: dimension mismatch");
  const auto d = static_cast<Eigen::Index>(d_);
  Matrix phi(x.rows(), static_cast<Eigen::Index>(output_dim()));
  phi.leftCols(d) = x;
  phi.middleCols(d, d) = x.array().square().matrix();
  phi.middleCols(2 * d, d) = x.array().sin().matrix();
  if (d_ >= 2) {
    phi.col(3 * d) = x.col(0).cwiseProduct(x.col(1));
  } else {
    phi.col(3 * d) = x.col(0).array().cube().matrix();
  }
  phi.col(3 * d + 1).setOnes();
  return phi;
}

void NuisanceConfig::validate() const {
  if (folds < 2) throw InvalidFoldCount("cross-fitting needs at least 2 folds");
  if (!(clip_eps > 0.0 && clip_eps < 0.5)) throw DomainError("clip_eps must lie in (0, 0.5)");
  if (!(lambda_prop >= 0.0)) throw DomainError("lambda_prop must be >= 0");
  if (!(lambda_out >= 0.0)) throw DomainError("lambda_out must be >= 0");
}

Vector fit_outcome(const Matrix& design, const Vector& y, double lambda) {
  if (design.rows() == 0) throw EmptyArm("outcome regression: arm has no observations");
  if (!(lambda >= 0.0)) throw DomainError("ridge penalty must be >= 0");
  Matrix gram = design.transpose() * design;
  gram.diagonal().array() += lambda;
  return cholesky_solve(gram, design.transpose() * y);
}

Vector fit_propensity(const Matrix& design, const Eigen::VectorXi& a, double lambda_prop) {
  if (!(lambda_prop >= 0.0)) throw DomainError("propensity penalty must be >= 0");
  const auto treated = a.sum();
  if (treated == 0 || treated == a.size()) {
    throw DegenerateTreatment("propensity fit: treatment is constant");
  }
  const auto p = design.cols();
  Vector w = Vector::Zero(p);
  double current = penalized_loglik(design, a, w, lambda_prop);
  for (int iter = 0; iter < kMaxNewtonIterations; ++iter) {
    const Vector eta = design * w;
    Vector prob(eta.size());
    Vector weight(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob[i] = sigmoid(eta[i]);
      weight[i] = std::max(prob[i] * (1.0 - prob[i]), 1e-12);
    }
    const Vector grad = design.transpose() * (a.cast<double>() - prob) - lambda_prop * w;
    if (grad.norm() <= kGradientTolerance) break;

    Matrix hessian = design.transpose() * weight.asDiagonal() * design;
    hessian.diagonal().array() += lambda_prop;
    const Vector step = cholesky_solve(hessian, grad);

    double scale = 1.0;
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving) {
      const Vector candidate = w + scale * step;
      const double value = penalized_loglik(design, a, candidate, lambda_prop);
      if (value >= current) {
        w = candidate;
        improved = value > current;
        current = value;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;
  }
  return w;
}

Vector fit_outcome(const Dataset& ds, int arm, double lambda) {
  std::vector<std::size_t> rows;
  for (Eigen::Index i = 0; i < ds.a.size(); ++i) {
    if (ds.a[i] == arm) rows.push_back(static_cast<std::size_t>(i));
  }
  if (rows.empty()) throw EmptyArm("arm " + std::to_string(arm) + " has no observations");
  const FeatureMap map(ds.dim());
  return fit_outcome(map.design(select_rows(ds.x, rows)), ds.subset(rows).y, lambda);
}

Vector fit_propensity(const Dataset& ds, double lambda_prop) {
  return fit_propensity(FeatureMap(ds.dim()).design(ds.x), ds.a, lambda_prop);
}

double NuisanceFit::predict_propensity(const Vector& x) const {
  const double eta = FeatureMap(dim)(x).dot(propensity_coef);
  return std::clamp(sigmoid(eta), clip_eps, 1.0 - clip_eps);
}

double NuisanceFit::predict_outcome(int arm, const Vector& x) const {
  return FeatureMap(dim)(x).dot(arm == 1 ? outcome_coef_treated : outcome_coef_control);
}

NuisancePredictions NuisanceFit::predict_design(const Matrix& design) const {
  NuisancePredictions out;
  const Vector eta = design * propensity_coef;
  out.propensity = eta.unaryExpr([this](double u) {
    return std::clamp(sigmoid(u), clip_eps, 1.0 - clip_eps);
  });
  out.mu1 = design * outcome_coef_treated;
  out.mu0 = design * outcome_coef_control;
  return out;
}

NuisancePredictions NuisanceFit::predict(const Matrix& x) const {
  return predict_design(FeatureMap(dim).design(x));
}

NuisanceFit fit_nuisances(const Dataset& ds, const NuisanceConfig& config) {
  config.validate();
  std::vector<std::size_t> rows(ds.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return fit_on_rows(FeatureMap(ds.dim()).design(ds.x), ds, rows, config);
}

CrossFit cross_fit(const Dataset& ds, const FoldAssignment& folds, const NuisanceConfig& config) {
  config.validate();
  if (folds.fold_of.size() != ds.size()) throw DomainError("fold assignment does not match dataset");
  const Matrix design = FeatureMap(ds.dim()).design(ds.x);
  CrossFit cf;
  cf.folds = folds;
  cf.per_fold.reserve(folds.k);
  for (std::size_t k = 0; k < folds.k; ++k) {
    const auto train = folds.complement(k);
    std::size_t treated = 0;
    for (std::size_t r : train) treated += static_cast<std::size_t>(ds.a[static_cast<Eigen::Index>(r)]);
    if (treated == 0 || treated == train.size()) {
      throw FoldArmCollapse(k, "training complement of fold " + std::to_string(k) +
                                   " lacks a treatment arm");
    }
    cf.per_fold.push_back(fit_on_rows(design, ds, train, config));
  }
  return cf;
}

CrossFit cross_fit(const Dataset& ds, const NuisanceConfig& config, Rng& rng) {
  config.validate();
  return cross_fit(ds, make_folds(ds.size(), config.folds, rng), config);
}

NuisancePredictions held_out_predictions(const Dataset& ds, const CrossFit& cf) {
  const Matrix design = FeatureMap(ds.dim()).design(ds.x);
  const auto n = static_cast<Eigen::Index>(ds.size());
  NuisancePredictions out{Vector(n), Vector(n), Vector(n)};
  for (std::size_t k = 0; k < cf.folds.k; ++k) {
    const auto rows = cf.folds.members(k);
    if (rows.empty()) continue;
    const auto pred = cf.per_fold[k].predict_design(select_rows(design, rows));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(rows[i]);
      const auto j = static_cast<Eigen::Index>(i);
      out.propensity[r] = pred.propensity[j];
      out.mu0[r] = pred.mu0[j];
      out.mu1[r] = pred.mu1[j];
    }
  }
  return out;
}

}  // namespace gbc
