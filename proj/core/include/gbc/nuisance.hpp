#pragma once

#include <cstddef>
#include <vector>

#include "gbc/dataset.hpp"
#include "gbc/numerics.hpp"

namespace gbc {

// Fixed basis [X, X^2, sin(X), x_extra, 1] with x_extra = X1*X2 when d >= 2
// and X1^3 when d == 1. Output dimension 3d + 2.
class FeatureMap {
 public:
  explicit FeatureMap(std::size_t d);

  std::size_t input_dim() const { return d_; }
  std::size_t output_dim() const { return 3 * d_ + 2; }

  Vector operator()(const Vector& x) const;
  // Row-wise featurization of an n x d matrix.
  Matrix design(const Matrix& x) const;

 private:
  std::size_t d_;
};

inline Vector featurize(const Vector& x) {
  return FeatureMap(static_cast<std::size_t>(x.size()))(x);
}

struct NuisanceConfig {
  std::size_t folds = 5;
  double clip_eps = 0.01;
  double lambda_prop = 1.0;
  double lambda_out = 1e-3;

  void validate() const;
};

// Ridge outcome regression on the design rows: argmin |Phi w - y|^2 + lambda |w|^2.
// Throws EmptyArm when there are no rows.
Vector fit_outcome(const Matrix& design, const Vector& y, double lambda);

// Penalized logistic regression by IRLS with step halving. Maximizes
// sum log p(a | phi) - lambda/2 |w|^2. Throws DegenerateTreatment if a is constant.
Vector fit_propensity(const Matrix& design, const Eigen::VectorXi& a, double lambda_prop);

// Dataset-level conveniences matching the estimator contracts.
Vector fit_outcome(const Dataset& ds, int arm, double lambda);
Vector fit_propensity(const Dataset& ds, double lambda_prop);

struct NuisancePredictions {
  Vector propensity;
  Vector mu0;
  Vector mu1;
};

struct NuisanceFit {
  std::size_t dim = 0;
  Vector propensity_coef;
  Vector outcome_coef_treated;
  Vector outcome_coef_control;
  double clip_eps = 0.01;
  double lambda_prop = 1.0;
  double lambda_out = 1e-3;

  // Clipped to [clip_eps, 1 - clip_eps].
  double predict_propensity(const Vector& x) const;
  double predict_outcome(int arm, const Vector& x) const;
  NuisancePredictions predict(const Matrix& x) const;
  NuisancePredictions predict_design(const Matrix& design) const;
};

// Fits all three nuisances on the given dataset.
NuisanceFit fit_nuisances(const Dataset& ds, const NuisanceConfig& config);

struct CrossFit {
  FoldAssignment folds;
  std::vector<NuisanceFit> per_fold;  // per_fold[k] never saw fold k
};

// K-fold cross-fitting. Throws FoldArmCollapse if a training complement lacks
// an arm.
CrossFit cross_fit(const Dataset& ds, const NuisanceConfig& config, Rng& rng);
CrossFit cross_fit(const Dataset& ds, const FoldAssignment& folds, const NuisanceConfig& config);

// Predictions for every row from the fit that held it out, in row order.
NuisancePredictions held_out_predictions(const Dataset& ds, const CrossFit& cf);

}  // namespace gbc
