#pragma once

#include <string>
#include <string_view>

#include "gbc/dataset.hpp"
#include "gbc/nuisance.hpp"

namespace gbc {

// Pseudo-outcome construction. DR is the AIPW pseudo-outcome when the target
// is the ATE.
enum class Strategy { RA, IPW, DR };

Strategy parse_strategy(std::string_view name);  // RA, IPW, DR or AIPW
// Reporting label: "AIPW" for the scalar ATE target, "DR" for CATE.
std::string strategy_label(Strategy s, bool ate_target = true);

struct PseudoOutcomes {
  Vector values;
  Strategy strategy = Strategy::DR;
  bool cross_fitted = false;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

struct NuisanceValues {
  double propensity;
  double mu0;
  double mu1;
};

// Single-observation pseudo-outcome given nuisance values at its covariates.
double pseudo_outcome(int a, double y, const NuisanceValues& eta, Strategy s);

// Same, evaluating the fitted (clipped) nuisances at x.
double pseudo_outcome(const Vector& x, int a, double y, const NuisanceFit& fit, Strategy s);

PseudoOutcomes pseudo_from_nuisances(const Dataset& ds, const NuisancePredictions& eta, Strategy s);

// values[i] uses per_fold[fold_of[i]], the fit that never saw row i.
PseudoOutcomes cross_fitted_pseudo(const Dataset& ds, const CrossFit& cf, Strategy s);

// (1 / 2n) sum (values_i - theta)^2
double ate_loss(const PseudoOutcomes& pseudo, double theta);

}  // namespace gbc
