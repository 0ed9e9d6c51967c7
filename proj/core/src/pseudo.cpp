#include "gbc/pseudo.hpp"

#include <cctype>
#include <cmath>

#include "gbc/errors.hpp"

namespace gbc {

Strategy parse_strategy(std::string_view name) {
  std::string upper(name);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "RA") return Strategy::RA;
  if (upper == "IPW") return Strategy::IPW;
  if (upper == "DR" || upper == "AIPW") return Strategy::DR;
  throw ConfigError("unknown strategy '" + std::string(name) + "' (expected RA, IPW, AIPW or DR)");
}

std::string strategy_label(Strategy s, bool ate_target) {
  switch (s) {
    case Strategy::RA:
      return "RA";
    case Strategy::IPW:
      return "IPW";
    case Strategy::DR:
      return ate_target ? "AIPW" : "DR";
  }
  return "?";
}

double pseudo_outcome(int a, double y, const NuisanceValues& eta, Strategy s) {
  const double e = eta.propensity;
  switch (s) {
    case Strategy::RA:
      return eta.mu1 - eta.mu0;
    case Strategy::IPW:
      return a * y / e - (1 - a) * y / (1.0 - e);
    case Strategy::DR: {
      const double m_a = a == 1 ? eta.mu1 : eta.mu0;
      return (a / e - (1 - a) / (1.0 - e)) * (y - m_a) + eta.mu1 - eta.mu0;
    }
  }
  return 0.0;
}

double pseudo_outcome(const Vector& x, int a, double y, const NuisanceFit& fit, Strategy s) {
  const NuisanceValues eta{fit.predict_propensity(x), fit.predict_outcome(0, x),
                           fit.predict_outcome(1, x)};
  return pseudo_outcome(a, y, eta, s);
}

PseudoOutcomes pseudo_from_nuisances(const Dataset& ds, const NuisancePredictions& eta, Strategy s) {
  const auto n = static_cast<Eigen::Index>(ds.size());
  if (eta.propensity.size() != n || eta.mu0.size() != n || eta.mu1.size() != n) {
    throw DomainError("nuisance predictions do not match dataset size");
  }
  PseudoOutcomes out;
  out.strategy = s;
  out.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] =
        pseudo_outcome(ds.a[i], ds.y[i], NuisanceValues{eta.propensity[i], eta.mu0[i], eta.mu1[i]}, s);
  }
  if (!out.values.allFinite()) throw NumericError("pseudo-outcomes are not finite");
  return out;
}

PseudoOutcomes cross_fitted_pseudo(const Dataset& ds, const CrossFit& cf, Strategy s) {
  auto out = pseudo_from_nuisances(ds, held_out_predictions(ds, cf), s);
  out.cross_fitted = true;
  return out;
}

double ate_loss(const PseudoOutcomes& pseudo, double theta) {
  if (pseudo.values.size() == 0) throw DomainError("ate_loss: empty pseudo-outcomes");
  return 0.5 * (pseudo.values.array() - theta).square().mean();
}

}  // namespace gbc
