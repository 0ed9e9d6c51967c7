#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gbc/dataset.hpp"
#include "gbc/numerics.hpp"

namespace gbc {

enum class DgpId { D1 = 1, D2, D3, D4, D5, D6, D7, D8, D9 };

DgpId parse_dgp_id(std::string_view name);  // "D1".."D9", throws UnknownDgp
std::string to_string(DgpId id);
std::vector<DgpId> all_dgps();

// Back-door simulation design plus its coefficients. Scalars are stored as
// length-1 vectors.
struct DgpSpec {
  DgpId id = DgpId::D1;
  std::map<std::string, std::vector<double>> params;

  double scalar(const std::string& name) const;
  const std::vector<double>& vec(const std::string& name) const;

  // Throws InvalidSpec when a required parameter is missing, mis-sized or
  // out of range.
  void validate() const;
  // Covariate dimension of generated data.
  std::size_t dim() const;
};

DgpSpec default_spec(DgpId id);

// Population nuisances and effects evaluated at given covariates.
struct TrueNuisances {
  Vector propensity;  // e(x)
  Vector mu0;         // m_0(x)
  Vector mu1;         // m_1(x)
  Vector logit() const;
};

// One simulated sample with the quantities needed by oracle checks. The
// noise is drawn once and applied under both arms, so y0/y1 are the two
// potential outcomes of each unit.
struct DgpDraw {
  Dataset data;
  TrueNuisances nuisances;
  Vector y0;
  Vector y1;
};

DgpDraw simulate(const DgpSpec& spec, std::size_t n, Rng& rng);
Dataset generate(const DgpSpec& spec, std::size_t n, Rng& rng);

// Covariates only, from the design's marginal.
Matrix sample_covariates(const DgpSpec& spec, std::size_t n, Rng& rng);
TrueNuisances true_nuisances(const DgpSpec& spec, const Matrix& x);
GroundTruth ground_truth(const DgpSpec& spec);

}  // namespace gbc
