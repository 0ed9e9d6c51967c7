#include "gbc/dgp.hpp"

#include <cmath>
#include <numbers>

#include "gbc/errors.hpp"

namespace gbc {

namespace {

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  }
  return out;
}

double dot_prefix(const Vector& x, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) s += x[static_cast<Eigen::Index>(j)] * w[j];
  return s;
}

// Linear-index helpers used by several designs.
double xb(const DgpSpec& s, const Vector& x, const char* name) { return dot_prefix(x, s.vec(name)); }

double treatment_effect(const DgpSpec& s, const Vector& x) {
  switch (s.id) {
    case DgpId::D1:
    case DgpId::D5:
    case DgpId::D6:
    case DgpId::D7:
    case DgpId::D8:
      return s.scalar("tau");
    case DgpId::D2:
    case DgpId::D3:
      return s.scalar("theta0") + xb(s, x, "theta");
    case DgpId::D4:
      return s.scalar("alpha0") + s.scalar("alpha1") * x[0] * x[1];
    case DgpId::D9:
      return 1.0 + x[0] / (x[1] + 0.1);
  }
  return 0.0;
}

double control_mean(const DgpSpec& s, const Vector& x) {
  switch (s.id) {
    case DgpId::D1:
    case DgpId::D2:
    case DgpId::D3:
    case DgpId::D6:
    case DgpId::D7:
    case DgpId::D8:
      return xb(s, x, "gamma");
    case DgpId::D4:
      return x[0] * x[0] + std::sin(x[1]);
    case DgpId::D5:
      return x[0] + 0.5 * x[0] * x[0] + 0.5 * std::sin(x[1]);
    case DgpId::D9:
      return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
             10.0 * x[3] + 5.0 * x[4];
  }
  return 0.0;
}

double propensity_logit(const DgpSpec& s, const Vector& x) {
  switch (s.id) {
    case DgpId::D1:
    case DgpId::D2:
    case DgpId::D3:
    case DgpId::D4:
    case DgpId::D7:
    case DgpId::D8:
      return xb(s, x, "beta");
    case DgpId::D5: {
      const auto& b = s.vec("b");
      return b[0] + b[1] * x[0] + b[2] * x[0] * x[0] + b[3] * std::sin(x[1]);
    }
    case DgpId::D6:
      return 3.5 + 3.0 * x[0];
    case DgpId::D9:
      return -0.5 + x[0] - 0.25 * x[1] + 0.25 * x[2];
  }
  return 0.0;
}

double noise(const DgpSpec& s, const Vector& x, Rng& rng) {
  if (s.id == DgpId::D7) return std::exp(0.5 * x[0]) * rng.student_t(s.scalar("nu"));
  return rng.normal();
}

void require(const DgpSpec& s, const std::string& name, std::size_t size) {
  const auto it = s.params.find(name);
  if (it == s.params.end()) {
    throw InvalidSpec(to_string(s.id) + ": missing parameter '" + name + "'");
  }
  if (it->second.size() != size) {
    throw InvalidSpec(to_string(s.id) + ": parameter '" + name + "' must have " +
                      std::to_string(size) + " entries");
  }
  for (double v : it->second) {
    if (!std::isfinite(v)) {
      throw InvalidSpec(to_string(s.id) + ": parameter '" + name + "' is not finite");
    }
  }
}

}  // namespace

DgpId parse_dgp_id(std::string_view name) {
  if (name.size() == 2 && (name[0] == 'D' || name[0] == 'd') && name[1] >= '1' && name[1] <= '9') {
    return static_cast<DgpId>(name[1] - '0');
  }
  throw UnknownDgp("unknown dataset id '" + std::string(name) + "' (expected D1..D9)");
}

std::string to_string(DgpId id) { return "D" + std::to_string(static_cast<int>(id)); }

std::vector<DgpId> all_dgps() {
  std::vector<DgpId> ids;
  for (int i = 1; i <= 9; ++i) ids.push_back(static_cast<DgpId>(i));
  return ids;
}

double DgpSpec::scalar(const std::string& name) const { return vec(name).at(0); }

const std::vector<double>& DgpSpec::vec(const std::string& name) const {
  const auto it = params.find(name);
  if (it == params.end()) {
    throw InvalidSpec(to_string(id) + ": missing parameter '" + name + "'");
  }
  return it->second;
}

std::size_t DgpSpec::dim() const {
  switch (id) {
    case DgpId::D8:
      return static_cast<std::size_t>(scalar("p"));
    case DgpId::D9:
      return 5;
    default:
      return 2;
  }
}

void DgpSpec::validate() const {
  switch (id) {
    case DgpId::D1:
      require(*this, "tau", 1), require(*this, "beta", 2), require(*this, "gamma", 2);
      break;
    case DgpId::D2:
      require(*this, "theta0", 1), require(*this, "theta", 2);
      require(*this, "beta", 2), require(*this, "gamma", 2);
      break;
    case DgpId::D3:
      require(*this, "theta0", 1), require(*this, "theta", 2), require(*this, "mu", 2);
      require(*this, "beta", 2), require(*this, "gamma", 2);
      break;
    case DgpId::D4:
      require(*this, "alpha0", 1), require(*this, "alpha1", 1), require(*this, "beta", 2);
      break;
    case DgpId::D5:
      require(*this, "tau", 1), require(*this, "b", 4);
      break;
    case DgpId::D6:
      require(*this, "tau", 1), require(*this, "gamma", 2);
      break;
    case DgpId::D7:
      require(*this, "tau", 1), require(*this, "beta", 2), require(*this, "gamma", 2);
      require(*this, "nu", 1);
      if (!(scalar("nu") > 2.0)) throw InvalidSpec("D7: nu must exceed 2");
      break;
    case DgpId::D8: {
      require(*this, "tau", 1), require(*this, "p", 1), require(*this, "s", 1);
      const double p = scalar("p");
      const double s = scalar("s");
      if (p != std::floor(p) || s != std::floor(s) || !(s >= 1.0 && s <= p)) {
        throw InvalidSpec("D8: require integers 1 <= s <= p");
      }
      require(*this, "beta", static_cast<std::size_t>(s));
      require(*this, "gamma", static_cast<std::size_t>(s));
      break;
    }
    case DgpId::D9:
      break;
  }
}

DgpSpec default_spec(DgpId id) {
  DgpSpec s;
  s.id = id;
  const std::vector<double> beta{0.5, -0.5};
  const std::vector<double> gamma{1.0, 1.0};
  switch (id) {
    case DgpId::D1:
      s.params = {{"tau", {2.0}}, {"beta", beta}, {"gamma", gamma}};
      break;
    case DgpId::D2:
      s.params = {{"theta0", {2.0}}, {"theta", {1.0, 0.5}}, {"beta", beta}, {"gamma", gamma}};
      break;
    case DgpId::D3:
      s.params = {{"theta0", {2.0}}, {"theta", {1.0, 0.5}}, {"mu", {0.5, -0.5}},
                  {"beta", beta},    {"gamma", gamma}};
      break;
    case DgpId::D4:
      s.params = {{"alpha0", {2.0}}, {"alpha1", {1.0}}, {"beta", beta}};
      break;
    case DgpId::D5:
      s.params = {{"tau", {2.0}}, {"b", {0.0, 1.0, 0.5, 0.5}}};
      break;
    case DgpId::D6:
      s.params = {{"tau", {2.0}}, {"gamma", gamma}};
      break;
    case DgpId::D7:
      s.params = {{"tau", {2.0}}, {"beta", beta}, {"gamma", gamma}, {"nu", {3.0}}};
      break;
    case DgpId::D8:
      s.params = {{"tau", {2.0}},
                  {"p", {50.0}},
                  {"s", {5.0}},
                  {"beta", linspace(0.2, 1.0, 5)},
                  {"gamma", linspace(1.0, 0.2, 5)}};
      break;
    case DgpId::D9:
      break;
  }
  return s;
}

Vector TrueNuisances::logit() const {
  return (propensity.array() / (1.0 - propensity.array())).log().matrix();
}

Matrix sample_covariates(const DgpSpec& spec, std::size_t n, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  Matrix x(static_cast<Eigen::Index>(n), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (spec.id == DgpId::D9) {
        x(i, j) = rng.uniform();
      } else if (spec.id == DgpId::D3) {
        x(i, j) = spec.vec("mu")[static_cast<std::size_t>(j)] + rng.normal();
      } else {
        x(i, j) = rng.normal();
      }
    }
  }
  return x;
}

TrueNuisances true_nuisances(const DgpSpec& spec, const Matrix& x) {
  TrueNuisances t;
  const auto n = x.rows();
  t.propensity.resize(n);
  t.mu0.resize(n);
  t.mu1.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector xi = x.row(i).transpose();
    t.propensity[i] = sigmoid(propensity_logit(spec, xi));
    t.mu0[i] = control_mean(spec, xi);
    t.mu1[i] = t.mu0[i] + treatment_effect(spec, xi);
  }
  return t;
}

GroundTruth ground_truth(const DgpSpec& spec) {
  GroundTruth truth;
  switch (spec.id) {
    case DgpId::D2:
      truth.ate = spec.scalar("theta0");
      break;
    case DgpId::D3: {
      const auto& theta = spec.vec("theta");
      const auto& mu = spec.vec("mu");
      truth.ate = spec.scalar("theta0") + theta[0] * mu[0] + theta[1] * mu[1];
      break;
    }
    case DgpId::D4:
      truth.ate = spec.scalar("alpha0");
      break;
    case DgpId::D9:
      truth.ate = 1.0 + 0.5 * std::log(11.0);
      break;
    default:
      truth.ate = spec.scalar("tau");
      break;
  }
  truth.cate = [spec](const Vector& x) { return treatment_effect(spec, x); };
  return truth;
}

DgpDraw simulate(const DgpSpec& spec, std::size_t n, Rng& rng) {
  spec.validate();
  if (n < 1) throw InvalidSpec("sample size must be >= 1");
  DgpDraw draw;
  draw.data.x = sample_covariates(spec, n, rng);
  draw.nuisances = true_nuisances(spec, draw.data.x);
  const auto rows = static_cast<Eigen::Index>(n);
  draw.data.a.resize(rows);
  draw.data.y.resize(rows);
  draw.y0.resize(rows);
  draw.y1.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const int a = rng.bernoulli(draw.nuisances.propensity[i]) ? 1 : 0;
    const double eps = noise(spec, draw.data.x.row(i).transpose(), rng);
    draw.y0[i] = draw.nuisances.mu0[i] + eps;
    draw.y1[i] = draw.nuisances.mu1[i] + eps;
    draw.data.a[i] = a;
    draw.data.y[i] = a == 1 ? draw.y1[i] : draw.y0[i];
  }
  draw.data.truth = ground_truth(spec);
  return draw;
}

Dataset generate(const DgpSpec& spec, std::size_t n, Rng& rng) {
  return simulate(spec, n, rng).data;
}

}  // namespace gbc
