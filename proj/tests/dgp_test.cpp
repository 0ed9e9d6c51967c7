#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gbc/dgp.hpp"
#include "gbc/errors.hpp"

using namespace gbc;

namespace {

// 1 + log(11) / 2 to 18 digits.
constexpr double kD9Ate = 2.19894763639918527;

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(const Vector& v) {
  const double n = static_cast<double>(v.size());
  return {mean(v), std::sqrt(sample_variance(v) / n)};
}

}  // namespace

TEST(DgpId, ParseAndPrint) {
  for (DgpId id : all_dgps()) EXPECT_EQ(parse_dgp_id(to_string(id)), id);
  EXPECT_EQ(all_dgps().size(), 9u);
  EXPECT_THROW(parse_dgp_id("D10"), UnknownDgp);
  EXPECT_THROW(parse_dgp_id("D0"), UnknownDgp);
  EXPECT_THROW(parse_dgp_id(""), UnknownDgp);
}

TEST(DefaultSpec, D9IsFullySpecified) {
  auto s = default_spec(DgpId::D9);
  EXPECT_TRUE(s.params.empty());
  EXPECT_EQ(s.dim(), 5u);
  EXPECT_NEAR(ground_truth(s).ate, kD9Ate, 1e-15);
}

TEST(DefaultSpec, D8Coefficients) {
  auto s = default_spec(DgpId::D8);
  EXPECT_EQ(s.scalar("p"), 50.0);
  EXPECT_EQ(s.scalar("s"), 5.0);
  const std::vector<double> beta{0.2, 0.4, 0.6, 0.8, 1.0};
  const std::vector<double> gamma{1.0, 0.8, 0.6, 0.4, 0.2};
  for (std::size_t j = 0; j < 5; ++j) {
    EXPECT_NEAR(s.vec("beta")[j], beta[j], 1e-15);
    EXPECT_NEAR(s.vec("gamma")[j], gamma[j], 1e-15);
  }
  EXPECT_EQ(s.dim(), 50u);
}

TEST(DefaultSpec, D6Propensity) {
  auto s = default_spec(DgpId::D6);
  Matrix x(3, 2);
  x << 0.0, 5.0, -1.0, 0.0, 1.0, -2.0;
  auto eta = true_nuisances(s, x);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(eta.propensity[i], 1.0 / (1.0 + std::exp(-(3.5 + 3.0 * x(i, 0)))), 1e-15);
  }
}

TEST(GroundTruth, D3WithZeroSlopeIsIntercept) {
  auto s = default_spec(DgpId::D3);
  s.params["theta"] = {0.0, 0.0};
  EXPECT_EQ(ground_truth(s).ate, s.scalar("theta0"));
  Vector x(2);
  x << 0.3, -1.2;
  EXPECT_EQ(ground_truth(s).cate(x), 2.0);
}

TEST(GroundTruth, ClosedFormAtes) {
  EXPECT_EQ(ground_truth(default_spec(DgpId::D1)).ate, 2.0);
  EXPECT_EQ(ground_truth(default_spec(DgpId::D2)).ate, 2.0);
  EXPECT_NEAR(ground_truth(default_spec(DgpId::D3)).ate, 2.0 + 0.5 - 0.25, 1e-15);
  EXPECT_EQ(ground_truth(default_spec(DgpId::D4)).ate, 2.0);
}

TEST(GroundTruth, D9Cate) {
  Vector x = Vector::Zero(5);
  x[0] = 0.5;
  x[1] = 0.4;
  EXPECT_NEAR(ground_truth(default_spec(DgpId::D9)).cate(x), 2.0, 1e-15);
}

TEST(Generate, D1OracleEffect) {
  Rng rng(1, 0);
  auto draw = simulate(default_spec(DgpId::D1), 1000000, rng);
  Vector effect = draw.y1 - draw.y0;
  auto [m, se] = mean_se(effect);
  EXPECT_NEAR(m, 2.0, std::max(3.0 * se, 1e-9));
}

TEST(Generate, ObservedOutcomeFollowsArm) {
  Rng rng(4, 0);
  for (DgpId id : all_dgps()) {
    auto draw = simulate(default_spec(id), 200, rng);
    for (std::size_t i = 0; i < 200; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      ASSERT_EQ(draw.data.y[r], draw.data.a[r] == 1 ? draw.y1[r] : draw.y0[r]);
    }
    ASSERT_TRUE(draw.data.truth.has_value());
    EXPECT_NO_THROW(draw.data.validate());
    EXPECT_EQ(draw.data.dim(), default_spec(id).dim());
  }
}

TEST(Generate, Deterministic) {
  Rng a(9, 3), b(9, 3);
  auto da = generate(default_spec(DgpId::D7), 50, a);
  auto db = generate(default_spec(DgpId::D7), 50, b);
  EXPECT_EQ(da.x, db.x);
  EXPECT_EQ(da.y, db.y);
  EXPECT_EQ(da.a, db.a);
}

TEST(Generate, OracleEffectMatchesTruthEverywhere) {
  for (DgpId id : all_dgps()) {
    Rng rng(77, static_cast<std::uint64_t>(id));
    const auto spec = default_spec(id);
    auto draw = simulate(spec, 100000, rng);
    auto [m, se] = mean_se(draw.y1 - draw.y0);
    EXPECT_NEAR(m, ground_truth(spec).ate, std::max(4.0 * se, 1e-9)) << to_string(id);
  }
}

TEST(GroundTruth, CateAveragesToAte) {
  for (DgpId id : all_dgps()) {
    Rng rng(5, static_cast<std::uint64_t>(id));
    const auto spec = default_spec(id);
    const auto truth = ground_truth(spec);
    Matrix x = sample_covariates(spec, 1000000, rng);
    Vector c(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) c[i] = truth.cate(x.row(i).transpose());
    auto [m, se] = mean_se(c);
    EXPECT_NEAR(m, truth.ate, std::max(3.0 * se, 1e-9)) << to_string(id);
  }
}

TEST(Generate, D6LimitedOverlap) {
  const auto spec = default_spec(DgpId::D6);
  Rng small_rng(6, 0);
  auto small = simulate(spec, 10000, small_rng).nuisances.propensity;
  EXPECT_LT(small.minCoeff(), 0.999);

  // Population fraction above 0.97 is Phi(0.0080) = 0.5032; a large draw keeps
  // the Monte Carlo error well below the margin.
  Rng big_rng(6, 1);
  auto big = simulate(spec, 1000000, big_rng).nuisances.propensity;
  const double above = (big.array() > 0.97).cast<double>().mean();
  EXPECT_GT(above, 0.5);

  // Propensities below 0.0005 need X1 < -3.70, a 1.1e-4 tail event.
  const double tiny = (big.array() < 0.0005).cast<double>().mean();
  EXPECT_LT(tiny, 2e-4);
}

TEST(Generate, D7Heteroskedastic) {
  const auto spec = default_spec(DgpId::D7);
  Rng rng(7, 0);
  auto draw = simulate(spec, 10000, rng);
  const auto& ds = draw.data;
  Vector resid(ds.size());
  for (Eigen::Index i = 0; i < resid.size(); ++i) {
    resid[i] = ds.y[i] - (ds.a[i] == 1 ? draw.nuisances.mu1[i] : draw.nuisances.mu0[i]);
  }
  std::vector<double> x1(ds.x.col(0).data(), ds.x.col(0).data() + ds.x.rows());
  std::sort(x1.begin(), x1.end());
  const double q1 = x1[x1.size() / 4];
  const double q3 = x1[3 * x1.size() / 4];
  std::vector<double> lo, hi;
  for (Eigen::Index i = 0; i < resid.size(); ++i) {
    if (ds.x(i, 0) <= q1) lo.push_back(resid[i]);
    if (ds.x(i, 0) >= q3) hi.push_back(resid[i]);
  }
  auto var = [](const std::vector<double>& v) {
    return sample_variance(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  EXPECT_GE(var(hi), 2.0 * var(lo));
}

TEST(DgpSpec, Validation) {
  auto d7 = default_spec(DgpId::D7);
  d7.params["nu"] = {2.0};
  EXPECT_THROW(d7.validate(), InvalidSpec);

  auto d8 = default_spec(DgpId::D8);
  d8.params["s"] = {60.0};
  EXPECT_THROW(d8.validate(), InvalidSpec);

  auto d1 = default_spec(DgpId::D1);
  d1.params.erase("beta");
  EXPECT_THROW(d1.validate(), InvalidSpec);
  Rng rng(0, 0);
  EXPECT_THROW(generate(d1, 10, rng), InvalidSpec);

  for (DgpId id : all_dgps()) EXPECT_NO_THROW(default_spec(id).validate());
}
