#include <gtest/gtest.h>

#include <cmath>

#include "gbc/bench.hpp"
#include "gbc/dgp.hpp"
#include "gbc/errors.hpp"
#include "gbc/pseudo.hpp"
#include "test_util.hpp"

using namespace gbc;
using gbc::testing::make_pseudo;

namespace {

NuisancePredictions as_predictions(const TrueNuisances& t) { return {t.propensity, t.mu0, t.mu1}; }

void expect_unbiased(const PseudoOutcomes& p, double truth, const char* label) {
  const double se = std::sqrt(sample_variance(p.values) / static_cast<double>(p.size()));
  EXPECT_NEAR(mean(p.values), truth, 3.0 * se) << label;
}

}  // namespace

TEST(PseudoOutcome, RegressionAdjustment) {
  EXPECT_EQ(pseudo_outcome(0, 7.0, {0.3, 0.5, 1.5}, Strategy::RA), 1.0);
  EXPECT_EQ(pseudo_outcome(1, -7.0, {0.3, 0.5, 1.5}, Strategy::RA), 1.0);
}

TEST(PseudoOutcome, InverseWeighting) {
  EXPECT_EQ(pseudo_outcome(1, 2.0, {0.5, 0.0, 0.0}, Strategy::IPW), 4.0);
  EXPECT_EQ(pseudo_outcome(0, 2.0, {0.75, 0.0, 0.0}, Strategy::IPW), -8.0);
}

TEST(PseudoOutcome, DoublyRobust) {
  EXPECT_EQ(pseudo_outcome(1, 2.0, {0.5, 0.0, 1.0}, Strategy::DR), 3.0);
  // Control arm: -(1/(1-e))(Y - m0) + m1 - m0 = -(2)(1) + 1 = -1.
  EXPECT_EQ(pseudo_outcome(0, 1.0, {0.5, 0.0, 1.0}, Strategy::DR), -1.0);
}

TEST(PseudoOutcome, FittedNuisancesAreClipped) {
  NuisanceFit fit;
  fit.dim = 1;
  fit.propensity_coef = Vector::Zero(5);
  fit.propensity_coef[4] = 50.0;  // e ~ 1 before clipping
  fit.outcome_coef_treated = Vector::Zero(5);
  fit.outcome_coef_control = Vector::Zero(5);
  fit.clip_eps = 0.01;
  Vector x = Vector::Zero(1);
  EXPECT_NEAR(pseudo_outcome(x, 0, 1.0, fit, Strategy::IPW), -1.0 / 0.01, 1e-9);
}

TEST(Strategy, ParseAndLabel) {
  EXPECT_EQ(parse_strategy("AIPW"), Strategy::DR);
  EXPECT_EQ(parse_strategy("DR"), Strategy::DR);
  EXPECT_EQ(parse_strategy("IPW"), Strategy::IPW);
  EXPECT_EQ(parse_strategy("RA"), Strategy::RA);
  EXPECT_THROW(parse_strategy("TMLE"), ConfigError);
  EXPECT_EQ(strategy_label(Strategy::DR, true), "AIPW");
  EXPECT_EQ(strategy_label(Strategy::DR, false), "DR");
}

TEST(AteLoss, HandValues) {
  EXPECT_EQ(ate_loss(make_pseudo({2, 2}), 2.0), 0.0);
  EXPECT_EQ(ate_loss(make_pseudo({0, 2}), 1.0), 0.5);
}

TEST(AteLoss, MinimizedAtMeanWithUnitCurvature) {
  Rng rng(1, 0);
  auto p = make_pseudo({});
  p.values = gbc::testing::random_vector(37, rng, 2.0, 1.0);
  const double m = mean(p.values);
  const double h = 1e-3;
  EXPECT_LT(ate_loss(p, m), ate_loss(p, m + h));
  EXPECT_LT(ate_loss(p, m), ate_loss(p, m - h));
  for (double t : {-3.0, 0.0, 2.5}) {
    const double second = (ate_loss(p, t + h) - 2 * ate_loss(p, t) + ate_loss(p, t - h)) / (h * h);
    EXPECT_NEAR(second, 1.0, 1e-6);
  }
}

TEST(CrossFittedPseudo, ConstantDataGivesConstantValues) {
  Dataset ds;
  ds.x = Matrix::Constant(20, 2, 1.0);
  ds.a.resize(20);
  for (int i = 0; i < 20; ++i) ds.a[i] = i % 2;
  ds.y = Vector::Constant(20, 3.0);
  // Each fold holds one treated and one control row per pair, so every
  // training complement is the same multiset of rows.
  FoldAssignment folds;
  folds.k = 5;
  for (std::size_t i = 0; i < 20; ++i) folds.fold_of.push_back((i / 2) % 5);
  CrossFit cf = cross_fit(ds, folds, NuisanceConfig{});
  for (Strategy s : {Strategy::RA, Strategy::IPW, Strategy::DR}) {
    auto p = cross_fitted_pseudo(ds, cf, s);
    EXPECT_TRUE(p.cross_fitted);
    // IPW and DR weights flip sign with the arm; values are constant per arm.
    for (Eigen::Index i = 0; i < 20; ++i) {
      const Eigen::Index ref = s == Strategy::RA ? 0 : i % 2;
      EXPECT_EQ(p.values[i], p.values[ref]) << strategy_label(s) << " row " << i;
    }
  }
}

TEST(CrossFittedPseudo, UsesHeldOutFit) {
  Rng rng(3, 0);
  Dataset ds = generate(default_spec(DgpId::D1), 200, rng);
  CrossFit cf = cross_fit(ds, NuisanceConfig{}, rng);
  auto p = cross_fitted_pseudo(ds, cf, Strategy::DR);
  for (Eigen::Index i = 0; i < 200; ++i) {
    const auto& fit = cf.per_fold[cf.folds.fold_of[static_cast<std::size_t>(i)]];
    EXPECT_NEAR(p.values[i], pseudo_outcome(ds.x.row(i).transpose(), ds.a[i], ds.y[i], fit, Strategy::DR),
                1e-12);
  }
}

TEST(CrossFittedPseudo, FoldRelabelingPermutesConsistently) {
  Rng rng(4, 0);
  Dataset ds = generate(default_spec(DgpId::D2), 100, rng);
  Rng fold_rng(4, 1);
  FoldAssignment folds = make_folds(100, 4, fold_rng);
  FoldAssignment swapped = folds;
  for (auto& f : swapped.fold_of) f = f == 0 ? 1 : f == 1 ? 0 : f;
  auto a = cross_fitted_pseudo(ds, cross_fit(ds, folds, NuisanceConfig{4}), Strategy::DR);
  auto b = cross_fitted_pseudo(ds, cross_fit(ds, swapped, NuisanceConfig{4}), Strategy::DR);
  EXPECT_EQ(a.values, b.values);
}

TEST(PseudoFromNuisances, OracleDrUnbiasedOnD2) {
  Rng rng(5, 0);
  const auto spec = default_spec(DgpId::D2);
  auto draw = simulate(spec, 20000, rng);
  auto p = pseudo_from_nuisances(draw.data, as_predictions(draw.nuisances), Strategy::DR);
  expect_unbiased(p, ground_truth(spec).ate, "D2 oracle DR");
}

TEST(PseudoFromNuisances, DoubleRobustness) {
  Rng rng(6, 0);
  const auto spec = default_spec(DgpId::D1);
  auto draw = simulate(spec, 50000, rng);
  const double truth = ground_truth(spec).ate;

  auto wrong_outcomes = as_predictions(draw.nuisances);
  wrong_outcomes.mu1.array() += 0.8 + 0.5 * draw.data.x.col(0).array();
  wrong_outcomes.mu0.array() -= 0.6;
  expect_unbiased(pseudo_from_nuisances(draw.data, wrong_outcomes, Strategy::DR), truth,
                  "true propensity, corrupted outcomes");

  auto wrong_propensity = as_predictions(draw.nuisances);
  wrong_propensity.propensity =
      perturb_nuisances(draw.nuisances, draw.data.x, 0.7).propensity;
  expect_unbiased(pseudo_from_nuisances(draw.data, wrong_propensity, Strategy::DR), truth,
                  "true outcomes, corrupted propensity");
}

TEST(PseudoFromNuisances, ConditionalUnbiasedness) {
  // Bin on X1 and compare the binwise mean of oracle DR values with the
  // binwise mean of cate(x).
  for (DgpId id : {DgpId::D1, DgpId::D2, DgpId::D3}) {
    Rng rng(7, static_cast<std::uint64_t>(id));
    const auto spec = default_spec(id);
    auto draw = simulate(spec, 50000, rng);
    auto p = pseudo_from_nuisances(draw.data, as_predictions(draw.nuisances), Strategy::DR);
    const auto truth = ground_truth(spec);
    const std::vector<double> edges{-1e9, -1.0, -0.3, 0.3, 1.0, 1e9};
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
      std::vector<double> vals, cates;
      for (Eigen::Index i = 0; i < p.values.size(); ++i) {
        const double x1 = draw.data.x(i, 0);
        if (x1 < edges[b] || x1 >= edges[b + 1]) continue;
        vals.push_back(p.values[i]);
        cates.push_back(truth.cate(draw.data.x.row(i).transpose()));
      }
      Eigen::Map<const Vector> v(vals.data(), static_cast<Eigen::Index>(vals.size()));
      Eigen::Map<const Vector> c(cates.data(), static_cast<Eigen::Index>(cates.size()));
      const Vector diff = v - c;
      const double se = std::sqrt(sample_variance(diff) / static_cast<double>(diff.size()));
      EXPECT_NEAR(diff.mean(), 0.0, 3.0 * se) << to_string(id) << " bin " << b;
    }
  }
}
