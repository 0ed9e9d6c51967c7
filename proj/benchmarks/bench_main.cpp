#include <benchmark/benchmark.h>

#include "gbc/calibrate.hpp"
#include "gbc/dgp.hpp"
#include "gbc/gibbs_ate.hpp"
#include "gbc/gibbs_cate.hpp"
#include "gbc/numerics.hpp"
#include "gbc/nuisance.hpp"
#include "gbc/pseudo.hpp"

namespace {

using namespace gbc;

void BM_CholeskySolve(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  Rng rng(1, 0);
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  const Matrix a = g * g.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
  Matrix b(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) b(i, 0) = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(cholesky_solve(a, b));
}
BENCHMARK(BM_CholeskySolve)->Arg(50)->Arg(200)->Arg(800);

void BM_CrossFit(benchmark::State& state) {
  Rng data_rng(2, 0);
  const Dataset ds = generate(default_spec(DgpId::D1), static_cast<std::size_t>(state.range(0)), data_rng);
  for (auto _ : state) {
    Rng rng(2, 1);
    benchmark::DoNotOptimize(cross_fit(ds, NuisanceConfig{}, rng));
  }
}
BENCHMARK(BM_CrossFit)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

PseudoOutcomes d1_pseudo(std::size_t n) {
  Rng rng(3, 0);
  const Dataset ds = generate(default_spec(DgpId::D1), n, rng);
  return cross_fitted_pseudo(ds, cross_fit(ds, NuisanceConfig{}, rng), Strategy::DR);
}

void BM_ClosedFormPosterior(benchmark::State& state) {
  const auto pseudo = d1_pseudo(1000);
  const double omega = plugin_omega(pseudo);
  for (auto _ : state) benchmark::DoNotOptimize(closed_form_posterior(pseudo, NormalPrior{}, omega));
}
BENCHMARK(BM_ClosedFormPosterior);

void BM_ViPosterior(benchmark::State& state) {
  const auto pseudo = d1_pseudo(1000);
  const double omega = plugin_omega(pseudo);
  for (auto _ : state) {
    Rng rng(3, 3);
    benchmark::DoNotOptimize(vi_posterior(pseudo, NormalPrior{}, omega, default_vi_config(), rng));
  }
}
BENCHMARK(BM_ViPosterior)->Unit(benchmark::kMillisecond);

void BM_SvgpFit(benchmark::State& state) {
  Rng rng(4, 0);
  const Dataset ds = generate(default_spec(DgpId::D2), 1000, rng);
  const auto pseudo = cross_fitted_pseudo(ds, cross_fit(ds, NuisanceConfig{}, rng), Strategy::DR);
  const double omega = plugin_omega(pseudo);
  const auto m = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    Rng fit_rng(4, 5);
    benchmark::DoNotOptimize(svgp_fit(ds.x, pseudo, KernelParams{}, omega, m, default_svgp_config(), fit_rng));
  }
}
BENCHMARK(BM_SvgpFit)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_SvgpOptimal(benchmark::State& state) {
  Rng rng(4, 0);
  const Dataset ds = generate(default_spec(DgpId::D2), 1000, rng);
  const auto pseudo = cross_fitted_pseudo(ds, cross_fit(ds, NuisanceConfig{}, rng), Strategy::DR);
  const Matrix z = select_inducing(ds.x, 20, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(svgp_optimal(ds.x, pseudo.values, KernelParams{}, plugin_omega(pseudo), z));
}
BENCHMARK(BM_SvgpOptimal)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
