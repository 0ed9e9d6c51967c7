// Acceptance suite: one PASS/FAIL line per criterion.
//   gbc_acceptance [--only N]... [--skip N]...

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gbc/bench.hpp"
#include "gbc/calibrate.hpp"
#include "gbc/dgp.hpp"
#include "gbc/gibbs_ate.hpp"
#include "gbc/gibbs_cate.hpp"
#include "gbc/nuisance.hpp"
#include "gbc/parallel.hpp"
#include "gbc/pseudo.hpp"

#ifdef GBC_HAVE_CLI
#include "cli.hpp"
#endif

using namespace gbc;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

constexpr std::uint64_t kSeed = 2024;

PseudoOutcomes aipw_pseudo(const Dataset& ds, Rng& rng) {
  CrossFit cf = cross_fit(ds, NuisanceConfig{}, rng);
  return cross_fitted_pseudo(ds, cf, Strategy::DR);
}

// Mean and variance of exp{-omega n L_n(theta)} pi(theta) by trapezoid
// quadrature on +-12 sds around the mode.
GaussianPosterior quadrature(const PseudoOutcomes& p, const NormalPrior& prior, double omega) {
  const double n = static_cast<double>(p.size());
  const double theta_hat = mean(p.values);
  const double prec = omega * n + prior.precision();
  const double centre = (prior.precision() * prior.m0 + omega * n * theta_hat) / prec;
  const double scale = 1.0 / std::sqrt(prec);
  const int points = 400001;
  const double lo = centre - 12.0 * scale;
  const double step = 24.0 * scale / (points - 1);
  auto log_density = [&](double t) {
    double lp = -omega * n * ate_loss(p, t);
    if (!prior.is_diffuse()) lp -= 0.5 * (t - prior.m0) * (t - prior.m0) / prior.s0_sq;
    return lp;
  };
  const double ref = log_density(centre);
  double z = 0, m1 = 0, m2 = 0;
  for (int i = 0; i < points; ++i) {
    const double t = lo + step * i;
    const double w = (i == 0 || i == points - 1 ? 0.5 : 1.0) * std::exp(log_density(t) - ref);
    z += w;
    m1 += w * (t - centre);
    m2 += w * (t - centre) * (t - centre);
  }
  const double d = m1 / z;
  return {centre + d, m2 / z - d * d};
}

// 1. Closed form equals numerically normalized Gibbs posterior.
Verdict conjugacy() {
  constexpr double kTol = 1e-6;
  constexpr int kInstances = 50;
  Rng rng(kSeed, 1);
  double worst_mean = 0, worst_sd = 0;
  for (int i = 0; i < kInstances; ++i) {
    PseudoOutcomes p;
    const auto n = static_cast<Eigen::Index>(2 + rng.index(500));
    p.values.resize(n);
    const double loc = 4 * rng.normal(), sc = 0.2 + 3 * rng.uniform();
    for (Eigen::Index j = 0; j < n; ++j) p.values[j] = loc + sc * rng.normal();
    const NormalPrior prior = i % 5 == 0 ? NormalPrior::diffuse() : NormalPrior{2 * rng.normal(), 0.05 + 4 * rng.uniform()};
    const double omega = 0.05 + 5 * rng.uniform();
    auto exact = closed_form_posterior(p, prior, omega);
    auto numeric = quadrature(p, prior, omega);
    worst_mean = std::max(worst_mean, std::abs(exact.m_p - numeric.m_p));
    worst_sd = std::max(worst_sd, std::abs(exact.sd() - std::sqrt(numeric.s_p_sq)));
  }
  return {worst_mean <= kTol && worst_sd <= kTol,
          fmt("%d instances, max |dmean|=%.2e, max |dsd|=%.2e (tol %.0e)", kInstances, worst_mean, worst_sd, kTol)};
}

// 2. Flat prior + plug-in omega gives the squared standard error.
Verdict efficiency_identity() {
  constexpr double kTol = 1e-12;
  double worst = 0;
  for (DgpId id : all_dgps()) {
    Rng rng(kSeed, 100 + static_cast<std::uint64_t>(id));
    Dataset ds = generate(default_spec(id), 1000, rng);
    auto p = aipw_pseudo(ds, rng);
    auto post = closed_form_posterior(p, NormalPrior::diffuse(), plugin_omega(p));
    worst = std::max(worst, std::abs(post.s_p_sq - sample_variance(p.values) / 1000.0));
  }
  return {worst <= kTol, fmt("D1-D9 at n=1000, max |s_p^2 - Var/n|=%.2e (tol %.0e)", worst, kTol)};
}

// 3. Variational engine recovers the closed form.
Verdict vi_agreement() {
  constexpr double kMeanTol = 0.05;  // in units of s_p
  constexpr double kSdLo = 0.9, kSdHi = 1.2;
  constexpr int kInstances = 20;
  Rng rng(kSeed, 3);
  double worst_mean = 0, min_ratio = 1e9, max_ratio = 0;
  for (int i = 0; i < kInstances; ++i) {
    const auto id = static_cast<DgpId>(1 + i % 9);
    const std::size_t n = 50 + rng.index(1951);
    Rng data_rng(kSeed, 300 + static_cast<std::uint64_t>(i));
    Dataset ds = generate(default_spec(id), n, data_rng);
    auto p = aipw_pseudo(ds, data_rng);
    const NormalPrior prior = i % 2 == 0 ? NormalPrior{0.0, 1.0} : NormalPrior::diffuse();
    const double omega = plugin_omega(p);
    auto exact = closed_form_posterior(p, prior, omega);
    auto vi = vi_posterior(p, prior, omega, default_vi_config(), data_rng);
    worst_mean = std::max(worst_mean, std::abs(vi.m_p - exact.m_p) / exact.sd());
    min_ratio = std::min(min_ratio, vi.sd() / exact.sd());
    max_ratio = std::max(max_ratio, vi.sd() / exact.sd());
  }
  const bool pass = worst_mean <= kMeanTol && min_ratio >= kSdLo && max_ratio <= kSdHi;
  return {pass, fmt("%d instances, max |dmean|/s_p=%.4f (tol %.2f), sd ratio in [%.4f, %.4f] (need [%.1f, %.1f])",
                    kInstances, worst_mean, kMeanTol, min_ratio, max_ratio, kSdLo, kSdHi)};
}

// 4. Table-1 regime coverage.
Verdict ate_coverage() {
  constexpr std::size_t kN = 1000, kReps = 50;
  constexpr double kLo = 0.88, kHi = 1.00;
  constexpr int kMinClosest = 5;
  BenchOptions opt;  // N(0, 1) prior, plug-in omega, closed form
  opt.parallelism = default_parallelism();
  bool in_band = true;
  int closest = 0;
  std::string cells;
  for (DgpId id : all_dgps()) {
    auto reports = run_ate_bench(default_spec(id), {Strategy::RA, Strategy::IPW, Strategy::DR}, kN, kReps, opt, kSeed);
    const double target = 1.0 - opt.alpha;
    const double aipw_gap = std::abs(reports[2].coverage - target);
    const bool weakly_closest = aipw_gap <= std::abs(reports[0].coverage - target) + 1e-12 &&
                                aipw_gap <= std::abs(reports[1].coverage - target) + 1e-12;
    closest += weakly_closest;
    const bool required = id != DgpId::D6 && id != DgpId::D7 && id != DgpId::D8;
    if (required && (reports[2].coverage < kLo || reports[2].coverage > kHi)) in_band = false;
    cells += fmt(" %s=%.2f%s", to_string(id).c_str(), reports[2].coverage, weakly_closest ? "*" : "");
  }
  return {in_band && closest >= kMinClosest,
          fmt("AIPW coverage%s; * closest on %d/9 (need >= %d), D1-D5,D9 in [%.2f, %.2f]", cells.c_str(), closest,
              kMinClosest, kLo, kHi)};
}

// 5. Interval length shrinks like 1/sqrt(n).
Verdict length_convergence() {
  constexpr double kRatioLo = 1.8, kRatioHi = 2.2;
  constexpr int kMaxInversions = 1;
  const std::vector<std::size_t> grid{100, 250, 500, 1000};
  BenchOptions opt;
  opt.prior = NormalPrior::diffuse();
  opt.parallelism = default_parallelism();
  auto sweep = length_sweep(default_spec(DgpId::D1), {Strategy::DR}, grid, 50, opt, kSeed);
  int inversions = 0;
  std::string cells;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    cells += fmt(" %zu:%.4f", sweep[i].n, sweep[i].median_length);
    if (i > 0 && sweep[i].median_length > sweep[i - 1].median_length) ++inversions;
  }
  const double ratio = sweep[1].median_length / sweep[3].median_length;  // n = 250 vs 1000
  return {inversions <= kMaxInversions && ratio >= kRatioLo && ratio <= kRatioHi,
          fmt("median lengths%s; inversions=%d (max %d); len(250)/len(1000)=%.3f (need [%.1f, %.1f])", cells.c_str(),
              inversions, kMaxInversions, ratio, kRatioLo, kRatioHi)};
}

// 6. Second-order sensitivity of AIPW, first-order of IPW.
Verdict orthogonality() {
  constexpr double kAipwMin = 1.7, kIpwLo = 0.7, kIpwHi = 1.3;
  auto results = orthogonality_slopes(default_spec(DgpId::D1), {0.2, 0.1, 0.05, 0.025}, 100000, kSeed);
  double aipw = 0, ipw = 0, ra = 0;
  for (const auto& r : results) {
    if (r.strategy == Strategy::DR) aipw = r.slope;
    if (r.strategy == Strategy::IPW) ipw = r.slope;
    if (r.strategy == Strategy::RA) ra = r.slope;
  }
  return {aipw >= kAipwMin && ipw >= kIpwLo && ipw <= kIpwHi,
          fmt("slopes AIPW=%.3f (need >= %.1f), IPW=%.3f (need [%.1f, %.1f]), RA=%.3f", aipw, kAipwMin, ipw, kIpwLo,
              kIpwHi, ra)};
}

// 7. Posterior stability under injected nuisance error.
Verdict tv_stability_check() {
  constexpr double kSeMultiple = 2.0;
  constexpr double kIpwFloor = 0.2;
  const std::vector<std::size_t> grid{500, 2000, 8000};
  auto fast = tv_stability(default_spec(DgpId::D1), Strategy::DR, 0.3, grid, 20, kSeed);
  bool decreasing = fast.back().mean_tv < fast.front().mean_tv;
  std::string cells;
  for (std::size_t i = 0; i < fast.size(); ++i) {
    cells += fmt(" %.4f(%.4f)", fast[i].mean_tv, fast[i].se_tv);
    if (i > 0) {
      const double se = std::hypot(fast[i].se_tv, fast[i - 1].se_tv);
      if (fast[i].mean_tv > fast[i - 1].mean_tv + kSeMultiple * se) decreasing = false;
    }
  }
  auto slow = tv_stability(default_spec(DgpId::D1), Strategy::IPW, 0.1, grid, 20, kSeed);
  const double final_tv = slow.back().mean_tv;
  return {decreasing && final_tv >= kIpwFloor,
          fmt("AIPW beta=0.3 TV(se)%s; IPW beta=0.1 final TV=%.4f (need >= %.1f)", cells.c_str(), final_tv, kIpwFloor)};
}

// 8. Oracle DR pseudo-outcomes are unbiased, also with one nuisance wrong.
Verdict dr_unbiased() {
  constexpr double kSe = 3.0;
  const auto spec = default_spec(DgpId::D2);
  const double truth = ground_truth(spec).ate;
  Rng rng(kSeed, 8);
  auto draw = simulate(spec, 20000, rng);
  NuisancePredictions oracle{draw.nuisances.propensity, draw.nuisances.mu0, draw.nuisances.mu1};
  NuisancePredictions bad_outcome = oracle;
  bad_outcome.mu1.array() += 0.8 + 0.5 * draw.data.x.col(0).array();
  bad_outcome.mu0.array() -= 0.6;
  NuisancePredictions bad_propensity = oracle;
  bad_propensity.propensity = perturb_nuisances(draw.nuisances, draw.data.x, 0.7).propensity;

  bool pass = true;
  std::string cells;
  const std::vector<std::pair<const char*, NuisancePredictions>> variants{
      {"oracle", oracle}, {"bad-outcome", bad_outcome}, {"bad-propensity", bad_propensity}};
  for (const auto& [label, eta] : variants) {
    auto p = pseudo_from_nuisances(draw.data, eta, Strategy::DR);
    const double se = std::sqrt(sample_variance(p.values) / static_cast<double>(p.size()));
    const double z = (mean(p.values) - truth) / se;
    pass = pass && std::abs(z) <= kSe;
    cells += fmt(" %s z=%+.2f", label, z);
  }
  return {pass, fmt("D2 n=20000:%s (need |z| <= %.0f)", cells.c_str(), kSe)};
}

// 9. Sparse engine equals the exact GP when every point is inducing.
Verdict svgp_oracle() {
  constexpr double kMeanGap = 1e-2;
  constexpr double kRatioLo = 0.9, kRatioHi = 1.1;
  Rng rng(kSeed, 9);
  const auto spec = default_spec(DgpId::D2);
  Dataset ds = generate(spec, 40, rng);
  auto p = aipw_pseudo(ds, rng);
  const double omega = plugin_omega(p);
  KernelParams kernel;
  auto gp = svgp_fit(ds.x, p, kernel, omega, ds.x, default_svgp_config(), rng);
  Matrix query(ds.x.rows() + 100, ds.x.cols());
  query << ds.x, sample_covariates(spec, 100, rng);
  auto sparse = predict(gp, query);
  auto exact = exact_gp_posterior(ds.x, p, kernel, omega).predict(query);
  const double gap = (sparse.mean - exact.mean).cwiseAbs().maxCoeff();
  const Vector ratio = (sparse.variance.array() / exact.variance.array()).sqrt();
  return {gap <= kMeanGap && ratio.minCoeff() >= kRatioLo && ratio.maxCoeff() <= kRatioHi,
          fmt("n=M=40, max |dmean|=%.2e (tol %.0e), sd ratio in [%.4f, %.4f] (need [%.1f, %.1f])", gap, kMeanGap,
              ratio.minCoeff(), ratio.maxCoeff(), kRatioLo, kRatioHi)};
}

// 10. CATE pointwise coverage.
Verdict cate_coverage() {
  constexpr double kMin = 0.85;
  BenchOptions opt;
  opt.parallelism = default_parallelism();
  CateBenchOptions cate;  // Matern-5/2, l=2, var=2, jitter 1e-4, M=20, K=100
  auto report = run_cate_bench(default_spec(DgpId::D2), Strategy::DR, 1000, 50, cate, opt, kSeed);
  return {report.coverage >= kMin && report.failures == 0,
          fmt("D2 DR n=1000 R=50 K=100: average pointwise coverage=%.4f (need >= %.2f), failures=%zu", report.coverage,
              kMin, report.failures)};
}

// 11. Bootstrap calibration reaches nominal.
Verdict gpc() {
  constexpr double kTol = 0.02;
  constexpr int kMaxIter = 50;
  Rng rng(kSeed, 11);
  Dataset ds = generate(default_spec(DgpId::D1), 500, rng);
  GpcConfig cfg;
  cfg.max_iter = kMaxIter;
  auto r = gpc_omega(ds, Strategy::DR, NormalPrior{}, cfg, NuisanceConfig{}, rng);
  const bool pass = r.converged && std::abs(r.achieved_bootstrap_coverage - 0.95) <= kTol && r.iterations <= kMaxIter;
  return {pass, fmt("D1 n=500: converged=%s after %d iterations, coverage=%.3f (need within %.2f of 0.95), omega=%.4f",
                    r.converged ? "yes" : "no", r.iterations, r.achieved_bootstrap_coverage, kTol, r.omega)};
}

// 12. Bench output independent of worker count.
Verdict determinism() {
#ifdef GBC_HAVE_CLI
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gbc_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream(dir / "config.json")
        << R"({"datasets":["D1","D2","D3","D4","D5","D6","D7","D8","D9"],"strategies":["RA","IPW","AIPW"],)"
        << R"("n":1000,"reps":50,"alpha":0.05,"estimand":"ate","calibration":"plugin","seed":2024,"parallelism":1})";
  }
  auto bench = [&](const char* workers, const char* out_dir) {
    const std::string cfg = (dir / "config.json").string();
    const std::string out = (dir / out_dir).string();
    const char* argv[] = {"gbc", "bench", "--config", cfg.c_str(), "--out-dir", out.c_str(), "--parallelism", workers};
    std::ostringstream sink_out, sink_err;
    return cli::run(8, argv, sink_out, sink_err);
  };
  const int rc1 = bench("1", "serial");
  const int rc2 = bench("4", "threaded");
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  bool same = rc1 == 0 && rc2 == 0;
  std::size_t bytes = 0;
  for (const char* f : {"bench.csv", "bench_runs.csv"}) {
    const auto a = slurp(dir / "serial" / f);
    same = same && !a.empty() && a == slurp(dir / "threaded" / f);
    bytes += a.size();
  }
  fs::remove_all(dir);
  return {same, fmt("headline study with --parallelism 1 vs 4: exit %d/%d, %zu CSV bytes %s", rc1, rc2, bytes,
                    same ? "identical" : "DIFFER")};
#else
  return {false, "built without the command-line tool"};
#endif
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, skip;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::strcmp(argv[i], "--only") == 0) only.insert(std::atoi(argv[i + 1]));
    else if (std::strcmp(argv[i], "--skip") == 0) skip.insert(std::atoi(argv[i + 1]));
    else {
      std::fprintf(stderr, "usage: %s [--only N]... [--skip N]...\n", argv[0]);
      return 2;
    }
  }
  const std::vector<Criterion> criteria{
      {1, "closed-form conjugacy", conjugacy},
      {2, "flat-prior efficiency identity", efficiency_identity},
      {3, "VI / closed-form agreement", vi_agreement},
      {4, "ATE coverage", ate_coverage},
      {5, "interval length convergence", length_convergence},
      {6, "orthogonality slopes", orthogonality},
      {7, "TV stability", tv_stability_check},
      {8, "DR unbiasedness", dr_unbiased},
      {9, "SVGP / exact GP equivalence", svgp_oracle},
      {10, "CATE coverage", cate_coverage},
      {11, "GPC calibration", gpc},
      {12, "determinism across parallelism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if ((!only.empty() && !only.count(c.id)) || skip.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  %2d  %-32s %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !v.pass;
  }
  return failed == 0 ? 0 : 1;
}
