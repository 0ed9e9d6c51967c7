#include "gbc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <string>

namespace gbc {

namespace {

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Orders strategies as RA, IPW, AIPW/DR regardless of input order.
int strategy_rank(const std::string& label) {
  if (label == "RA") return 0;
  if (label == "IPW") return 1;
  return 2;
}

}  // namespace

void write_bench_csv(const std::vector<BenchReport>& reports, std::ostream& out) {
  out << "dataset,strategy,n,reps,coverage,cov_ci_lo,cov_ci_hi,mean_len,sd_len,faithful,failures\n";
  for (const auto& r : reports) {
    out << r.dataset_id << ',' << r.strategy << ',' << r.n << ',' << r.r_total << ','
        << fixed(r.coverage) << ',' << fixed(r.coverage_ci.lo) << ',' << fixed(r.coverage_ci.hi) << ','
        << fixed(r.mean_length) << ',' << fixed(r.sd_length) << ',' << (r.faithful ? "true" : "false")
        << ',' << r.failures << '\n';
  }
}

void write_runs_csv(const std::vector<BenchReport>& reports, std::ostream& out) {
  out << "dataset,strategy,n,rep,failed,theta_hat,cri_lo,cri_hi,length,coverage,omega\n";
  for (const auto& r : reports) {
    for (const auto& run : r.runs) {
      out << r.dataset_id << ',' << r.strategy << ',' << r.n << ',' << run.rep << ','
          << (run.failed ? "true" : "false") << ',' << fixed(run.theta_hat) << ',' << fixed(run.cri_lo)
          << ',' << fixed(run.cri_hi) << ',' << fixed(run.length) << ',' << fixed(run.coverage) << ','
          << fixed(run.omega) << '\n';
    }
  }
}

void write_bench_markdown(const std::vector<BenchReport>& reports, std::ostream& out) {
  // (n) -> dataset -> strategy -> report
  std::map<std::size_t, std::map<std::string, std::map<std::string, const BenchReport*>>> grid;
  std::set<std::string> strategy_set;
  for (const auto& r : reports) {
    grid[r.n][r.dataset_id][r.strategy] = &r;
    strategy_set.insert(r.strategy);
  }
  std::vector<std::string> strategies(strategy_set.begin(), strategy_set.end());
  std::sort(strategies.begin(), strategies.end(), [](const auto& a, const auto& b) {
    return strategy_rank(a) < strategy_rank(b) || (strategy_rank(a) == strategy_rank(b) && a < b);
  });

  auto header = [&](const std::string& title) {
    out << "### " << title << "\n\n| Dataset |";
    for (const auto& s : strategies) out << ' ' << s << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < strategies.size(); ++i) out << "---|";
    out << '\n';
  };

  for (const auto& [n, datasets] : grid) {
    const double nominal = 1.0 - datasets.begin()->second.begin()->second->alpha;
    const auto estimand = datasets.begin()->second.begin()->second->estimand;

    header("Coverage (" + estimand + ", n=" + std::to_string(n) + ", nominal " + fixed(nominal, 2) +
           ")");
    for (const auto& [dataset, cells] : datasets) {
      double best = INFINITY;
      for (const auto& [_, r] : cells) best = std::min(best, std::abs(r->coverage - nominal));
      out << "| " << dataset << " |";
      for (const auto& s : strategies) {
        const auto it = cells.find(s);
        if (it == cells.end()) {
          out << " - |";
          continue;
        }
        const auto* r = it->second;
        std::string cell = fixed(r->coverage, 2) + " (" + fixed(r->coverage_ci.lo, 2) + ", " +
                           fixed(r->coverage_ci.hi, 2) + ")";
        if (std::abs(r->coverage - nominal) <= best + 1e-12) cell = "**" + cell + "**";
        if (!r->faithful) cell += " `faithful=false`";
        out << ' ' << cell << " |";
      }
      out << '\n';
    }
    out << '\n';

    header("Interval length (" + estimand + ", n=" + std::to_string(n) + ")");
    for (const auto& [dataset, cells] : datasets) {
      double narrowest = INFINITY;
      for (const auto& [_, r] : cells) {
        if (r->faithful) narrowest = std::min(narrowest, r->mean_length);
      }
      out << "| " << dataset << " |";
      for (const auto& s : strategies) {
        const auto it = cells.find(s);
        if (it == cells.end()) {
          out << " - |";
          continue;
        }
        const auto* r = it->second;
        std::string cell = fixed(r->mean_length, 3) + " (" + fixed(r->sd_length, 3) + ")";
        if (!r->faithful) {
          cell = "~~" + cell + "~~ `faithful=false`";
        } else if (r->mean_length <= narrowest) {
          cell = "**" + cell + "**";
        }
        out << ' ' << cell << " |";
      }
      out << '\n';
    }
    out << '\n';
  }
}

void write_slopes_csv(const std::vector<SlopeResult>& results, std::ostream& out) {
  out << "kind,strategy,delta,value\n";
  for (const auto& r : results) {
    const auto label = strategy_label(r.strategy);
    for (std::size_t i = 0; i < r.deltas.size(); ++i) {
      out << "shift," << label << ',' << fixed(r.deltas[i], 6) << ',' << fixed(r.shifts[i], 10) << '\n';
    }
    out << "slope," << label << ",," << fixed(r.slope) << '\n';
  }
}

void write_tv_csv(const std::vector<TvPoint>& points, std::ostream& out) {
  out << "n,r_n,tv_mean,tv_se\n";
  for (const auto& p : points) {
    out << p.n << ',' << fixed(p.error_rate, 8) << ',' << fixed(p.mean_tv) << ',' << fixed(p.se_tv)
        << '\n';
  }
}

}  // namespace gbc
