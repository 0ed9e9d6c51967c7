#pragma once

#include <iosfwd>
#include <vector>

#include "gbc/bench.hpp"

namespace gbc {

// dataset,strategy,n,reps,coverage,cov_ci_lo,cov_ci_hi,mean_len,sd_len,faithful,failures
void write_bench_csv(const std::vector<BenchReport>& reports, std::ostream& out);

// Per-repetition rows, the data behind length box plots.
void write_runs_csv(const std::vector<BenchReport>& reports, std::ostream& out);

// Coverage and length tables per sample size: datasets as rows, strategies as
// columns. Bold marks the coverage closest to nominal and the narrowest
// faithful length; unfaithful cells carry a `faithful=false` marker.
void write_bench_markdown(const std::vector<BenchReport>& reports, std::ostream& out);

// kind,strategy,delta,value with kind in {shift, slope}.
void write_slopes_csv(const std::vector<SlopeResult>& results, std::ostream& out);

// n,r_n,tv_mean,tv_se
void write_tv_csv(const std::vector<TvPoint>& points, std::ostream& out);

}  // namespace gbc
