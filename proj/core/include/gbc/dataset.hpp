#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "gbc/numerics.hpp"

namespace gbc {

// Known causal quantities attached to simulated data. Never serialized.
struct GroundTruth {
  double ate = 0.0;
  std::function<double(const Vector&)> cate;
};

// Observational data O = (X, A, Y).
struct Dataset {
  Matrix x;               // n x d covariates
  Eigen::VectorXi a;      // treatment indicator in {0, 1}
  Vector y;               // outcome
  std::optional<GroundTruth> truth;

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(x.cols()); }

  // Throws SchemaError on shape, binary or finiteness violations.
  void validate() const;

  // Rows selected by index, truth carried along.
  Dataset subset(const std::vector<std::size_t>& rows) const;
  std::size_t treated_count() const;
};

struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of;

  std::vector<std::size_t> members(std::size_t fold) const;
  std::vector<std::size_t> complement(std::size_t fold) const;
};

// Uniformly random balanced partition of {0..n-1} into k folds.
FoldAssignment make_folds(std::size_t n, std::size_t k, Rng& rng);

// CSV with header x1,...,xd,a,y. Values are written in shortest round-trip
// form, so write -> read is exact.
Dataset read_csv(std::istream& in);
Dataset read_csv(const std::filesystem::path& path);
void write_csv(const Dataset& ds, std::ostream& out);
void write_csv(const Dataset& ds, const std::filesystem::path& path);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

}  // namespace gbc
