#include "gbc/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include "gbc/errors.hpp"

namespace gbc {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_number(std::string_view field, std::size_t row, std::size_t col) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(row, col, "not a number: '" + std::string(field) + "'");
  }
  if (!std::isfinite(value)) throw ParseError(row, col, "non-finite value");
  return value;
}

}  // namespace

void Dataset::validate() const {
  const auto n = y.size();
  if (n < 1) throw SchemaError("dataset must contain at least one observation");
  if (x.rows() != n || a.size() != n) {
    throw SchemaError("x, a and y must share the same number of rows");
  }
  if (x.cols() < 1) throw SchemaError("dataset must have at least one covariate");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a[i] != 0 && a[i] != 1) throw SchemaError("treatment must be 0 or 1");
  }
  if (!x.allFinite() || !y.allFinite()) throw SchemaError("dataset contains non-finite values");
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset out;
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.x.resize(m, x.cols());
  out.a.resize(m);
  out.y.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)]);
    out.x.row(i) = x.row(r);
    out.a[i] = a[r];
    out.y[i] = y[r];
  }
  out.truth = truth;
  return out;
}

std::size_t Dataset::treated_count() const { return static_cast<std::size_t>(a.sum()); }

std::vector<std::size_t> FoldAssignment::members(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::complement(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

FoldAssignment make_folds(std::size_t n, std::size_t k, Rng& rng) {
  if (k < 2 || k > n) {
    throw InvalidFoldCount("fold count must satisfy 2 <= k <= n (k=" + std::to_string(k) +
                           ", n=" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);

  FoldAssignment folds;
  folds.k = k;
  folds.fold_of.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) folds.fold_of[perm[pos]] = pos % k;
  return folds;
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("missing header row");
  const auto header = split_fields(line);
  const std::size_t cols = header.size();
  if (cols < 3) throw SchemaError("header must be x1,...,xd,a,y with d >= 1");
  const std::size_t d = cols - 2;
  for (std::size_t j = 0; j < d; ++j) {
    if (trim(header[j]) != "x" + std::to_string(j + 1)) {
      throw SchemaError("header column " + std::to_string(j + 1) + " must be 'x" +
                        std::to_string(j + 1) + "'");
    }
  }
  if (trim(header[d]) != "a") throw SchemaError("missing column 'a'");
  if (trim(header[d + 1]) != "y") throw SchemaError("missing column 'y'");

  std::vector<double> values;
  std::vector<int> treat;
  std::vector<double> outcome;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != cols) {
      throw ParseError(row, fields.size() < cols ? fields.size() + 1 : cols + 1,
                       "expected " + std::to_string(cols) + " fields, found " +
                           std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < d; ++j) values.push_back(parse_number(fields[j], row, j + 1));
    const double a = parse_number(fields[d], row, d + 1);
    if (a != 0.0 && a != 1.0) throw ParseError(row, d + 1, "treatment must be 0 or 1");
    treat.push_back(static_cast<int>(a));
    outcome.push_back(parse_number(fields[d + 1], row, d + 2));
  }
  if (outcome.empty()) throw SchemaError("CSV body is empty");

  Dataset ds;
  const auto n = static_cast<Eigen::Index>(outcome.size());
  ds.x.resize(n, static_cast<Eigen::Index>(d));
  ds.a.resize(n);
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      ds.x(i, static_cast<Eigen::Index>(j)) = values[static_cast<std::size_t>(i) * d + j];
    }
    ds.a[i] = treat[static_cast<std::size_t>(i)];
    ds.y[i] = outcome[static_cast<std::size_t>(i)];
  }
  ds.validate();
  return ds;
}

Dataset read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path.string());
  return read_csv(in);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_csv(const Dataset& ds, std::ostream& out) {
  ds.validate();
  const auto d = ds.x.cols();
  for (Eigen::Index j = 0; j < d; ++j) out << 'x' << (j + 1) << ',';
  out << "a,y\n";
  for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out << format_double(ds.x(i, j)) << ',';
    out << ds.a[i] << ',' << format_double(ds.y[i]) << '\n';
  }
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot write " + path.string());
  write_csv(ds, out);
}

}  // namespace gbc
