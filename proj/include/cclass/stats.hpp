#pragma once

// Contingency tables and the G² (likelihood-ratio) conditional independence
// test used by constraint-based discovery, plus equal-frequency
// discretization for continuous columns.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cclass/dataset.hpp"
#include "cclass/error.hpp"
#include "cclass/special.hpp"

namespace cclass {

// ---- discretization -------------------------------------------------------

struct Discretized {
  std::vector<int> codes;
  int arity = 0;
  bool degenerate = false;      // fewer than two distinct values
  std::vector<double> cuts;     // value v lands in bin #{cut : v > cut}
};

/// Equal-frequency binning into at most `bins` categories. Cut points are the
/// order statistics at ceil(b·n/bins); values equal to a cut go to the lower
/// bin, and coinciding cuts merge bins.
inline Discretized discretize(std::span<const double> values, int bins) {
  if (bins < 2) fail(ErrorKind::InvalidArgument, "discretize needs bins >= 2");
  if (values.empty()) fail(ErrorKind::EmptyColumn, "cannot discretize an empty column");
  for (double v : values)
    if (std::isnan(v)) fail(ErrorKind::MissingValues, "cannot discretize a column with missing values");

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();

  Discretized out;
  if (sorted.front() == sorted.back()) {
    out.codes.assign(n, 0);
    out.arity = 1;
    out.degenerate = true;
    return out;
  }
  for (int b = 1; b < bins; ++b) {
    const std::size_t rank = (static_cast<std::size_t>(b) * n + bins - 1) / bins;  // ceil(b n / bins)
    const double cut = sorted[rank - 1];
    if (cut == sorted.back()) break;  // nothing above it
    if (out.cuts.empty() || cut > out.cuts.back()) out.cuts.push_back(cut);
  }
  out.arity = static_cast<int>(out.cuts.size()) + 1;
  out.codes.reserve(n);
  for (double v : values) {
    const auto bin = std::lower_bound(out.cuts.begin(), out.cuts.end(), v) - out.cuts.begin();
    out.codes.push_back(static_cast<int>(bin));
  }
  return out;
}

/// Replaces every continuous column by its equal-frequency discretization
/// (computed once over the whole column). Degenerate columns become a single
/// category.
inline Dataset discretize_continuous(const Dataset& data, int bins = 3) {
  Dataset out;
  for (const auto& c : data.columns()) {
    if (c.is_discrete()) {
      out.add_column(c);
      continue;
    }
    Discretized d = discretize(c.values, bins);
    std::vector<std::string> levels;
    for (int k = 0; k < d.arity; ++k) levels.push_back(std::to_string(k));
    Column col = Column::categorical(c.name, std::move(levels), std::move(d.codes), c.role);
    col.type = ColumnType::categorical;
    out.add_column(std::move(col));
  }
  return out;
}

// ---- contingency tables ---------------------------------------------------

/// Dense joint counts of (X, Y, Z_1..Z_k). Flat index is
/// x + |X|·(y + |Y|·stratum) with the stratum in mixed radix, Z_1 fastest.
struct ContingencyTable {
  std::vector<int> dims;
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;

  int x_arity() const { return dims.at(0); }
  int y_arity() const { return dims.at(1); }
  std::size_t strata() const {
    std::size_t s = 1;
    for (std::size_t i = 2; i < dims.size(); ++i) s *= static_cast<std::size_t>(dims[i]);
    return s;
  }
  std::int64_t at(int x, int y, std::size_t stratum = 0) const {
    return counts.at(static_cast<std::size_t>(x) +
                     static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(y) + dims[1] * stratum));
  }
};

namespace detail {

inline const Column& discrete_column(const Dataset& data, std::size_t i) {
  const Column& c = data.column(i);
  if (!c.is_discrete())
    fail(ErrorKind::ContinuousColumn, "column '" + c.name + "' is continuous; discretize it first");
  return c;
}

}  // namespace detail

inline ContingencyTable contingency(const Dataset& data, std::size_t x, std::size_t y,
                                    std::span<const std::size_t> z) {
  std::vector<const Column*> cols;
  cols.push_back(&detail::discrete_column(data, x));
  cols.push_back(&detail::discrete_column(data, y));
  for (auto zi : z) cols.push_back(&detail::discrete_column(data, zi));

  ContingencyTable t;
  std::size_t cells = 1;
  for (const Column* c : cols) {
    if (c->arity() < 1) fail(ErrorKind::EmptyColumn, "column '" + c->name + "' has no categories");
    t.dims.push_back(c->arity());
    cells *= static_cast<std::size_t>(c->arity());
  }
  t.counts.assign(cells, 0);

  const std::size_t n = data.rows();
  std::vector<std::size_t> flat(n, 0);
  std::size_t stride = 1;
  for (const Column* c : cols) {
    const int* codes = c->codes.data();
    for (std::size_t r = 0; r < n; ++r) {
      if (codes[r] == kMissingCode) fail(ErrorKind::MissingValues, "column '" + c->name + "' has missing values");
      flat[r] += stride * static_cast<std::size_t>(codes[r]);
    }
    stride *= static_cast<std::size_t>(c->arity());
  }
  for (std::size_t r = 0; r < n; ++r) ++t.counts[flat[r]];
  t.total = static_cast<std::int64_t>(n);
  return t;
}

inline ContingencyTable contingency(const Dataset& data, std::string_view x, std::string_view y,
                                    std::span<const std::string> z) {
  std::vector<std::size_t> zi;
  for (const auto& name : z) zi.push_back(data.index_of(name));
  return contingency(data, data.index_of(x), data.index_of(y), zi);
}

// ---- G² test --------------------------------------------------------------

struct CITestResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  bool independent = true;
  bool reliable = false;
};

/// G² statistic and degrees of freedom of a table. Zero cells contribute
/// nothing; each empty stratum removes (|X|-1)(|Y|-1) degrees of freedom.
inline std::pair<double, int> g2_statistic(const ContingencyTable& t) {
  const int dx = t.x_arity();
  const int dy = t.y_arity();
  const std::size_t strata = t.strata();
  const std::size_t slice = static_cast<std::size_t>(dx) * static_cast<std::size_t>(dy);
  std::vector<double> row(dx), col(dy);
  double g = 0.0;
  std::size_t nonempty = 0;
  for (std::size_t s = 0; s < strata; ++s) {
    const std::int64_t* cell = t.counts.data() + s * slice;
    std::fill(row.begin(), row.end(), 0.0);
    std::fill(col.begin(), col.end(), 0.0);
    double total = 0.0;
    for (int y = 0; y < dy; ++y)
      for (int x = 0; x < dx; ++x) {
        const double o = static_cast<double>(cell[x + dx * y]);
        row[x] += o;
        col[y] += o;
        total += o;
      }
    if (total == 0.0) continue;
    ++nonempty;
    for (int y = 0; y < dy; ++y)
      for (int x = 0; x < dx; ++x) {
        const double o = static_cast<double>(cell[x + dx * y]);
        if (o > 0.0) g += o * std::log(o * total / (row[x] * col[y]));
      }
  }
  const int dof = (dx - 1) * (dy - 1) * static_cast<int>(nonempty);
  return {std::max(0.0, 2.0 * g), dof};
}

/// Decides X ⊥ Y | Z at level `alpha`. A test with fewer than five samples
/// per degree of freedom is flagged unreliable and reported as independent.
inline CITestResult g2_test(const ContingencyTable& t, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::InvalidArgument, "alpha must lie in (0,1)");
  CITestResult r;
  std::tie(r.statistic, r.dof) = g2_statistic(t);
  if (r.dof <= 0) {
    r.p_value = 1.0;
    r.independent = true;
    r.reliable = false;
    return r;
  }
  r.p_value = chi_square_sf(r.statistic, r.dof);
  r.reliable = t.total >= 5 * static_cast<std::int64_t>(r.dof);
  r.independent = !r.reliable || r.p_value > alpha;
  return r;
}

inline CITestResult g2_test(const Dataset& data, std::size_t x, std::size_t y, std::span<const std::size_t> z,
                            double alpha) {
  return g2_test(contingency(data, x, y, z), alpha);
}

inline CITestResult g2_test(const Dataset& data, std::string_view x, std::string_view y,
                            std::span<const std::string> z, double alpha) {
  return g2_test(contingency(data, x, y, z), alpha);
}

inline nlohmann::json to_json(const CITestResult& r) {
  return {{"statistic", r.statistic},
          {"dof", r.dof},
          {"p_value", r.p_value},
          {"independent", r.independent},
          {"reliable", r.reliable}};
}

}  // namespace cclass
