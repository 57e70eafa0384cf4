#pragma once

// Evaluation: parent-set precision/recall, causal classification accuracy
// against known effects, Qini coefficient and curve, paired t-test and
// k-fold splitting.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cclass/classify.hpp"
#include "cclass/error.hpp"
#include "cclass/io.hpp"
#include "cclass/random.hpp"
#include "cclass/special.hpp"

namespace cclass {

// ---- parent discovery quality --------------------------------------------

struct PrfScore {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
};

/// Set-overlap scores. An empty found set has precision 1, an empty truth
/// set has recall 1, and f1 is 0 when precision + recall is 0.
inline PrfScore prf(const std::set<std::string>& found, const std::set<std::string>& truth) {
  std::size_t hits = 0;
  for (const auto& f : found) hits += truth.count(f);
  PrfScore s;
  s.precision = found.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(found.size());
  s.recall = truth.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  const double denom = s.precision + s.recall;
  s.f1 = denom == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / denom;
  return s;
}

inline PrfScore prf(std::span<const std::string> found, std::span<const std::string> truth) {
  return prf(std::set<std::string>(found.begin(), found.end()), std::set<std::string>(truth.begin(), truth.end()));
}

inline nlohmann::json to_json(const PrfScore& s) {
  return {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

// ---- causal classification accuracy ---------------------------------------

/// Fraction of rows whose assignment equals [true effect > theta].
inline double causal_accuracy(std::span<const int> assign, std::span<const double> true_effect, double theta = 0.0) {
  if (assign.size() != true_effect.size())
    fail(ErrorKind::LengthMismatch, std::to_string(assign.size()) + " predictions vs " +
                                        std::to_string(true_effect.size()) + " ground-truth rows");
  if (assign.empty()) fail(ErrorKind::TooFewSamples, "accuracy of an empty prediction set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < assign.size(); ++i) correct += (assign[i] != 0) == (true_effect[i] > theta);
  return static_cast<double>(correct) / static_cast<double>(assign.size());
}

inline double causal_accuracy(std::span<const UpliftPrediction> preds, std::span<const double> true_effect,
                              double theta = 0.0) {
  std::vector<int> assign;
  assign.reserve(preds.size());
  for (const auto& p : preds) assign.push_back(p.assign);
  return causal_accuracy(assign, true_effect, theta);
}

// ---- Qini -----------------------------------------------------------------

struct QiniCounts {
  double n11 = 0;  // Y=1, T=1
  double n10 = 0;  // Y=1, T=0
  double n_t1 = 0;
  double n_t0 = 0;

  void add(int y, int t) {
    if (t) {
      n_t1 += 1;
      n11 += y != 0;
    } else {
      n_t0 += 1;
      n10 += y != 0;
    }
  }

  /// n11 - n10·n_t1/n_t0; NaN when there are no controls.
  double value() const {
    if (n_t0 == 0) return std::numeric_limits<double>::quiet_NaN();
    return n11 - n10 * n_t1 / n_t0;
  }
};

namespace detail {

inline void check_binary_vectors(std::span<const int> outcomes, std::span<const int> treatments) {
  if (outcomes.size() != treatments.size())
    fail(ErrorKind::LengthMismatch, "outcomes and treatments differ in length");
  for (std::size_t i = 0; i < outcomes.size(); ++i)
    if ((outcomes[i] != 0 && outcomes[i] != 1) || (treatments[i] != 0 && treatments[i] != 1))
      fail(ErrorKind::NonBinary, "outcomes and treatments must be 0/1");
}

}  // namespace detail

inline double qini_coefficient(std::span<const int> outcomes, std::span<const int> treatments) {
  detail::check_binary_vectors(outcomes, treatments);
  QiniCounts c;
  for (std::size_t i = 0; i < outcomes.size(); ++i) c.add(outcomes[i], treatments[i]);
  if (c.n_t0 == 0) fail(ErrorKind::EmptyControl, "no control rows");
  return c.value();
}

struct QiniPoint {
  double fraction = 0.0;
  double uplift = 0.0;  // NaN at a gap
  bool gap = false;     // the slice has no control rows
};

struct QiniCurve {
  std::vector<QiniPoint> points;
  double coefficient_area = 0.0;

  std::size_t gaps() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const QiniPoint& p) { return p.gap; }));
  }
};

namespace detail {

// Trapezoids between the curve and the line from (0,0) to (1, final uplift),
// joining consecutive points that are not gaps.
inline double area_against_diagonal(const std::vector<QiniPoint>& pts) {
  const double final_uplift = pts.back().uplift;
  double area = 0.0;
  const QiniPoint* prev = nullptr;
  for (const auto& p : pts) {
    if (p.gap) continue;
    if (prev) {
      const double a = prev->uplift - prev->fraction * final_uplift;
      const double b = p.uplift - p.fraction * final_uplift;
      area += 0.5 * (a + b) * (p.fraction - prev->fraction);
    }
    prev = &p;
  }
  return area;
}

}  // namespace detail

/// Rows are ranked by descending effect (ties keep input order). For
/// k = 1..n_points the top floor(k·n/n_points) rows are scored with the Qini
/// coefficient; repeated slice sizes are dropped and (0,0) is prepended.
/// Slices without control rows become gap points.
inline QiniCurve qini_curve(std::span<const double> effects, std::span<const int> outcomes,
                            std::span<const int> treatments, std::size_t n_points = 10) {
  detail::check_binary_vectors(outcomes, treatments);
  if (effects.size() != outcomes.size()) fail(ErrorKind::LengthMismatch, "effects and outcomes differ in length");
  if (n_points < 2) fail(ErrorKind::InvalidArgument, "n_points must be >= 2");
  const std::size_t n = effects.size();
  if (n == 0) fail(ErrorKind::TooFewSamples, "qini curve of an empty sample");
  const std::vector<std::size_t> order = rank_by_effect(effects);

  QiniCurve curve;
  curve.points.push_back({0.0, 0.0, false});
  QiniCounts c;
  std::size_t taken = 0;
  for (std::size_t k = 1; k <= n_points; ++k) {
    const std::size_t size = k * n / n_points;
    if (size == taken) continue;
    for (; taken < size; ++taken) c.add(outcomes[order[taken]], treatments[order[taken]]);
    QiniPoint p;
    p.fraction = static_cast<double>(size) / static_cast<double>(n);
    p.gap = c.n_t0 == 0;
    p.uplift = c.value();
    curve.points.push_back(p);
  }
  if (curve.points.back().gap) fail(ErrorKind::EmptyControl, "no control rows");
  curve.coefficient_area = detail::area_against_diagonal(curve.points);
  return curve;
}

inline QiniCurve qini_curve(std::span<const UpliftPrediction> preds, std::span<const int> outcomes,
                            std::span<const int> treatments, std::size_t n_points = 10) {
  std::vector<double> effects;
  effects.reserve(preds.size());
  for (const auto& p : preds) effects.push_back(p.effect);
  return qini_curve(effects, outcomes, treatments, n_points);
}

/// Pointwise mean of curves with the same number of points; gaps are left
/// out of each average and a point is a gap only if it is one in every curve.
inline QiniCurve mean_curve(std::span<const QiniCurve> curves) {
  if (curves.empty()) fail(ErrorKind::InvalidArgument, "no curves to average");
  const std::size_t m = curves.front().points.size();
  for (const auto& c : curves)
    if (c.points.size() != m) fail(ErrorKind::InvalidArgument, "curves have different point counts");
  QiniCurve out;
  for (std::size_t i = 0; i < m; ++i) {
    double f = 0.0, u = 0.0, defined = 0.0;
    for (const auto& c : curves) {
      f += c.points[i].fraction;
      if (!c.points[i].gap) {
        u += c.points[i].uplift;
        defined += 1;
      }
    }
    QiniPoint p;
    p.fraction = f / static_cast<double>(curves.size());
    p.gap = defined == 0;
    p.uplift = p.gap ? std::numeric_limits<double>::quiet_NaN() : u / defined;
    out.points.push_back(p);
  }
  out.coefficient_area = detail::area_against_diagonal(out.points);
  return out;
}

inline nlohmann::json to_json(const QiniCurve& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.points) {
    nlohmann::json pj = {{"fraction", p.fraction}, {"gap", p.gap}};
    pj["uplift"] = p.gap ? nlohmann::json(nullptr) : nlohmann::json(p.uplift);
    pts.push_back(std::move(pj));
  }
  return {{"points", std::move(pts)}, {"coefficient_area", c.coefficient_area}, {"gaps", c.gaps()}};
}

/// `fraction,uplift,gap` rows; a gap leaves uplift empty.
inline std::string curve_to_csv(const QiniCurve& c) {
  std::string out = "fraction,uplift,gap\n";
  for (const auto& p : c.points)
    out += format_double(p.fraction) + "," + (p.gap ? std::string() : format_double(p.uplift)) + "," +
           (p.gap ? "1" : "0") + "\n";
  return out;
}

// ---- paired t-test --------------------------------------------------------

struct TTestResult {
  double t_stat = 0.0;
  double p_value = 1.0;
  int dof = 0;
  bool degenerate = false;  // zero variance of the differences
};

/// Two-sided paired t-test of mean(a - b) = 0. With zero-variance
/// differences: all-zero gives t = 0, p = 1; a constant nonzero shift gives
/// t = ±inf, p = 0. Both set `degenerate`.
inline TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) fail(ErrorKind::LengthMismatch, "paired samples differ in length");
  if (a.size() < 2) fail(ErrorKind::TooFewSamples, "a paired t-test needs at least two pairs");
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  TTestResult r;
  r.dof = static_cast<int>(n) - 1;
  const double sd = std::sqrt(ss / r.dof);
  if (sd == 0.0) {
    r.degenerate = true;
    if (mean == 0.0) {
      r.t_stat = 0.0;
      r.p_value = 1.0;
    } else {
      r.t_stat = std::copysign(std::numeric_limits<double>::infinity(), mean);
      r.p_value = 0.0;
    }
    return r;
  }
  r.t_stat = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p_value = student_t_two_sided(r.t_stat, r.dof);
  return r;
}

inline nlohmann::json to_json(const TTestResult& r) {
  nlohmann::json j = {{"dof", r.dof}, {"p_value", r.p_value}, {"degenerate", r.degenerate}};
  j["t_stat"] = std::isfinite(r.t_stat) ? nlohmann::json(r.t_stat) : nlohmann::json(r.t_stat > 0 ? "inf" : "-inf");
  return j;
}

// ---- k-fold ---------------------------------------------------------------

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Shuffles 0..n-1 with the seed and deals consecutive blocks into k test
/// folds; the first n mod k folds get one extra row. Index lists are sorted.
inline std::vector<Fold> kfold_split(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) fail(ErrorKind::InvalidK, "need 2 <= k <= n, got k=" + std::to_string(k) + ", n=" + std::to_string(n));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(std::span<std::size_t>(idx), rng);
  std::vector<std::size_t> fold_of(n);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) fold_of[idx[pos++]] = f;
  }
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < k; ++f) (fold_of[i] == f ? folds[f].test : folds[f].train).push_back(i);
  return folds;
}

}  // namespace cclass
