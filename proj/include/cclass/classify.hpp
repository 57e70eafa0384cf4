#pragma once

// Two-model causal classification: one probabilistic classifier per
// treatment arm, fitted on the outcome's parents (treatment excluded); the
// estimated effect for an individual is the difference of the two
// predicted outcome probabilities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cclass/dataset.hpp"
#include "cclass/discovery.hpp"
#include "cclass/error.hpp"
#include "cclass/random.hpp"

namespace cclass {

// ---- feature encoding -----------------------------------------------------

struct EncodedColumn {
  std::string name;
  ColumnType type = ColumnType::continuous;
  std::vector<std::string> levels;

  std::size_t width() const { return type == ColumnType::categorical ? levels.size() : 1; }
};

/// Maps dataset columns to a numeric design matrix. Vocabularies are frozen
/// when the encoder is fitted: binary columns give one 0/1 feature (1 for the
/// second level), categorical columns are one-hot encoded, and categories
/// unseen at fit time encode as all zeros with a warning.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;

  static FeatureEncoder fit(const Dataset& data, std::span<const std::string> names) {
    FeatureEncoder e;
    for (const auto& n : names) {
      const Column& c = data.column(n);
      e.columns_.push_back({c.name, c.type, c.levels});
    }
    return e;
  }

  const std::vector<EncodedColumn>& columns() const { return columns_; }

  std::vector<std::string> column_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
  }

  std::size_t width() const {
    std::size_t w = 0;
    for (const auto& c : columns_) w += c.width();
    return w;
  }

  Eigen::MatrixXd transform(const Dataset& data, std::vector<std::string>* warnings = nullptr) const {
    std::string missing;
    for (const auto& c : columns_)
      if (!data.contains(c.name)) missing += (missing.empty() ? "" : ", ") + c.name;
    if (!missing.empty()) fail(ErrorKind::MissingColumn, "input lacks model columns: " + missing);

    Eigen::MatrixXd x(static_cast<Eigen::Index>(data.rows()), static_cast<Eigen::Index>(width()));
    Eigen::Index offset = 0;
    for (const auto& ec : columns_) {
      const Column& c = data.column(ec.name);
      if (c.has_missing()) fail(ErrorKind::MissingValues, "column '" + c.name + "' has missing values");
      if (ec.type == ColumnType::continuous) {
        if (c.is_discrete()) fail(ErrorKind::Schema, "column '" + c.name + "' was continuous at training time");
        for (std::size_t r = 0; r < data.rows(); ++r) x(static_cast<Eigen::Index>(r), offset) = c.values[r];
        offset += 1;
        continue;
      }
      if (!c.is_discrete()) fail(ErrorKind::Schema, "column '" + c.name + "' was discrete at training time");
      // Translate this dataset's codes into the frozen vocabulary.
      std::vector<int> remap(c.levels.size(), -1);
      for (std::size_t k = 0; k < c.levels.size(); ++k) {
        auto it = std::find(ec.levels.begin(), ec.levels.end(), c.levels[k]);
        if (it != ec.levels.end()) remap[k] = static_cast<int>(it - ec.levels.begin());
      }
      bool unseen = false;
      const Eigen::Index w = static_cast<Eigen::Index>(ec.width());
      for (std::size_t r = 0; r < data.rows(); ++r) {
        const int code = remap[static_cast<std::size_t>(c.codes[r])];
        const auto row = static_cast<Eigen::Index>(r);
        if (code < 0) unseen = true;
        if (ec.type == ColumnType::binary) {
          x(row, offset) = code == 1 ? 1.0 : 0.0;
        } else {
          for (Eigen::Index k = 0; k < w; ++k) x(row, offset + k) = (k == code) ? 1.0 : 0.0;
        }
      }
      if (unseen && warnings)
        warnings->push_back("column '" + c.name + "' has categories unseen at training time; encoded as zeros");
      offset += w;
    }
    return x;
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : columns_) {
      nlohmann::json cj = {{"name", c.name}, {"type", cclass::to_string(c.type)}};
      if (c.type != ColumnType::continuous) cj["levels"] = c.levels;
      j.push_back(std::move(cj));
    }
    return j;
  }

  static FeatureEncoder from_json(const nlohmann::json& j) {
    FeatureEncoder e;
    for (const auto& cj : j) {
      EncodedColumn c;
      c.name = cj.at("name").get<std::string>();
      auto type = parse_column_type(cj.at("type").get<std::string>());
      if (!type) fail(ErrorKind::Schema, "bad encoder column type");
      c.type = *type;
      if (cj.contains("levels")) c.levels = cj["levels"].get<std::vector<std::string>>();
      e.columns_.push_back(std::move(c));
    }
    return e;
  }

  friend bool operator==(const FeatureEncoder& a, const FeatureEncoder& b) {
    if (a.columns_.size() != b.columns_.size()) return false;
    for (std::size_t i = 0; i < a.columns_.size(); ++i)
      if (a.columns_[i].name != b.columns_[i].name || a.columns_[i].type != b.columns_[i].type ||
          a.columns_[i].levels != b.columns_[i].levels)
        return false;
    return true;
  }

 private:
  std::vector<EncodedColumn> columns_;
};

// ---- logistic regression --------------------------------------------------

struct LogisticParams {
  int max_iterations = 100;
  double l2_penalty = 1e-4;
  double convergence_tol = 1e-8;

  void validate() const {
    if (max_iterations <= 0) fail(ErrorKind::InvalidArgument, "max_iterations must be positive");
    if (!(l2_penalty > 0.0)) fail(ErrorKind::InvalidArgument, "l2_penalty must be positive");
    if (!(convergence_tol > 0.0)) fail(ErrorKind::InvalidArgument, "convergence_tol must be positive");
  }
};

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// weights(0) is the intercept; the rest pair with design-matrix columns.
struct LogisticModel {
  Eigen::VectorXd weights;
  int iterations = 0;
  bool converged = false;
  bool degenerate = false;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return sigmoid(weights(0) + x.dot(weights.tail(weights.size() - 1)));
  }
};

namespace detail {

inline Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  return a;
}

}  // namespace detail

/// Penalized log-likelihood Σ[y log p + (1-y) log(1-p)] - (λ/2)·‖w₁..‖²; the
/// intercept is not penalized.
inline double logistic_objective(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, std::span<const int> y,
                                 double l2) {
  const Eigen::MatrixXd a = detail::with_intercept(x);
  const Eigen::VectorXd eta = a * w;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double z = eta(i);
    // log(1 + e^z) evaluated stably
    const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    ll += y[static_cast<std::size_t>(i)] * z - softplus;
  }
  return ll - 0.5 * l2 * w.tail(w.size() - 1).squaredNorm();
}

inline Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& w, const Eigen::MatrixXd& x, std::span<const int> y,
                                         double l2) {
  const Eigen::MatrixXd a = detail::with_intercept(x);
  const Eigen::VectorXd eta = a * w;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid(i) = y[static_cast<std::size_t>(i)] - sigmoid(eta(i));
  Eigen::VectorXd g = a.transpose() * resid;
  g.tail(g.size() - 1) -= l2 * w.tail(w.size() - 1);
  return g;
}

namespace detail {

inline void check_labels(std::span<const int> y, std::size_t rows) {
  if (y.size() != rows) fail(ErrorKind::LengthMismatch, "labels and rows differ in length");
  if (rows == 0) fail(ErrorKind::InvalidArgument, "cannot fit a model on zero rows");
  for (int v : y)
    if (v != 0 && v != 1) fail(ErrorKind::NonBinary, "labels must be 0 or 1");
}

inline double smoothed_rate(std::span<const int> y) {
  const double pos = std::accumulate(y.begin(), y.end(), 0.0);
  return (pos + 1.0) / (static_cast<double>(y.size()) + 2.0);
}

inline bool single_class(std::span<const int> y) {
  return std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; });
}

}  // namespace detail

/// L2-regularized maximum likelihood by iteratively reweighted least squares
/// (Newton steps with step halving). Single-class labels yield a constant
/// model at the smoothed rate (pos+1)/(n+2).
inline LogisticModel fit_logistic(const Eigen::MatrixXd& x, std::span<const int> y, const LogisticParams& hp = {},
                                  std::vector<std::string>* warnings = nullptr) {
  hp.validate();
  detail::check_labels(y, static_cast<std::size_t>(x.rows()));
  const Eigen::Index p = x.cols() + 1;
  LogisticModel m;
  m.weights = Eigen::VectorXd::Zero(p);
  if (detail::single_class(y)) {
    const double rate = detail::smoothed_rate(y);
    m.weights(0) = std::log(rate / (1.0 - rate));
    m.degenerate = true;
    m.converged = true;
    if (warnings) warnings->push_back("single-class labels; fitted a constant model");
    return m;
  }

  const Eigen::MatrixXd a = detail::with_intercept(x);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(p, hp.l2_penalty);
  penalty(0) = 0.0;
  double objective = logistic_objective(m.weights, x, y, hp.l2_penalty);
  for (int it = 1; it <= hp.max_iterations; ++it) {
    m.iterations = it;
    const Eigen::VectorXd eta = a * m.weights;
    Eigen::VectorXd prob(eta.size()), wts(eta.size()), resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob(i) = sigmoid(eta(i));
      wts(i) = std::max(prob(i) * (1.0 - prob(i)), 1e-12);
      resid(i) = y[static_cast<std::size_t>(i)] - prob(i);
    }
    Eigen::VectorXd grad = a.transpose() * resid - penalty.cwiseProduct(m.weights);
    Eigen::MatrixXd hess = a.transpose() * wts.asDiagonal() * a;
    hess.diagonal() += penalty;
    hess.diagonal().array() += 1e-10;  // keeps the intercept block positive definite
    Eigen::VectorXd step = hess.ldlt().solve(grad);

    double scale = 1.0;
    Eigen::VectorXd next = m.weights + step;
    double next_obj = logistic_objective(next, x, y, hp.l2_penalty);
    while (next_obj < objective - 1e-12 * std::fabs(objective) && scale > 1e-6) {
      scale *= 0.5;
      next = m.weights + scale * step;
      next_obj = logistic_objective(next, x, y, hp.l2_penalty);
    }
    const double delta = (scale * step).cwiseAbs().maxCoeff();
    m.weights = next;
    objective = next_obj;
    if (delta < hp.convergence_tol) {
      m.converged = true;
      break;
    }
  }
  if (!m.converged && warnings)
    warnings->push_back("logistic regression hit max_iterations before converging");
  return m;
}

// ---- random forest --------------------------------------------------------

struct ForestParams {
  int n_trees = 100;
  int max_depth = 0;     // 0 = unbounded
  int min_leaf = 1;
  int feature_subsample = 0;  // features tried per split; 0 = floor(sqrt(width)), at least 1
  std::uint64_t seed = 1;

  void validate() const {
    if (n_trees <= 0) fail(ErrorKind::InvalidArgument, "n_trees must be positive");
    if (max_depth < 0) fail(ErrorKind::InvalidArgument, "max_depth must be >= 0");
    if (min_leaf <= 0) fail(ErrorKind::InvalidArgument, "min_leaf must be positive");
    if (feature_subsample < 0) fail(ErrorKind::InvalidArgument, "feature_subsample must be >= 0");
  }
};

/// Flattened binary tree; feature < 0 marks a leaf whose `value` is the
/// fraction of positive (bootstrap) samples in it.
struct Tree {
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;

  int add_leaf(double v) {
    feature.push_back(-1);
    threshold.push_back(0.0);
    left.push_back(-1);
    right.push_back(-1);
    value.push_back(v);
    return static_cast<int>(feature.size()) - 1;
  }

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int node = 0;
    while (feature[static_cast<std::size_t>(node)] >= 0) {
      const auto i = static_cast<std::size_t>(node);
      node = x(feature[i]) <= threshold[i] ? left[i] : right[i];
    }
    return value[static_cast<std::size_t>(node)];
  }
};

struct ForestModel {
  std::vector<Tree> trees;
  double oob_accuracy = 0.0;  // at a 0.5 cutoff; NaN when no row was ever out of bag
  bool degenerate = false;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
  }
};

namespace detail {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = std::numeric_limits<double>::infinity();
};

// Grows one CART tree on the bootstrap sample `rows` with Gini splits.
inline Tree grow_tree(const Eigen::MatrixXd& x, std::span<const int> y, std::vector<std::size_t> rows,
                      const ForestParams& hp, int feature_subsample, Rng& rng) {
  Tree tree;
  struct Pending {
    int node;
    std::size_t begin, end;
    int depth;
  };
  const int width = static_cast<int>(x.cols());
  std::vector<int> features(static_cast<std::size_t>(width));
  std::iota(features.begin(), features.end(), 0);
  std::vector<std::pair<double, int>> sorted;

  auto positives = [&](std::size_t b, std::size_t e) {
    double pos = 0;
    for (std::size_t i = b; i < e; ++i) pos += y[rows[i]];
    return pos;
  };

  tree.add_leaf(0.0);
  std::vector<Pending> stack{{0, 0, rows.size(), 0}};
  while (!stack.empty()) {
    const Pending job = stack.back();
    stack.pop_back();
    const std::size_t n = job.end - job.begin;
    const double pos = positives(job.begin, job.end);
    tree.value[static_cast<std::size_t>(job.node)] = pos / static_cast<double>(n);
    const bool pure = pos == 0.0 || pos == static_cast<double>(n);
    if (pure || n < 2 * static_cast<std::size_t>(hp.min_leaf) || (hp.max_depth > 0 && job.depth >= hp.max_depth))
      continue;

    // partial Fisher-Yates: the first feature_subsample entries are the draw
    for (int k = 0; k < feature_subsample; ++k) {
      const auto j = k + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(width - k)));
      std::swap(features[static_cast<std::size_t>(k)], features[static_cast<std::size_t>(j)]);
    }
    SplitChoice best;
    for (int k = 0; k < feature_subsample; ++k) {
      const int f = features[static_cast<std::size_t>(k)];
      sorted.clear();
      for (std::size_t i = job.begin; i < job.end; ++i)
        sorted.emplace_back(x(static_cast<Eigen::Index>(rows[i]), f), y[rows[i]]);
      std::sort(sorted.begin(), sorted.end());
      if (sorted.front().first == sorted.back().first) continue;
      double left_n = 0, left_pos = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_n += 1;
        left_pos += sorted[i].second;
        if (sorted[i].first == sorted[i + 1].first) continue;
        const double right_n = static_cast<double>(n) - left_n;
        if (left_n < hp.min_leaf || right_n < hp.min_leaf) continue;
        const double right_pos = pos - left_pos;
        // n_L·gini_L + n_R·gini_R, halved
        const double score = left_pos * (left_n - left_pos) / left_n + right_pos * (right_n - right_pos) / right_n;
        if (score < best.score) {
          best.score = score;
          best.feature = f;
          best.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
        }
      }
    }
    if (best.feature < 0) continue;

    auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(job.begin),
                              rows.begin() + static_cast<std::ptrdiff_t>(job.end), [&](std::size_t r) {
                                return x(static_cast<Eigen::Index>(r), best.feature) <= best.threshold;
                              });
    const std::size_t split = static_cast<std::size_t>(mid - rows.begin());
    const int l = tree.add_leaf(0.0);
    const int r = tree.add_leaf(0.0);
    const auto i = static_cast<std::size_t>(job.node);
    tree.feature[i] = best.feature;
    tree.threshold[i] = best.threshold;
    tree.left[i] = l;
    tree.right[i] = r;
    stack.push_back({r, split, job.end, job.depth + 1});
    stack.push_back({l, job.begin, split, job.depth + 1});
  }
  return tree;
}

}  // namespace detail

/// Bagged CART trees with Gini splits. Tree b draws from its own stream
/// derived from (seed, b), so results depend on the seed alone. With no
/// features the forest is a single leaf at the exact positive rate; with
/// single-class labels, a single leaf at the smoothed rate (pos+1)/(n+2).
inline ForestModel fit_forest(const Eigen::MatrixXd& x, std::span<const int> y, const ForestParams& hp = {},
                              std::vector<std::string>* warnings = nullptr) {
  hp.validate();
  detail::check_labels(y, static_cast<std::size_t>(x.rows()));
  const std::size_t n = y.size();
  ForestModel m;
  if (detail::single_class(y) || x.cols() == 0) {
    Tree t;
    if (detail::single_class(y)) {
      t.add_leaf(detail::smoothed_rate(y));
      m.degenerate = true;
      if (warnings) warnings->push_back("single-class labels; fitted a constant model");
    } else {
      t.add_leaf(std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n));
    }
    m.trees.push_back(std::move(t));
    m.oob_accuracy = std::nan("");
    return m;
  }

  const int width = static_cast<int>(x.cols());
  const int feature_subsample = hp.feature_subsample > 0
                               ? std::min(hp.feature_subsample, width)
                               : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(width)))));
  std::vector<double> oob_sum(n, 0.0);
  std::vector<int> oob_count(n, 0);
  std::vector<char> in_bag(n);
  for (int b = 0; b < hp.n_trees; ++b) {
    Rng rng(mix_seed(hp.seed, static_cast<std::uint64_t>(b)));
    std::vector<std::size_t> rows(n);
    std::fill(in_bag.begin(), in_bag.end(), 0);
    for (auto& r : rows) {
      r = static_cast<std::size_t>(uniform_index(rng, n));
      in_bag[r] = 1;
    }
    m.trees.push_back(detail::grow_tree(x, y, std::move(rows), hp, feature_subsample, rng));
    for (std::size_t i = 0; i < n; ++i)
      if (!in_bag[i]) {
        oob_sum[i] += m.trees.back().predict(x.row(static_cast<Eigen::Index>(i)));
        ++oob_count[i];
      }
  }
  double correct = 0, counted = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!oob_count[i]) continue;
    counted += 1;
    const int guess = oob_sum[i] / oob_count[i] > 0.5 ? 1 : 0;
    correct += guess == y[i];
  }
  m.oob_accuracy = counted > 0 ? correct / counted : std::nan("");
  return m;
}

// ---- classifier plug-in ---------------------------------------------------

enum class ClassifierKind { logistic, forest };

inline std::string_view to_string(ClassifierKind k) { return k == ClassifierKind::logistic ? "logistic" : "forest"; }

inline std::optional<ClassifierKind> parse_classifier(std::string_view s) {
  if (s == "logistic") return ClassifierKind::logistic;
  if (s == "forest") return ClassifierKind::forest;
  return std::nullopt;
}

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::forest;
  LogisticParams logistic;
  ForestParams forest;

  void validate() const {
    if (kind == ClassifierKind::logistic)
      logistic.validate();
    else
      forest.validate();
  }
};

/// Fitted classifier plus the encoder that turns dataset columns into its
/// features.
class ProbabilisticModel {
 public:
  using Estimator = std::variant<LogisticModel, ForestModel>;

  ProbabilisticModel() = default;
  ProbabilisticModel(FeatureEncoder encoder, Estimator estimator)
      : encoder_(std::move(encoder)), estimator_(std::move(estimator)) {}

  const FeatureEncoder& encoder() const { return encoder_; }
  const Estimator& estimator() const { return estimator_; }
  std::vector<std::string> feature_names() const { return encoder_.column_names(); }

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    const double p = std::visit([&](const auto& m) { return m.predict(x); }, estimator_);
    return std::clamp(p, 0.0, 1.0);
  }

  std::vector<double> predict_proba(const Eigen::MatrixXd& x) const {
    std::vector<double> out(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = predict_row(x.row(i));
    return out;
  }

  std::vector<double> predict_proba(const Dataset& data, std::vector<std::string>* warnings = nullptr) const {
    return predict_proba(encoder_.transform(data, warnings));
  }

 private:
  FeatureEncoder encoder_;
  Estimator estimator_;
};

inline ProbabilisticModel fit_model(const FeatureEncoder& encoder, const Eigen::MatrixXd& x, std::span<const int> y,
                                    const ClassifierSpec& spec, std::vector<std::string>* warnings = nullptr) {
  spec.validate();
  if (spec.kind == ClassifierKind::logistic)
    return {encoder, fit_logistic(x, y, spec.logistic, warnings)};
  return {encoder, fit_forest(x, y, spec.forest, warnings)};
}

// ---- two-model pair -------------------------------------------------------

struct TwoModelPair {
  std::string treatment;
  std::string outcome;
  std::vector<std::string> parents_excl_t;
  ProbabilisticModel treated;  // fitted on T = 1
  ProbabilisticModel control;  // fitted on T = 0
  std::size_t n_treated = 0;
  std::size_t n_control = 0;
  ClassifierSpec spec;
  std::vector<std::string> warnings;
};

struct UpliftPrediction {
  double effect = 0.0;
  int assign = 0;
  double p1 = 0.0;
  double p0 = 0.0;
};

namespace detail {

inline const Column& binary_column(const Dataset& data, std::string_view name) {
  const Column& c = data.column(name);
  if (!c.is_discrete() || c.arity() != 2)
    fail(ErrorKind::NonBinary, "column '" + c.name + "' must be binary");
  if (c.has_missing()) fail(ErrorKind::MissingValues, "column '" + c.name + "' has missing values");
  return c;
}

}  // namespace detail

/// Fits the treated-arm and control-arm models on the given covariates.
/// Both arms share one encoder fitted on all rows; with the forest
/// classifier both arms also share the seed, so relabelling the arms swaps
/// the two models exactly.
inline TwoModelPair train_two_model(const Dataset& data, std::string_view treatment, std::string_view outcome,
                                    std::vector<std::string> covariates, const ClassifierSpec& spec) {
  spec.validate();
  const Column& t = detail::binary_column(data, treatment);
  const Column& y = detail::binary_column(data, outcome);
  for (const auto& c : covariates) {
    data.index_of(c);
    if (c == treatment || c == outcome)
      fail(ErrorKind::InvalidArgument, "covariates may not include the treatment or outcome");
  }

  std::vector<std::size_t> arm1, arm0;
  for (std::size_t r = 0; r < data.rows(); ++r) (t.codes[r] == 1 ? arm1 : arm0).push_back(r);
  if (arm1.empty() || arm0.empty())
    fail(ErrorKind::EmptyArm, "treated rows: " + std::to_string(arm1.size()) +
                                  ", control rows: " + std::to_string(arm0.size()));

  TwoModelPair pair;
  pair.treatment = std::string(treatment);
  pair.outcome = std::string(outcome);
  pair.parents_excl_t = std::move(covariates);
  pair.n_treated = arm1.size();
  pair.n_control = arm0.size();
  pair.spec = spec;
  if (pair.parents_excl_t.empty())
    pair.warnings.push_back("no covariates: both arm models are constant");

  const FeatureEncoder encoder = FeatureEncoder::fit(data, pair.parents_excl_t);
  const Eigen::MatrixXd x = encoder.transform(data, &pair.warnings);
  auto fit_arm = [&](const std::vector<std::size_t>& rows, const char* arm) {
    Eigen::MatrixXd xa(static_cast<Eigen::Index>(rows.size()), x.cols());
    std::vector<int> ya(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      xa.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
      ya[i] = y.codes[rows[i]];
    }
    std::vector<std::string> w;
    ProbabilisticModel m = fit_model(encoder, xa, ya, spec, &w);
    for (auto& msg : w) pair.warnings.push_back(std::string(arm) + " arm: " + msg);
    return m;
  };
  pair.treated = fit_arm(arm1, "treated");
  pair.control = fit_arm(arm0, "control");
  return pair;
}

/// Discovers the outcome's parents when `parents` is not supplied, drops the
/// treatment from them, and fits the two arm models on what remains.
inline TwoModelPair train_cctm(const Dataset& data, std::string_view treatment, std::string_view outcome,
                               const std::optional<ParentSet>& parents, const ClassifierSpec& spec,
                               const DiscoveryConfig& cfg = {}) {
  detail::binary_column(data, treatment);
  detail::binary_column(data, outcome);
  const ParentSet ps = parents ? *parents : discover_parents(data, outcome, cfg);
  std::vector<std::string> covariates;
  for (const auto& m : ps.members)
    if (m != treatment && m != outcome) covariates.push_back(m);
  TwoModelPair pair = train_two_model(data, treatment, outcome, std::move(covariates), spec);
  if (!ps.contains(treatment))
    pair.warnings.insert(pair.warnings.begin(),
                         "treatment '" + std::string(treatment) + "' was not found among the outcome's parents");
  return pair;
}

/// Per-row effect p1 - p0 and assignment (effect > theta), in input order.
inline std::vector<UpliftPrediction> predict_cctm(const TwoModelPair& pair, const Dataset& data, double theta,
                                                  std::vector<std::string>* warnings = nullptr) {
  if (!(theta >= 0.0)) fail(ErrorKind::InvalidArgument, "theta must be >= 0");
  const Eigen::MatrixXd x = pair.treated.encoder().transform(data, warnings);
  std::vector<UpliftPrediction> out(data.rows());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    auto& p = out[i];
    p.p1 = pair.treated.predict_row(x.row(static_cast<Eigen::Index>(i)));
    p.p0 = pair.control.predict_row(x.row(static_cast<Eigen::Index>(i)));
    p.effect = p.p1 - p.p0;
    p.assign = p.effect > theta ? 1 : 0;
  }
  return out;
}

/// Indices ordered by descending value; stable, so ties keep input order.
inline std::vector<std::size_t> rank_by_effect(std::span<const double> effects) {
  for (double e : effects)
    if (!std::isfinite(e)) fail(ErrorKind::InvalidArgument, "effects must be finite");
  std::vector<std::size_t> order(effects.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return effects[a] > effects[b]; });
  return order;
}

inline std::vector<std::size_t> rank_by_effect(std::span<const UpliftPrediction> preds) {
  std::vector<double> effects;
  effects.reserve(preds.size());
  for (const auto& p : preds) effects.push_back(p.effect);
  return rank_by_effect(effects);
}

// ---- persistence ----------------------------------------------------------

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json estimator_json(const ProbabilisticModel::Estimator& e) {
  if (const auto* lm = std::get_if<LogisticModel>(&e)) {
    return {{"kind", "logistic"},
            {"weights", std::vector<double>(lm->weights.data(), lm->weights.data() + lm->weights.size())},
            {"iterations", lm->iterations},
            {"converged", lm->converged},
            {"degenerate", lm->degenerate}};
  }
  const auto& fm = std::get<ForestModel>(e);
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : fm.trees)
    trees.push_back({{"feature", t.feature},
                     {"threshold", t.threshold},
                     {"left", t.left},
                     {"right", t.right},
                     {"value", t.value}});
  nlohmann::json j = {{"kind", "forest"}, {"degenerate", fm.degenerate}, {"trees", std::move(trees)}};
  j["oob_accuracy"] = std::isnan(fm.oob_accuracy) ? nlohmann::json(nullptr) : nlohmann::json(fm.oob_accuracy);
  return j;
}

inline ProbabilisticModel::Estimator estimator_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "logistic") {
    LogisticModel m;
    const auto w = j.at("weights").get<std::vector<double>>();
    m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    m.iterations = j.at("iterations").get<int>();
    m.converged = j.at("converged").get<bool>();
    m.degenerate = j.at("degenerate").get<bool>();
    return m;
  }
  if (kind == "forest") {
    ForestModel m;
    m.degenerate = j.at("degenerate").get<bool>();
    m.oob_accuracy = j.at("oob_accuracy").is_null() ? std::nan("") : j.at("oob_accuracy").get<double>();
    for (const auto& tj : j.at("trees")) {
      Tree t;
      t.feature = tj.at("feature").get<std::vector<int>>();
      t.threshold = tj.at("threshold").get<std::vector<double>>();
      t.left = tj.at("left").get<std::vector<int>>();
      t.right = tj.at("right").get<std::vector<int>>();
      t.value = tj.at("value").get<std::vector<double>>();
      m.trees.push_back(std::move(t));
    }
    if (m.trees.empty()) fail(ErrorKind::Schema, "forest model without trees");
    return m;
  }
  fail(ErrorKind::Schema, "unknown model kind '" + kind + "'");
}

}  // namespace detail

inline nlohmann::json to_json(const ClassifierSpec& s) {
  nlohmann::json j = {{"kind", to_string(s.kind)}};
  if (s.kind == ClassifierKind::logistic)
    j["logistic"] = {{"max_iterations", s.logistic.max_iterations},
                     {"l2_penalty", s.logistic.l2_penalty},
                     {"convergence_tol", s.logistic.convergence_tol}};
  else
    j["forest"] = {{"n_trees", s.forest.n_trees},
                   {"max_depth", s.forest.max_depth},
                   {"min_leaf", s.forest.min_leaf},
                   {"feature_subsample", s.forest.feature_subsample},
                   {"seed", s.forest.seed}};
  return j;
}

inline ClassifierSpec classifier_spec_from_json(const nlohmann::json& j) {
  ClassifierSpec s;
  auto kind = parse_classifier(j.at("kind").get<std::string>());
  if (!kind) fail(ErrorKind::Schema, "unknown classifier kind");
  s.kind = *kind;
  if (j.contains("logistic")) {
    const auto& l = j["logistic"];
    s.logistic.max_iterations = l.value("max_iterations", s.logistic.max_iterations);
    s.logistic.l2_penalty = l.value("l2_penalty", s.logistic.l2_penalty);
    s.logistic.convergence_tol = l.value("convergence_tol", s.logistic.convergence_tol);
  }
  if (j.contains("forest")) {
    const auto& f = j["forest"];
    s.forest.n_trees = f.value("n_trees", s.forest.n_trees);
    s.forest.max_depth = f.value("max_depth", s.forest.max_depth);
    s.forest.min_leaf = f.value("min_leaf", s.forest.min_leaf);
    s.forest.feature_subsample = f.value("feature_subsample", s.forest.feature_subsample);
    s.forest.seed = f.value("seed", s.forest.seed);
  }
  s.validate();
  return s;
}

inline nlohmann::json to_json(const TwoModelPair& p) {
  return {{"format", "cclass.two_model"},
          {"format_version", kModelFormatVersion},
          {"treatment", p.treatment},
          {"outcome", p.outcome},
          {"parents_excl_t", p.parents_excl_t},
          {"n_treated", p.n_treated},
          {"n_control", p.n_control},
          {"classifier", to_json(p.spec)},
          {"encoder", p.treated.encoder().to_json()},
          {"treated_model", detail::estimator_json(p.treated.estimator())},
          {"control_model", detail::estimator_json(p.control.estimator())},
          {"warnings", p.warnings}};
}

inline TwoModelPair two_model_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", std::string()) != "cclass.two_model")
      fail(ErrorKind::Schema, "not a two-model file");
    if (j.at("format_version").get<int>() != kModelFormatVersion)
      fail(ErrorKind::Schema, "unsupported model format version");
    TwoModelPair p;
    p.treatment = j.at("treatment").get<std::string>();
    p.outcome = j.at("outcome").get<std::string>();
    p.parents_excl_t = j.at("parents_excl_t").get<std::vector<std::string>>();
    p.n_treated = j.at("n_treated").get<std::size_t>();
    p.n_control = j.at("n_control").get<std::size_t>();
    p.spec = classifier_spec_from_json(j.at("classifier"));
    const FeatureEncoder enc = FeatureEncoder::from_json(j.at("encoder"));
    if (enc.column_names() != p.parents_excl_t)
      fail(ErrorKind::Schema, "encoder columns do not match parents_excl_t");
    p.treated = ProbabilisticModel(enc, detail::estimator_from_json(j.at("treated_model")));
    p.control = ProbabilisticModel(enc, detail::estimator_from_json(j.at("control_model")));
    p.warnings = j.value("warnings", std::vector<std::string>{});
    return p;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, std::string("malformed model file: ") + e.what());
  }
}

}  // namespace cclass
