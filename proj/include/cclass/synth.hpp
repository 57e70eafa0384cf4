#pragma once

// Synthetic causal-classification benchmarks. Two fixed networks over a
// binary treatment T, binary outcome Y and ten binary covariates X1..X10:
// group1 is causally sufficient; group2 adds hidden U1..U3 whose columns are
// withheld from the emitted data. Irrelevant noise columns are appended.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cclass/bayesnet.hpp"
#include "cclass/dataset.hpp"
#include "cclass/error.hpp"
#include "cclass/io.hpp"
#include "cclass/random.hpp"

namespace cclass {

enum class SynthGroup { group1, group2 };

inline std::string_view to_string(SynthGroup g) { return g == SynthGroup::group1 ? "group1" : "group2"; }

inline std::optional<SynthGroup> parse_group(std::string_view s) {
  if (s == "group1") return SynthGroup::group1;
  if (s == "group2") return SynthGroup::group2;
  return std::nullopt;
}

struct SynthConfig {
  SynthGroup group = SynthGroup::group1;
  std::size_t n_samples = 10000;
  std::size_t n_noise_vars = 90;
  std::optional<std::uint64_t> seed;
  double continuous_fraction = 0.5;  // share of noise columns that are standard normal

  void validate() const {
    if (n_samples == 0) fail(ErrorKind::InvalidArgument, "n_samples must be positive");
    if (!seed) fail(ErrorKind::InvalidArgument, "a seed is required");
    if (!(continuous_fraction >= 0.0 && continuous_fraction <= 1.0))
      fail(ErrorKind::InvalidArgument, "continuous_fraction must lie in [0,1]");
  }
};

inline nlohmann::json to_json(const SynthConfig& c) {
  nlohmann::json j = {{"group", to_string(c.group)},
                      {"n_samples", c.n_samples},
                      {"n_noise_vars", c.n_noise_vars},
                      {"continuous_fraction", c.continuous_fraction}};
  j["seed"] = c.seed ? nlohmann::json(*c.seed) : nlohmann::json(nullptr);
  return j;
}

// ---- response types -------------------------------------------------------

enum class Response { positive, negative, nonresponse0, nonresponse1 };

inline std::string_view to_string(Response r) {
  switch (r) {
    case Response::positive: return "positive";
    case Response::negative: return "negative";
    case Response::nonresponse0: return "nonresponse0";
    case Response::nonresponse1: return "nonresponse1";
  }
  return "?";
}

inline std::optional<Response> parse_response(std::string_view s) {
  for (Response r : {Response::positive, Response::negative, Response::nonresponse0, Response::nonresponse1})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

/// (y0, y1) = (0,1) positive, (1,0) negative, (0,0) / (1,1) non-responses.
inline Response response_of(int y0, int y1) {
  if (y0 == 0) return y1 == 1 ? Response::positive : Response::nonresponse0;
  return y1 == 1 ? Response::nonresponse1 : Response::negative;
}

struct GroundTruth {
  std::vector<double> effect;
  std::vector<Response> response;
  std::vector<int> y0;
  std::vector<int> y1;

  std::size_t size() const { return effect.size(); }

  GroundTruth take(std::span<const std::size_t> rows) const {
    GroundTruth g;
    for (auto r : rows) {
      g.effect.push_back(effect.at(r));
      g.response.push_back(response.at(r));
      g.y0.push_back(y0.at(r));
      g.y1.push_back(y1.at(r));
    }
    return g;
  }
};

inline std::string ground_truth_to_csv(const GroundTruth& g) {
  std::string out = "row_id,effect,response,y0,y1\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    out += std::to_string(i) + "," + format_double(g.effect[i]) + "," + std::string(to_string(g.response[i])) + "," +
           std::to_string(g.y0[i]) + "," + std::to_string(g.y1[i]) + "\n";
  return out;
}

/// Reads the CSV written by ground_truth_to_csv; only `effect` is required,
/// rows must be ordered by row_id when it is present.
inline GroundTruth ground_truth_from_csv(std::string_view text) {
  const CsvTable t = parse_csv(text);
  auto col = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < t.header.size(); ++i)
      if (t.header[i] == name) return i;
    return std::nullopt;
  };
  const auto effect = col("effect");
  if (!effect) fail(ErrorKind::MissingColumn, "ground truth lacks an 'effect' column");
  const auto response = col("response"), y0 = col("y0"), y1 = col("y1"), row_id = col("row_id");
  GroundTruth g;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row_id) {
      const auto id = parse_integer(row[*row_id]);
      if (!id || *id != static_cast<long long>(r))
        fail(ErrorKind::Schema, "ground truth row_id out of sequence at row " + std::to_string(r));
    }
    const auto e = parse_double(row[*effect]);
    if (!e) fail(ErrorKind::Schema, "ground truth effect is not a number at row " + std::to_string(r));
    g.effect.push_back(*e);
    const int a = y0 ? static_cast<int>(parse_integer(row[*y0]).value_or(0)) : 0;
    const int b = y1 ? static_cast<int>(parse_integer(row[*y1]).value_or(0)) : 0;
    g.y0.push_back(a);
    g.y1.push_back(b);
    std::optional<Response> resp = response ? parse_response(row[*response]) : std::nullopt;
    g.response.push_back(resp.value_or(response_of(a, b)));
  }
  return g;
}

// ---- networks -------------------------------------------------------------

namespace detail {

inline NetNode binary_node(std::string name, std::vector<std::string> parents, const std::vector<double>& p1) {
  NetNode n;
  n.name = std::move(name);
  n.states = {"0", "1"};
  n.parents = std::move(parents);
  for (double p : p1) {
    n.cpt.push_back(1.0 - p);
    n.cpt.push_back(p);
  }
  return n;
}

// P(Y=1) over (X8, X9, T), T fastest. The effect of T changes sign across
// the (X8, X9) configurations.
inline const std::vector<double> kOutcomeP1 = {0.15, 0.55, 0.55, 0.35, 0.35, 0.50, 0.70, 0.65};

inline std::vector<double> treatment_p1() {
  std::vector<double> p;
  for (int x1 = 0; x1 < 2; ++x1)
    for (int x2 = 0; x2 < 2; ++x2)
      for (int x3 = 0; x3 < 2; ++x3) p.push_back(0.2 + 0.2 * x1 + 0.15 * x2 + 0.25 * x3);
  return p;
}

}  // namespace detail

/// Causally sufficient benchmark net. T has parents X1, X2, X3; Y has
/// parents X8, X9 and T; X4..X7 and X10 are further pretreatment ancestors.
inline BayesNet group1_net() {
  using detail::binary_node;
  std::vector<NetNode> nodes;
  nodes.push_back(binary_node("T", {"X1", "X2", "X3"}, detail::treatment_p1()));
  nodes.push_back(binary_node("Y", {"X8", "X9", "T"}, detail::kOutcomeP1));
  nodes.push_back(binary_node("X1", {}, {0.5}));
  nodes.push_back(binary_node("X2", {}, {0.4}));
  nodes.push_back(binary_node("X3", {"X10"}, {0.3, 0.7}));
  nodes.push_back(binary_node("X4", {}, {0.5}));
  nodes.push_back(binary_node("X5", {}, {0.5}));
  nodes.push_back(binary_node("X6", {"X7"}, {0.3, 0.7}));
  nodes.push_back(binary_node("X7", {"X4"}, {0.25, 0.75}));
  nodes.push_back(binary_node("X8", {"X3"}, {0.3, 0.7}));
  nodes.push_back(binary_node("X9", {"X5", "X6"}, {0.2, 0.5, 0.5, 0.8}));
  nodes.push_back(binary_node("X10", {}, {0.6}));
  return BayesNet::build(std::move(nodes), "group1");
}

/// group1 plus hidden U1 (-> X5, X7), U2 (-> X9, Y) and U3 (-> X4, Y). None
/// of the hidden nodes reaches T. X4 is a strong proxy of U3, and U3 shifts
/// the size of the treatment effect.
inline BayesNet group2_net() {
  using detail::binary_node;
  std::vector<double> y_p1;
  for (int cfg = 0; cfg < 4; ++cfg)  // (X8, X9)
    for (int t = 0; t < 2; ++t)
      for (int u2 = 0; u2 < 2; ++u2)
        for (int u3 = 0; u3 < 2; ++u3) {
          double p = detail::kOutcomeP1[static_cast<std::size_t>(2 * cfg + t)] + 0.1 * u2 - 0.05;
          if (t == 1) p += 0.15 * (u3 - 0.5) * 2.0;
          y_p1.push_back(std::clamp(p, 0.02, 0.98));
        }
  std::vector<double> x9_p1;
  const double base[4] = {0.2, 0.5, 0.5, 0.8};
  for (double b : base)
    for (int u2 = 0; u2 < 2; ++u2) x9_p1.push_back(b + 0.2 * u2 - 0.1);
  std::vector<double> x7_p1;
  for (int x4 = 0; x4 < 2; ++x4)
    for (int u1 = 0; u1 < 2; ++u1) x7_p1.push_back(0.15 + 0.5 * x4 + 0.2 * u1);

  std::vector<NetNode> nodes;
  nodes.push_back(binary_node("T", {"X1", "X2", "X3"}, detail::treatment_p1()));
  nodes.push_back(binary_node("Y", {"X8", "X9", "T", "U2", "U3"}, y_p1));
  nodes.push_back(binary_node("X1", {}, {0.5}));
  nodes.push_back(binary_node("X2", {}, {0.4}));
  nodes.push_back(binary_node("X3", {"X10"}, {0.3, 0.7}));
  nodes.push_back(binary_node("X4", {"U3"}, {0.15, 0.85}));
  nodes.push_back(binary_node("X5", {"U1"}, {0.3, 0.7}));
  nodes.push_back(binary_node("X6", {"X7"}, {0.3, 0.7}));
  nodes.push_back(binary_node("X7", {"X4", "U1"}, x7_p1));
  nodes.push_back(binary_node("X8", {"X3"}, {0.3, 0.7}));
  nodes.push_back(binary_node("X9", {"X5", "X6", "U2"}, x9_p1));
  nodes.push_back(binary_node("X10", {}, {0.6}));
  for (const char* u : {"U1", "U2", "U3"}) {
    nodes.push_back(binary_node(u, {}, {0.5}));
    nodes.back().hidden = true;
  }
  return BayesNet::build(std::move(nodes), "group2");
}

struct Synthetic {
  Dataset data;
  GroundTruth truth;
  BayesNet net;
};

/// Samples the chosen benchmark. Columns are T, Y, X1..X10, N1..Nk; the
/// first round(k * continuous_fraction) noise columns are standard normal,
/// the rest Bernoulli(0.5). Both potential outcomes are read off one shared
/// uniform draw per row, and the observed Y is the one matching T.
inline Synthetic generate_group(const SynthConfig& cfg) {
  cfg.validate();
  Synthetic out;
  out.net = cfg.group == SynthGroup::group1 ? group1_net() : group2_net();
  const BayesNet& net = out.net;
  const NodeId t = net.index_of("T");
  const NodeId y = net.index_of("Y");
  const std::size_t n = cfg.n_samples;

  Rng rng(mix_seed(*cfg.seed, 0));
  std::vector<std::vector<int>> codes(net.size(), std::vector<int>(n));
  std::vector<int> values(net.size());
  std::map<std::vector<int>, double> effect_cache;
  auto& truth = out.truth;
  for (std::size_t r = 0; r < n; ++r) {
    int y0 = 0, y1 = 0;
    for (NodeId v : net.dag().topological_order()) {
      if (v != y) {
        values[v] = draw_categorical(rng, net.row(v, net.config_index(v, values)));
        continue;
      }
      const double u = uniform01(rng);
      const int observed_t = values[t];
      values[t] = 0;
      y0 = categorical_from_uniform(u, net.row(y, net.config_index(y, values)));
      values[t] = 1;
      y1 = categorical_from_uniform(u, net.row(y, net.config_index(y, values)));
      values[t] = observed_t;
      values[y] = observed_t == 1 ? y1 : y0;
    }
    for (NodeId v = 0; v < net.size(); ++v) codes[v][r] = values[v];

    std::vector<int> visible = values;
    for (NodeId v = 0; v < net.size(); ++v)
      if (net.hidden(v) || v == t || v == y) visible[v] = kMissingCode;
    auto it = effect_cache.find(visible);
    if (it == effect_cache.end()) it = effect_cache.emplace(visible, true_effect(net, "T", "Y", visible)).first;
    truth.effect.push_back(it->second);
    truth.y0.push_back(y0);
    truth.y1.push_back(y1);
    truth.response.push_back(response_of(y0, y1));
  }

  auto role_of = [](const std::string& name) {
    if (name == "T") return Role::treatment;
    if (name == "Y") return Role::outcome;
    return Role::covariate;
  };
  std::vector<std::string> order = {"T", "Y"};
  for (int i = 1; i <= 10; ++i) order.push_back("X" + std::to_string(i));
  for (const auto& name : order) {
    const NodeId v = net.index_of(name);
    out.data.add_column(Column::categorical(name, net.node(v).states, std::move(codes[v]), role_of(name)));
  }

  const auto n_continuous =
      static_cast<std::size_t>(std::llround(static_cast<double>(cfg.n_noise_vars) * cfg.continuous_fraction));
  for (std::size_t j = 0; j < cfg.n_noise_vars; ++j) {
    Rng noise(mix_seed(*cfg.seed, 1 + j));
    const std::string name = "N" + std::to_string(j + 1);
    if (j < n_continuous) {
      std::vector<double> v(n);
      for (auto& x : v) x = standard_normal(noise);
      out.data.add_column(Column::continuous(name, std::move(v), Role::noise));
    } else {
      std::vector<int> v(n);
      for (auto& x : v) x = bernoulli(noise, 0.5) ? 1 : 0;
      out.data.add_column(Column::binary(name, std::move(v), Role::noise));
    }
  }
  return out;
}

}  // namespace cclass
