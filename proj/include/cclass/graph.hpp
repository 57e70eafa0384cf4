#pragma once

// Directed acyclic graphs over named variables: construction with cycle
// diagnosis, ancestry queries, mutilation (edge removal for interventions),
// d-separation, and the structural checks that license estimating the
// treatment effect from the outcome's parents alone.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cclass/error.hpp"

namespace cclass {

using NodeId = std::size_t;

class Dag {
 public:
  using Edge = std::pair<std::string, std::string>;
  using IdEdge = std::pair<NodeId, NodeId>;

  Dag() = default;

  /// Builds a DAG from declared node names and (parent, child) edges.
  /// Throws CycleDetected (with the cycle spelled out), UnknownNode,
  /// DuplicateNode, DuplicateEdge or SelfLoop.
  static Dag build(std::vector<std::string> nodes, const std::vector<Edge>& edges) {
    Dag g = with_nodes(std::move(nodes));
    std::vector<IdEdge> ids;
    ids.reserve(edges.size());
    for (const auto& [p, c] : edges) ids.emplace_back(g.index_of(p), g.index_of(c));
    g.add_edges(ids);
    return g;
  }

  static Dag from_ids(std::vector<std::string> nodes, std::span<const IdEdge> edges) {
    Dag g = with_nodes(std::move(nodes));
    for (const auto& [p, c] : edges)
      if (p >= g.size() || c >= g.size())
        fail(ErrorKind::UnknownNode, "edge endpoint index out of range");
    g.add_edges(edges);
    return g;
  }

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& nodes() const { return names_; }
  const std::string& name(NodeId v) const { return names_.at(v); }

  std::optional<NodeId> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  NodeId index_of(std::string_view name) const {
    auto id = find(name);
    if (!id) fail(ErrorKind::UnknownNode, "no node named '" + std::string(name) + "'");
    return *id;
  }

  bool contains(std::string_view name) const { return find(name).has_value(); }

  /// Parent / child ids, sorted by declaration order.
  const std::vector<NodeId>& parent_ids(NodeId v) const { return parents_.at(v); }
  const std::vector<NodeId>& child_ids(NodeId v) const { return children_.at(v); }

  bool has_edge(NodeId from, NodeId to) const {
    const auto& ch = children_.at(from);
    return std::binary_search(ch.begin(), ch.end(), to);
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& ch : children_) n += ch.size();
    return n;
  }

  /// Edges ordered by (parent, child) declaration index.
  std::vector<IdEdge> id_edges() const {
    std::vector<IdEdge> out;
    for (NodeId p = 0; p < size(); ++p)
      for (NodeId c : children_[p]) out.emplace_back(p, c);
    return out;
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (const auto& [p, c] : id_edges()) out.emplace_back(names_[p], names_[c]);
    return out;
  }

  /// Topological order; among ready nodes the earliest declared goes first.
  const std::vector<NodeId>& topological_order() const { return topo_; }

  friend bool operator==(const Dag& a, const Dag& b) {
    return a.names_ == b.names_ && a.children_ == b.children_;
  }

 private:
  static Dag with_nodes(std::vector<std::string> nodes) {
    Dag g;
    g.names_ = std::move(nodes);
    for (NodeId i = 0; i < g.names_.size(); ++i) {
      if (!g.index_.emplace(g.names_[i], i).second)
        fail(ErrorKind::DuplicateNode, "node '" + g.names_[i] + "' declared twice");
    }
    g.parents_.assign(g.names_.size(), {});
    g.children_.assign(g.names_.size(), {});
    return g;
  }

  void add_edges(std::span<const IdEdge> edges) {
    std::set<IdEdge> seen;
    for (const auto& e : edges) {
      if (e.first == e.second)
        fail(ErrorKind::SelfLoop, "self-loop on '" + names_[e.first] + "'");
      if (!seen.insert(e).second)
        fail(ErrorKind::DuplicateEdge,
             "edge " + names_[e.first] + " -> " + names_[e.second] + " listed twice");
      parents_[e.second].push_back(e.first);
      children_[e.first].push_back(e.second);
    }
    for (auto& p : parents_) std::sort(p.begin(), p.end());
    for (auto& c : children_) std::sort(c.begin(), c.end());
    compute_topological_order();
  }

  void compute_topological_order() {
    const std::size_t n = size();
    std::vector<std::size_t> indegree(n);
    for (NodeId v = 0; v < n; ++v) indegree[v] = parents_[v].size();
    std::set<NodeId> ready;
    for (NodeId v = 0; v < n; ++v)
      if (indegree[v] == 0) ready.insert(v);
    topo_.clear();
    while (!ready.empty()) {
      NodeId v = *ready.begin();
      ready.erase(ready.begin());
      topo_.push_back(v);
      for (NodeId c : children_[v])
        if (--indegree[c] == 0) ready.insert(c);
    }
    if (topo_.size() != n) fail(ErrorKind::CycleDetected, describe_cycle(indegree));
  }

  // Walks backwards through nodes that never became ready; every such node
  // has a remaining parent that is also stuck, so the walk must revisit a node.
  std::string describe_cycle(const std::vector<std::size_t>& indegree) const {
    NodeId start = 0;
    while (indegree[start] == 0) ++start;
    std::vector<NodeId> path;
    std::vector<int> pos(size(), -1);
    NodeId v = start;
    while (pos[v] < 0) {
      pos[v] = static_cast<int>(path.size());
      path.push_back(v);
      for (NodeId p : parents_[v]) {
        if (indegree[p] > 0) {
          v = p;
          break;
        }
      }
    }
    std::vector<NodeId> cycle(path.begin() + pos[v], path.end());
    std::reverse(cycle.begin(), cycle.end());
    std::string text;
    for (NodeId c : cycle) text += names_[c] + " -> ";
    text += names_[cycle.front()];
    return "cycle " + text;
  }

  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::vector<NodeId>> parents_;
  std::vector<std::vector<NodeId>> children_;
  std::vector<NodeId> topo_;
};

namespace detail {

inline std::vector<std::string> names_of(const Dag& g, const std::vector<char>& mask) {
  std::vector<std::string> out;
  for (NodeId v = 0; v < g.size(); ++v)
    if (mask[v]) out.push_back(g.name(v));
  return out;
}

inline std::vector<NodeId> ids_of(const Dag& g, std::span<const std::string> names) {
  std::vector<NodeId> ids;
  ids.reserve(names.size());
  for (const auto& n : names) ids.push_back(g.index_of(n));
  return ids;
}

}  // namespace detail

/// Marks every node reachable from `v` along directed edges (excluding `v`
/// itself unless it lies on a cycle, which a Dag cannot have).
inline std::vector<char> descendant_mask(const Dag& g, NodeId v) {
  std::vector<char> mask(g.size(), 0);
  std::vector<NodeId> stack(g.child_ids(v).begin(), g.child_ids(v).end());
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    if (mask[u]) continue;
    mask[u] = 1;
    for (NodeId c : g.child_ids(u))
      if (!mask[c]) stack.push_back(c);
  }
  return mask;
}

/// Marks the given nodes and all of their ancestors.
inline std::vector<char> ancestral_closure(const Dag& g, std::span<const NodeId> seeds) {
  std::vector<char> mask(g.size(), 0);
  std::vector<NodeId> stack(seeds.begin(), seeds.end());
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    if (mask[u]) continue;
    mask[u] = 1;
    for (NodeId p : g.parent_ids(u))
      if (!mask[p]) stack.push_back(p);
  }
  return mask;
}

inline std::vector<std::string> parents(const Dag& g, std::string_view v) {
  std::vector<std::string> out;
  for (NodeId p : g.parent_ids(g.index_of(v))) out.push_back(g.name(p));
  return out;
}

inline std::vector<std::string> children(const Dag& g, std::string_view v) {
  std::vector<std::string> out;
  for (NodeId c : g.child_ids(g.index_of(v))) out.push_back(g.name(c));
  return out;
}

/// Descendants of `v` in declaration order; `v` itself is excluded.
inline std::vector<std::string> descendants(const Dag& g, std::string_view v) {
  return detail::names_of(g, descendant_mask(g, g.index_of(v)));
}

struct MutilationSpec {
  std::set<std::string> remove_incoming;
  std::set<std::string> remove_outgoing;
};

/// Copy of `g` without the incoming edges of `remove_incoming` nodes and the
/// outgoing edges of `remove_outgoing` nodes. The input is untouched.
inline Dag mutilate(const Dag& g, const MutilationSpec& spec) {
  std::vector<char> cut_in(g.size(), 0), cut_out(g.size(), 0);
  for (const auto& n : spec.remove_incoming) cut_in[g.index_of(n)] = 1;
  for (const auto& n : spec.remove_outgoing) cut_out[g.index_of(n)] = 1;
  std::vector<Dag::IdEdge> kept;
  for (const auto& [p, c] : g.id_edges())
    if (!cut_out[p] && !cut_in[c]) kept.emplace_back(p, c);
  return Dag::from_ids(g.nodes(), kept);
}

/// d-separation of node sets `x` and `y` given `z`, by the reachability
/// ("Bayes-ball") traversal: a trail may pass a non-collider only when it is
/// outside `z`, and a collider only when it or one of its descendants is in `z`.
inline bool d_separated_ids(const Dag& g, std::span<const NodeId> x, std::span<const NodeId> y,
                            std::span<const NodeId> z) {
  const std::size_t n = g.size();
  // 1 = x, 2 = y, 4 = z
  std::vector<unsigned char> role(n, 0);
  auto mark = [&](std::span<const NodeId> set, unsigned char bit) {
    for (NodeId v : set) {
      if (v >= n) fail(ErrorKind::UnknownNode, "node index out of range");
      if (role[v] & ~bit) fail(ErrorKind::OverlappingSets, "node '" + g.name(v) + "' in two sets");
      role[v] |= bit;
    }
  };
  mark(x, 1);
  mark(y, 2);
  mark(z, 4);
  if (x.empty() || y.empty()) return true;

  const std::vector<char> z_or_ancestor = ancestral_closure(g, z);

  // visited[2v] : entered v from a child (travelling up)
  // visited[2v+1]: entered v from a parent (travelling down)
  std::vector<char> visited(2 * n, 0);
  std::vector<std::pair<NodeId, bool>> stack;
  for (NodeId v : x) stack.emplace_back(v, false);
  while (!stack.empty()) {
    auto [v, down] = stack.back();
    stack.pop_back();
    char& seen = visited[2 * v + (down ? 1 : 0)];
    if (seen) continue;
    seen = 1;
    const bool in_z = role[v] & 4;
    if (!in_z && (role[v] & 2)) return false;
    if (!down) {
      if (in_z) continue;
      for (NodeId p : g.parent_ids(v)) stack.emplace_back(p, false);
      for (NodeId c : g.child_ids(v)) stack.emplace_back(c, true);
    } else {
      if (!in_z)
        for (NodeId c : g.child_ids(v)) stack.emplace_back(c, true);
      if (z_or_ancestor[v])
        for (NodeId p : g.parent_ids(v)) stack.emplace_back(p, false);
    }
  }
  return true;
}

inline bool d_separated(const Dag& g, std::span<const std::string> x, std::span<const std::string> y,
                        std::span<const std::string> z) {
  const auto xi = detail::ids_of(g, x);
  const auto yi = detail::ids_of(g, y);
  const auto zi = detail::ids_of(g, z);
  return d_separated_ids(g, xi, yi, zi);
}

inline bool d_separated(const Dag& g, std::initializer_list<std::string> x,
                        std::initializer_list<std::string> y, std::initializer_list<std::string> z) {
  return d_separated(g, std::span<const std::string>(x.begin(), x.size()),
                     std::span<const std::string>(y.begin(), y.size()),
                     std::span<const std::string>(z.begin(), z.size()));
}

struct Violation {
  std::string kind;  // "treatment_not_parent", "outcome_has_descendants", "descendant_of_treatment"
  std::vector<std::string> nodes;
  std::string message;
};

struct ConditionReport {
  bool t_is_parent_of_y = false;
  bool y_has_no_descendants = false;
  bool all_others_pretreatment = false;
  bool rule1_holds = false;
  bool rule2_holds = false;
  std::vector<std::string> parents_excl_t;
  std::vector<Violation> violations;

  bool setting_holds() const {
    return t_is_parent_of_y && y_has_no_descendants && all_others_pretreatment;
  }
};

/// Checks whether the effect of `t` on `y` conditional on the remaining
/// pretreatment variables reduces to an uplift over parents(y) \ {t}.
///
/// rule1_holds: y is d-separated from every other non-parent given
/// parents(y) in the graph with t's incoming edges cut (observation deletion).
/// rule2_holds: y is d-separated from t given parents(y) \ {t} in the graph
/// with t's outgoing edges cut (action/observation exchange).
inline ConditionReport verify_uplift_conditions(const Dag& g, std::string_view t, std::string_view y) {
  const NodeId ti = g.index_of(t);
  const NodeId yi = g.index_of(y);
  if (ti == yi) fail(ErrorKind::InvalidArgument, "treatment and outcome must differ");

  ConditionReport r;
  const auto& pa = g.parent_ids(yi);
  r.t_is_parent_of_y = std::binary_search(pa.begin(), pa.end(), ti);
  std::vector<NodeId> pa_excl;
  for (NodeId p : pa)
    if (p != ti) {
      pa_excl.push_back(p);
      r.parents_excl_t.push_back(g.name(p));
    }

  const auto desc_y = descendant_mask(g, yi);
  const auto desc_t = descendant_mask(g, ti);
  std::vector<std::string> below_y = detail::names_of(g, desc_y);
  r.y_has_no_descendants = below_y.empty();

  std::vector<std::string> below_t;
  for (NodeId v = 0; v < g.size(); ++v)
    if (desc_t[v] && v != yi) below_t.push_back(g.name(v));
  r.all_others_pretreatment = below_t.empty() && below_y.empty();

  if (!r.t_is_parent_of_y)
    r.violations.push_back({"treatment_not_parent", {std::string(t), std::string(y)},
                            std::string(t) + " is not a parent of " + std::string(y)});
  if (!below_y.empty())
    r.violations.push_back({"outcome_has_descendants", below_y,
                            std::string(y) + " has descendants"});
  if (!below_t.empty())
    r.violations.push_back({"descendant_of_treatment", below_t,
                            "variables other than " + std::string(y) + " are affected by " +
                                std::string(t)});

  std::vector<NodeId> rest;
  std::vector<char> excluded(g.size(), 0);
  excluded[ti] = excluded[yi] = 1;
  for (NodeId p : pa_excl) excluded[p] = 1;
  for (NodeId v = 0; v < g.size(); ++v)
    if (!excluded[v]) rest.push_back(v);

  {
    const Dag cut = mutilate(g, {{std::string(t)}, {}});
    std::vector<NodeId> cond = pa_excl;
    cond.push_back(ti);
    const NodeId yv[] = {yi};
    r.rule1_holds = d_separated_ids(cut, yv, rest, cond);
  }
  {
    const Dag cut = mutilate(g, {{}, {std::string(t)}});
    const NodeId yv[] = {yi};
    const NodeId tv[] = {ti};
    r.rule2_holds = d_separated_ids(cut, yv, tv, pa_excl);
  }
  return r;
}

// ---- JSON -----------------------------------------------------------------

inline nlohmann::json to_json(const Dag& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [p, c] : g.edges()) edges.push_back({p, c});
  return {{"nodes", g.nodes()}, {"edges", std::move(edges)}};
}

inline Dag dag_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
    fail(ErrorKind::Schema, "DAG JSON needs 'nodes' and 'edges'");
  std::vector<std::string> nodes;
  for (const auto& n : j.at("nodes")) {
    if (!n.is_string()) fail(ErrorKind::Schema, "node names must be strings");
    nodes.push_back(n.get<std::string>());
  }
  std::vector<Dag::Edge> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      fail(ErrorKind::Schema, "edges must be [parent, child] string pairs");
    edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  return Dag::build(std::move(nodes), edges);
}

/// Canonical text form: stable for a fixed node order.
inline std::string dump_dag(const Dag& g) { return to_json(g).dump(2) + "\n"; }

inline nlohmann::json to_json(const ConditionReport& r) {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : r.violations)
    v.push_back({{"kind", x.kind}, {"nodes", x.nodes}, {"message", x.message}});
  return {{"t_is_parent_of_y", r.t_is_parent_of_y},
          {"y_has_no_descendants", r.y_has_no_descendants},
          {"all_others_pretreatment", r.all_others_pretreatment},
          {"rule1_holds", r.rule1_holds},
          {"rule2_holds", r.rule2_holds},
          {"parents_excl_t", r.parents_excl_t},
          {"violations", std::move(v)}};
}

}  // namespace cclass
