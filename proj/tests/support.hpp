#pragma once

// Reference implementations used as oracles by the unit tests and the
// acceptance runner. They are deliberately naive.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cclass/cclass.hpp"

namespace oracle {

using Adj = std::vector<std::vector<char>>;  // adj[p][c] = edge p -> c

inline Adj adjacency(const cclass::Dag& g) {
  Adj a(g.size(), std::vector<char>(g.size(), 0));
  for (const auto& [p, c] : g.id_edges()) a[p][c] = 1;
  return a;
}

/// Transitive closure by Floyd-Warshall; reach[a][b] = directed path a -> b.
inline Adj transitive_closure(const Adj& adj) {
  Adj r = adj;
  const std::size_t n = r.size();
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = 1;
  return r;
}

inline bool acyclic(const Adj& adj) {
  const Adj r = transitive_closure(adj);
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i][i]) return false;
  return true;
}

/// True when some simple path between a and b is active given the mask z.
/// Enumerates every simple path in the skeleton.
class PathOracle {
 public:
  explicit PathOracle(const Adj& adj) : adj_(adj), reach_(transitive_closure(adj)), n_(adj.size()) {}

  bool connected(std::size_t a, std::size_t b, const std::vector<char>& z) const {
    std::vector<char> on_path(n_, 0);
    on_path[a] = 1;
    return extend(a, n_, b, z, on_path);
  }

 private:
  bool collider_open(std::size_t c, const std::vector<char>& z) const {
    if (z[c]) return true;
    for (std::size_t d = 0; d < n_; ++d)
      if (reach_[c][d] && z[d]) return true;
    return false;
  }

  bool extend(std::size_t cur, std::size_t prev, std::size_t target, const std::vector<char>& z,
              std::vector<char>& on_path) const {
    for (std::size_t next = 0; next < n_; ++next) {
      if (on_path[next] || !(adj_[cur][next] || adj_[next][cur])) continue;
      if (prev != n_) {
        const bool collider = adj_[prev][cur] && adj_[next][cur];
        const bool open = collider ? collider_open(cur, z) : !z[cur];
        if (!open) continue;
      }
      if (next == target) return true;
      on_path[next] = 1;
      const bool found = extend(next, cur, target, z, on_path);
      on_path[next] = 0;
      if (found) return true;
    }
    return false;
  }

  Adj adj_;
  Adj reach_;
  std::size_t n_;
};

inline std::vector<std::string> node_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("V" + std::to_string(i));
  return names;
}

/// Every labelled DAG on n nodes, as edge lists.
inline std::vector<std::vector<cclass::Dag::IdEdge>> all_dags(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::size_t combos = 1;
  for (std::size_t k = 0; k < pairs.size(); ++k) combos *= 3;
  std::vector<std::vector<cclass::Dag::IdEdge>> out;
  for (std::size_t code = 0; code < combos; ++code) {
    Adj adj(n, std::vector<char>(n, 0));
    std::vector<cclass::Dag::IdEdge> edges;
    std::size_t c = code;
    for (const auto& [i, j] : pairs) {
      const std::size_t state = c % 3;
      c /= 3;
      if (state == 1) {
        adj[i][j] = 1;
        edges.emplace_back(i, j);
      } else if (state == 2) {
        adj[j][i] = 1;
        edges.emplace_back(j, i);
      }
    }
    if (acyclic(adj)) out.push_back(std::move(edges));
  }
  return out;
}

/// Random DAG: a random node order, then each forward pair is an edge with
/// probability p.
inline cclass::Dag random_dag(std::size_t n, double p, cclass::Rng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  cclass::shuffle(std::span<std::size_t>(order), rng);
  std::vector<cclass::Dag::IdEdge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (cclass::bernoulli(rng, p)) edges.emplace_back(order[i], order[j]);
  return cclass::Dag::from_ids(node_names(n), edges);
}

/// A fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("cclass_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Every regular file under dir, keyed by relative path.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[std::filesystem::relative(e.path(), dir).string()] = ss.str();
  }
  return files;
}

}  // namespace oracle
