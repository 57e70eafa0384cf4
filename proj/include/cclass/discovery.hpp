#pragma once

// Max-Min Parents and Children (MMPC): local constraint-based discovery of
// the variables adjacent to a target. When the target has no descendants in
// the data, these are exactly its parents.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cclass/dataset.hpp"
#include "cclass/error.hpp"
#include "cclass/stats.hpp"

namespace cclass {

struct DiscoveryConfig {
  double alpha = 0.01;
  int max_cond_size = 3;
  std::optional<int> candidate_cap;
  bool symmetric = true;  // apply the PC symmetry correction
  int bins = 3;           // equal-frequency bins for continuous columns

  void validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::InvalidArgument, "alpha must lie in (0,1)");
    if (max_cond_size < 0) fail(ErrorKind::InvalidArgument, "max_cond_size must be >= 0");
    if (candidate_cap && *candidate_cap < 1) fail(ErrorKind::InvalidArgument, "candidate_cap must be >= 1");
    if (bins < 2) fail(ErrorKind::InvalidArgument, "bins must be >= 2");
  }
};

/// One conditional independence test as executed during the search.
struct TestRecord {
  std::string phase;  // "forward", "backward"
  std::string target;
  std::string variable;
  std::vector<std::string> conditioning;
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  bool independent = true;
  bool reliable = false;
};

struct ParentSet {
  std::string target;
  std::vector<std::string> members;  // in order of admission
  std::vector<TestRecord> trace;
  std::vector<std::string> symmetry_removed;

  bool contains(std::string_view name) const {
    return std::find(members.begin(), members.end(), name) != members.end();
  }
};

namespace detail {

/// Calls `visit(subset)` for every subset of `pool` with at most `max_size`
/// elements, smallest first, lexicographic within a size. Stops early when
/// `visit` returns true; returns whether it stopped.
template <typename Visit>
bool for_each_subset(const std::vector<std::size_t>& pool, int max_size, Visit&& visit) {
  const int m = static_cast<int>(pool.size());
  std::vector<std::size_t> subset;
  for (int r = 0; r <= std::min(max_size, m); ++r) {
    std::vector<int> idx(r);
    for (int i = 0; i < r; ++i) idx[i] = i;
    while (true) {
      subset.clear();
      for (int i : idx) subset.push_back(pool[i]);
      if (visit(subset)) return true;
      int i = r - 1;
      while (i >= 0 && idx[i] == m - r + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return false;
}

/// Strength of a dependence: 1 - p, ties (typically p underflowing to 0)
/// broken by the larger statistic.
struct Association {
  double strength = std::numeric_limits<double>::infinity();
  double statistic = std::numeric_limits<double>::infinity();

  friend bool operator<(const Association& a, const Association& b) {
    if (a.strength != b.strength) return a.strength < b.strength;
    return a.statistic < b.statistic;
  }
};

/// Memoized G² tests of candidates against one target.
class TargetTests {
 public:
  TargetTests(const Dataset& data, std::size_t target, double alpha, std::vector<TestRecord>& trace)
      : data_(data), target_(target), alpha_(alpha), trace_(trace) {}

  const CITestResult& test(std::size_t x, std::vector<std::size_t> z, const char* phase) {
    std::sort(z.begin(), z.end());
    auto key = std::make_pair(x, z);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const CITestResult r = g2_test(data_, x, target_, z, alpha_);
    TestRecord rec;
    rec.phase = phase;
    rec.target = data_.column(target_).name;
    rec.variable = data_.column(x).name;
    for (auto zi : z) rec.conditioning.push_back(data_.column(zi).name);
    rec.statistic = r.statistic;
    rec.dof = r.dof;
    rec.p_value = r.p_value;
    rec.independent = r.independent;
    rec.reliable = r.reliable;
    trace_.push_back(std::move(rec));
    return cache_.emplace(std::move(key), r).first->second;
  }

 private:
  const Dataset& data_;
  std::size_t target_;
  double alpha_;
  std::vector<TestRecord>& trace_;
  std::map<std::pair<std::size_t, std::vector<std::size_t>>, CITestResult> cache_;
};

}  // namespace detail

/// MMPC without the symmetry correction. All columns must be discrete.
///
/// Forward: every live candidate keeps the minimum association with the
/// target over conditioning subsets (size <= max_cond_size) of the current
/// candidate set; a candidate found independent under any subset is dropped
/// for good. The live candidate with the largest minimum joins; ties go to
/// the earlier column. Backward: a member independent of the target given
/// some subset of the other members is removed.
inline ParentSet mmpc(const Dataset& data, std::string_view target, const DiscoveryConfig& cfg = {}) {
  cfg.validate();
  const std::size_t t = data.index_of(target);
  for (std::size_t j = 0; j < data.cols(); ++j) detail::discrete_column(data, j);

  ParentSet out;
  out.target = std::string(target);
  detail::TargetTests tests(data, t, cfg.alpha, out.trace);

  std::vector<std::size_t> cpc;
  std::vector<std::size_t> live;
  for (std::size_t j = 0; j < data.cols(); ++j)
    if (j != t) live.push_back(j);
  std::vector<detail::Association> min_assoc(data.cols());

  std::optional<std::size_t> last;
  while (!live.empty()) {
    std::vector<std::size_t> still_live;
    for (std::size_t x : live) {
      bool dropped = false;
      auto visit = [&](const std::vector<std::size_t>& s) {
        std::vector<std::size_t> cond = s;
        if (last) cond.push_back(*last);
        const CITestResult& r = tests.test(x, cond, "forward");
        if (r.independent) {
          dropped = true;
          return true;
        }
        min_assoc[x] = std::min(min_assoc[x], detail::Association{1.0 - r.p_value, r.statistic});
        return false;
      };
      if (!last) {
        visit({});
      } else if (cfg.max_cond_size > 0) {
        std::vector<std::size_t> others;
        for (std::size_t c : cpc)
          if (c != *last) others.push_back(c);
        detail::for_each_subset(others, cfg.max_cond_size - 1, visit);
      }
      if (!dropped) still_live.push_back(x);
    }
    live = std::move(still_live);
    if (live.empty()) break;

    std::size_t best = 0;
    for (std::size_t i = 1; i < live.size(); ++i)
      if (min_assoc[live[best]] < min_assoc[live[i]]) best = i;
    last = live[best];
    cpc.push_back(*last);
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(best));
    if (cfg.candidate_cap && static_cast<int>(cpc.size()) >= *cfg.candidate_cap) break;
  }

  const std::vector<std::size_t> admitted = cpc;
  for (std::size_t x : admitted) {
    std::vector<std::size_t> others;
    for (std::size_t c : cpc)
      if (c != x) others.push_back(c);
    const bool separated = detail::for_each_subset(others, cfg.max_cond_size, [&](const std::vector<std::size_t>& s) {
      return tests.test(x, s, "backward").independent;
    });
    if (separated) cpc.erase(std::find(cpc.begin(), cpc.end(), x));
  }

  for (std::size_t c : cpc) out.members.push_back(data.column(c).name);
  return out;
}

/// Keeps a member X only if the target is in X's own MMPC result.
inline ParentSet symmetric_correction(const Dataset& data, std::string_view target, const ParentSet& candidate,
                                      const DiscoveryConfig& cfg = {}) {
  ParentSet out = candidate;
  out.members.clear();
  for (const auto& x : candidate.members) {
    const ParentSet reverse = mmpc(data, x, cfg);
    if (reverse.contains(target))
      out.members.push_back(x);
    else
      out.symmetry_removed.push_back(x);
  }
  return out;
}

/// Full discovery: dataset-wide discretization of continuous columns, MMPC,
/// then the symmetry correction unless disabled.
inline ParentSet discover_parents(const Dataset& data, std::string_view target, const DiscoveryConfig& cfg = {}) {
  cfg.validate();
  data.index_of(target);
  const Dataset discrete = discretize_continuous(data, cfg.bins);
  ParentSet ps = mmpc(discrete, target, cfg);
  if (cfg.symmetric) ps = symmetric_correction(discrete, target, ps, cfg);
  return ps;
}

inline nlohmann::json to_json(const TestRecord& r) {
  return {{"phase", r.phase},        {"target", r.target},           {"variable", r.variable},
          {"conditioning", r.conditioning}, {"statistic", r.statistic}, {"dof", r.dof},
          {"p_value", r.p_value},    {"independent", r.independent}, {"reliable", r.reliable}};
}

inline nlohmann::json to_json(const ParentSet& ps, bool with_trace = true) {
  nlohmann::json j = {{"target", ps.target}, {"members", ps.members}, {"symmetry_removed", ps.symmetry_removed}};
  if (with_trace) {
    nlohmann::json tr = nlohmann::json::array();
    for (const auto& r : ps.trace) tr.push_back(to_json(r));
    j["trace"] = std::move(tr);
  }
  return j;
}

inline nlohmann::json to_json(const DiscoveryConfig& c) {
  nlohmann::json j = {{"alpha", c.alpha},
                      {"max_cond_size", c.max_cond_size},
                      {"symmetric", c.symmetric},
                      {"bins", c.bins}};
  j["candidate_cap"] = c.candidate_cap ? nlohmann::json(*c.candidate_cap) : nlohmann::json(nullptr);
  return j;
}

}  // namespace cclass
