#include <gtest/gtest.h>

#include <set>

#include "cclass/cclass.hpp"

using namespace cclass;

namespace {

std::set<std::string> members(const ParentSet& ps) { return {ps.members.begin(), ps.members.end()}; }

// Y depends on A and B; A, B, C, D mutually independent.
Dataset v_structure(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> a(n), b(n), c(n), d(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = bernoulli(rng, 0.5);
    b[i] = bernoulli(rng, 0.4);
    c[i] = bernoulli(rng, 0.5);
    d[i] = bernoulli(rng, 0.3);
    y[i] = bernoulli(rng, 0.1 + 0.4 * a[i] + 0.4 * b[i]);
  }
  return Dataset({Column::binary("A", a), Column::binary("B", b), Column::binary("C", c), Column::binary("D", d),
                  Column::binary("Y", y)});
}

}  // namespace

TEST(Mmpc, VStructure) {
  const Dataset d = v_structure(5000, 1);
  const ParentSet ps = mmpc(d, "Y");
  EXPECT_EQ(members(ps), (std::set<std::string>{"A", "B"}));
  const ParentSet corrected = symmetric_correction(d, "Y", ps);
  EXPECT_EQ(members(corrected), (std::set<std::string>{"A", "B"}));
  EXPECT_TRUE(corrected.symmetry_removed.empty());
}

TEST(Mmpc, ChainKeepsOnlyDirectNeighbour) {
  Rng rng(4);
  const std::size_t n = 5000;
  std::vector<int> a(n), b(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = bernoulli(rng, 0.5);
    b[i] = bernoulli(rng, a[i] ? 0.85 : 0.15);
    y[i] = bernoulli(rng, b[i] ? 0.8 : 0.2);
  }
  const Dataset d({Column::binary("A", a), Column::binary("B", b), Column::binary("Y", y)});
  EXPECT_EQ(discover_parents(d, "Y").members, std::vector<std::string>{"B"});
}

TEST(Mmpc, PureNoiseFalsePositiveRate) {
  const double alpha = 0.01;
  std::size_t found = 0, tested = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    std::vector<Column> cols;
    for (int j = 0; j < 20; ++j) {
      std::vector<int> v(2000);
      for (auto& x : v) x = bernoulli(rng, 0.5);
      cols.push_back(Column::binary("N" + std::to_string(j), v));
    }
    std::vector<int> y(2000);
    for (auto& x : y) x = bernoulli(rng, 0.3);
    cols.push_back(Column::binary("Y", y));
    DiscoveryConfig cfg;
    cfg.alpha = alpha;
    found += discover_parents(Dataset(cols), "Y", cfg).members.size();
    tested += 20;
  }
  EXPECT_LE(static_cast<double>(found) / static_cast<double>(tested), alpha);
}

TEST(Mmpc, ContinuousColumnsAreDiscretized) {
  Rng rng(12);
  const std::size_t n = 3000;
  std::vector<double> x(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = standard_normal(rng);
    y[i] = bernoulli(rng, x[i] > 0.4 ? 0.8 : 0.2);
  }
  const Dataset d({Column::continuous("X", x), Column::binary("Y", y)});
  EXPECT_THROW(mmpc(d, "Y"), Error);
  EXPECT_EQ(discover_parents(d, "Y").members, std::vector<std::string>{"X"});
}

TEST(Symmetry, EmptyCandidate) {
  const Dataset d = v_structure(200, 2);
  ParentSet empty;
  empty.target = "Y";
  const ParentSet out = symmetric_correction(d, "Y", empty);
  EXPECT_TRUE(out.members.empty());
  EXPECT_TRUE(out.symmetry_removed.empty());
}

TEST(Symmetry, RemovesOneSidedNeighbour) {
  // D is a noisy copy of Y and E an exact copy. From D, Y and E tie and Y
  // wins by column order, so PC(D) = {Y}. From Y, E is admitted first and
  // makes D redundant, so PC(Y) excludes D and the correction drops Y.
  Rng rng(21);
  const std::size_t n = 2000;
  std::vector<int> y(n), d(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = bernoulli(rng, 0.5);
    d[i] = bernoulli(rng, 0.9) ? y[i] : 1 - y[i];
  }
  const Dataset data({Column::binary("Y", y), Column::binary("D", d), Column::binary("E", y)});
  const ParentSet raw = mmpc(data, "D");
  EXPECT_EQ(raw.members, std::vector<std::string>{"Y"});
  EXPECT_FALSE(mmpc(data, "Y").contains("D"));
  const ParentSet corrected = symmetric_correction(data, "D", raw);
  EXPECT_TRUE(corrected.members.empty());
  EXPECT_EQ(corrected.symmetry_removed, std::vector<std::string>{"Y"});

  DiscoveryConfig off;
  off.symmetric = false;
  EXPECT_EQ(discover_parents(data, "D", off).members, std::vector<std::string>{"Y"});
}

TEST(Mmpc, DeterministicTrace) {
  const Dataset d = v_structure(1500, 9);
  const auto a = to_json(discover_parents(d, "Y")).dump();
  const auto b = to_json(discover_parents(d, "Y")).dump();
  EXPECT_EQ(a, b);
}

TEST(Mmpc, TraceRecordsEveryTestOnce) {
  const Dataset d = v_structure(1500, 9);
  const ParentSet ps = mmpc(d, "Y");
  std::set<std::pair<std::string, std::vector<std::string>>> seen;
  for (const auto& t : ps.trace) {
    EXPECT_EQ(t.target, "Y");
    EXPECT_TRUE(seen.insert({t.variable, t.conditioning}).second) << t.variable;
  }
  EXPECT_FALSE(ps.trace.empty());
}

TEST(Mmpc, CandidateCap) {
  const Dataset d = v_structure(5000, 1);
  DiscoveryConfig cfg;
  cfg.candidate_cap = 1;
  EXPECT_EQ(mmpc(d, "Y", cfg).members.size(), 1u);
}

TEST(Mmpc, ConfigValidation) {
  const Dataset d = v_structure(100, 1);
  DiscoveryConfig cfg;
  cfg.alpha = 1.5;
  EXPECT_THROW(mmpc(d, "Y", cfg), Error);
  cfg = {};
  cfg.max_cond_size = -1;
  EXPECT_THROW(mmpc(d, "Y", cfg), Error);
  EXPECT_THROW(mmpc(d, "missing"), Error);
}
