#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "cclass/cclass.hpp"

using namespace cclass;

namespace {

const char* kTwoNode = R"(
network tiny { }
variable A {
  type discrete [ 2 ] { off, on };
}
variable B {
  type discrete [ 2 ] { lo, hi };
}
probability ( A ) {
  table 0.3, 0.7;
}
probability ( B | A ) {
  (off) 0.9, 0.1;
  (on) 0.2, 0.8;
}
)";

ErrorKind parse_error(const std::string& text, std::string* message = nullptr) {
  try {
    parse_bif(text);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "parsed without error";
  return ErrorKind::Io;
}

// T -> Y <- X with P(Y=1 | T, X) given row-major over (X, T).
BayesNet effect_net(double p_x0_t0, double p_x0_t1, double p_x1_t0, double p_x1_t1) {
  auto node = [](std::string name, std::vector<std::string> parents, std::vector<double> p1) {
    NetNode n{std::move(name), {"0", "1"}, std::move(parents), {}, false};
    for (double p : p1) {
      n.cpt.push_back(1 - p);
      n.cpt.push_back(p);
    }
    return n;
  };
  return BayesNet::build({node("X", {}, {0.5}), node("T", {"X"}, {0.3, 0.6}),
                          node("Y", {"X", "T"}, {p_x0_t0, p_x0_t1, p_x1_t0, p_x1_t1})});
}

// P(Y=1 | do(T=1), visible) - P(Y=1 | do(T=0), visible), with the do()
// implemented by dropping T's factor and enumerating the hidden nodes.
double enumerated_effect(const BayesNet& net, const std::vector<int>& visible) {
  const NodeId t = net.index_of("T"), y = net.index_of("Y");
  std::vector<NodeId> hidden;
  for (NodeId v = 0; v < net.size(); ++v)
    if (net.hidden(v)) hidden.push_back(v);
  double effect[2];
  for (int tv = 0; tv < 2; ++tv) {
    double num = 0, den = 0;
    for (std::size_t code = 0; code < (1u << hidden.size()); ++code) {
      std::vector<int> a = visible;
      for (std::size_t k = 0; k < hidden.size(); ++k) a[hidden[k]] = static_cast<int>((code >> k) & 1);
      a[t] = tv;
      a[y] = 0;
      double w = 1;
      for (NodeId v = 0; v < net.size(); ++v)
        if (v != t && v != y) w *= net.prob(v, a[v], a);
      num += w * net.prob(y, 1, a);
      den += w;
    }
    effect[tv] = num / den;
  }
  return effect[1] - effect[0];
}

}  // namespace

TEST(Bif, TwoNodeNetwork) {
  const BayesNet net = parse_bif(kTwoNode);
  EXPECT_EQ(net.name(), "tiny");
  ASSERT_EQ(net.size(), 2u);
  EXPECT_EQ(net.dag().edges(), (std::vector<Dag::Edge>{{"A", "B"}}));
  const NodeId b = net.index_of("B");
  EXPECT_EQ(net.node(b).states, (std::vector<std::string>{"lo", "hi"}));
  EXPECT_DOUBLE_EQ(net.row(b, 0)[1], 0.1);
  EXPECT_DOUBLE_EQ(net.row(b, 1)[0], 0.2);
  EXPECT_DOUBLE_EQ(net.row(net.index_of("A"), 0)[0], 0.3);
}

TEST(Bif, RowSumViolation) {
  std::string text = kTwoNode;
  text.replace(text.find("0.9, 0.1"), 8, "0.8, 0.1");
  std::string msg;
  EXPECT_EQ(parse_error(text, &msg), ErrorKind::RowSumViolation);
  EXPECT_NE(msg.find("off"), std::string::npos) << msg;
}

TEST(Bif, SmallRoundingIsRenormalized) {
  std::string text = kTwoNode;
  text.replace(text.find("0.9, 0.1"), 8, "0.90004, 0.1");
  const BayesNet net = parse_bif(text);
  const auto row = net.row(net.index_of("B"), 0);
  EXPECT_NEAR(row[0] + row[1], 1.0, 1e-15);
}

TEST(Bif, MissingRow) {
  std::string text = kTwoNode;
  text.erase(text.find("  (on) 0.2, 0.8;\n"), 17);
  EXPECT_EQ(parse_error(text), ErrorKind::MissingCptRow);
}

TEST(Bif, UnknownVariable) {
  std::string text = kTwoNode;
  text.replace(text.find("( B | A )"), 9, "( B | Q )");
  EXPECT_EQ(parse_error(text), ErrorKind::UnknownVariable);
}

TEST(Bif, SyntaxErrorReportsPosition) {
  std::string msg;
  EXPECT_EQ(parse_error("network x { }\nvariable A {\n  type discrete [ 2 ] { a, b }\n}\n", &msg),
            ErrorKind::SyntaxError);
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
}

TEST(Bif, HiddenPropertyAndRoundTrip) {
  BayesNet net = group2_net();
  const BayesNet back = parse_bif(write_bif(net));
  EXPECT_TRUE(back == net);
  EXPECT_TRUE(back.hidden(back.index_of("U2")));
  EXPECT_FALSE(back.hidden(back.index_of("X4")));
}

TEST(Bif, BundledBenchmark) {
  const BayesNet net = parse_bif(read_text_file(std::string(CCLASS_DATA_DIR) + "/child20.bif"));
  EXPECT_EQ(net.size(), 20u);
  EXPECT_TRUE(children(net.dag(), "LowerBodyO2").empty());
  const auto pa = parents(net.dag(), "LowerBodyO2");
  EXPECT_EQ(std::set<std::string>(pa.begin(), pa.end()), (std::set<std::string>{"HypDistrib", "HypoxiaInO2"}));
  EXPECT_TRUE(parse_bif(write_bif(net)) == net);
}

TEST(BayesNetJson, RoundTrip) {
  const BayesNet net = group2_net();
  EXPECT_TRUE(bayes_net_from_json(nlohmann::json::parse(to_json(net).dump())) == net);
}

TEST(Sampling, DeterministicCpts) {
  const BayesNet net = effect_net(0, 1, 1, 1);
  std::vector<NetNode> nodes = net.nodes();
  nodes[0].cpt = {0, 1};
  nodes[1].cpt = {1, 0, 1, 0};
  const BayesNet det = BayesNet::build(nodes);
  const Dataset d = sample(det, 200, 3);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    EXPECT_EQ(d.column("X").codes[r], 1);
    EXPECT_EQ(d.column("T").codes[r], 0);
    EXPECT_EQ(d.column("Y").codes[r], 1);
  }
}

TEST(Sampling, SingleNodeFrequency) {
  const BayesNet net = BayesNet::build({NetNode{"A", {"0", "1"}, {}, {0.7, 0.3}, false}});
  const Dataset d = sample(net, 10000, 12);
  double ones = 0;
  for (int c : d.column("A").codes) ones += c;
  EXPECT_NEAR(ones / 10000, 0.3, 0.015);
}

TEST(Sampling, TwoNodeGoodnessOfFit) {
  const BayesNet net = parse_bif(kTwoNode);
  const std::size_t n = 20000;
  const Dataset d = sample(net, n, 5);
  double counts[2][2] = {};
  for (std::size_t r = 0; r < n; ++r) counts[d.column("A").codes[r]][d.column("B").codes[r]] += 1;
  const double expected[2][2] = {{0.3 * 0.9, 0.3 * 0.1}, {0.7 * 0.2, 0.7 * 0.8}};
  double chi2 = 0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double e = expected[a][b] * n;
      chi2 += (counts[a][b] - e) * (counts[a][b] - e) / e;
    }
  EXPECT_GT(chi_square_sf(chi2, 3), 0.01);
}

TEST(Sampling, SeedDeterminesRows) {
  const BayesNet net = group1_net();
  EXPECT_EQ(dataset_to_csv(sample(net, 300, 8)), dataset_to_csv(sample(net, 300, 8)));
  EXPECT_NE(dataset_to_csv(sample(net, 300, 8)), dataset_to_csv(sample(net, 300, 9)));
}

TEST(TrueEffect, CptLookup) {
  const BayesNet net = effect_net(0.4, 0.4, 0.2, 0.9);
  std::vector<int> a = {0, 0, 0};
  EXPECT_DOUBLE_EQ(true_effect(net, "T", "Y", a), 0.0);
  a[0] = 1;
  EXPECT_NEAR(true_effect(net, "T", "Y", a), 0.7, 1e-15);
  EXPECT_THROW(true_effect(net, "Y", "T", a), Error);
}

TEST(TrueEffect, HiddenParentMatchesEnumeration) {
  const BayesNet net = group2_net();
  std::vector<NodeId> visible;
  for (NodeId v = 0; v < net.size(); ++v)
    if (!net.hidden(v) && net.node(v).name != "T" && net.node(v).name != "Y") visible.push_back(v);
  ASSERT_EQ(visible.size(), 10u);
  for (std::size_t code = 0; code < (1u << visible.size()); ++code) {
    std::vector<int> a(net.size(), kMissingCode);
    for (std::size_t k = 0; k < visible.size(); ++k) a[visible[k]] = static_cast<int>((code >> k) & 1);
    std::vector<int> full = a;
    EXPECT_NEAR(true_effect(net, "T", "Y", a), enumerated_effect(net, full), 1e-12) << code;
  }
}

TEST(Synthetic, ShapeAndRoles) {
  SynthConfig cfg;
  cfg.seed = 1;
  cfg.n_samples = 500;
  const Synthetic s = generate_group(cfg);
  EXPECT_EQ(s.data.cols(), 102u);
  EXPECT_EQ(s.data.rows(), 500u);
  EXPECT_EQ(s.data.column(0).name, "T");
  EXPECT_EQ(s.data.column(1).name, "Y");
  EXPECT_EQ(s.data.column("T").role, Role::treatment);
  EXPECT_EQ(s.data.column("N90").role, Role::noise);
  std::size_t continuous = 0;
  for (const auto& c : s.data.columns()) continuous += !c.is_discrete();
  EXPECT_EQ(continuous, 45u);
  EXPECT_EQ(s.truth.size(), 500u);

  cfg.seed.reset();
  EXPECT_THROW(generate_group(cfg), Error);
}

TEST(Synthetic, HiddenNodesNotEmitted) {
  SynthConfig cfg;
  cfg.group = SynthGroup::group2;
  cfg.seed = 2;
  cfg.n_samples = 200;
  const Synthetic s = generate_group(cfg);
  EXPECT_EQ(s.data.cols(), 102u);
  EXPECT_FALSE(s.data.contains("U1"));
}

TEST(Synthetic, Deterministic) {
  SynthConfig cfg;
  cfg.seed = 3;
  cfg.n_samples = 300;
  const Synthetic a = generate_group(cfg), b = generate_group(cfg);
  EXPECT_EQ(dataset_to_csv(a.data), dataset_to_csv(b.data));
  EXPECT_EQ(ground_truth_to_csv(a.truth), ground_truth_to_csv(b.truth));
}

TEST(Synthetic, GroundTruthConsistency) {
  for (SynthGroup g : {SynthGroup::group1, SynthGroup::group2}) {
    SynthConfig cfg;
    cfg.group = g;
    cfg.seed = 4;
    cfg.n_samples = 10000;
    const Synthetic s = generate_group(cfg);
    double effect_sum = 0, diff_sum = 0;
    for (std::size_t r = 0; r < s.truth.size(); ++r) {
      const int t = s.data.column("T").codes[r], y = s.data.column("Y").codes[r];
      EXPECT_EQ(y, t ? s.truth.y1[r] : s.truth.y0[r]);
      EXPECT_EQ(s.truth.response[r], response_of(s.truth.y0[r], s.truth.y1[r]));
      // One shared uniform: the potential outcomes move monotonically.
      if (s.truth.effect[r] >= 0 && g == SynthGroup::group1) EXPECT_NE(s.truth.response[r], Response::negative);
      if (r < 200) EXPECT_NEAR(s.truth.effect[r], true_effect(s.net, "T", "Y", s.data, r), 1e-15);
      effect_sum += s.truth.effect[r];
      diff_sum += s.truth.y1[r] - s.truth.y0[r];
    }
    EXPECT_NEAR(diff_sum / 10000, effect_sum / 10000, 0.02);
  }
}

TEST(Synthetic, TruthCsvRoundTrip) {
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.n_samples = 100;
  const Synthetic s = generate_group(cfg);
  const GroundTruth back = ground_truth_from_csv(ground_truth_to_csv(s.truth));
  EXPECT_EQ(back.effect, s.truth.effect);
  EXPECT_EQ(back.y0, s.truth.y0);
  EXPECT_EQ(back.y1, s.truth.y1);
  EXPECT_EQ(back.response, s.truth.response);
  EXPECT_EQ(ground_truth_to_csv(s.truth).substr(0, 29), "row_id,effect,response,y0,y1\n");
}

TEST(Responses, Taxonomy) {
  EXPECT_EQ(response_of(0, 1), Response::positive);
  EXPECT_EQ(response_of(1, 0), Response::negative);
  EXPECT_EQ(response_of(0, 0), Response::nonresponse0);
  EXPECT_EQ(response_of(1, 1), Response::nonresponse1);
}
