#pragma once

// Discrete Bayesian networks: construction, a BIF-subset reader/writer,
// forward sampling, and the exact conditional causal effect of a treatment
// parent on a binary child.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cclass/dataset.hpp"
#include "cclass/error.hpp"
#include "cclass/graph.hpp"
#include "cclass/io.hpp"
#include "cclass/random.hpp"

namespace cclass {

inline constexpr double kCptRowTolerance = 1e-4;

/// One variable and its conditional probability table. `cpt` holds one row
/// of `states.size()` probabilities per parent configuration; configurations
/// run in mixed radix over `parents` with the last parent varying fastest.
struct NetNode {
  std::string name;
  std::vector<std::string> states;
  std::vector<std::string> parents;
  std::vector<double> cpt;
  bool hidden = false;
};

class BayesNet {
 public:
  BayesNet() = default;

  /// Validates and assembles a network. Rows within kCptRowTolerance of
  /// summing to one are renormalized.
  static BayesNet build(std::vector<NetNode> nodes, std::string name = "network") {
    BayesNet net;
    net.name_ = std::move(name);
    std::vector<std::string> names;
    for (const auto& n : nodes) names.push_back(n.name);
    std::vector<Dag::Edge> edges;
    for (const auto& n : nodes) {
      for (const auto& p : n.parents) {
        if (std::find(names.begin(), names.end(), p) == names.end())
          fail(ErrorKind::UnknownVariable, "node '" + n.name + "' lists unknown parent '" + p + "'");
        edges.emplace_back(p, n.name);
      }
    }
    net.dag_ = Dag::build(names, edges);
    net.nodes_ = std::move(nodes);
    net.parent_ids_.resize(net.nodes_.size());
    for (NodeId v = 0; v < net.nodes_.size(); ++v) {
      NetNode& n = net.nodes_[v];
      if (n.states.empty()) fail(ErrorKind::Schema, "node '" + n.name + "' has no states");
      for (std::size_t i = 0; i < n.states.size(); ++i)
        for (std::size_t j = i + 1; j < n.states.size(); ++j)
          if (n.states[i] == n.states[j]) fail(ErrorKind::Schema, "node '" + n.name + "' repeats a state");
      for (const auto& p : n.parents) net.parent_ids_[v].push_back(net.dag_.index_of(p));
      const std::size_t expected = net.row_count(v) * n.states.size();
      if (n.cpt.size() < expected)
        fail(ErrorKind::MissingCptRow, "node '" + n.name + "' has " + std::to_string(n.cpt.size()) +
                                           " probabilities, expected " + std::to_string(expected));
      if (n.cpt.size() > expected)
        fail(ErrorKind::Schema, "node '" + n.name + "' has more probabilities than parent configurations");
      for (std::size_t r = 0; r < net.row_count(v); ++r) net.normalize_row(v, r);
    }
    return net;
  }

  const std::string& name() const { return name_; }
  const Dag& dag() const { return dag_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<NetNode>& nodes() const { return nodes_; }
  const NetNode& node(NodeId v) const { return nodes_.at(v); }
  NodeId index_of(std::string_view name) const { return dag_.index_of(name); }
  int arity(NodeId v) const { return static_cast<int>(nodes_.at(v).states.size()); }
  bool hidden(NodeId v) const { return nodes_.at(v).hidden; }

  void set_hidden(std::string_view name, bool value = true) { nodes_[index_of(name)].hidden = value; }

  /// Parents in CPT order (which may differ from declaration order).
  const std::vector<NodeId>& cpt_parents(NodeId v) const { return parent_ids_.at(v); }

  std::size_t row_count(NodeId v) const {
    std::size_t rows = 1;
    for (NodeId p : parent_ids_.at(v)) rows *= static_cast<std::size_t>(arity(p));
    return rows;
  }

  /// Row index for the parent values found in a full assignment.
  std::size_t config_index(NodeId v, std::span<const int> assignment) const {
    std::size_t idx = 0;
    for (NodeId p : parent_ids_[v]) idx = idx * static_cast<std::size_t>(arity(p)) + assignment[p];
    return idx;
  }

  std::span<const double> row(NodeId v, std::size_t config) const {
    const std::size_t k = nodes_[v].states.size();
    return std::span<const double>(nodes_[v].cpt).subspan(config * k, k);
  }

  double prob(NodeId v, int value, std::span<const int> assignment) const {
    return row(v, config_index(v, assignment))[static_cast<std::size_t>(value)];
  }

  /// Parent state names of configuration `config`, in CPT order.
  std::vector<std::string> config_states(NodeId v, std::size_t config) const {
    const auto& ps = parent_ids_[v];
    std::vector<std::string> out(ps.size());
    for (std::size_t i = ps.size(); i-- > 0;) {
      const auto a = static_cast<std::size_t>(arity(ps[i]));
      out[i] = nodes_[ps[i]].states[config % a];
      config /= a;
    }
    return out;
  }

  friend bool operator==(const BayesNet& a, const BayesNet& b) {
    if (a.nodes_.size() != b.nodes_.size()) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
      const NetNode& x = a.nodes_[i];
      const NetNode& y = b.nodes_[i];
      if (x.name != y.name || x.states != y.states || x.parents != y.parents || x.hidden != y.hidden ||
          x.cpt.size() != y.cpt.size())
        return false;
      for (std::size_t k = 0; k < x.cpt.size(); ++k)
        if (std::fabs(x.cpt[k] - y.cpt[k]) > 1e-12) return false;
    }
    return true;
  }

 private:
  void normalize_row(NodeId v, std::size_t r) {
    NetNode& n = nodes_[v];
    const std::size_t k = n.states.size();
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double p = n.cpt[r * k + j];
      if (!(p >= 0.0 && p <= 1.0))
        fail(ErrorKind::RowSumViolation, "node '" + n.name + "' has probability outside [0,1]" + describe(v, r));
      sum += p;
    }
    if (std::fabs(sum - 1.0) > kCptRowTolerance)
      fail(ErrorKind::RowSumViolation,
           "node '" + n.name + "' row sums to " + format_double(sum) + describe(v, r));
    if (std::fabs(sum - 1.0) > 1e-12)
      for (std::size_t j = 0; j < k; ++j) n.cpt[r * k + j] /= sum;
  }

  std::string describe(NodeId v, std::size_t r) const {
    if (parent_ids_[v].empty()) return "";
    std::string s;
    for (const auto& st : config_states(v, r)) s += (s.empty() ? "" : ", ") + st;
    return " at parent configuration (" + s + ")";
  }

  std::string name_ = "network";
  std::vector<NetNode> nodes_;
  Dag dag_;
  std::vector<std::vector<NodeId>> parent_ids_;
};

// ---- BIF subset -----------------------------------------------------------

namespace detail {

struct BifToken {
  enum Kind { word, punct, end } kind = end;
  std::string text;
  int line = 1;
  int col = 1;
};

class BifLexer {
 public:
  explicit BifLexer(std::string_view text) : text_(text) { advance(); }

  const BifToken& peek() const { return tok_; }

  BifToken next() {
    BifToken t = tok_;
    advance();
    return t;
  }

  [[noreturn]] void error(const BifToken& at, std::string_view expected) const {
    const std::string found = at.kind == BifToken::end ? "end of input" : "'" + at.text + "'";
    fail(ErrorKind::SyntaxError, "line " + std::to_string(at.line) + ", column " + std::to_string(at.col) +
                                     ": expected " + std::string(expected) + ", found " + found);
  }

  BifToken expect(std::string_view punct) {
    if (tok_.kind != BifToken::punct || tok_.text != punct) error(tok_, "'" + std::string(punct) + "'");
    return next();
  }

  BifToken expect_word(std::string_view what) {
    if (tok_.kind != BifToken::word) error(tok_, what);
    return next();
  }

  bool accept(std::string_view punct) {
    if (tok_.kind == BifToken::punct && tok_.text == punct) {
      advance();
      return true;
    }
    return false;
  }

 private:
  static bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '+' || c == '.';
  }

  void bump() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space_and_comments() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') bump();
      } else if (text_.substr(pos_, 2) == "/*") {
        const int line = line_, col = col_;
        bump();
        bump();
        while (pos_ < text_.size() && text_.substr(pos_, 2) != "*/") bump();
        if (pos_ >= text_.size())
          fail(ErrorKind::SyntaxError,
               "line " + std::to_string(line) + ", column " + std::to_string(col) + ": unterminated comment");
        bump();
        bump();
      } else {
        break;
      }
    }
  }

  void advance() {
    skip_space_and_comments();
    tok_ = BifToken{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= text_.size()) return;
    const char c = text_[pos_];
    if (c == '"') {
      bump();
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        s += text_[pos_];
        bump();
      }
      if (pos_ >= text_.size())
        fail(ErrorKind::SyntaxError, "line " + std::to_string(tok_.line) + ", column " +
                                         std::to_string(tok_.col) + ": unterminated string");
      bump();
      tok_.kind = BifToken::word;
      tok_.text = std::move(s);
    } else if (word_char(c)) {
      tok_.kind = BifToken::word;
      while (pos_ < text_.size() && word_char(text_[pos_])) {
        tok_.text += text_[pos_];
        bump();
      }
    } else if (std::string_view("{}()[]|,;=").find(c) != std::string_view::npos) {
      tok_.kind = BifToken::punct;
      tok_.text = std::string(1, c);
      bump();
    } else {
      fail(ErrorKind::SyntaxError, "line " + std::to_string(line_) + ", column " + std::to_string(col_) +
                                       ": unexpected character '" + std::string(1, c) + "'");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  BifToken tok_;
};

// Skips tokens up to and including the next ';'.
inline void skip_statement(BifLexer& lex) {
  while (lex.peek().kind != BifToken::end && !lex.accept(";")) lex.next();
}

// Skips a balanced { ... } block.
inline void skip_block(BifLexer& lex) {
  lex.expect("{");
  int depth = 1;
  while (depth > 0) {
    const BifToken t = lex.next();
    if (t.kind == BifToken::end) lex.error(t, "'}'");
    if (t.kind == BifToken::punct && t.text == "{") ++depth;
    if (t.kind == BifToken::punct && t.text == "}") --depth;
  }
}

inline std::string location(const BifToken& t) {
  return "line " + std::to_string(t.line) + ", column " + std::to_string(t.col);
}

}  // namespace detail

/// Reads the BIF subset: `network`, `variable` blocks with
/// `type discrete [k] { s1, ..., sk };`, and `probability` blocks with
/// `(parent states) p1, ..., pk;` rows or, for root nodes, `table p1, ..., pk;`.
/// Comments and `property` statements are ignored, except that
/// `property hidden;` inside a variable block marks the node hidden.
inline BayesNet parse_bif(std::string_view text) {
  detail::BifLexer lex(text);
  std::string net_name = "network";
  std::vector<NetNode> nodes;
  std::vector<bool> has_table;
  auto find_node = [&](const std::string& n) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].name == n) return i;
    return std::nullopt;
  };

  while (lex.peek().kind != detail::BifToken::end) {
    const detail::BifToken kw = lex.expect_word("'network', 'variable' or 'probability'");
    if (kw.text == "network") {
      if (lex.peek().kind == detail::BifToken::word) net_name = lex.next().text;
      detail::skip_block(lex);
    } else if (kw.text == "variable") {
      const detail::BifToken name = lex.expect_word("variable name");
      if (find_node(name.text)) fail(ErrorKind::SyntaxError, detail::location(name) + ": variable '" + name.text + "' declared twice");
      NetNode node;
      node.name = name.text;
      bool typed = false;
      lex.expect("{");
      while (!lex.accept("}")) {
        const detail::BifToken item = lex.expect_word("'type' or 'property'");
        if (item.text == "property") {
          if (lex.peek().kind == detail::BifToken::word && lex.peek().text == "hidden") node.hidden = true;
          detail::skip_statement(lex);
          continue;
        }
        if (item.text != "type") lex.error(item, "'type' or 'property'");
        const detail::BifToken kind = lex.expect_word("'discrete'");
        if (kind.text != "discrete") lex.error(kind, "'discrete'");
        lex.expect("[");
        const detail::BifToken count = lex.expect_word("state count");
        const auto k = parse_integer(count.text);
        if (!k || *k < 1) lex.error(count, "a positive state count");
        lex.expect("]");
        lex.expect("{");
        do {
          node.states.push_back(lex.expect_word("state name").text);
        } while (lex.accept(","));
        const detail::BifToken close = lex.expect("}");
        if (static_cast<long long>(node.states.size()) != *k)
          fail(ErrorKind::SyntaxError, detail::location(close) + ": variable '" + node.name + "' declares " +
                                           std::to_string(*k) + " states but lists " +
                                           std::to_string(node.states.size()));
        lex.expect(";");
        typed = true;
      }
      if (!typed) fail(ErrorKind::SyntaxError, detail::location(name) + ": variable '" + node.name + "' has no type");
      nodes.push_back(std::move(node));
      has_table.push_back(false);
    } else if (kw.text == "probability") {
      lex.expect("(");
      const detail::BifToken child_tok = lex.expect_word("variable name");
      const auto child = find_node(child_tok.text);
      if (!child) fail(ErrorKind::UnknownVariable, detail::location(child_tok) + ": unknown variable '" + child_tok.text + "'");
      if (has_table[*child])
        fail(ErrorKind::SyntaxError, detail::location(child_tok) + ": second probability block for '" + child_tok.text + "'");
      has_table[*child] = true;
      std::vector<std::size_t> parent_idx;
      if (lex.accept("|")) {
        do {
          const detail::BifToken p = lex.expect_word("parent name");
          const auto pi = find_node(p.text);
          if (!pi) fail(ErrorKind::UnknownVariable, detail::location(p) + ": unknown variable '" + p.text + "'");
          parent_idx.push_back(*pi);
          nodes[*child].parents.push_back(p.text);
        } while (lex.accept(","));
      }
      lex.expect(")");

      const std::size_t k = nodes[*child].states.size();
      std::size_t rows = 1;
      for (auto pi : parent_idx) rows *= nodes[pi].states.size();
      std::vector<std::optional<std::vector<double>>> table(rows);

      auto read_row = [&](const detail::BifToken& at, std::size_t config, std::string_view what) {
        std::vector<double> probs;
        do {
          const detail::BifToken num = lex.expect_word("probability");
          const auto v = parse_double(num.text);
          if (!v) lex.error(num, "a number");
          probs.push_back(*v);
        } while (lex.accept(","));
        lex.expect(";");
        if (probs.size() != k)
          fail(ErrorKind::SyntaxError, detail::location(at) + ": expected " + std::to_string(k) +
                                           " probabilities for '" + nodes[*child].name + "', found " +
                                           std::to_string(probs.size()));
        double sum = 0.0;
        for (double p : probs) sum += p;
        if (std::fabs(sum - 1.0) > kCptRowTolerance)
          fail(ErrorKind::RowSumViolation, detail::location(at) + ": row " + std::string(what) + " of '" +
                                               nodes[*child].name + "' sums to " + format_double(sum));
        if (table[config])
          fail(ErrorKind::SyntaxError, detail::location(at) + ": duplicate row " + std::string(what));
        table[config] = std::move(probs);
      };

      lex.expect("{");
      while (!lex.accept("}")) {
        const detail::BifToken at = lex.peek();
        if (at.kind == detail::BifToken::word && at.text == "property") {
          lex.next();
          detail::skip_statement(lex);
        } else if (at.kind == detail::BifToken::word && at.text == "table") {
          lex.next();
          if (!parent_idx.empty())
            fail(ErrorKind::SyntaxError, detail::location(at) + ": 'table' is only supported for root variables");
          read_row(at, 0, "table");
        } else if (lex.accept("(")) {
          std::size_t config = 0;
          std::string label;
          for (std::size_t i = 0; i < parent_idx.size(); ++i) {
            if (i > 0) lex.expect(",");
            const detail::BifToken s = lex.expect_word("parent state");
            const auto& states = nodes[parent_idx[i]].states;
            auto it = std::find(states.begin(), states.end(), s.text);
            if (it == states.end())
              fail(ErrorKind::UnknownVariable, detail::location(s) + ": '" + s.text + "' is not a state of '" +
                                                   nodes[parent_idx[i]].name + "'");
            config = config * states.size() + static_cast<std::size_t>(it - states.begin());
            label += (label.empty() ? "" : ", ") + s.text;
          }
          lex.expect(")");
          read_row(at, config, "(" + label + ")");
        } else {
          lex.error(at, "'(', 'table', 'property' or '}'");
        }
      }
      for (std::size_t r = 0; r < rows; ++r) {
        if (table[r]) {
          nodes[*child].cpt.insert(nodes[*child].cpt.end(), table[r]->begin(), table[r]->end());
          continue;
        }
        std::string label;
        std::size_t rest = r;
        std::vector<std::string> parts(parent_idx.size());
        for (std::size_t i = parent_idx.size(); i-- > 0;) {
          const auto& states = nodes[parent_idx[i]].states;
          parts[i] = states[rest % states.size()];
          rest /= states.size();
        }
        for (const auto& p : parts) label += (label.empty() ? "" : ", ") + p;
        fail(ErrorKind::MissingCptRow, detail::location(child_tok) + ": '" + nodes[*child].name +
                                           "' has no row for parent configuration (" + label + ")");
      }
    } else {
      lex.error(kw, "'network', 'variable' or 'probability'");
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!has_table[i]) fail(ErrorKind::MissingCptRow, "variable '" + nodes[i].name + "' has no probability block");
  return BayesNet::build(std::move(nodes), net_name);
}

/// Emits the BIF subset read by parse_bif. Probabilities use shortest
/// round-trip formatting, so parse(write(net)) == net.
inline std::string write_bif(const BayesNet& net) {
  std::string out = "network " + net.name() + " {\n}\n";
  for (const auto& n : net.nodes()) {
    out += "variable " + n.name + " {\n  type discrete [ " + std::to_string(n.states.size()) + " ] { ";
    for (std::size_t i = 0; i < n.states.size(); ++i) out += (i ? ", " : "") + n.states[i];
    out += " };\n";
    if (n.hidden) out += "  property hidden;\n";
    out += "}\n";
  }
  for (NodeId v = 0; v < net.size(); ++v) {
    const NetNode& n = net.node(v);
    out += "probability ( " + n.name;
    for (std::size_t i = 0; i < n.parents.size(); ++i) out += (i ? ", " : " | ") + n.parents[i];
    out += " ) {\n";
    for (std::size_t r = 0; r < net.row_count(v); ++r) {
      if (n.parents.empty()) {
        out += "  table ";
      } else {
        out += "  (";
        const auto states = net.config_states(v, r);
        for (std::size_t i = 0; i < states.size(); ++i) out += (i ? ", " : "") + states[i];
        out += ") ";
      }
      const auto probs = net.row(v, r);
      for (std::size_t j = 0; j < probs.size(); ++j) out += (j ? ", " : "") + format_double(probs[j]);
      out += ";\n";
    }
    out += "}\n";
  }
  return out;
}

// ---- sampling -------------------------------------------------------------

/// Draws one full assignment in topological order.
inline void sample_assignment(const BayesNet& net, Rng& rng, std::vector<int>& values) {
  values.assign(net.size(), 0);
  for (NodeId v : net.dag().topological_order())
    values[v] = draw_categorical(rng, net.row(v, net.config_index(v, values)));
}

/// Forward sampling of n rows; one column per node (hidden ones included),
/// in declaration order.
inline Dataset sample(const BayesNet& net, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<int>> codes(net.size(), std::vector<int>(n));
  std::vector<int> values;
  for (std::size_t r = 0; r < n; ++r) {
    sample_assignment(net, rng, values);
    for (NodeId v = 0; v < net.size(); ++v) codes[v][r] = values[v];
  }
  Dataset d;
  for (NodeId v = 0; v < net.size(); ++v) {
    const NetNode& node = net.node(v);
    Column c = Column::categorical(node.name, node.states, std::move(codes[v]));
    d.add_column(std::move(c));
  }
  return d;
}

// ---- conditional causal effect --------------------------------------------

namespace detail {

inline void check_effect_args(const BayesNet& net, NodeId t, NodeId y) {
  const auto& ps = net.cpt_parents(y);
  if (std::find(ps.begin(), ps.end(), t) == ps.end())
    fail(ErrorKind::TNotParent, "'" + net.node(t).name + "' is not a parent of '" + net.node(y).name + "'");
  if (net.arity(y) != 2) fail(ErrorKind::NonBinary, "'" + net.node(y).name + "' must be binary");
  if (net.arity(t) != 2) fail(ErrorKind::NonBinary, "'" + net.node(t).name + "' must be binary");
}

inline double effect_given(const BayesNet& net, NodeId t, NodeId y, std::vector<int>& values) {
  values[t] = 1;
  const double p1 = net.prob(y, 1, values);
  values[t] = 0;
  const double p0 = net.prob(y, 1, values);
  return p1 - p0;
}

}  // namespace detail

/// P(y=1 | do(t=1), pa') - P(y=1 | do(t=0), pa') where pa' are the outcome's
/// other parents. `assignment` gives a state index per node, kMissingCode
/// where unobserved. Unobserved parents of the outcome are marginalized by
/// exact enumeration, conditioning on every observed non-descendant of the
/// treatment.
inline double true_effect(const BayesNet& net, std::string_view t_name, std::string_view y_name,
                          std::span<const int> assignment) {
  const NodeId t = net.index_of(t_name);
  const NodeId y = net.index_of(y_name);
  detail::check_effect_args(net, t, y);
  if (assignment.size() != net.size()) fail(ErrorKind::LengthMismatch, "assignment must cover every node");

  std::vector<int> values(assignment.begin(), assignment.end());
  std::vector<NodeId> hidden_parents;
  for (NodeId p : net.cpt_parents(y))
    if (p != t && values[p] == kMissingCode) hidden_parents.push_back(p);
  if (hidden_parents.empty()) return detail::effect_given(net, t, y, values);

  const std::vector<char> downstream = descendant_mask(net.dag(), t);
  for (NodeId h : hidden_parents)
    if (downstream[h])
      fail(ErrorKind::InvalidArgument, "unobserved parent '" + net.node(h).name + "' lies downstream of the treatment");
  std::vector<NodeId> seeds = hidden_parents;
  for (NodeId v = 0; v < net.size(); ++v)
    if (v != t && v != y && !downstream[v] && values[v] != kMissingCode) seeds.push_back(v);
  const std::vector<char> relevant = ancestral_closure(net.dag(), seeds);

  std::vector<NodeId> free_nodes;
  double configs = 1.0;
  for (NodeId v = 0; v < net.size(); ++v)
    if (relevant[v] && values[v] == kMissingCode) {
      free_nodes.push_back(v);
      configs *= net.arity(v);
    }
  if (configs > static_cast<double>(1 << 22))
    fail(ErrorKind::InvalidArgument, "too many unobserved configurations to enumerate");

  for (NodeId v : free_nodes) values[v] = 0;
  double weight_sum = 0.0;
  double effect_sum = 0.0;
  while (true) {
    double w = 1.0;
    for (NodeId v = 0; v < net.size() && w > 0.0; ++v)
      if (relevant[v]) w *= net.prob(v, values[v], values);
    if (w > 0.0) {
      weight_sum += w;
      effect_sum += w * detail::effect_given(net, t, y, values);
    }
    std::size_t i = 0;
    for (; i < free_nodes.size(); ++i) {
      if (++values[free_nodes[i]] < net.arity(free_nodes[i])) break;
      values[free_nodes[i]] = 0;
    }
    if (i == free_nodes.size()) break;
  }
  if (weight_sum <= 0.0) fail(ErrorKind::InvalidArgument, "observed values have zero probability under the net");
  return effect_sum / weight_sum;
}

/// Assignment read from a dataset row by matching column names to nodes and
/// level labels to states; nodes without a column are unobserved.
inline std::vector<int> observed_assignment(const BayesNet& net, const Dataset& data, std::size_t row) {
  std::vector<int> values(net.size(), kMissingCode);
  for (NodeId v = 0; v < net.size(); ++v) {
    const auto col = data.find(net.node(v).name);
    if (!col) continue;
    const Column& c = data.column(*col);
    if (!c.is_discrete()) fail(ErrorKind::Schema, "column '" + c.name + "' must be discrete");
    const int code = c.codes.at(row);
    if (code == kMissingCode) continue;
    const auto& states = net.node(v).states;
    auto it = std::find(states.begin(), states.end(), c.levels[static_cast<std::size_t>(code)]);
    if (it == states.end())
      fail(ErrorKind::Schema, "column '" + c.name + "' has a level that is not a state of the node");
    values[v] = static_cast<int>(it - states.begin());
  }
  return values;
}

inline double true_effect(const BayesNet& net, std::string_view t, std::string_view y, const Dataset& data,
                          std::size_t row) {
  return true_effect(net, t, y, observed_assignment(net, data, row));
}

// ---- JSON -----------------------------------------------------------------

inline nlohmann::json to_json(const BayesNet& net) {
  nlohmann::json nodes = nlohmann::json::array();
  for (NodeId v = 0; v < net.size(); ++v) {
    const NetNode& n = net.node(v);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < net.row_count(v); ++r) {
      const auto row = net.row(v, r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    nodes.push_back(
        {{"name", n.name}, {"states", n.states}, {"parents", n.parents}, {"cpt", std::move(rows)}, {"hidden", n.hidden}});
  }
  return {{"name", net.name()}, {"nodes", std::move(nodes)}};
}

inline BayesNet bayes_net_from_json(const nlohmann::json& j) {
  try {
    std::vector<NetNode> nodes;
    for (const auto& nj : j.at("nodes")) {
      NetNode n;
      n.name = nj.at("name").get<std::string>();
      n.states = nj.at("states").get<std::vector<std::string>>();
      n.parents = nj.value("parents", std::vector<std::string>{});
      for (const auto& row : nj.at("cpt"))
        for (const auto& p : row) n.cpt.push_back(p.get<double>());
      n.hidden = nj.value("hidden", false);
      nodes.push_back(std::move(n));
    }
    return BayesNet::build(std::move(nodes), j.value("name", std::string("network")));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Schema, std::string("malformed network JSON: ") + e.what());
  }
}

}  // namespace cclass
