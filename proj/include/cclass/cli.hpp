#pragma once

// The `cclass` command line: generate, discover, train, predict, eval, qini.
// Every run records its resolved configuration and a hash of it next to its
// outputs. Defaults for any subcommand may come from
// $CCLASS_CONFIG_DIR/<subcommand>.json, keyed by long option name.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cclass/cclass.hpp"

namespace cclass::cli {

inline constexpr const char* kToolName = "cclass";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kConfigDirEnv = "CCLASS_CONFIG_DIR";

enum ExitCode { kOk = 0, kInternal = 1, kValidation = 2, kDegenerate = 3 };

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyArm:
    case ErrorKind::EmptyControl:
    case ErrorKind::TooFewSamples:
      return kDegenerate;
    default:
      return kValidation;
  }
}

namespace detail {

struct Output {
  std::ostream& out;
  std::ostream& err;

  void warn(const std::vector<std::string>& warnings) const {
    for (const auto& w : warnings) err << "warning: " << w << "\n";
  }
};

inline nlohmann::json meta(std::string_view command, const nlohmann::json& config) {
  return {{"tool", kToolName},
          {"version", kToolVersion},
          {"command", command},
          {"config", config},
          {"config_hash", fnv1a_hex(config.dump())}};
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

/// Writes a JSON document to `path`, or to stdout when the path is empty.
inline void emit_json(const Output& io, const std::string& path, const nlohmann::json& doc) {
  if (path.empty())
    io.out << dump(doc);
  else
    write_text_file(path, dump(doc));
}

inline std::filesystem::path meta_path_for(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta.json");
  return p;
}

/// CSV outputs carry their provenance in a `<name>.meta.json` sidecar.
inline void emit_csv(const Output& io, const std::string& path, const std::string& csv, const nlohmann::json& m) {
  if (path.empty()) {
    io.out << csv;
    return;
  }
  write_text_file(path, csv);
  write_text_file(meta_path_for(path), dump(m));
}

inline void save_dataset_with_meta(const Dataset& d, const std::filesystem::path& csv, const nlohmann::json& m) {
  save_dataset(d, csv);
  write_text_file(meta_path_for(csv), dump(m));
}

inline Dataset load(const std::string& csv, const std::string& schema) {
  if (schema.empty()) return load_dataset(csv);
  return load_dataset(csv, std::filesystem::path(schema));
}

inline std::vector<int> binary_codes(const Dataset& d, const std::string& name) {
  const Column& c = d.column(name);
  if (!c.is_discrete() || c.arity() != 2) fail(ErrorKind::NonBinary, "column '" + name + "' must be binary");
  if (c.has_missing()) fail(ErrorKind::MissingValues, "column '" + name + "' has missing values");
  return c.codes;
}

struct PredictionTable {
  std::vector<double> effect;
  std::vector<int> assign;
};

inline PredictionTable read_predictions(const std::string& path) {
  const CsvTable t = parse_csv(read_text_file(path));
  std::optional<std::size_t> effect, assign;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == "effect") effect = i;
    if (t.header[i] == "assign") assign = i;
  }
  if (!effect) fail(ErrorKind::MissingColumn, "predictions lack an 'effect' column");
  PredictionTable p;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto e = parse_double(t.rows[r][*effect]);
    if (!e) fail(ErrorKind::Schema, "predictions row " + std::to_string(r) + ": effect is not a number");
    p.effect.push_back(*e);
    if (assign) {
      const auto a = parse_integer(t.rows[r][*assign]);
      if (!a || (*a != 0 && *a != 1)) fail(ErrorKind::Schema, "predictions row " + std::to_string(r) + ": bad assign");
      p.assign.push_back(static_cast<int>(*a));
    }
  }
  return p;
}

inline std::string predictions_to_csv(const std::vector<UpliftPrediction>& preds) {
  std::string out = "row_id,p1,p0,effect,assign\n";
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& p = preds[i];
    out += std::to_string(i) + "," + format_double(p.p1) + "," + format_double(p.p0) + "," + format_double(p.effect) +
           "," + std::to_string(p.assign) + "\n";
  }
  return out;
}

// ---- shared option groups -------------------------------------------------

struct DiscoveryOptions {
  double alpha = 0.01;
  int max_cond_size = 3;
  int candidate_cap = 0;  // 0 = none
  bool no_symmetric = false;
  int bins = 3;

  void add_to(CLI::App& app) {
    app.add_option("--alpha", alpha, "significance level of the G2 tests")->capture_default_str();
    app.add_option("--max-cond-size", max_cond_size, "largest conditioning set")->capture_default_str();
    app.add_option("--candidate-cap", candidate_cap, "stop after this many candidates (0 = no cap)")
        ->capture_default_str();
    app.add_flag("--no-symmetric", no_symmetric, "skip the symmetry correction");
    app.add_option("--bins", bins, "equal-frequency bins for continuous columns")->capture_default_str();
  }

  DiscoveryConfig config() const {
    DiscoveryConfig c;
    c.alpha = alpha;
    c.max_cond_size = max_cond_size;
    if (candidate_cap > 0) c.candidate_cap = candidate_cap;
    c.symmetric = !no_symmetric;
    c.bins = bins;
    c.validate();
    return c;
  }
};

struct ClassifierOptions {
  std::string classifier = "forest";
  std::optional<std::uint64_t> seed;
  int trees = 100;
  int max_depth = 0;
  int min_leaf = 1;
  int feature_subsample = 0;
  int max_iter = 100;
  double l2 = 1e-4;
  double tol = 1e-8;

  void add_to(CLI::App& app) {
    app.add_option("--classifier", classifier, "logistic or forest")
        ->check(CLI::IsMember({"logistic", "forest"}))
        ->capture_default_str();
    app.add_option("--seed", seed, "random seed (required for the forest)");
    app.add_option("--trees", trees, "forest size")->capture_default_str();
    app.add_option("--max-depth", max_depth, "tree depth limit (0 = unbounded)")->capture_default_str();
    app.add_option("--min-leaf", min_leaf, "minimum rows per leaf")->capture_default_str();
    app.add_option("--feature-subsample", feature_subsample, "features tried per split (0 = sqrt)")
        ->capture_default_str();
    app.add_option("--max-iter", max_iter, "logistic IRLS iteration cap")->capture_default_str();
    app.add_option("--l2", l2, "logistic L2 penalty")->capture_default_str();
    app.add_option("--tol", tol, "logistic convergence tolerance")->capture_default_str();
  }

  ClassifierSpec spec() const {
    ClassifierSpec s;
    s.kind = *parse_classifier(classifier);
    if (s.kind == ClassifierKind::forest) {
      if (!seed) fail(ErrorKind::InvalidArgument, "the forest classifier needs --seed");
      s.forest.seed = *seed;
      s.forest.n_trees = trees;
      s.forest.max_depth = max_depth;
      s.forest.min_leaf = min_leaf;
      s.forest.feature_subsample = feature_subsample;
    } else {
      s.logistic.max_iterations = max_iter;
      s.logistic.l2_penalty = l2;
      s.logistic.convergence_tol = tol;
    }
    s.validate();
    return s;
  }
};

/// Loads $CCLASS_CONFIG_DIR/<name>.json and installs its values as option
/// defaults; unknown keys are rejected.
inline void apply_config_defaults(CLI::App& sub, const nlohmann::json& cfg) {
  if (!cfg.is_object()) fail(ErrorKind::Schema, "config for '" + sub.get_name() + "' must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = nullptr;
    for (CLI::Option* o : sub.get_options())
      for (const auto& n : o->get_lnames())
        if (n == key) opt = o;
    if (!opt) fail(ErrorKind::Schema, "config for '" + sub.get_name() + "' has unknown key '" + key + "'");
    std::string text;
    if (value.is_string())
      text = value.get<std::string>();
    else if (value.is_boolean())
      text = value.get<bool>() ? "true" : "false";
    else if (value.is_number_float())
      text = format_double(value.get<double>());
    else
      text = value.dump();
    opt->default_str(text);
    opt->default_val(text);
  }
}

}  // namespace detail

// ---- commands -------------------------------------------------------------

struct GenerateArgs {
  std::string group = "group1";
  std::size_t n = 10000;
  std::size_t noise = 90;
  double continuous_fraction = 0.5;
  std::optional<std::uint64_t> seed;
  std::string bif;
  std::optional<double> split;
  std::string out;
};

inline int cmd_generate(const GenerateArgs& a, const detail::Output& io) {
  if (!a.seed) fail(ErrorKind::InvalidArgument, "generate needs --seed");
  if (a.split && !(*a.split > 0.0 && *a.split < 1.0)) fail(ErrorKind::InvalidArgument, "--split must lie in (0,1)");
  nlohmann::json config = {{"n", a.n}, {"seed", *a.seed}, {"out", a.out}};
  config["split"] = a.split ? nlohmann::json(*a.split) : nlohmann::json(nullptr);

  Dataset data;
  std::optional<GroundTruth> truth;
  BayesNet net;
  if (!a.bif.empty()) {
    config["bif"] = a.bif;
    net = parse_bif(read_text_file(a.bif));
    data = sample(net, a.n, *a.seed);
  } else {
    SynthConfig sc;
    const auto group = parse_group(a.group);
    if (!group) fail(ErrorKind::InvalidArgument, "--group must be group1 or group2");
    sc.group = *group;
    sc.n_samples = a.n;
    sc.n_noise_vars = a.noise;
    sc.continuous_fraction = a.continuous_fraction;
    sc.seed = a.seed;
    config["synth"] = to_json(sc);
    Synthetic s = generate_group(sc);
    data = std::move(s.data);
    truth = std::move(s.truth);
    net = std::move(s.net);
  }
  const nlohmann::json m = detail::meta("generate", config);
  const std::filesystem::path dir(a.out);
  detail::save_dataset_with_meta(data, dir / "data.csv", m);
  nlohmann::json net_doc = to_json(net);
  net_doc["meta"] = m;
  write_text_file(dir / "net.json", detail::dump(net_doc));
  if (truth) detail::emit_csv(io, (dir / "truth.csv").string(), ground_truth_to_csv(*truth), m);

  if (a.split) {
    const auto n_train = static_cast<std::size_t>(std::llround(*a.split * static_cast<double>(data.rows())));
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < data.rows(); ++i) (i < n_train ? train_rows : test_rows).push_back(i);
    detail::save_dataset_with_meta(data.take_rows(train_rows), dir / "train.csv", m);
    detail::save_dataset_with_meta(data.take_rows(test_rows), dir / "test.csv", m);
    if (truth) {
      detail::emit_csv(io, (dir / "train_truth.csv").string(), ground_truth_to_csv(truth->take(train_rows)), m);
      detail::emit_csv(io, (dir / "test_truth.csv").string(), ground_truth_to_csv(truth->take(test_rows)), m);
    }
  }
  io.err << "wrote " << data.rows() << " rows x " << data.cols() << " columns to " << a.out << "\n";
  return kOk;
}

struct DiscoverArgs {
  std::string data;
  std::string schema;
  std::string target;
  detail::DiscoveryOptions discovery;
  bool explain = false;
  std::string out;
};

inline int cmd_discover(const DiscoverArgs& a, const detail::Output& io) {
  const DiscoveryConfig cfg = a.discovery.config();
  const Dataset data = detail::load(a.data, a.schema);
  const ParentSet ps = discover_parents(data, a.target, cfg);
  nlohmann::json config = {{"data", a.data},     {"schema", a.schema},   {"target", a.target},
                           {"explain", a.explain}, {"discovery", to_json(cfg)}};
  nlohmann::json doc = detail::meta("discover", config);
  doc["result"] = to_json(ps, a.explain);
  doc["result"]["tests_run"] = ps.trace.size();
  detail::emit_json(io, a.out, doc);
  return kOk;
}

struct TrainArgs {
  std::string data;
  std::string schema;
  std::string treatment;
  std::string outcome;
  std::optional<std::vector<std::string>> parents;
  detail::DiscoveryOptions discovery;
  detail::ClassifierOptions classifier;
  std::string out;
};

inline int cmd_train(const TrainArgs& a, const detail::Output& io) {
  const ClassifierSpec spec = a.classifier.spec();
  const DiscoveryConfig cfg = a.discovery.config();
  const Dataset data = detail::load(a.data, a.schema);
  data.index_of(a.treatment);
  data.index_of(a.outcome);

  nlohmann::json config = {{"data", a.data},         {"schema", a.schema},     {"treatment", a.treatment},
                           {"outcome", a.outcome},   {"classifier", to_json(spec)}, {"out", a.out}};
  std::optional<ParentSet> ps;
  if (a.parents) {
    ParentSet given;
    given.target = a.outcome;
    for (const auto& name : *a.parents)
      if (!name.empty()) given.members.push_back(name);
    given.members.push_back(a.treatment);
    for (const auto& m : given.members) data.index_of(m);
    config["parents"] = std::vector<std::string>(given.members.begin(), given.members.end() - 1);
    ps = given;
  } else {
    ps = discover_parents(data, a.outcome, cfg);
    config["discovery"] = to_json(cfg);
  }
  const TwoModelPair pair = train_cctm(data, a.treatment, a.outcome, ps, spec, cfg);
  io.warn(pair.warnings);
  nlohmann::json doc = to_json(pair);
  if (!a.parents) doc["discovered_parents"] = to_json(*ps, false);
  doc["meta"] = detail::meta("train", config);
  if (a.out.empty()) fail(ErrorKind::InvalidArgument, "train needs --out");
  write_text_file(a.out, detail::dump(doc));
  io.err << "trained on " << pair.n_treated << " treated / " << pair.n_control << " control rows; PA'(Y) = {";
  for (std::size_t i = 0; i < pair.parents_excl_t.size(); ++i) io.err << (i ? ", " : "") << pair.parents_excl_t[i];
  io.err << "}\n";
  return kOk;
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string schema;
  double theta = 0.0;
  std::string out;
};

inline int cmd_predict(const PredictArgs& a, const detail::Output& io) {
  if (!(a.theta >= 0.0)) fail(ErrorKind::InvalidArgument, "--theta must be >= 0");
  const TwoModelPair pair = two_model_from_json(read_json_file(a.model));
  const Dataset data = detail::load(a.data, a.schema);
  std::vector<UpliftPrediction> preds;
  if (data.rows() > 0) {
    std::vector<std::string> warnings;
    preds = predict_cctm(pair, data, a.theta, &warnings);
    io.warn(warnings);
  }
  const nlohmann::json config = {{"model", a.model}, {"data", a.data}, {"schema", a.schema}, {"theta", a.theta}};
  detail::emit_csv(io, a.out, detail::predictions_to_csv(preds), detail::meta("predict", config));
  return kOk;
}

struct QiniArgs {
  std::string predictions;
  std::string data;
  std::string schema;
  std::string treatment;
  std::string outcome;
  std::size_t points = 10;
  std::string out;
  std::string curve_out;
};

inline nlohmann::json qini_result(const std::vector<double>& effects, const std::vector<int>& y,
                                  const std::vector<int>& t, std::size_t points) {
  const QiniCurve curve = qini_curve(effects, y, t, points);
  return {{"qini_coefficient", qini_coefficient(y, t)}, {"curve", to_json(curve)}};
}

inline int cmd_qini(const QiniArgs& a, const detail::Output& io) {
  const Dataset data = detail::load(a.data, a.schema);
  const std::vector<int> y = detail::binary_codes(data, a.outcome);
  const std::vector<int> t = detail::binary_codes(data, a.treatment);
  const detail::PredictionTable preds = detail::read_predictions(a.predictions);
  if (preds.effect.size() != y.size())
    fail(ErrorKind::LengthMismatch, std::to_string(preds.effect.size()) + " predictions vs " +
                                        std::to_string(y.size()) + " data rows");
  const nlohmann::json config = {{"predictions", a.predictions}, {"data", a.data},       {"schema", a.schema},
                                 {"treatment", a.treatment},     {"outcome", a.outcome}, {"points", a.points}};
  const nlohmann::json m = detail::meta("qini", config);
  nlohmann::json doc = m;
  doc["result"] = qini_result(preds.effect, y, t, a.points);
  if (!a.curve_out.empty())
    detail::emit_csv(io, a.curve_out, curve_to_csv(qini_curve(preds.effect, y, t, a.points)), m);
  detail::emit_json(io, a.out, doc);
  return kOk;
}

struct EvalArgs {
  std::string predictions;
  std::string truth;
  std::string data;
  std::string schema;
  std::string treatment;
  std::string outcome;
  double theta = 0.0;
  std::size_t points = 10;
  std::size_t folds = 0;
  detail::DiscoveryOptions discovery;
  detail::ClassifierOptions classifier;
  std::string out;
  std::string curve_out;
};

inline int cmd_eval(const EvalArgs& a, const detail::Output& io) {
  nlohmann::json config = {{"theta", a.theta}, {"points", a.points}};
  nlohmann::json result;
  std::optional<QiniCurve> curve_for_csv;

  if (a.folds > 0) {
    // Cross-validated Qini: per fold, discover, train and score the held-out rows.
    if (a.data.empty() || a.treatment.empty() || a.outcome.empty())
      fail(ErrorKind::InvalidArgument, "--folds needs --data, --treatment and --outcome");
    const ClassifierSpec spec = a.classifier.spec();
    const DiscoveryConfig cfg = a.discovery.config();
    const Dataset data = detail::load(a.data, a.schema);
    const std::vector<int> y = detail::binary_codes(data, a.outcome);
    const std::vector<int> t = detail::binary_codes(data, a.treatment);
    const std::uint64_t split_seed = spec.kind == ClassifierKind::forest ? spec.forest.seed : a.classifier.seed.value_or(0);
    const std::vector<Fold> folds = kfold_split(data.rows(), a.folds, split_seed);
    config.update({{"data", a.data},
                   {"schema", a.schema},
                   {"treatment", a.treatment},
                   {"outcome", a.outcome},
                   {"folds", a.folds},
                   {"split_seed", split_seed},
                   {"classifier", to_json(spec)},
                   {"discovery", to_json(cfg)}});
    std::vector<QiniCurve> curves;
    nlohmann::json fold_docs = nlohmann::json::array();
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const Dataset train = data.take_rows(folds[f].train);
      const Dataset test = data.take_rows(folds[f].test);
      const TwoModelPair pair = train_cctm(train, a.treatment, a.outcome, std::nullopt, spec, cfg);
      io.warn(pair.warnings);
      const auto preds = predict_cctm(pair, test, a.theta);
      std::vector<int> ty, tt;
      for (auto i : folds[f].test) {
        ty.push_back(y[i]);
        tt.push_back(t[i]);
      }
      curves.push_back(qini_curve(preds, ty, tt, a.points));
      fold_docs.push_back({{"fold", f},
                           {"test_rows", folds[f].test.size()},
                           {"parents_excl_t", pair.parents_excl_t},
                           {"curve", to_json(curves.back())}});
    }
    const QiniCurve mean = mean_curve(curves);
    result = {{"folds", std::move(fold_docs)}, {"mean_curve", to_json(mean)}};
    curve_for_csv = mean;
  } else if (!a.truth.empty()) {
    if (a.predictions.empty()) fail(ErrorKind::InvalidArgument, "--truth needs --predictions");
    const detail::PredictionTable preds = detail::read_predictions(a.predictions);
    const GroundTruth truth = ground_truth_from_csv(read_text_file(a.truth));
    if (preds.assign.empty() && !preds.effect.empty())
      fail(ErrorKind::MissingColumn, "predictions lack an 'assign' column");
    config.update({{"predictions", a.predictions}, {"truth", a.truth}});
    std::size_t positive = 0;
    for (double e : truth.effect) positive += e > a.theta;
    result = {{"accuracy", causal_accuracy(preds.assign, truth.effect, a.theta)},
              {"rows", truth.size()},
              {"truth_positive_fraction", truth.size() ? static_cast<double>(positive) / truth.size() : 0.0}};
  } else if (!a.data.empty()) {
    if (a.predictions.empty()) fail(ErrorKind::InvalidArgument, "Qini evaluation needs --predictions");
    const Dataset data = detail::load(a.data, a.schema);
    const std::vector<int> y = detail::binary_codes(data, a.outcome);
    const std::vector<int> t = detail::binary_codes(data, a.treatment);
    const detail::PredictionTable preds = detail::read_predictions(a.predictions);
    if (preds.effect.size() != y.size())
      fail(ErrorKind::LengthMismatch, std::to_string(preds.effect.size()) + " predictions vs " +
                                          std::to_string(y.size()) + " data rows");
    config.update({{"predictions", a.predictions},
                   {"data", a.data},
                   {"schema", a.schema},
                   {"treatment", a.treatment},
                   {"outcome", a.outcome}});
    result = qini_result(preds.effect, y, t, a.points);
    curve_for_csv = qini_curve(preds.effect, y, t, a.points);
  } else {
    fail(ErrorKind::InvalidArgument, "eval needs --truth, --data, or --folds");
  }

  const nlohmann::json m = detail::meta("eval", config);
  nlohmann::json doc = m;
  doc["result"] = std::move(result);
  if (!a.curve_out.empty() && curve_for_csv) detail::emit_csv(io, a.curve_out, curve_to_csv(*curve_for_csv), m);
  detail::emit_json(io, a.out, doc);
  return kOk;
}

// ---- entry point ----------------------------------------------------------

/// Parses arguments and runs one subcommand; returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  const detail::Output io{out, err};
  CLI::App app{"Causal classification with local parent discovery", kToolName};
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* g = app.add_subcommand("generate", "write a synthetic or BIF-sampled dataset");
  g->add_option("--group", gen.group, "group1 or group2")->check(CLI::IsMember({"group1", "group2"}))->capture_default_str();
  g->add_option("--n", gen.n, "rows")->capture_default_str();
  g->add_option("--noise", gen.noise, "irrelevant columns")->capture_default_str();
  g->add_option("--continuous-fraction", gen.continuous_fraction, "share of noise columns that are continuous")
      ->capture_default_str();
  g->add_option("--seed", gen.seed, "random seed");
  g->add_option("--bif", gen.bif, "sample this network instead of a built-in group");
  g->add_option("--split", gen.split, "also write train/test files; fraction of rows in train");
  g->add_option("--out", gen.out, "output directory")->required();

  DiscoverArgs disc;
  CLI::App* d = app.add_subcommand("discover", "find the parents of a target column");
  d->add_option("--data", disc.data, "CSV file")->required();
  d->add_option("--schema", disc.schema, "schema JSON (default: <data>.schema.json if present)");
  d->add_option("--target", disc.target, "target column")->required();
  disc.discovery.add_to(*d);
  d->add_flag("--explain", disc.explain, "include every conditional independence test");
  d->add_option("--out", disc.out, "output JSON (default: stdout)");

  TrainArgs tr;
  CLI::App* t = app.add_subcommand("train", "fit the treated/control model pair");
  t->add_option("--data", tr.data, "CSV file")->required();
  t->add_option("--schema", tr.schema, "schema JSON");
  t->add_option("--treatment", tr.treatment, "treatment column")->required();
  t->add_option("--outcome", tr.outcome, "outcome column")->required();
  t->add_option("--parents", tr.parents, "use these outcome parents instead of discovering them")->delimiter(',');
  tr.discovery.add_to(*t);
  tr.classifier.add_to(*t);
  t->add_option("--out", tr.out, "model JSON")->required();

  PredictArgs pr;
  CLI::App* p = app.add_subcommand("predict", "score rows with a trained model pair");
  p->add_option("--model", pr.model, "model JSON")->required();
  p->add_option("--data", pr.data, "CSV file")->required();
  p->add_option("--schema", pr.schema, "schema JSON");
  p->add_option("--theta", pr.theta, "assign treatment when effect > theta")->capture_default_str();
  p->add_option("--out", pr.out, "predictions CSV (default: stdout)");

  EvalArgs ev;
  CLI::App* e = app.add_subcommand("eval", "accuracy against ground truth, or Qini (optionally cross-validated)");
  e->add_option("--predictions", ev.predictions, "predictions CSV");
  e->add_option("--truth", ev.truth, "ground-truth CSV");
  e->add_option("--data", ev.data, "CSV with observed treatment and outcome");
  e->add_option("--schema", ev.schema, "schema JSON");
  e->add_option("--treatment", ev.treatment, "treatment column");
  e->add_option("--outcome", ev.outcome, "outcome column");
  e->add_option("--theta", ev.theta, "threshold for the true assignment")->capture_default_str();
  e->add_option("--points", ev.points, "Qini curve resolution")->capture_default_str();
  e->add_option("--folds", ev.folds, "k-fold cross-validated Qini curves");
  ev.discovery.add_to(*e);
  ev.classifier.add_to(*e);
  e->add_option("--out", ev.out, "metrics JSON (default: stdout)");
  e->add_option("--curve-out", ev.curve_out, "Qini curve CSV (mean curve with --folds)");

  QiniArgs qa;
  CLI::App* q = app.add_subcommand("qini", "Qini coefficient and curve of a ranking");
  q->add_option("--predictions", qa.predictions, "predictions CSV")->required();
  q->add_option("--data", qa.data, "CSV with observed treatment and outcome")->required();
  q->add_option("--schema", qa.schema, "schema JSON");
  q->add_option("--treatment", qa.treatment, "treatment column")->required();
  q->add_option("--outcome", qa.outcome, "outcome column")->required();
  q->add_option("--points", qa.points, "curve resolution")->capture_default_str();
  q->add_option("--out", qa.out, "JSON (default: stdout)");
  q->add_option("--curve-out", qa.curve_out, "curve CSV");

  try {
    if (const char* dir = std::getenv(kConfigDirEnv); dir && *dir) {
      for (CLI::App* sub : {g, d, t, p, e, q}) {
        const std::filesystem::path file = std::filesystem::path(dir) / (sub->get_name() + ".json");
        if (std::filesystem::exists(file)) detail::apply_config_defaults(*sub, read_json_file(file));
      }
    }
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kValidation;
  } catch (const CLI::Error& ex) {
    err << "error: config default rejected: " << ex.what() << "\n";
    return kValidation;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (g->parsed()) return cmd_generate(gen, io);
    if (d->parsed()) return cmd_discover(disc, io);
    if (t->parsed()) return cmd_train(tr, io);
    if (p->parsed()) return cmd_predict(pr, io);
    if (e->parsed()) return cmd_eval(ev, io);
    if (q->parsed()) return cmd_qini(qa, io);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return exit_code_for(ex.kind());
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << "\n";
    return kInternal;
  }
  return kInternal;
}

}  // namespace cclass::cli
