#include "prm/cli.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "prm/analysis.hpp"
#include "prm/disagreement.hpp"
#include "prm/errors.hpp"
#include "prm/gains.hpp"
#include "prm/io.hpp"
#include "prm/kendall.hpp"
#include "prm/metrics.hpp"
#include "prm/report.hpp"

namespace prm::cli {

namespace {

using nlohmann::json;

constexpr const char* kEstimateHelp =
    "Formulas:\n"
    "  symmetric : p_{R|i} = (N[U1>=theta, U2=i] + N[U2>=theta, U1=i]) / (N[U2=i] + N[U1=i])\n"
    "  one-sided : p_{R|i} = N[U2>=theta, U1=i] / N[U1=i]   (--condition u1; u2 swaps roles)\n"
    "  sigma     = sqrt(q (1 - q) / N_D), q = N_N / N_D\n"
    "Use one-sided when the second round only re-judged items the first group rated above 0\n"
    "(--one-sided-collection refuses the symmetric estimate in that case).";

constexpr const char* kEvalHelp =
    "Formulas:\n"
    "  count-binary@N       = sum_{i>=theta} n_i                  (top-N results)\n"
    "  count-prm@N          = sum_i n_i p_{R|i}                   (expected relevant, random user)\n"
    "  expected-precision@N = count-prm@N / N\n"
    "  dcg@k                = sum_{r=1..k} c(r) g(i(r))\n"
    "  ndcg@k               = dcg@k / ideal dcg@k (judged pool sorted by decreasing gain)\n"
    "Gains: binary g=1[i>=theta]; linear g=i; exponential g=2^i-1; prm g=p_{R|i};\n"
    "udm g(T)=1, g(0)=0, g(i)=p_{T|i}; custom from --custom-gains.\n"
    "Discounts: log c(r)=1/log_b(r+1) (--log-base, default 2); zipf c(r)=1/r.";

struct Options {
  std::string scale;
  std::string qrels;
  std::string qrels2;
  std::string pairs;
  std::string repeated_qrels;
  std::vector<std::string> runs;
  int theta = 0;  // 0: use T
  std::string estimator = "symmetric";
  std::string condition = "u1";
  bool one_sided_collection = false;
  std::vector<std::string> gains;
  std::string table;
  std::string discount = "log";
  double log_base = 2.0;
  int k = 10;
  std::optional<std::uint64_t> seed;
  std::string strata;
  bool override_p0 = false;
  std::string format = "text";
  std::string out;
  std::string intents;
  bool top_intent_only = false;
  bool expand_null_intent = false;
  bool strict = false;
  std::string ideal_pool = "judged";
  bool allow_duplicates = false;
  std::vector<std::string> metrics;
  std::string custom_gains;
  int top_resources = 0;
  int resamples = 300;
  int rounds = 50;
  std::string budgets;
  unsigned threads = 1;
  bool tau_a = false;
  std::vector<std::string> rankings;
  bool samples = false;
};

// ---- option registration --------------------------------------------------

void add_format(CLI::App* app, Options& o) {
  app->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->capture_default_str();
  app->add_option("--out", o.out, "Write the report to this file instead of stdout");
}

void add_judgment_inputs(CLI::App* app, Options& o, bool doubles) {
  app->add_option("--scale", o.scale, "Scale descriptor (JSON)");
  app->add_option("--qrels", o.qrels, "Qrels file: topic iteration doc level");
  app->add_option("--intents", o.intents,
                  "Intent-probability sidecar: topic intent probability");
  app->add_flag("--top-intent-only", o.top_intent_only,
                "Keep only judgments on the most probable intent per topic");
  app->add_flag("--expand-null-intent", o.expand_null_intent,
                "Replace intent 0 judgments by level-0 judgments on every intent");
  if (!doubles) return;
  app->add_option("--qrels2", o.qrels2, "Second group's qrels (pairs with --qrels)");
  app->add_option("--pairs", o.pairs, "Paired judgments: topic doc level_u1 level_u2");
  app->add_option("--repeated-qrels", o.repeated_qrels,
                  "Qrels where items are judged repeatedly; first two judgments pair up");
}

void add_estimation(CLI::App* app, Options& o) {
  app->add_option("--theta", o.theta,
                  "User relevance threshold: level >= theta is relevant (default T)");
  app->add_option("--estimator", o.estimator, "symmetric | one-sided | all (estimate only: every direction)")
      ->check(CLI::IsMember({"symmetric", "one-sided", "all"}))
      ->capture_default_str();
  app->add_option("--condition", o.condition,
                  "Group conditioned on by the one-sided estimator")
      ->check(CLI::IsMember({"u1", "u2"}))
      ->capture_default_str();
  app->add_flag("--one-sided-collection", o.one_sided_collection,
                "Second round judged only items the first group rated above 0");
  app->add_flag("--override-p0", o.override_p0, "Force p_{R|0} = 0");
}

void add_metric_options(CLI::App* app, Options& o) {
  app->add_option("--gains", o.gains,
                  "Gain scheme: binary|linear|exponential|prm|udm|custom (repeatable)");
  app->add_option("--custom-gains", o.custom_gains,
                  "Comma-separated gains g(0),...,g(T) for --gains custom");
  app->add_option("--table", o.table, "Disagreement table (JSON from `estimate`)");
  app->add_option("--discount", o.discount, "log | zipf")
      ->check(CLI::IsMember({"log", "zipf"}))
      ->capture_default_str();
  app->add_option("--log-base", o.log_base, "Base of the log discount")
      ->capture_default_str();
  app->add_option("--k", o.k, "Rank cutoff")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("--run", o.runs, "Run file: topic Q0 doc rank score system (repeatable)");
  app->add_flag("--strict", o.strict,
                "Error on unjudged documents or run topics instead of treating them as 0");
  app->add_option("--ideal-pool", o.ideal_pool, "judged | run")
      ->check(CLI::IsMember({"judged", "run"}))
      ->capture_default_str();
  app->add_flag("--allow-duplicates", o.allow_duplicates,
                "Accept repeated documents in runs; only the first occurrence earns gain");
}

void add_seed(CLI::App* app, Options& o) {
  app->add_option("--seed", o.seed, "Random seed (required)");
  app->add_option("--threads", o.threads, "Worker threads (results do not depend on it)")
      ->capture_default_str();
}

// ---- input loading --------------------------------------------------------

RelevanceScale require_scale(const Options& o) {
  if (o.scale.empty()) throw ValidationError("--scale is required");
  return io::load_scale(o.scale);
}

IntentProbabilities load_intents(const Options& o) {
  auto in = io::open_input(o.intents);
  return io::parse_intents(in);
}

JudgmentSet prepare(JudgmentSet set, const Options& o) {
  std::optional<IntentProbabilities> intents;
  if (!o.intents.empty()) intents = load_intents(o);
  if (o.expand_null_intent) {
    set = expand_null_intent(set, "0", intents ? &*intents : nullptr);
  }
  if (o.top_intent_only) {
    if (!intents) throw ValidationError("--top-intent-only needs --intents");
    set = filter_top_intent(set, *intents);
  }
  return set;
}

JudgmentSet load_judgments(const std::string& path, const RelevanceScale& scale,
                           const std::string& group, const Options& o) {
  return prepare(io::load_qrels(path, scale, group), o);
}

TopicStrata load_strata(const Options& o) {
  auto in = io::open_input(o.strata);
  return io::parse_strata(in);
}

struct DoubleJudgments {
  std::vector<JudgmentPair> pairs;
  std::size_t unpaired_u1 = 0;
  std::size_t unpaired_u2 = 0;
  std::vector<std::string> warnings;
};

bool has_doubles(const Options& o) {
  return !o.pairs.empty() || !o.qrels2.empty() || !o.repeated_qrels.empty();
}

DoubleJudgments load_doubles(const Options& o, const RelevanceScale& scale) {
  const int sources = (o.pairs.empty() ? 0 : 1) + (o.qrels2.empty() ? 0 : 1) +
                      (o.repeated_qrels.empty() ? 0 : 1);
  if (sources == 0) {
    throw ValidationError(
        "no double judgments: give --qrels with --qrels2, --pairs, or --repeated-qrels");
  }
  if (sources > 1) {
    throw ValidationError("give exactly one source of double judgments");
  }
  DoubleJudgments d;
  if (!o.pairs.empty()) {
    auto in = io::open_input(o.pairs);
    d.pairs = io::parse_pairs(in, scale);
    return d;
  }
  PairingResult r;
  if (!o.repeated_qrels.empty()) {
    auto in = io::open_input(o.repeated_qrels);
    r = pairs_from_repeated(io::read_qrels_records(in, scale, "pool"), scale);
  } else {
    if (o.qrels.empty()) throw ValidationError("--qrels2 needs --qrels");
    r = pair_judgments(load_judgments(o.qrels, scale, "U1", o),
                       load_judgments(o.qrels2, scale, "U2", o));
  }
  d.pairs = std::move(r.pairs);
  d.unpaired_u1 = r.unpaired_u1.size();
  d.unpaired_u2 = r.unpaired_u2.size();
  d.warnings = std::move(r.warnings);
  return d;
}

UserModel user_model(const Options& o, const RelevanceScale& scale) {
  return UserModel::at(scale, o.theta == 0 ? scale.top() : o.theta);
}

EstimatorSpec estimator_spec(const Options& o, const std::string& estimator) {
  EstimatorSpec spec;
  spec.estimator = parse_estimator(estimator);
  spec.condition = parse_condition(o.condition);
  spec.collection =
      o.one_sided_collection ? Collection::one_sided_subset : Collection::full_pool;
  return spec;
}

DisagreementTable apply_overrides(DisagreementTable t, const Options& o) {
  return o.override_p0 ? t.with_override(0, 0.0) : t;
}

DisagreementTable load_table(const Options& o, const RelevanceScale& scale) {
  auto in = io::open_input(o.table);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("disagreement table: ") + e.what(), 1);
  }
  return apply_overrides(table_from_json(doc, scale), o);
}

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      throw ValidationError("not a number: '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

Discount make_discount(const Options& o) {
  return o.discount == "zipf" ? Discount::zipf() : Discount::log(o.log_base);
}

/// Supplies the disagreement table lazily: loaded from --table or estimated
/// from the double judgments, once.
class TableSource {
 public:
  TableSource(const Options& o, const RelevanceScale& scale) : o_(o), scale_(scale) {}

  const DisagreementTable& get() {
    if (!table_) {
      if (!o_.table.empty()) {
        table_ = load_table(o_, scale_);
      } else if (has_doubles(o_)) {
        const auto d = load_doubles(o_, scale_);
        table_ = apply_overrides(estimate(d.pairs, user_model(o_, scale_), scale_,
                                          estimator_spec(o_, o_.estimator)),
                                 o_);
      } else {
        throw ValidationError(
            "PRM/UDM gains need --table or double judgments (--qrels2 / --pairs)");
      }
    }
    return *table_;
  }

  void set(DisagreementTable t) { table_ = std::move(t); }

 private:
  const Options& o_;
  const RelevanceScale& scale_;
  std::optional<DisagreementTable> table_;
};

GainScheme make_scheme(const std::string& name, const Options& o,
                       const RelevanceScale& scale, TableSource& tables) {
  switch (parse_gain_kind(name)) {
    case GainKind::binary: {
      const Level theta = o.table.empty() ? user_model(o, scale).threshold
                                          : tables.get().threshold();
      return GainScheme::binary(scale, theta);
    }
    case GainKind::linear: return GainScheme::linear(scale);
    case GainKind::exponential: return GainScheme::exponential(scale);
    case GainKind::prm: return GainScheme::prm(tables.get());
    case GainKind::udm: return GainScheme::udm(tables.get());
    case GainKind::custom:
      if (o.custom_gains.empty()) throw ValidationError("--gains custom needs --custom-gains");
      return GainScheme::custom(scale, parse_number_list(o.custom_gains));
  }
  throw ValidationError("unknown gain scheme " + name);
}

std::vector<RunRanking> load_runs(const Options& o) {
  if (o.runs.empty()) throw ValidationError("at least one --run is required");
  std::vector<RunRanking> runs;
  io::RunParseOptions po;
  po.allow_duplicate_docs = o.allow_duplicates;
  for (const auto& path : o.runs) runs.push_back(io::load_run(path, po));
  return runs;
}

EvalOptions eval_options(const Options& o) {
  EvalOptions e;
  e.strict = o.strict;
  e.ideal_pool = o.ideal_pool == "run" ? IdealPool::run_local : IdealPool::judged;
  return e;
}

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw ValidationError("this command is randomized and needs an explicit --seed");
  return *o.seed;
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw IoError("cannot write '" + o.out + "'");
  f << text;
  if (!f) throw IoError("failed writing '" + o.out + "'");
}

void warn_all(std::ostream& err, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

std::string fixed4(const std::optional<double>& v) {
  return v ? format_fixed4(*v) : std::string("-");
}

// ---- estimate -------------------------------------------------------------

std::string table_csv_rows(const DisagreementTable& t) {
  std::ostringstream s;
  for (const auto& c : t.cells()) {
    s << c.level << ',' << t.scale().label(c.level) << ',' << c.numerator << ','
      << c.denominator << ',' << (c.p ? format_full(*c.p) : "") << ','
      << (c.sigma ? format_full(*c.sigma) : "") << ','
      << (c.overridden ? "yes" : "no") << ',' << to_string(t.spec().estimator) << ','
      << (t.spec().estimator == Estimator::one_sided ? to_string(t.spec().condition) : "")
      << ',' << t.stratum().value_or("") << '\n';
  }
  return s.str();
}

int cmd_estimate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto scale = require_scale(o);
  const auto d = load_doubles(o, scale);
  warn_all(err, d.warnings);
  const auto model = user_model(o, scale);

  std::vector<std::string> estimators;
  if (o.estimator == "all") {
    estimators = {"symmetric", "one-sided:u1", "one-sided:u2"};
  } else if (o.estimator == "one-sided") {
    estimators = {"one-sided:" + o.condition};
  } else {
    estimators = {"symmetric"};
  }

  std::vector<DisagreementTable> tables;
  std::vector<std::string> warnings;
  for (const auto& e : estimators) {
    auto spec = estimator_spec(o, e.substr(0, e.find(':')));
    if (e.find(':') != std::string::npos) spec.condition = parse_condition(e.substr(e.find(':') + 1));
    if (!o.strata.empty()) {
      auto strat = stratified_estimate(d.pairs, scale, model, load_strata(o), spec);
      warnings.insert(warnings.end(), strat.warnings.begin(), strat.warnings.end());
      for (auto& [name, t] : strat.tables) tables.push_back(apply_overrides(t, o));
    } else {
      if (d.pairs.empty()) throw EstimationError("no double judgments: no paired items");
      tables.push_back(apply_overrides(estimate(d.pairs, model, scale, spec), o));
    }
  }
  warn_all(err, warnings);
  for (const auto& t : tables) warn_all(err, t.warnings());

  std::ostringstream s;
  if (o.format == "json") {
    json doc;
    doc["pairs"] = d.pairs.size();
    doc["unpaired_u1"] = d.unpaired_u1;
    doc["unpaired_u2"] = d.unpaired_u2;
    doc["tables"] = json::array();
    for (const auto& t : tables) doc["tables"].push_back(to_json(t));
    // A single table is written bare so it can be fed back through --table.
    s << (tables.size() == 1 ? to_json(tables.front()) : doc).dump(2) << '\n';
  } else if (o.format == "csv") {
    s << "level,label,numerator,denominator,p,sigma,override,estimator,condition,stratum\n";
    for (const auto& t : tables) s << table_csv_rows(t);
  } else {
    s << "pairs: " << d.pairs.size() << "  unpaired U1: " << d.unpaired_u1
      << "  unpaired U2: " << d.unpaired_u2 << '\n';
    for (const auto& t : tables) s << '\n' << format_table(t);
  }
  emit(o, out, s.str());
  return kOk;
}

// ---- eval -----------------------------------------------------------------

struct NamedReport {
  std::string label;
  MetricReport report;
};

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  const auto scale = require_scale(o);
  if (o.qrels.empty()) throw ValidationError("--qrels is required");
  const auto judgments = load_judgments(o.qrels, scale, "U1", o);
  const auto runs = load_runs(o);
  for (const auto& r : runs) warn_all(err, r.warnings);

  std::vector<std::string> metric_names = o.metrics;
  if (metric_names.empty()) metric_names = {"ndcg"};
  std::vector<std::string> gain_names = o.gains;
  if (gain_names.empty()) gain_names = {"binary"};
  const auto options = eval_options(o);

  // Each stratum (or the whole collection) is evaluated with its own table.
  struct Partition {
    std::string name;
    JudgmentSet judgments;
    TableSource tables;
  };
  std::vector<Partition> parts;
  if (o.strata.empty()) {
    parts.push_back({"", judgments, TableSource(o, scale)});
  } else {
    const auto strata = load_strata(o);
    std::optional<StratifiedEstimate> strat;
    std::set<std::string> names;
    for (const auto& [t, s] : strata) names.insert(s);
    for (const auto& name : names) {
      Partition p{name, judgments.filter_topics([&](const std::string& t) {
                    auto it = strata.find(t);
                    return it != strata.end() && it->second == name;
                  }),
                  TableSource(o, scale)};
      if (o.table.empty() && has_doubles(o)) {
        if (!strat) {
          strat = stratified_estimate(load_doubles(o, scale).pairs, scale,
                                      user_model(o, scale), strata,
                                      estimator_spec(o, o.estimator));
          warn_all(err, strat->warnings);
        }
        auto it = strat->tables.find(name);
        if (it != strat->tables.end()) p.tables.set(apply_overrides(it->second, o));
      }
      parts.push_back(std::move(p));
    }
  }

  const bool several_schemes = gain_names.size() > 1;
  std::vector<NamedReport> reports;
  for (auto& part : parts) {
    if (part.judgments.size() == 0) {
      err << "warning: stratum " << part.name << " has no judgments; skipped\n";
      continue;
    }
    const Qrels qrels(part.judgments);
    for (const auto& run : runs) {
      for (const auto& m : metric_names) {
        const auto kind = parse_metric_kind(m);
        const bool scheme_based = kind == MetricKind::ndcg || kind == MetricKind::dcg;
        const std::vector<std::string> scheme_list =
            scheme_based ? gain_names : std::vector<std::string>{""};
        for (const auto& g : scheme_list) {
          MetricReport r;
          if (o.top_resources > 0 && !scheme_based) {
            if (kind == MetricKind::expected_precision) {
              throw ValidationError("--top-resources supports count-binary and count-prm");
            }
            std::optional<DisagreementTable> table;
            if (kind == MetricKind::count_prm) table = part.tables.get();
            r = count_in_top_resources(run, part.judgments, o.top_resources, table,
                                       user_model(o, scale).threshold);
          } else {
            MetricSpec spec;
            spec.kind = kind;
            spec.k = o.k;
            spec.discount = make_discount(o);
            spec.threshold = user_model(o, scale).threshold;
            if (scheme_based) spec.scheme = make_scheme(g, o, scale, part.tables);
            if (kind == MetricKind::count_prm || kind == MetricKind::expected_precision) {
              spec.table = part.tables.get();
            }
            r = evaluate(run, qrels, spec, options);
          }
          if (!part.name.empty()) r.params["stratum"] = part.name;
          for (const auto& w : r.warnings) err << "warning: " << run.system_id << ": " << w << '\n';
          std::string label = r.metric;
          if (scheme_based && several_schemes) {
            label += "[" + g + "]";
            r.metric = label;
          }
          reports.push_back({label, std::move(r)});
        }
      }
    }
  }

  std::ostringstream s;
  if (o.format == "json") {
    json doc = json::array();
    for (const auto& r : reports) doc.push_back(to_json(r.report));
    s << doc.dump(2) << '\n';
  } else {
    const bool blocks = reports.size() > 1;
    for (const auto& r : reports) {
      if (blocks) {
        s << "# run=" << r.report.system_id << " metric=" << r.label;
        if (r.report.params.contains("stratum")) {
          s << " stratum=" << r.report.params.at("stratum");
        }
        s << '\n';
      }
      s << (o.format == "csv" ? to_csv(r.report) : to_trec(r.report));
    }
  }
  emit(o, out, s.str());
  return kOk;
}

// ---- analyze --------------------------------------------------------------

int cmd_tau(const Options& o, std::ostream& out, std::ostream& err) {
  const auto variant = o.tau_a ? TauVariant::a : TauVariant::b;
  SystemRanking a, b;
  if (!o.rankings.empty()) {
    if (o.rankings.size() != 2) throw ValidationError("tau needs exactly two --ranking files");
    auto in_a = io::open_input(o.rankings[0]);
    auto in_b = io::open_input(o.rankings[1]);
    a = SystemRanking::from_scores(o.rankings[0], io::parse_ranking(in_a));
    b = SystemRanking::from_scores(o.rankings[1], io::parse_ranking(in_b));
  } else {
    const auto scale = require_scale(o);
    if (o.qrels.empty()) throw ValidationError("tau needs --ranking files or --qrels and runs");
    const auto judgments = load_judgments(o.qrels, scale, "U1", o);
    const auto runs = load_runs(o);
    TableSource tables(o, scale);
    if (o.gains.size() != 2) {
      throw ValidationError("tau over runs needs exactly two --gains schemes");
    }
    const Qrels qrels(judgments);
    std::vector<SystemRanking> rankings;
    for (const auto& g : o.gains) {
      MetricSpec spec;
      spec.kind = MetricKind::ndcg;
      spec.k = o.k;
      spec.discount = make_discount(o);
      spec.scheme = make_scheme(g, o, scale, tables);
      rankings.push_back(rank_systems(runs, qrels, spec, eval_options(o)));
    }
    a = rankings[0];
    b = rankings[1];
  }
  (void)err;
  const double tau = kendall_tau(a, b, variant);
  std::ostringstream s;
  if (o.format == "json") {
    json doc;
    doc["tau"] = tau;
    doc["variant"] = o.tau_a ? "a" : "b";
    doc["systems"] = a.entries.size();
    s << doc.dump(2) << '\n';
  } else if (o.format == "csv") {
    s << "variant,systems,tau\n"
      << (o.tau_a ? "a" : "b") << ',' << a.entries.size() << ',' << format_full(tau) << '\n';
  } else {
    s << "kendall tau-" << (o.tau_a ? "a" : "b") << " over " << a.entries.size()
      << " systems: " << format_fixed4(tau) << '\n';
  }
  emit(o, out, s.str());
  return kOk;
}

int cmd_bootstrap(const Options& o, std::ostream& out, std::ostream& err) {
  const auto seed = require_seed(o);
  const auto scale = require_scale(o);
  const auto d = load_doubles(o, scale);
  warn_all(err, d.warnings);
  const auto summary =
      bootstrap_topics(group_by_topic(d.pairs), scale, user_model(o, scale),
                       estimator_spec(o, o.estimator), o.resamples, seed, o.threads);
  for (const auto& r : summary.levels) {
    if (r.missing > 0) {
      err << "warning: level " << r.level << " undefined in " << r.missing
          << " resample(s); recorded as missing\n";
    }
  }
  std::ostringstream s;
  if (o.format == "csv") {
    s << (o.samples ? samples_to_csv(summary, scale) : to_csv(summary, scale));
  } else if (o.format == "json") {
    json doc;
    doc["seed"] = summary.seed;
    doc["resamples"] = summary.resamples;
    doc["levels"] = json::array();
    for (const auto& r : summary.levels) {
      json row;
      row["level"] = r.level;
      row["label"] = scale.label(r.level);
      for (const auto& [k, v] : {std::pair{"mean", r.mean}, {"std", r.std}, {"min", r.min},
                                 {"q1", r.q1}, {"median", r.median}, {"q3", r.q3},
                                 {"max", r.max}}) {
        row[k] = std::isnan(v) ? json() : json(v);
      }
      row["missing"] = r.missing;
      row["estimate"] = r.full_estimate ? json(*r.full_estimate) : json();
      row["sigma"] = r.analytic_sigma ? json(*r.analytic_sigma) : json();
      if (o.samples) {
        json samples = json::array();
        for (const auto& x : r.samples) samples.push_back(x ? json(*x) : json());
        row["samples"] = samples;
      }
      doc["levels"].push_back(row);
    }
    s << doc.dump(2) << '\n';
  } else {
    s << "topic bootstrap: " << summary.resamples << " resamples, seed " << summary.seed
      << '\n';
    s << std::left << std::setw(10) << "label" << std::right;
    for (const char* h : {"mean", "std", "min", "q1", "median", "q3", "max", "sigma"}) {
      s << std::setw(9) << h;
    }
    s << std::setw(9) << "missing" << '\n';
    for (auto it = summary.levels.rbegin(); it != summary.levels.rend(); ++it) {
      const auto& r = *it;
      s << std::left << std::setw(10) << scale.label(r.level) << std::right;
      for (double v : {r.mean, r.std, r.min, r.q1, r.median, r.q3, r.max}) {
        s << std::setw(9) << (std::isnan(v) ? std::string("-") : format_fixed4(v));
      }
      s << std::setw(9) << fixed4(r.analytic_sigma) << std::setw(9) << r.missing << '\n';
    }
  }
  emit(o, out, s.str());
  return kOk;
}

std::string curve_text(const SensitivityCurve& c, const RelevanceScale& scale) {
  std::ostringstream s;
  s << std::setw(8) << c.x_name;
  for (Level i = scale.top(); i >= 0; --i) {
    s << std::setw(20) << ("p_" + scale.label(i) + " (+/-)");
  }
  s << '\n';
  for (std::size_t x = 0; x < c.x.size(); ++x) {
    s << std::setw(8) << c.x[x];
    for (Level i = scale.top(); i >= 0; --i) {
      const auto& pt = c.series[static_cast<std::size_t>(i)][x];
      s << std::setw(20) << (fixed4(pt.mean) + " " + fixed4(pt.std));
    }
    s << '\n';
  }
  return s.str();
}

std::string curve_output(const Options& o, const SensitivityCurve& c,
                         const RelevanceScale& scale) {
  if (o.format == "csv") return to_csv(c, scale);
  if (o.format == "json") {
    json doc;
    doc["x_name"] = c.x_name;
    doc["x"] = c.x;
    doc["series"] = json::array();
    for (std::size_t level = 0; level < c.series.size(); ++level) {
      json series;
      series["level"] = level;
      series["label"] = scale.label(static_cast<Level>(level));
      series["mean"] = json::array();
      series["std"] = json::array();
      series["n"] = json::array();
      for (const auto& pt : c.series[level]) {
        series["mean"].push_back(pt.mean ? json(*pt.mean) : json());
        series["std"].push_back(pt.std ? json(*pt.std) : json());
        series["n"].push_back(pt.n);
      }
      doc["series"].push_back(series);
    }
    return doc.dump(2) + "\n";
  }
  return curve_text(c, scale);
}

int cmd_budget(const Options& o, std::ostream& out, std::ostream& err) {
  const auto seed = require_seed(o);
  const auto scale = require_scale(o);
  const auto d = load_doubles(o, scale);
  warn_all(err, d.warnings);
  std::vector<std::int64_t> budgets;
  if (o.budgets.empty()) {
    const auto n = static_cast<std::int64_t>(d.pairs.size());
    for (int i = 1; i <= 10; ++i) {
      const auto b = std::max<std::int64_t>(1, n * i / 10);
      if (budgets.empty() || b > budgets.back()) budgets.push_back(b);
    }
  } else {
    for (double v : parse_number_list(o.budgets)) {
      if (v < 0 || v != std::floor(v)) throw ValidationError("budgets must be whole numbers");
      if (v == 0) {
        err << "warning: budget 0 skipped\n";
        continue;
      }
      budgets.push_back(static_cast<std::int64_t>(v));
    }
  }
  const auto curve =
      simulate_annotation_rounds(d.pairs, scale, user_model(o, scale),
                                 estimator_spec(o, o.estimator), o.rounds, budgets, seed,
                                 o.threads);
  emit(o, out, curve_output(o, curve, scale));
  return kOk;
}

int cmd_quality(const Options& o, std::ostream& out, std::ostream& err) {
  const auto scale = require_scale(o);
  if (o.qrels.empty() || o.qrels2.empty()) {
    throw ValidationError(
        "quality needs --qrels (reference group, with resource ids) and --qrels2");
  }
  const auto reference = load_judgments(o.qrels, scale, "U1", o);
  const auto second = load_judgments(o.qrels2, scale, "U2", o);
  const auto paired = pair_judgments(reference, second);
  warn_all(err, paired.warnings);
  const auto curve = quality_sensitivity(reference, paired.pairs, user_model(o, scale),
                                         estimator_spec(o, o.estimator));
  emit(o, out, curve_output(o, curve, scale));
  return kOk;
}

int cmd_robustness(const Options& o, std::ostream& out, std::ostream& err) {
  const auto scale = require_scale(o);
  if (o.qrels.empty() || o.qrels2.empty()) {
    throw ValidationError("robustness needs --qrels and --qrels2");
  }
  const auto u1 = load_judgments(o.qrels, scale, "U1", o);
  const auto u2 = load_judgments(o.qrels2, scale, "U2", o);
  const auto runs = load_runs(o);
  for (const auto& r : runs) warn_all(err, r.warnings);
  TableSource tables(o, scale);
  if (o.table.empty()) {
    tables.set(apply_overrides(estimate(pair_judgments(u1, u2).pairs, user_model(o, scale),
                                        scale, estimator_spec(o, o.estimator)),
                               o));
  }
  std::vector<std::string> names = o.gains;
  if (names.empty()) names = {"binary", "prm", "linear"};
  std::vector<GainScheme> schemes;
  for (const auto& n : names) schemes.push_back(make_scheme(n, o, scale, tables));
  const auto rows = robustness_study(runs, u1, u2, schemes, o.k, make_discount(o),
                                     eval_options(o),
                                     o.tau_a ? TauVariant::a : TauVariant::b);
  std::ostringstream s;
  if (o.format == "csv") {
    s << to_csv(rows);
  } else if (o.format == "json") {
    json doc = json::array();
    for (const auto& r : rows) {
      json row;
      row["scheme"] = r.scheme;
      row["tau"] = r.tau;
      row["ranking_u1"] = r.by_u1.entries;
      row["ranking_u2"] = r.by_u2.entries;
      doc.push_back(row);
    }
    s << doc.dump(2) << '\n';
  } else {
    s << "kendall tau between U1- and U2-based ndcg@" << o.k << " rankings\n";
    for (const auto& r : rows) {
      s << std::left << std::setw(14) << r.scheme << format_fixed4(r.tau) << '\n';
    }
  }
  emit(o, out, s.str());
  return kOk;
}

// ---- validate -------------------------------------------------------------

int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  std::ostringstream s;
  const auto scale = require_scale(o);
  s << "scale: T=" << scale.top() << " labels:";
  for (const auto& l : scale.labels()) s << ' ' << l;
  s << '\n';
  auto describe = [&](const std::string& name, const JudgmentSet& set) {
    s << name << ": " << set.size() << " judgments, " << set.topics().size()
      << " topics, histogram";
    const auto h = set.histogram();
    for (std::size_t i = 0; i < h.size(); ++i) {
      s << ' ' << scale.label(static_cast<Level>(i)) << '=' << h[i];
    }
    s << '\n';
  };
  std::optional<JudgmentSet> q1;
  if (!o.qrels.empty()) {
    q1 = load_judgments(o.qrels, scale, "U1", o);
    describe("qrels", *q1);
  }
  if (has_doubles(o)) {
    const auto d = load_doubles(o, scale);
    warn_all(err, d.warnings);
    s << "double judgments: " << d.pairs.size() << " pairs, unpaired U1 "
      << d.unpaired_u1 << ", unpaired U2 " << d.unpaired_u2 << '\n';
  }
  if (!o.strata.empty()) {
    const auto strata = load_strata(o);
    s << "strata: " << strata.size() << " topics\n";
    if (q1) q1->with_topic_metadata(strata);
  }
  if (!o.intents.empty()) s << "intents: " << load_intents(o).size() << " topics\n";
  if (!o.table.empty()) {
    const auto t = load_table(o, scale);
    s << "table: threshold " << t.threshold() << ", "
      << (t.fully_defined() ? "fully defined" : "has undefined cells") << '\n';
  }
  if (!o.runs.empty()) {
    for (const auto& run : load_runs(o)) {
      warn_all(err, run.warnings);
      s << "run " << run.system_id << ": " << run.topics.size() << " topics, "
        << run.size() << " entries\n";
    }
  }
  emit(o, out, s.str());
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"prmeval: graded relevance evaluation with assessor-disagreement gains",
               "prmeval"};
  app.set_config("--config", "", "Config file (TOML/INI); command-line flags win");
  app.require_subcommand(1);

  auto* estimate_cmd = app.add_subcommand(
      "estimate", "Estimate the disagreement parameters p_{R|i} from double judgments");
  estimate_cmd->footer(kEstimateHelp);
  add_judgment_inputs(estimate_cmd, o, true);
  add_estimation(estimate_cmd, o);
  estimate_cmd->add_option("--strata", o.strata, "Topic strata file: topic stratum");
  add_format(estimate_cmd, o);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate runs against single judgments");
  eval_cmd->footer(kEvalHelp);
  add_judgment_inputs(eval_cmd, o, true);
  add_estimation(eval_cmd, o);
  add_metric_options(eval_cmd, o);
  eval_cmd->add_option("--metric", o.metrics,
                       "ndcg | dcg | count-binary | count-prm | expected-precision (repeatable)");
  eval_cmd->add_option("--top-resources", o.top_resources,
                       "Count over the documents of the top-N resources of a "
                       "resource-selection run (run doc ids are resource ids)");
  eval_cmd->add_option("--strata", o.strata,
                       "Topic strata file; each stratum is evaluated with its own table");
  add_format(eval_cmd, o);

  auto* analyze_cmd = app.add_subcommand("analyze", "Meta-analyses of estimates and rankings");
  analyze_cmd->require_subcommand(1);

  auto* tau_cmd = analyze_cmd->add_subcommand(
      "tau", "Kendall tau between two system rankings");
  tau_cmd->footer(
      "tau-b = (C - D) / sqrt((n0 - n1)(n0 - n2)); tau-a = (C - D) / n0.\n"
      "Rankings come from two --ranking files (system score) or from nDCG@k of --run files\n"
      "under exactly two --gains schemes.");
  tau_cmd->add_option("--ranking", o.rankings, "Ranking file: system score (give twice)");
  tau_cmd->add_flag("--tau-a", o.tau_a, "Use tau-a instead of the tie-corrected tau-b");
  add_judgment_inputs(tau_cmd, o, true);
  add_estimation(tau_cmd, o);
  add_metric_options(tau_cmd, o);
  add_format(tau_cmd, o);

  auto* boot_cmd = analyze_cmd->add_subcommand(
      "bootstrap", "Topic bootstrap of the disagreement parameters");
  boot_cmd->footer(
      "Topics are resampled with replacement; a topic drawn m times contributes its pairs\n"
      "m times. Cells undefined in a resample are recorded as missing.");
  add_judgment_inputs(boot_cmd, o, true);
  add_estimation(boot_cmd, o);
  boot_cmd->add_option("--resamples", o.resamples, "Number of resamples")->capture_default_str();
  boot_cmd->add_flag("--samples", o.samples, "Emit every resample value");
  add_seed(boot_cmd, o);
  add_format(boot_cmd, o);

  auto* budget_cmd = analyze_cmd->add_subcommand(
      "budget", "Annotation-budget simulation");
  budget_cmd->footer(
      "Each round draws double judgments cumulatively with replacement and re-estimates\n"
      "p_{R|i} at every budget; mean and std are taken across rounds.");
  add_judgment_inputs(budget_cmd, o, true);
  add_estimation(budget_cmd, o);
  budget_cmd->add_option("--rounds", o.rounds, "Simulated annotation rounds")
      ->capture_default_str();
  budget_cmd->add_option("--budgets", o.budgets,
                         "Comma-separated increasing budgets (default: 10%..100% of pairs)");
  add_seed(budget_cmd, o);
  add_format(budget_cmd, o);

  auto* quality_cmd = analyze_cmd->add_subcommand(
      "quality", "Sensitivity of the estimates to result quality");
  quality_cmd->footer(
      "Resources are ordered per topic by their number of results in the top two levels\n"
      "(reference group = --qrels, resource=ID attributes required); p_{R|i} is estimated\n"
      "from the pairs of the top-k resources for k = 1..max.");
  add_judgment_inputs(quality_cmd, o, true);
  add_estimation(quality_cmd, o);
  add_format(quality_cmd, o);

  auto* robust_cmd = analyze_cmd->add_subcommand(
      "robustness", "Ranking stability across assessor groups per gain scheme");
  robust_cmd->footer(
      "Every run is scored with nDCG@k once per judgment set (--qrels, --qrels2); the\n"
      "Kendall tau between the two system rankings is reported per gain scheme.");
  add_judgment_inputs(robust_cmd, o, true);
  add_estimation(robust_cmd, o);
  add_metric_options(robust_cmd, o);
  robust_cmd->add_flag("--tau-a", o.tau_a, "Use tau-a instead of tau-b");
  add_format(robust_cmd, o);

  auto* validate_cmd =
      app.add_subcommand("validate", "Parse and validate the given input files only");
  add_judgment_inputs(validate_cmd, o, true);
  validate_cmd->add_option("--run", o.runs, "Run file (repeatable)");
  validate_cmd->add_option("--strata", o.strata, "Topic strata file");
  validate_cmd->add_option("--table", o.table, "Disagreement table (JSON)");
  validate_cmd->add_flag("--allow-duplicates", o.allow_duplicates,
                         "Accept repeated documents in runs");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    // --help on a subcommand surfaces here as well.
    if (e.get_exit_code() == 0) {
      for (auto* sub : app.get_subcommands()) {
        const auto* leaf = sub->get_subcommands().empty() ? sub : sub->get_subcommands().front();
        out << leaf->help();
        return kOk;
      }
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }

  try {
    if (*estimate_cmd) return cmd_estimate(o, out, err);
    if (*eval_cmd) return cmd_eval(o, out, err);
    if (*tau_cmd) return cmd_tau(o, out, err);
    if (*boot_cmd) return cmd_bootstrap(o, out, err);
    if (*budget_cmd) return cmd_budget(o, out, err);
    if (*quality_cmd) return cmd_quality(o, out, err);
    if (*robust_cmd) return cmd_robustness(o, out, err);
    if (*validate_cmd) return cmd_validate(o, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kInvalid;
}

}  // namespace prm::cli
