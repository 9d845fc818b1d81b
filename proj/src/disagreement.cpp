#include "prm/disagreement.hpp"

#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "prm/errors.hpp"

namespace prm {

UserModel UserModel::at(const RelevanceScale& scale, Level threshold) {
  if (threshold < 1 || threshold > scale.top()) {
    throw ValidationError("threshold " + std::to_string(threshold) +
                          " outside 1..T=" + std::to_string(scale.top()));
  }
  return UserModel{threshold};
}

std::string to_string(Estimator e) {
  return e == Estimator::symmetric ? "symmetric" : "one-sided";
}

std::string to_string(Condition c) { return c == Condition::u1 ? "u1" : "u2"; }

Estimator parse_estimator(const std::string& s) {
  if (s == "symmetric") return Estimator::symmetric;
  if (s == "one-sided" || s == "one_sided") return Estimator::one_sided;
  throw ValidationError("unknown estimator '" + s + "'");
}

Condition parse_condition(const std::string& s) {
  if (s == "u1" || s == "U1") return Condition::u1;
  if (s == "u2" || s == "U2") return Condition::u2;
  throw ValidationError("unknown condition '" + s + "' (expected u1 or u2)");
}

// ---- ConfusionCounts ------------------------------------------------------

ConfusionCounts::ConfusionCounts(std::size_t levels)
    : levels_(levels), counts_(levels * levels, 0) {}

ConfusionCounts::ConfusionCounts(const std::vector<JudgmentPair>& pairs,
                                 std::size_t levels)
    : ConfusionCounts(levels) {
  for (const auto& p : pairs) add(p.level_u1, p.level_u2);
}

void ConfusionCounts::add(Level u1, Level u2, std::int64_t weight) {
  if (u1 < 0 || u2 < 0 || static_cast<std::size_t>(u1) >= levels_ ||
      static_cast<std::size_t>(u2) >= levels_) {
    throw ValidationError("pair level outside the scale");
  }
  counts_[static_cast<std::size_t>(u1) * levels_ + static_cast<std::size_t>(u2)] +=
      weight;
}

void ConfusionCounts::add(const ConfusionCounts& other) {
  if (other.levels_ != levels_) {
    throw ValidationError("cannot add confusion counts of different sizes");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::int64_t ConfusionCounts::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

// ---- cells ----------------------------------------------------------------

double cell_sigma(std::int64_t numerator, std::int64_t denominator) {
  if (denominator <= 0) {
    throw EstimationError("sigma undefined: empty denominator");
  }
  const double q = static_cast<double>(numerator) / static_cast<double>(denominator);
  return std::sqrt(q * (1.0 - q) / static_cast<double>(denominator));
}

double cell_sigma(const DisagreementCell& cell) {
  return cell_sigma(cell.numerator, cell.denominator);
}

namespace {

DisagreementCell make_cell(Level level, std::int64_t num, std::int64_t den) {
  DisagreementCell c{level, num, den, std::nullopt, std::nullopt, false};
  if (den > 0) {
    c.p = static_cast<double>(num) / static_cast<double>(den);
    c.sigma = cell_sigma(num, den);
  }
  return c;
}

}  // namespace

// ---- DisagreementTable ----------------------------------------------------

DisagreementTable::DisagreementTable(RelevanceScale scale, UserModel user_model,
                                     std::vector<DisagreementCell> cells,
                                     EstimatorSpec spec,
                                     std::optional<std::string> stratum)
    : scale_(std::move(scale)),
      user_model_(UserModel::at(scale_, user_model.threshold)),
      cells_(std::move(cells)),
      spec_(spec),
      stratum_(std::move(stratum)) {
  if (cells_.size() != scale_.size()) {
    throw ValidationError("disagreement table needs exactly T+1 cells");
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const auto& c = cells_[i];
    if (c.level != static_cast<Level>(i)) {
      throw ValidationError("disagreement cells must be ordered by level");
    }
    if (c.p && !(*c.p >= 0.0 && *c.p <= 1.0)) {
      throw ValidationError("p for level " + std::to_string(i) +
                            " outside [0,1]");
    }
    if (!c.overridden && c.denominator == 0 && c.p) {
      throw ValidationError("p for level " + std::to_string(i) +
                            " defined with an empty denominator");
    }
  }
  check_monotonicity();
}

const DisagreementCell& DisagreementTable::cell(Level level) const {
  scale_.check(level);
  return cells_[static_cast<std::size_t>(level)];
}

double DisagreementTable::require_p(Level level) const {
  const auto& c = cell(level);
  if (!c.p) {
    throw EstimationError("p_{R|" + scale_.label(level) + "} (level " +
                          std::to_string(level) +
                          ") is undefined: no double judgments at this level; "
                          "supply an override");
  }
  return *c.p;
}

bool DisagreementTable::fully_defined() const {
  for (const auto& c : cells_) {
    if (!c.p) return false;
  }
  return true;
}

DisagreementTable DisagreementTable::with_override(Level level,
                                                   double value) const {
  auto cells = cells_;
  auto& c = cells.at(static_cast<std::size_t>(level));
  c.p = value;
  c.sigma.reset();
  c.overridden = true;
  return DisagreementTable(scale_, user_model_, std::move(cells), spec_, stratum_);
}

DisagreementTable DisagreementTable::with_stratum(std::string stratum) const {
  auto copy = *this;
  copy.stratum_ = std::move(stratum);
  return copy;
}

void DisagreementTable::check_monotonicity() {
  for (std::size_t i = 0; i + 1 < cells_.size(); ++i) {
    const auto& lo = cells_[i];
    const auto& hi = cells_[i + 1];
    if (!lo.p || !hi.p) continue;
    const double band = 2.0 * (lo.sigma.value_or(0.0) + hi.sigma.value_or(0.0));
    if (*lo.p > *hi.p + band) {
      std::ostringstream msg;
      msg << "non-monotone estimate: p at level " << i << " (" << *lo.p
          << ") exceeds p at level " << i + 1 << " (" << *hi.p
          << ") by more than 2 sigma";
      warnings_.push_back(msg.str());
    }
  }
}

// ---- estimation -----------------------------------------------------------

DisagreementTable estimate_from_counts(const ConfusionCounts& counts,
                                       const UserModel& user_model,
                                       const RelevanceScale& scale,
                                       const EstimatorSpec& spec) {
  if (counts.levels() != scale.size()) {
    throw ValidationError("confusion counts do not match the scale");
  }
  UserModel::at(scale, user_model.threshold);
  if (spec.estimator == Estimator::symmetric &&
      spec.collection == Collection::one_sided_subset) {
    throw ValidationError(
        "symmetric estimator refused: the second judgment round was restricted "
        "to items rated above non-relevant by the first group, so the pooled "
        "estimate would be artificially high; use the one-sided estimator");
  }
  if (counts.total() == 0) {
    throw EstimationError("no double judgments");
  }
  const Level top = scale.top();
  std::vector<DisagreementCell> cells;
  bool usable = false;
  for (Level i = 0; i <= top; ++i) {
    // row: U1 = i, column: U2 = i.
    std::int64_t row_den = 0, row_num = 0, col_den = 0, col_num = 0;
    for (Level j = 0; j <= top; ++j) {
      row_den += counts.at(i, j);
      col_den += counts.at(j, i);
      if (user_model.relevant(j)) {
        row_num += counts.at(i, j);
        col_num += counts.at(j, i);
      }
    }
    std::int64_t num = 0, den = 0;
    if (spec.estimator == Estimator::symmetric) {
      num = row_num + col_num;
      den = row_den + col_den;
    } else if (spec.condition == Condition::u1) {
      num = row_num;
      den = row_den;
    } else {
      num = col_num;
      den = col_den;
    }
    if (i >= 1 && den > 0) usable = true;
    cells.push_back(make_cell(i, num, den));
  }
  if (!usable) throw EstimationError("no usable double judgments");
  return DisagreementTable(scale, user_model, std::move(cells), spec);
}

DisagreementTable estimate(const std::vector<JudgmentPair>& pairs,
                           const UserModel& user_model,
                           const RelevanceScale& scale,
                           const EstimatorSpec& spec) {
  if (pairs.empty()) throw EstimationError("no double judgments");
  return estimate_from_counts(ConfusionCounts(pairs, scale.size()), user_model,
                              scale, spec);
}

DisagreementTable estimate_one_sided(const std::vector<JudgmentPair>& pairs,
                                     const UserModel& user_model,
                                     const RelevanceScale& scale,
                                     Condition condition) {
  return estimate(pairs, user_model, scale,
                  EstimatorSpec{Estimator::one_sided, condition,
                                Collection::full_pool});
}

DisagreementTable estimate_symmetric(const std::vector<JudgmentPair>& pairs,
                                     const UserModel& user_model,
                                     const RelevanceScale& scale,
                                     Collection collection) {
  return estimate(pairs, user_model, scale,
                  EstimatorSpec{Estimator::symmetric, Condition::u1, collection});
}

DisagreementTable degenerate_table(const RelevanceScale& scale,
                                   const UserModel& user_model) {
  std::vector<DisagreementCell> cells;
  for (Level i = 0; i <= scale.top(); ++i) {
    DisagreementCell c;
    c.level = i;
    c.p = user_model.relevant(i) ? 1.0 : 0.0;
    c.overridden = true;
    cells.push_back(c);
  }
  return DisagreementTable(scale, user_model, std::move(cells), EstimatorSpec{});
}

StratifiedEstimate stratified_estimate(const std::vector<JudgmentPair>& pairs,
                                       const RelevanceScale& scale,
                                       const UserModel& user_model,
                                       const TopicStrata& strata,
                                       const EstimatorSpec& spec) {
  std::map<std::string, std::vector<JudgmentPair>> by_stratum;
  for (const auto& name : strata) by_stratum[name.second];
  for (const auto& p : pairs) {
    auto it = strata.find(p.topic_id);
    if (it == strata.end()) {
      throw ValidationError("topic " + p.topic_id + " has no stratum");
    }
    by_stratum[it->second].push_back(p);
  }
  StratifiedEstimate out;
  for (const auto& [name, subset] : by_stratum) {
    if (subset.empty()) {
      out.warnings.push_back("stratum " + name + " has no double judgments; omitted");
      continue;
    }
    out.tables.emplace(name,
                       estimate(subset, user_model, scale, spec).with_stratum(name));
  }
  return out;
}

StratifiedEstimate stratified_estimate(const JudgmentSet& set_u1,
                                       const JudgmentSet& set_u2,
                                       const UserModel& user_model,
                                       const TopicStrata& strata,
                                       const EstimatorSpec& spec) {
  const auto paired = pair_judgments(set_u1, set_u2);
  return stratified_estimate(paired.pairs, set_u1.scale(), user_model, strata,
                             spec);
}

double binomial_upper_tail(double p, int m, int n) {
  if (m < 1 || m > n) {
    throw ValidationError("need 1 <= m <= n for at-least-m-of-n");
  }
  double total = 0.0;
  double choose = 1.0;  // C(n, k), built incrementally from k = 0
  for (int k = 0; k <= n; ++k) {
    if (k > 0) choose = choose * (n - k + 1) / k;
    if (k >= m) total += choose * std::pow(p, k) * std::pow(1.0 - p, n - k);
  }
  return total;
}

double at_least_m_of_n(const DisagreementTable& table, Level level, int m,
                       int n) {
  return binomial_upper_tail(table.require_p(level), m, n);
}

// ---- serialization --------------------------------------------------------

nlohmann::json to_json(const DisagreementTable& table) {
  using nlohmann::json;
  const auto& spec = table.spec();
  json doc;
  doc["threshold"] = table.threshold();
  doc["threshold_label"] = table.scale().label(table.threshold());
  doc["estimator"] = to_string(spec.estimator);
  doc["condition"] =
      spec.estimator == Estimator::one_sided ? json(to_string(spec.condition)) : json();
  doc["collection"] =
      spec.collection == Collection::full_pool ? "full_pool" : "one_sided_subset";
  doc["stratum"] = table.stratum() ? json(*table.stratum()) : json();
  json levels = json::array();
  for (const auto& c : table.cells()) {
    json row;
    row["level"] = c.level;
    row["label"] = table.scale().label(c.level);
    row["numerator"] = c.numerator;
    row["denominator"] = c.denominator;
    row["p"] = c.p ? json(*c.p) : json();
    row["sigma"] = c.sigma ? json(*c.sigma) : json();
    row["override"] = c.overridden;
    levels.push_back(row);
  }
  doc["levels"] = levels;
  doc["warnings"] = table.warnings();
  return doc;
}

DisagreementTable table_from_json(const nlohmann::json& doc,
                                  const RelevanceScale& scale) {
  try {
    const Level threshold = doc.at("threshold").get<Level>();
    EstimatorSpec spec;
    if (doc.contains("estimator")) {
      spec.estimator = parse_estimator(doc.at("estimator").get<std::string>());
    }
    if (doc.contains("condition") && doc.at("condition").is_string()) {
      spec.condition = parse_condition(doc.at("condition").get<std::string>());
    }
    if (doc.contains("collection") && doc.at("collection").is_string()) {
      spec.collection = doc.at("collection").get<std::string>() == "one_sided_subset"
                            ? Collection::one_sided_subset
                            : Collection::full_pool;
    }
    std::optional<std::string> stratum;
    if (doc.contains("stratum") && doc.at("stratum").is_string()) {
      stratum = doc.at("stratum").get<std::string>();
    }
    const auto& levels = doc.at("levels");
    if (levels.size() != scale.size()) {
      throw ValidationError("table has " + std::to_string(levels.size()) +
                            " levels, scale has " + std::to_string(scale.size()));
    }
    std::vector<DisagreementCell> cells;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const auto& row = levels[i];
      DisagreementCell c;
      c.level = row.value("level", static_cast<Level>(i));
      if (c.level != static_cast<Level>(i)) {
        throw ValidationError("table levels must be listed 0..T in order");
      }
      if (row.contains("label") && row.at("label").get<std::string>() !=
                                       scale.label(c.level)) {
        throw ValidationError("table label '" + row.at("label").get<std::string>() +
                              "' does not match scale label '" +
                              scale.label(c.level) + "'");
      }
      c.numerator = row.value("numerator", std::int64_t{0});
      c.denominator = row.value("denominator", std::int64_t{0});
      c.overridden = row.value("override", false);
      if (c.numerator < 0 || c.denominator < 0 || c.numerator > c.denominator) {
        throw ValidationError("invalid counts for level " + std::to_string(i));
      }
      if (row.contains("p") && !row.at("p").is_null()) {
        c.p = row.at("p").get<double>();
      } else if (c.denominator > 0) {
        c.p = static_cast<double>(c.numerator) / static_cast<double>(c.denominator);
      }
      if (c.p && c.denominator == 0) c.overridden = true;
      if (c.denominator > 0 && !c.overridden) {
        c.sigma = cell_sigma(c.numerator, c.denominator);
      }
      cells.push_back(c);
    }
    return DisagreementTable(scale, UserModel::at(scale, threshold),
                             std::move(cells), spec, std::move(stratum));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("disagreement table: ") + e.what());
  }
}

std::string format_table(const DisagreementTable& table) {
  std::ostringstream out;
  const auto& spec = table.spec();
  out << "estimator: " << to_string(spec.estimator);
  if (spec.estimator == Estimator::one_sided) {
    out << " (conditioned on " << to_string(spec.condition) << ")";
  }
  out << "  threshold: " << table.scale().label(table.threshold()) << " (level "
      << table.threshold() << ")";
  out << "  stratum: " << table.stratum().value_or("-") << '\n';

  std::size_t label_w = 5;
  for (const auto& l : table.scale().labels()) label_w = std::max(label_w, l.size());
  out << std::left << std::setw(static_cast<int>(label_w) + 2) << "label"
      << std::right << std::setw(8) << "N_N" << std::setw(8) << "N_D"
      << std::setw(9) << "p" << std::setw(9) << "sigma" << "  override\n";
  out << std::fixed << std::setprecision(4);
  for (auto it = table.cells().rbegin(); it != table.cells().rend(); ++it) {
    const auto& c = *it;
    out << std::left << std::setw(static_cast<int>(label_w) + 2)
        << table.scale().label(c.level) << std::right << std::setw(8)
        << c.numerator << std::setw(8) << c.denominator;
    if (c.p) {
      out << std::setw(9) << *c.p;
    } else {
      out << std::setw(9) << "undef";
    }
    if (c.sigma) {
      out << std::setw(9) << *c.sigma;
    } else {
      out << std::setw(9) << "-";
    }
    out << "  " << (c.overridden ? "yes" : "no") << '\n';
  }
  return out.str();
}

}  // namespace prm
