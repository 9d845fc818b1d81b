#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prm/judgments.hpp"
#include "prm/scale.hpp"

namespace prm {

/// Binary user model: a result is relevant to a user iff level >= threshold.
struct UserModel {
  Level threshold = 1;

  /// Throws ValidationError unless 1 <= threshold <= T.
  static UserModel at(const RelevanceScale& scale, Level threshold);
  bool relevant(Level level) const { return level >= threshold; }
};

enum class Estimator {
  /// Pools both directions: (N[U1=R,U2=i] + N[U2=R,U1=i]) / (N[U2=i] + N[U1=i]).
  symmetric,
  /// Conditions on one group: N[other=R, cond=i] / N[cond=i].
  one_sided,
};

/// Group whose labels are conditioned on by the one-sided estimator.
enum class Condition { u1, u2 };

/// How the second judgment round was collected.
enum class Collection {
  /// Both groups independently judged the same pool.
  full_pool,
  /// Second round restricted to items the first group rated above 0.
  one_sided_subset,
};

struct EstimatorSpec {
  Estimator estimator = Estimator::symmetric;
  Condition condition = Condition::u1;
  Collection collection = Collection::full_pool;
};

std::string to_string(Estimator e);
std::string to_string(Condition c);
Estimator parse_estimator(const std::string& s);
Condition parse_condition(const std::string& s);

/// Joint counts of (level_u1, level_u2) over a pair set.
class ConfusionCounts {
 public:
  explicit ConfusionCounts(std::size_t levels);
  ConfusionCounts(const std::vector<JudgmentPair>& pairs, std::size_t levels);

  void add(Level u1, Level u2, std::int64_t weight = 1);
  void add(const ConfusionCounts& other);
  std::int64_t at(Level u1, Level u2) const {
    return counts_[static_cast<std::size_t>(u1) * levels_ +
                   static_cast<std::size_t>(u2)];
  }
  std::size_t levels() const { return levels_; }
  std::int64_t total() const;

 private:
  std::size_t levels_;
  std::vector<std::int64_t> counts_;
};

/// Estimate of p_{R|i} for one level. p and sigma are absent when the
/// denominator is zero, unless the cell was overridden.
struct DisagreementCell {
  Level level = 0;
  std::int64_t numerator = 0;
  std::int64_t denominator = 0;
  std::optional<double> p;
  std::optional<double> sigma;
  bool overridden = false;

  bool defined() const { return p.has_value(); }
};

/// Binomial standard deviation sqrt(q (1 - q) / den) with q = num / den.
/// Throws EstimationError when den == 0.
double cell_sigma(std::int64_t numerator, std::int64_t denominator);
double cell_sigma(const DisagreementCell& cell);

/// Estimated disagreement parameters, one cell per level 0..T.
class DisagreementTable {
 public:
  DisagreementTable(RelevanceScale scale, UserModel user_model,
                    std::vector<DisagreementCell> cells, EstimatorSpec spec,
                    std::optional<std::string> stratum = std::nullopt);

  const RelevanceScale& scale() const { return scale_; }
  const UserModel& user_model() const { return user_model_; }
  Level threshold() const { return user_model_.threshold; }
  const std::vector<DisagreementCell>& cells() const { return cells_; }
  const DisagreementCell& cell(Level level) const;
  const EstimatorSpec& spec() const { return spec_; }
  const std::optional<std::string>& stratum() const { return stratum_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::optional<double> p(Level level) const { return cell(level).p; }
  /// p_{R|level}; throws EstimationError naming the level when undefined.
  double require_p(Level level) const;
  bool fully_defined() const;

  /// Copy with p_{R|level} forced to value (flagged as overridden).
  DisagreementTable with_override(Level level, double value) const;
  DisagreementTable with_stratum(std::string stratum) const;

 private:
  void check_monotonicity();

  RelevanceScale scale_;
  UserModel user_model_;
  std::vector<DisagreementCell> cells_;
  EstimatorSpec spec_;
  std::optional<std::string> stratum_;
  std::vector<std::string> warnings_;
};

DisagreementTable estimate_one_sided(const std::vector<JudgmentPair>& pairs,
                                     const UserModel& user_model,
                                     const RelevanceScale& scale,
                                     Condition condition = Condition::u1);

/// Throws ValidationError for a one-sided-subset collection: the pooled
/// estimate is biased upward there and the one-sided estimator must be used.
DisagreementTable estimate_symmetric(
    const std::vector<JudgmentPair>& pairs, const UserModel& user_model,
    const RelevanceScale& scale,
    Collection collection = Collection::full_pool);

DisagreementTable estimate(const std::vector<JudgmentPair>& pairs,
                           const UserModel& user_model,
                           const RelevanceScale& scale,
                           const EstimatorSpec& spec);

/// Same as estimate() but from pre-aggregated counts. Empty counts and
/// counts without any usable cell at levels >= 1 are EstimationErrors.
DisagreementTable estimate_from_counts(const ConfusionCounts& counts,
                                       const UserModel& user_model,
                                       const RelevanceScale& scale,
                                       const EstimatorSpec& spec);

/// Table with p_{R|i} = 1 for i >= threshold and 0 below: the limit without
/// any disagreement, where PRM evaluation equals binary evaluation.
DisagreementTable degenerate_table(const RelevanceScale& scale,
                                   const UserModel& user_model);

struct StratifiedEstimate {
  std::map<std::string, DisagreementTable> tables;
  std::vector<std::string> warnings;
};

/// One table per stratum. Every paired topic must have a stratum; strata
/// with no pairs are omitted with a warning.
StratifiedEstimate stratified_estimate(const JudgmentSet& set_u1,
                                       const JudgmentSet& set_u2,
                                       const UserModel& user_model,
                                       const TopicStrata& strata,
                                       const EstimatorSpec& spec = {});

/// Pair-level overload used when pairs come from a paired-judgment file.
StratifiedEstimate stratified_estimate(const std::vector<JudgmentPair>& pairs,
                                       const RelevanceScale& scale,
                                       const UserModel& user_model,
                                       const TopicStrata& strata,
                                       const EstimatorSpec& spec = {});

/// P(at least m of n independent random users find a level-i result
/// relevant), i.e. the binomial upper tail with success rate p_{R|i}.
double at_least_m_of_n(const DisagreementTable& table, Level level, int m,
                       int n);
double binomial_upper_tail(double p, int m, int n);

nlohmann::json to_json(const DisagreementTable& table);
DisagreementTable table_from_json(const nlohmann::json& doc,
                                  const RelevanceScale& scale);

/// Aligned text report, top level first, numbers at 4 decimals.
std::string format_table(const DisagreementTable& table);

}  // namespace prm
