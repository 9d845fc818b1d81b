#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prm/disagreement.hpp"
#include "prm/gains.hpp"
#include "prm/judgments.hpp"
#include "prm/report.hpp"
#include "prm/run.hpp"

namespace prm {

/// Levels of a ranked list in rank order. An empty slot marks a repeated
/// document: it occupies the rank but earns no gain.
using RankedLevels = std::vector<std::optional<Level>>;

/// Binary count of relevant results: sum of n_i for i >= threshold.
double count_binary(std::span<const std::int64_t> histogram, Level threshold);

/// Expected number of relevant results for a random user: sum n_i p_{R|i}.
/// Levels with n_i > 0 need a defined cell.
double count_prm(std::span<const std::int64_t> histogram,
                 const DisagreementTable& table);

/// Level histogram of the first `cutoff` ranks (repeated documents skipped).
std::vector<std::int64_t> histogram_at(const RankedLevels& ranked,
                                       std::size_t levels, int cutoff);

/// count_prm over the top-N levels divided by N.
double expected_precision_at(const RankedLevels& ranked,
                             const DisagreementTable& table, int cutoff);

/// DCG@k = sum_{r=1..min(k,n)} c(r) g(i(r)); short lists are not padded.
double dcg_at_k(const RankedLevels& ranked, const GainScheme& scheme,
                const Discount& discount, int k);

/// DCG@k of the pool ordered by non-increasing gain.
double ideal_dcg_at_k(std::span<const Level> pool, const GainScheme& scheme,
                      const Discount& discount, int k);

/// Lookup of graded labels per information need. Without intents the need is
/// the topic; with intents every (topic, intent) is its own need, reported
/// as "topic:intent".
class Qrels {
 public:
  explicit Qrels(const JudgmentSet& set);

  const RelevanceScale& scale() const { return scale_; }
  /// Need ids of a topic (empty when the topic is not judged).
  std::vector<std::string> needs_of(const std::string& topic) const;
  const std::map<std::string, Level>& judged(const std::string& need) const;
  bool has_topic(const std::string& topic) const {
    return needs_by_topic_.contains(topic);
  }
  std::vector<std::string> topics() const;

 private:
  RelevanceScale scale_;
  std::map<std::string, std::vector<std::string>> needs_by_topic_;
  std::map<std::string, std::map<std::string, Level>> levels_;
};

enum class IdealPool {
  /// All judged documents of the need (trec_eval semantics).
  judged,
  /// Only the documents the run retrieved.
  run_local,
};

struct EvalOptions {
  /// Unjudged retrieved documents and unjudged run topics become errors
  /// instead of level 0 / being skipped.
  bool strict = false;
  IdealPool ideal_pool = IdealPool::judged;
};

/// Levels of one topic's results for one need. Unjudged documents map to
/// level 0 (strict: ValidationError); repeats after the first are empty.
RankedLevels ranked_levels(const std::vector<RunEntry>& entries,
                           const std::map<std::string, Level>& judged,
                           bool strict, const std::string& need = {});

enum class MetricKind { ndcg, dcg, count_binary, count_prm, expected_precision };

std::string to_string(MetricKind kind);
MetricKind parse_metric_kind(const std::string& s);

/// Fully specified metric. `scheme` is needed for (n)DCG, `table` for the
/// PRM counts and expected precision, `threshold` for the binary count.
struct MetricSpec {
  MetricKind kind = MetricKind::ndcg;
  int k = 10;
  std::optional<GainScheme> scheme;
  Discount discount = Discount::log(2.0);
  std::optional<DisagreementTable> table;
  Level threshold = 1;

  std::string name() const;
};

/// Evaluates a run per information need and aggregates. nDCG excludes needs
/// whose ideal DCG is 0 (warning); if every need is excluded it throws.
MetricReport evaluate(const RunRanking& run, const Qrels& qrels,
                      const MetricSpec& spec, const EvalOptions& options = {});

MetricReport ndcg_at_k(const RunRanking& run, const JudgmentSet& judgments,
                       const GainScheme& scheme, const Discount& discount, int k,
                       const EvalOptions& options = {});

/// Counts relevant results among the documents of the top `n_resources`
/// resources of a resource-selection run (its doc ids are resource ids).
/// Judgments must carry resource ids. Counting uses the PRM table when
/// given, else the binary count at `threshold`.
MetricReport count_in_top_resources(const RunRanking& resource_run,
                                    const JudgmentSet& judgments,
                                    int n_resources,
                                    const std::optional<DisagreementTable>& table,
                                    Level threshold);

}  // namespace prm
