#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "prm/scale.hpp"

namespace prm {

/// One graded label from one assessor group.
struct Judgment {
  std::string topic_id;
  std::string doc_id;
  std::string assessor_group;
  Level level = 0;
  std::optional<std::string> intent_id;
  std::optional<std::string> resource_id;
};

/// Identity of a judged item: a document for one information need.
struct ItemKey {
  std::string topic_id;
  std::string doc_id;
  std::optional<std::string> intent_id;

  auto operator<=>(const ItemKey&) const = default;
};

/// Per-topic query type (or any other stratum name), e.g. "nav" / "inf".
using TopicStrata = std::map<std::string, std::string>;

/// Immutable collection of graded judgments on a common scale.
///
/// (topic, doc, assessor_group, intent) is unique and every level is on the
/// scale; construction throws ValidationError otherwise.
class JudgmentSet {
 public:
  JudgmentSet(RelevanceScale scale, std::vector<Judgment> judgments,
              std::optional<TopicStrata> topic_metadata = std::nullopt);

  const RelevanceScale& scale() const { return scale_; }
  const std::vector<Judgment>& judgments() const { return judgments_; }
  const std::optional<TopicStrata>& topic_metadata() const {
    return topic_metadata_;
  }
  std::size_t size() const { return judgments_.size(); }

  /// Sorted, de-duplicated topic ids.
  std::vector<std::string> topics() const;

  /// Count of judgments per level, indexed 0..T.
  std::vector<std::int64_t> histogram() const;

  /// Copy restricted to judgments whose topic satisfies keep.
  template <typename Pred>
  JudgmentSet filter_topics(Pred keep) const {
    std::vector<Judgment> out;
    for (const auto& j : judgments_) {
      if (keep(j.topic_id)) out.push_back(j);
    }
    return JudgmentSet(scale_, std::move(out), topic_metadata_);
  }

  JudgmentSet with_topic_metadata(TopicStrata metadata) const;

 private:
  RelevanceScale scale_;
  std::vector<Judgment> judgments_;
  std::optional<TopicStrata> topic_metadata_;
};

/// Two independent labels for the same item.
struct JudgmentPair {
  std::string topic_id;
  std::string doc_id;
  std::optional<std::string> intent_id;
  Level level_u1 = 0;
  Level level_u2 = 0;

  bool operator==(const JudgmentPair&) const = default;
};

/// Result of joining two judgment sets.
struct PairingResult {
  std::vector<JudgmentPair> pairs;
  /// Items judged only by the first / second group.
  std::vector<ItemKey> unpaired_u1;
  std::vector<ItemKey> unpaired_u2;
  std::vector<std::string> warnings;
};

/// Inner join on (topic, doc, intent). Pairs are ordered by item key.
/// Throws ValidationError when the scales differ.
PairingResult pair_judgments(const JudgmentSet& set_u1,
                             const JudgmentSet& set_u2);

/// Builds pairs from a judgment list in which one item may be judged
/// repeatedly (one assessor pool split arbitrarily into two groups). The
/// first occurrence of an item goes to U1, the second to U2, later ones are
/// dropped with a warning.
PairingResult pairs_from_repeated(const std::vector<Judgment>& in_file_order,
                                  const RelevanceScale& scale);

/// Swaps level_u1 and level_u2 in every pair.
std::vector<JudgmentPair> swap_roles(std::vector<JudgmentPair> pairs);

/// Pairs grouped by topic, topics in ascending order.
std::map<std::string, std::vector<JudgmentPair>> group_by_topic(
    const std::vector<JudgmentPair>& pairs);

/// Intent probabilities per topic: topic -> intent -> probability.
using IntentProbabilities =
    std::map<std::string, std::map<std::string, double>>;

/// Keeps only judgments on the most probable intent of their topic (ties go
/// to the lexicographically smallest intent id). Judgments without an intent
/// are kept; judgments on topics missing from the sidecar are dropped.
JudgmentSet filter_top_intent(const JudgmentSet& set,
                              const IntentProbabilities& probabilities);

/// Replaces each judgment carrying the null intent label by an explicit
/// level-0 judgment for every declared intent of its topic. Declared intents
/// come from the sidecar when given, else from the intents observed on the
/// topic. Existing explicit judgments win over the expansion.
JudgmentSet expand_null_intent(
    const JudgmentSet& set, const std::string& null_label = "0",
    const IntentProbabilities* declared = nullptr);

}  // namespace prm
