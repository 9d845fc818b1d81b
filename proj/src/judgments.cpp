#include "prm/judgments.hpp"

#include <algorithm>
#include <tuple>

#include "prm/errors.hpp"

namespace prm {

namespace {

std::string describe(const ItemKey& key) {
  std::string s = "topic " + key.topic_id + " doc " + key.doc_id;
  if (key.intent_id) s += " intent " + *key.intent_id;
  return s;
}

ItemKey key_of(const Judgment& j) {
  return ItemKey{j.topic_id, j.doc_id, j.intent_id};
}

}  // namespace

JudgmentSet::JudgmentSet(RelevanceScale scale, std::vector<Judgment> judgments,
                         std::optional<TopicStrata> topic_metadata)
    : scale_(std::move(scale)),
      judgments_(std::move(judgments)),
      topic_metadata_(std::move(topic_metadata)) {
  std::set<std::tuple<ItemKey, std::string>> seen;
  for (const auto& j : judgments_) {
    scale_.check(j.level);
    if (!seen.emplace(key_of(j), j.assessor_group).second) {
      throw ValidationError("duplicate judgment for " + describe(key_of(j)) +
                            " by group " + j.assessor_group);
    }
    if (topic_metadata_ && !topic_metadata_->contains(j.topic_id)) {
      throw ValidationError("topic metadata has no entry for topic " +
                            j.topic_id);
    }
  }
}

std::vector<std::string> JudgmentSet::topics() const {
  std::set<std::string> ts;
  for (const auto& j : judgments_) ts.insert(j.topic_id);
  return {ts.begin(), ts.end()};
}

std::vector<std::int64_t> JudgmentSet::histogram() const {
  std::vector<std::int64_t> h(scale_.size(), 0);
  for (const auto& j : judgments_) ++h[static_cast<std::size_t>(j.level)];
  return h;
}

JudgmentSet JudgmentSet::with_topic_metadata(TopicStrata metadata) const {
  return JudgmentSet(scale_, judgments_, std::move(metadata));
}

PairingResult pair_judgments(const JudgmentSet& set_u1,
                             const JudgmentSet& set_u2) {
  if (!(set_u1.scale() == set_u2.scale())) {
    throw ValidationError("cannot pair judgments on different scales");
  }
  std::map<ItemKey, Level> u1;
  std::map<ItemKey, Level> u2;
  for (const auto& j : set_u1.judgments()) u1.emplace(key_of(j), j.level);
  for (const auto& j : set_u2.judgments()) u2.emplace(key_of(j), j.level);

  PairingResult out;
  for (const auto& [key, level] : u1) {
    auto it = u2.find(key);
    if (it == u2.end()) {
      out.unpaired_u1.push_back(key);
      continue;
    }
    out.pairs.push_back(
        JudgmentPair{key.topic_id, key.doc_id, key.intent_id, level, it->second});
  }
  for (const auto& [key, level] : u2) {
    if (!u1.contains(key)) out.unpaired_u2.push_back(key);
  }
  return out;
}

PairingResult pairs_from_repeated(const std::vector<Judgment>& in_file_order,
                                  const RelevanceScale& scale) {
  std::map<ItemKey, std::vector<Level>> seen;
  for (const auto& j : in_file_order) {
    scale.check(j.level);
    seen[key_of(j)].push_back(j.level);
  }
  PairingResult out;
  std::size_t dropped = 0;
  for (const auto& [key, levels] : seen) {
    if (levels.size() == 1) {
      out.unpaired_u1.push_back(key);
      continue;
    }
    out.pairs.push_back(
        JudgmentPair{key.topic_id, key.doc_id, key.intent_id, levels[0], levels[1]});
    dropped += levels.size() - 2;
  }
  if (dropped > 0) {
    out.warnings.push_back("ignored " + std::to_string(dropped) +
                           " judgment(s) beyond the first two per item");
  }
  return out;
}

std::vector<JudgmentPair> swap_roles(std::vector<JudgmentPair> pairs) {
  for (auto& p : pairs) std::swap(p.level_u1, p.level_u2);
  return pairs;
}

std::map<std::string, std::vector<JudgmentPair>> group_by_topic(
    const std::vector<JudgmentPair>& pairs) {
  std::map<std::string, std::vector<JudgmentPair>> out;
  for (const auto& p : pairs) out[p.topic_id].push_back(p);
  return out;
}

JudgmentSet filter_top_intent(const JudgmentSet& set,
                              const IntentProbabilities& probabilities) {
  std::map<std::string, std::string> top;
  for (const auto& [topic, intents] : probabilities) {
    const std::string* best = nullptr;
    double best_p = 0.0;
    // std::map iterates intents in ascending order, so '>' keeps the
    // smallest id on ties.
    for (const auto& [intent, p] : intents) {
      if (best == nullptr || p > best_p) {
        best = &intent;
        best_p = p;
      }
    }
    if (best != nullptr) top.emplace(topic, *best);
  }
  std::vector<Judgment> out;
  for (const auto& j : set.judgments()) {
    if (!j.intent_id) {
      out.push_back(j);
      continue;
    }
    auto it = top.find(j.topic_id);
    if (it != top.end() && it->second == *j.intent_id) out.push_back(j);
  }
  return JudgmentSet(set.scale(), std::move(out), set.topic_metadata());
}

JudgmentSet expand_null_intent(const JudgmentSet& set,
                               const std::string& null_label,
                               const IntentProbabilities* declared) {
  std::map<std::string, std::set<std::string>> intents;
  if (declared != nullptr) {
    for (const auto& [topic, probs] : *declared) {
      for (const auto& [intent, p] : probs) {
        if (intent != null_label) intents[topic].insert(intent);
      }
    }
  } else {
    for (const auto& j : set.judgments()) {
      if (j.intent_id && *j.intent_id != null_label) {
        intents[j.topic_id].insert(*j.intent_id);
      }
    }
  }

  std::vector<Judgment> out;
  std::set<std::tuple<ItemKey, std::string>> explicit_keys;
  for (const auto& j : set.judgments()) {
    if (j.intent_id && *j.intent_id == null_label) continue;
    explicit_keys.emplace(key_of(j), j.assessor_group);
    out.push_back(j);
  }
  for (const auto& j : set.judgments()) {
    if (!j.intent_id || *j.intent_id != null_label) continue;
    auto it = intents.find(j.topic_id);
    if (it == intents.end()) continue;
    for (const auto& intent : it->second) {
      Judgment e = j;
      e.intent_id = intent;
      e.level = 0;
      if (explicit_keys.emplace(key_of(e), e.assessor_group).second) {
        out.push_back(std::move(e));
      }
    }
  }
  return JudgmentSet(set.scale(), std::move(out), set.topic_metadata());
}

}  // namespace prm
