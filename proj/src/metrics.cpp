#include "prm/metrics.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <string_view>

#include "prm/errors.hpp"

namespace prm {

double count_binary(std::span<const std::int64_t> histogram, Level threshold) {
  double n = 0.0;
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    if (static_cast<Level>(i) >= threshold) n += static_cast<double>(histogram[i]);
  }
  return n;
}

double count_prm(std::span<const std::int64_t> histogram,
                 const DisagreementTable& table) {
  if (histogram.size() != table.scale().size()) {
    throw ValidationError("histogram does not match the table's scale");
  }
  double n = 0.0;
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    if (histogram[i] < 0) throw ValidationError("negative level count");
    if (histogram[i] == 0) continue;
    n += static_cast<double>(histogram[i]) * table.require_p(static_cast<Level>(i));
  }
  return n;
}

std::vector<std::int64_t> histogram_at(const RankedLevels& ranked,
                                       std::size_t levels, int cutoff) {
  std::vector<std::int64_t> h(levels, 0);
  const auto n = std::min<std::size_t>(ranked.size(),
                                       static_cast<std::size_t>(std::max(cutoff, 0)));
  for (std::size_t r = 0; r < n; ++r) {
    if (ranked[r]) ++h.at(static_cast<std::size_t>(*ranked[r]));
  }
  return h;
}

double expected_precision_at(const RankedLevels& ranked,
                             const DisagreementTable& table, int cutoff) {
  if (cutoff < 1) throw ValidationError("precision cutoff must be >= 1");
  const auto h = histogram_at(ranked, table.scale().size(), cutoff);
  return count_prm(h, table) / static_cast<double>(cutoff);
}

double dcg_at_k(const RankedLevels& ranked, const GainScheme& scheme,
                const Discount& discount, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  const auto n = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
  double dcg = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    if (!ranked[r]) continue;
    dcg += discount(static_cast<int>(r) + 1) * scheme.gain(*ranked[r]);
  }
  return dcg;
}

double ideal_dcg_at_k(std::span<const Level> pool, const GainScheme& scheme,
                      const Discount& discount, int k) {
  if (k < 1) throw ValidationError("k must be >= 1");
  std::vector<double> gains;
  gains.reserve(pool.size());
  for (Level l : pool) gains.push_back(scheme.gain(l));
  const auto n = std::min<std::size_t>(gains.size(), static_cast<std::size_t>(k));
  std::partial_sort(gains.begin(), gains.begin() + static_cast<std::ptrdiff_t>(n),
                    gains.end(), std::greater<>());
  double dcg = 0.0;
  for (std::size_t r = 0; r < n; ++r) dcg += discount(static_cast<int>(r) + 1) * gains[r];
  return dcg;
}

// ---- Qrels ----------------------------------------------------------------

Qrels::Qrels(const JudgmentSet& set) : scale_(set.scale()) {
  for (const auto& j : set.judgments()) {
    const std::string need =
        j.intent_id ? j.topic_id + ":" + *j.intent_id : j.topic_id;
    auto [it, inserted] = levels_.try_emplace(need);
    if (inserted) needs_by_topic_[j.topic_id].push_back(need);
    it->second[j.doc_id] = j.level;
  }
  for (auto& [topic, needs] : needs_by_topic_) std::sort(needs.begin(), needs.end());
}

std::vector<std::string> Qrels::needs_of(const std::string& topic) const {
  auto it = needs_by_topic_.find(topic);
  return it == needs_by_topic_.end() ? std::vector<std::string>{} : it->second;
}

const std::map<std::string, Level>& Qrels::judged(const std::string& need) const {
  auto it = levels_.find(need);
  if (it == levels_.end()) throw ValidationError("unknown need " + need);
  return it->second;
}

std::vector<std::string> Qrels::topics() const {
  std::vector<std::string> out;
  for (const auto& [t, n] : needs_by_topic_) out.push_back(t);
  return out;
}

RankedLevels ranked_levels(const std::vector<RunEntry>& entries,
                           const std::map<std::string, Level>& judged,
                           bool strict, const std::string& need) {
  RankedLevels out;
  out.reserve(entries.size());
  std::set<std::string_view> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.doc_id).second) {
      out.emplace_back(std::nullopt);
      continue;
    }
    auto it = judged.find(e.doc_id);
    if (it == judged.end()) {
      if (strict) {
        throw ValidationError("unjudged document " + e.doc_id + " for " + need);
      }
      out.emplace_back(0);
    } else {
      out.emplace_back(it->second);
    }
  }
  return out;
}

// ---- evaluate -------------------------------------------------------------

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::ndcg: return "ndcg";
    case MetricKind::dcg: return "dcg";
    case MetricKind::count_binary: return "count-binary";
    case MetricKind::count_prm: return "count-prm";
    case MetricKind::expected_precision: return "expected-precision";
  }
  return "unknown";
}

MetricKind parse_metric_kind(const std::string& s) {
  for (auto k : {MetricKind::ndcg, MetricKind::dcg, MetricKind::count_binary,
                 MetricKind::count_prm, MetricKind::expected_precision}) {
    if (to_string(k) == s) return k;
  }
  throw ValidationError("unknown metric '" + s + "'");
}

std::string MetricSpec::name() const {
  return to_string(kind) + "@" + std::to_string(k);
}

namespace {

double need_value(const MetricSpec& spec, const RankedLevels& ranked,
                  const std::map<std::string, Level>& judged,
                  const EvalOptions& options, std::size_t levels,
                  bool& excluded) {
  excluded = false;
  switch (spec.kind) {
    case MetricKind::ndcg: {
      std::vector<Level> pool;
      if (options.ideal_pool == IdealPool::judged) {
        for (const auto& [doc, level] : judged) pool.push_back(level);
      } else {
        for (const auto& l : ranked) {
          if (l) pool.push_back(*l);
        }
      }
      const double ideal = ideal_dcg_at_k(pool, *spec.scheme, spec.discount, spec.k);
      if (ideal == 0.0) {
        excluded = true;
        return 0.0;
      }
      return dcg_at_k(ranked, *spec.scheme, spec.discount, spec.k) / ideal;
    }
    case MetricKind::dcg:
      return dcg_at_k(ranked, *spec.scheme, spec.discount, spec.k);
    case MetricKind::count_binary:
      return count_binary(histogram_at(ranked, levels, spec.k), spec.threshold);
    case MetricKind::count_prm:
      return count_prm(histogram_at(ranked, levels, spec.k), *spec.table);
    case MetricKind::expected_precision:
      return expected_precision_at(ranked, *spec.table, spec.k);
  }
  return 0.0;
}

}  // namespace

MetricReport evaluate(const RunRanking& run, const Qrels& qrels,
                      const MetricSpec& spec, const EvalOptions& options) {
  if (spec.k < 1) throw ValidationError("k must be >= 1");
  const bool needs_scheme = spec.kind == MetricKind::ndcg || spec.kind == MetricKind::dcg;
  if (needs_scheme && !spec.scheme) {
    throw ValidationError(spec.name() + " needs a gain scheme");
  }
  if (needs_scheme && spec.scheme->top() != qrels.scale().top()) {
    throw ValidationError("gain scheme does not match the relevance scale");
  }
  if ((spec.kind == MetricKind::count_prm ||
       spec.kind == MetricKind::expected_precision) &&
      !spec.table) {
    throw ValidationError(spec.name() + " needs a disagreement table");
  }
  if (spec.kind == MetricKind::count_binary) {
    UserModel::at(qrels.scale(), spec.threshold);
  }

  MetricReport report;
  report.metric = spec.name();
  report.system_id = run.system_id;
  report.params["k"] = std::to_string(spec.k);
  if (spec.scheme) report.params["gains"] = spec.scheme->name();
  if (needs_scheme) report.params["discount"] = spec.discount.name();
  if (spec.kind == MetricKind::count_binary) {
    report.params["threshold"] = std::to_string(spec.threshold);
  }

  for (const auto& [topic, entries] : run.topics) {
    if (!qrels.has_topic(topic)) {
      if (options.strict) {
        throw ValidationError("run topic " + topic + " has no judgments");
      }
      report.warnings.push_back("topic " + topic + " has no judgments; skipped");
      continue;
    }
    for (const auto& need : qrels.needs_of(topic)) {
      const auto& judged = qrels.judged(need);
      const auto ranked = ranked_levels(entries, judged, options.strict, need);
      bool excluded = false;
      const double v =
          need_value(spec, ranked, judged, options, qrels.scale().size(), excluded);
      if (excluded) {
        report.excluded_topics.push_back(need);
        report.warnings.push_back("topic " + need +
                                  " has zero ideal DCG; excluded from the mean");
        continue;
      }
      report.per_topic.emplace(need, v);
    }
  }
  if (report.per_topic.empty()) {
    throw EstimationError(report.metric + " for " + run.system_id +
                          ": no evaluable topics");
  }
  summarize(report);
  return report;
}

MetricReport ndcg_at_k(const RunRanking& run, const JudgmentSet& judgments,
                       const GainScheme& scheme, const Discount& discount, int k,
                       const EvalOptions& options) {
  MetricSpec spec;
  spec.kind = MetricKind::ndcg;
  spec.k = k;
  spec.scheme = scheme;
  spec.discount = discount;
  return evaluate(run, Qrels(judgments), spec, options);
}

MetricReport count_in_top_resources(const RunRanking& resource_run,
                                    const JudgmentSet& judgments,
                                    int n_resources,
                                    const std::optional<DisagreementTable>& table,
                                    Level threshold) {
  if (n_resources < 1) throw ValidationError("need at least one resource");
  if (!table) UserModel::at(judgments.scale(), threshold);
  // topic -> resource -> level histogram
  std::map<std::string, std::map<std::string, std::vector<std::int64_t>>> hist;
  bool any_resource = false;
  for (const auto& j : judgments.judgments()) {
    if (!j.resource_id) continue;
    any_resource = true;
    auto& h = hist[j.topic_id][*j.resource_id];
    if (h.empty()) h.assign(judgments.scale().size(), 0);
    ++h[static_cast<std::size_t>(j.level)];
  }
  if (!any_resource) {
    throw ValidationError("judgments carry no resource ids");
  }

  MetricReport report;
  report.metric = std::string(table ? "count_prm" : "count_binary") + "_top" +
                  std::to_string(n_resources) + "_resources";
  report.system_id = resource_run.system_id;
  report.params["resources"] = std::to_string(n_resources);
  if (!table) report.params["threshold"] = std::to_string(threshold);

  for (const auto& [topic, entries] : resource_run.topics) {
    auto t = hist.find(topic);
    if (t == hist.end()) {
      report.warnings.push_back("topic " + topic + " has no judgments; skipped");
      continue;
    }
    std::vector<std::int64_t> total(judgments.scale().size(), 0);
    std::set<std::string> used;
    int taken = 0;
    for (const auto& e : entries) {
      if (taken == n_resources) break;
      if (!used.insert(e.doc_id).second) continue;
      ++taken;
      auto r = t->second.find(e.doc_id);
      if (r == t->second.end()) continue;
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += r->second[i];
    }
    report.per_topic.emplace(
        topic, table ? count_prm(total, *table) : count_binary(total, threshold));
  }
  if (report.per_topic.empty()) {
    throw EstimationError(report.metric + ": no evaluable topics");
  }
  summarize(report);
  return report;
}

}  // namespace prm
