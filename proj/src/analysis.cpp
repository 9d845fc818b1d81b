#include "prm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "prm/errors.hpp"
#include "prm/report.hpp"
#include "prm/rng.hpp"

namespace prm {

namespace {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled exactly once and writes only its own output slot.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body body) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// p per level, or nothing for every level when estimation fails.
std::vector<std::optional<double>> try_estimate(const ConfusionCounts& counts,
                                                const UserModel& model,
                                                const RelevanceScale& scale,
                                                const EstimatorSpec& spec) {
  std::vector<std::optional<double>> out(scale.size());
  try {
    const auto table = estimate_from_counts(counts, model, scale, spec);
    for (const auto& c : table.cells()) {
      out[static_cast<std::size_t>(c.level)] = c.p;
    }
  } catch (const EstimationError&) {
  }
  return out;
}

struct MeanStd {
  std::optional<double> mean;
  std::optional<double> std;
  std::int64_t n = 0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  r.n = static_cast<std::int64_t>(v.size());
  if (v.empty()) return r;
  double sum = 0.0;
  for (double x : v) sum += x;
  const double m = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  r.mean = m;
  r.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return r;
}

std::string opt_full(const std::optional<double>& v) {
  return v ? format_full(*v) : std::string();
}

}  // namespace

// ---- bootstrap ------------------------------------------------------------

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

void summarize_samples(BootstrapResult& r) {
  std::vector<double> v;
  r.missing = 0;
  for (const auto& s : r.samples) {
    if (s) {
      v.push_back(*s);
    } else {
      ++r.missing;
    }
  }
  const auto ms = mean_std(v);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.mean = ms.mean.value_or(nan);
  r.std = ms.std.value_or(nan);
  std::sort(v.begin(), v.end());
  r.min = v.empty() ? nan : v.front();
  r.max = v.empty() ? nan : v.back();
  r.q1 = quantile(v, 0.25);
  r.median = quantile(v, 0.5);
  r.q3 = quantile(v, 0.75);
}

BootstrapSummary bootstrap_topics(
    const std::map<std::string, std::vector<JudgmentPair>>& pairs_by_topic,
    const RelevanceScale& scale, const UserModel& user_model,
    const EstimatorSpec& spec, int n_resamples, std::uint64_t seed,
    unsigned threads) {
  if (pairs_by_topic.size() < 2) {
    throw ValidationError("topic bootstrap needs at least two topics with pairs");
  }
  if (n_resamples < 1) throw ValidationError("need at least one resample");

  std::vector<ConfusionCounts> per_topic;
  ConfusionCounts all(scale.size());
  for (const auto& [topic, pairs] : pairs_by_topic) {
    per_topic.emplace_back(pairs, scale.size());
    all.add(per_topic.back());
  }

  const auto n_topics = per_topic.size();
  std::vector<std::vector<std::optional<double>>> draws(
      static_cast<std::size_t>(n_resamples));
  parallel_for(draws.size(), threads, [&](std::size_t r) {
    Rng rng(seed, r);
    ConfusionCounts counts(scale.size());
    for (std::size_t t = 0; t < n_topics; ++t) {
      counts.add(per_topic[rng.below(n_topics)]);
    }
    draws[r] = try_estimate(counts, user_model, scale, spec);
  });

  BootstrapSummary out;
  out.seed = seed;
  out.resamples = n_resamples;
  std::optional<DisagreementTable> full;
  try {
    full = estimate_from_counts(all, user_model, scale, spec);
  } catch (const EstimationError&) {
  }
  for (Level i = 0; i <= scale.top(); ++i) {
    BootstrapResult r;
    r.level = i;
    for (const auto& d : draws) r.samples.push_back(d[static_cast<std::size_t>(i)]);
    summarize_samples(r);
    if (full) {
      r.full_estimate = full->cell(i).p;
      r.analytic_sigma = full->cell(i).sigma;
    }
    out.levels.push_back(std::move(r));
  }
  return out;
}

// ---- annotation budget ----------------------------------------------------

SensitivityCurve simulate_annotation_rounds(
    const std::vector<JudgmentPair>& pairs, const RelevanceScale& scale,
    const UserModel& user_model, const EstimatorSpec& spec, int n_rounds,
    std::vector<std::int64_t> budgets, std::uint64_t seed, unsigned threads) {
  if (pairs.empty()) throw ValidationError("annotation simulation needs pairs");
  if (n_rounds < 1) throw ValidationError("need at least one round");
  std::erase_if(budgets, [](std::int64_t b) { return b == 0; });
  if (budgets.empty()) throw ValidationError("no non-zero budgets");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i] < 0 || (i > 0 && budgets[i] <= budgets[i - 1])) {
      throw ValidationError("budgets must be positive and strictly increasing");
    }
  }
  UserModel::at(scale, user_model.threshold);

  // [round][budget][level]
  std::vector<std::vector<std::vector<std::optional<double>>>> results(
      static_cast<std::size_t>(n_rounds));
  parallel_for(results.size(), threads, [&](std::size_t round) {
    Rng rng(seed, round);
    ConfusionCounts counts(scale.size());
    std::int64_t drawn = 0;
    for (const auto budget : budgets) {
      for (; drawn < budget; ++drawn) {
        const auto& p = pairs[rng.below(pairs.size())];
        counts.add(p.level_u1, p.level_u2);
      }
      results[round].push_back(try_estimate(counts, user_model, scale, spec));
    }
  });

  SensitivityCurve curve;
  curve.x_name = "budget";
  curve.x = budgets;
  curve.series.assign(scale.size(), {});
  for (std::size_t level = 0; level < scale.size(); ++level) {
    for (std::size_t b = 0; b < budgets.size(); ++b) {
      std::vector<double> v;
      for (const auto& round : results) {
        if (round[b][level]) v.push_back(*round[b][level]);
      }
      const auto ms = mean_std(v);
      curve.series[level].push_back(SeriesPoint{ms.mean, ms.std, ms.n});
    }
  }
  return curve;
}

// ---- result quality -------------------------------------------------------

SensitivityCurve quality_sensitivity(const JudgmentSet& reference,
                                     const std::vector<JudgmentPair>& pairs,
                                     const UserModel& user_model,
                                     const EstimatorSpec& spec) {
  const auto& scale = reference.scale();
  UserModel::at(scale, user_model.threshold);
  const Level quality_floor = std::max(1, scale.top() - 1);

  // topic -> resource -> count of top-two-level results
  std::map<std::string, std::map<std::string, std::int64_t>> quality;
  // (topic, doc) -> resource
  std::map<std::pair<std::string, std::string>, std::string> resource_of;
  for (const auto& j : reference.judgments()) {
    if (!j.resource_id) continue;
    auto& q = quality[j.topic_id][*j.resource_id];
    if (j.level >= quality_floor) ++q;
    resource_of.emplace(std::make_pair(j.topic_id, j.doc_id), *j.resource_id);
  }
  if (quality.empty()) {
    throw ValidationError("quality sensitivity needs judgments with resource ids");
  }

  // topic -> resource -> 1-based position in the quality order
  std::map<std::string, std::map<std::string, std::size_t>> position;
  std::size_t max_k = 0;
  for (const auto& [topic, by_resource] : quality) {
    std::vector<std::pair<std::string, std::int64_t>> order(by_resource.begin(),
                                                            by_resource.end());
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      return a.second > b.second;  // input is in resource-id order
    });
    for (std::size_t i = 0; i < order.size(); ++i) {
      position[topic][order[i].first] = i + 1;
    }
    max_k = std::max(max_k, order.size());
  }

  // Pairs bucketed by the position of their resource.
  std::vector<ConfusionCounts> bucket(max_k + 1, ConfusionCounts(scale.size()));
  for (const auto& p : pairs) {
    auto r = resource_of.find({p.topic_id, p.doc_id});
    if (r == resource_of.end()) continue;
    bucket[position[p.topic_id][r->second]].add(p.level_u1, p.level_u2);
  }

  SensitivityCurve curve;
  curve.x_name = "k";
  curve.series.assign(scale.size(), {});
  ConfusionCounts cumulative(scale.size());
  for (std::size_t k = 1; k <= max_k; ++k) {
    cumulative.add(bucket[k]);
    curve.x.push_back(static_cast<std::int64_t>(k));
    std::optional<DisagreementTable> table;
    try {
      table = estimate_from_counts(cumulative, user_model, scale, spec);
    } catch (const EstimationError&) {
    }
    for (std::size_t level = 0; level < scale.size(); ++level) {
      SeriesPoint pt;
      if (table) {
        const auto& c = table->cell(static_cast<Level>(level));
        pt.mean = c.p;
        pt.std = c.sigma;
        pt.n = c.denominator;
      }
      curve.series[level].push_back(pt);
    }
  }
  return curve;
}

// ---- system rankings ------------------------------------------------------

SystemRanking rank_systems(const std::vector<RunRanking>& runs,
                           const Qrels& qrels, const MetricSpec& spec,
                           const EvalOptions& options) {
  std::vector<std::pair<std::string, double>> scores;
  for (const auto& run : runs) {
    scores.emplace_back(run.system_id, evaluate(run, qrels, spec, options).mean);
  }
  return SystemRanking::from_scores(spec.name(), std::move(scores));
}

namespace {

MetricSpec ndcg_spec(const GainScheme& scheme, const Discount& discount, int k) {
  MetricSpec spec;
  spec.kind = MetricKind::ndcg;
  spec.k = k;
  spec.scheme = scheme;
  spec.discount = discount;
  return spec;
}

}  // namespace

std::vector<RobustnessRow> robustness_study(
    const std::vector<RunRanking>& runs, const JudgmentSet& set_u1,
    const JudgmentSet& set_u2, const std::vector<GainScheme>& schemes, int k,
    const Discount& discount, const EvalOptions& options, TauVariant variant) {
  const Qrels q1(set_u1);
  const Qrels q2(set_u2);
  std::vector<RobustnessRow> rows;
  for (const auto& scheme : schemes) {
    const auto spec = ndcg_spec(scheme, discount, k);
    RobustnessRow row{scheme.name(), 0.0, rank_systems(runs, q1, spec, options),
                      rank_systems(runs, q2, spec, options)};
    row.tau = kendall_tau(row.by_u1, row.by_u2, variant);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SchemeComparison> compare_schemes(
    const std::vector<RunRanking>& runs, const JudgmentSet& judgments,
    const GainScheme& reference, const std::vector<GainScheme>& others, int k,
    const Discount& discount, const EvalOptions& options, TauVariant variant) {
  const Qrels q(judgments);
  const auto base = rank_systems(runs, q, ndcg_spec(reference, discount, k), options);
  std::vector<SchemeComparison> out;
  for (const auto& other : others) {
    const auto r = rank_systems(runs, q, ndcg_spec(other, discount, k), options);
    out.push_back({reference.name(), other.name(), kendall_tau(base, r, variant)});
  }
  return out;
}

// ---- CSV ------------------------------------------------------------------

std::string to_csv(const BootstrapSummary& summary, const RelevanceScale& scale) {
  std::ostringstream out;
  out << "level,label,mean,std,min,q1,median,q3,max,missing,estimate,sigma\n";
  for (const auto& r : summary.levels) {
    out << r.level << ',' << scale.label(r.level) << ',' << format_full(r.mean) << ','
        << format_full(r.std) << ',' << format_full(r.min) << ','
        << format_full(r.q1) << ',' << format_full(r.median) << ','
        << format_full(r.q3) << ',' << format_full(r.max) << ',' << r.missing << ','
        << opt_full(r.full_estimate) << ',' << opt_full(r.analytic_sigma) << '\n';
  }
  return out.str();
}

std::string samples_to_csv(const BootstrapSummary& summary,
                           const RelevanceScale& scale) {
  std::ostringstream out;
  out << "resample,level,label,p\n";
  for (int s = 0; s < summary.resamples; ++s) {
    for (const auto& r : summary.levels) {
      out << s << ',' << r.level << ',' << scale.label(r.level) << ','
          << opt_full(r.samples[static_cast<std::size_t>(s)]) << '\n';
    }
  }
  return out.str();
}

std::string to_csv(const SensitivityCurve& curve, const RelevanceScale& scale) {
  std::ostringstream out;
  out << curve.x_name << ",level,label,mean,std,n\n";
  for (std::size_t i = 0; i < curve.x.size(); ++i) {
    for (std::size_t level = 0; level < curve.series.size(); ++level) {
      const auto& pt = curve.series[level][i];
      out << curve.x[i] << ',' << level << ','
          << scale.label(static_cast<Level>(level)) << ',' << opt_full(pt.mean) << ','
          << opt_full(pt.std) << ',' << pt.n << '\n';
    }
  }
  return out.str();
}

std::string to_csv(const std::vector<RobustnessRow>& rows) {
  std::ostringstream out;
  out << "scheme,tau\n";
  for (const auto& r : rows) out << r.scheme << ',' << format_full(r.tau) << '\n';
  return out.str();
}

}  // namespace prm
