#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prm/disagreement.hpp"
#include "prm/gains.hpp"
#include "prm/judgments.hpp"
#include "prm/kendall.hpp"
#include "prm/metrics.hpp"
#include "prm/run.hpp"

namespace prm {

// ---- topic bootstrap ------------------------------------------------------

/// Distribution of one p_{R|i} across bootstrap resamples. Resamples in
/// which the cell was undefined are kept as empty samples and counted in
/// `missing`; the statistics cover the defined samples only (NaN if none).
struct BootstrapResult {
  Level level = 0;
  std::vector<std::optional<double>> samples;
  std::size_t missing = 0;
  double mean = 0.0;
  double std = 0.0;  // sample std-dev (n - 1)
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  /// Estimate and analytic sigma on the full (non-resampled) data.
  std::optional<double> full_estimate;
  std::optional<double> analytic_sigma;
};

/// Recomputes the summary statistics of r from r.samples.
void summarize_samples(BootstrapResult& r);

/// Linear-interpolation quantile (numpy default) of sorted values.
double quantile(const std::vector<double>& sorted, double q);

struct BootstrapSummary {
  std::uint64_t seed = 0;
  int resamples = 0;
  std::vector<BootstrapResult> levels;  // indexed by level
};

/// Resamples topics with replacement; a topic drawn m times contributes its
/// pairs m times. Resample r draws from Rng(seed, r), so `threads` never
/// changes the result. Needs >= 2 topics and n_resamples >= 1.
BootstrapSummary bootstrap_topics(
    const std::map<std::string, std::vector<JudgmentPair>>& pairs_by_topic,
    const RelevanceScale& scale, const UserModel& user_model,
    const EstimatorSpec& spec, int n_resamples, std::uint64_t seed,
    unsigned threads = 1);

// ---- sensitivity curves ---------------------------------------------------

struct SeriesPoint {
  std::optional<double> mean;
  std::optional<double> std;
  /// Rounds with a defined value (budget curve) or the denominator N_D
  /// (quality curve).
  std::int64_t n = 0;
};

struct SensitivityCurve {
  std::string x_name;
  std::vector<std::int64_t> x;  // strictly increasing
  std::vector<std::vector<SeriesPoint>> series;  // [level][point]
};

/// Simulates annotation rounds: each round draws pairs with replacement, one
/// at a time, and re-estimates at every budget on the growing sample. Points
/// report mean and std (n - 1) of p across rounds. Budget 0 is skipped.
SensitivityCurve simulate_annotation_rounds(
    const std::vector<JudgmentPair>& pairs, const RelevanceScale& scale,
    const UserModel& user_model, const EstimatorSpec& spec, int n_rounds,
    std::vector<std::int64_t> budgets, std::uint64_t seed, unsigned threads = 1);

/// Estimates p using only pairs on documents of the top-k resources per
/// topic, for k = 1..max. Resources are ordered per topic by the number of
/// reference judgments in the top two levels (ties by resource id). Points
/// carry p and its analytic sigma.
SensitivityCurve quality_sensitivity(const JudgmentSet& reference,
                                     const std::vector<JudgmentPair>& pairs,
                                     const UserModel& user_model,
                                     const EstimatorSpec& spec);

// ---- system rankings ------------------------------------------------------

/// Mean metric value per run, ranked.
SystemRanking rank_systems(const std::vector<RunRanking>& runs,
                           const Qrels& qrels, const MetricSpec& spec,
                           const EvalOptions& options = {});

struct RobustnessRow {
  std::string scheme;
  double tau = 0.0;
  SystemRanking by_u1;
  SystemRanking by_u2;
};

/// For each scheme, ranks the runs by nDCG@k once per judgment set and
/// reports tau between the two rankings.
std::vector<RobustnessRow> robustness_study(
    const std::vector<RunRanking>& runs, const JudgmentSet& set_u1,
    const JudgmentSet& set_u2, const std::vector<GainScheme>& schemes, int k,
    const Discount& discount = Discount::log(2.0),
    const EvalOptions& options = {}, TauVariant variant = TauVariant::b);

struct SchemeComparison {
  std::string reference;
  std::string other;
  double tau = 0.0;
};

/// tau between the nDCG@k ranking under `reference` and under each other
/// scheme, on one judgment set.
std::vector<SchemeComparison> compare_schemes(
    const std::vector<RunRanking>& runs, const JudgmentSet& judgments,
    const GainScheme& reference, const std::vector<GainScheme>& others, int k,
    const Discount& discount = Discount::log(2.0),
    const EvalOptions& options = {}, TauVariant variant = TauVariant::b);

// ---- CSV ------------------------------------------------------------------

/// level,label,mean,std,min,q1,median,q3,max,missing,estimate,sigma
std::string to_csv(const BootstrapSummary& summary, const RelevanceScale& scale);
/// Every resample value: resample,level,label,p (empty when missing).
std::string samples_to_csv(const BootstrapSummary& summary,
                           const RelevanceScale& scale);
/// <x_name>,level,label,mean,std,n
std::string to_csv(const SensitivityCurve& curve, const RelevanceScale& scale);
/// scheme,tau
std::string to_csv(const std::vector<RobustnessRow>& rows);

}  // namespace prm
