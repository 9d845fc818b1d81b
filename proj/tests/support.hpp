// Fixtures, synthetic generators and independent oracles shared by the unit
// and acceptance tests.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "prm/analysis.hpp"
#include "prm/disagreement.hpp"
#include "prm/gains.hpp"
#include "prm/judgments.hpp"
#include "prm/metrics.hpp"
#include "prm/run.hpp"
#include "prm/scale.hpp"

namespace fixtures {

inline prm::RelevanceScale scale3() {
  return prm::RelevanceScale({"Non", "Rel", "HRel"});
}

inline prm::RelevanceScale scale4() {
  return prm::RelevanceScale({"Non", "Rel", "HRel", "Key"});
}

// The 20 double-judged documents of the worked estimation example.
inline const std::array<int, 20> kTable1U1 = {2, 2, 1, 0, 1, 1, 0, 1, 2, 1,
                                              1, 1, 2, 0, 1, 0, 1, 1, 0, 0};
inline const std::array<int, 20> kTable1U2 = {1, 2, 1, 1, 2, 0, 0, 1, 2, 2,
                                              0, 2, 1, 0, 1, 2, 0, 1, 0, 0};

inline std::string doc_name(int i) {
  return "d" + std::string(i < 9 ? "0" : "") + std::to_string(i + 1);
}

inline std::vector<prm::JudgmentPair> table1_pairs() {
  std::vector<prm::JudgmentPair> pairs;
  for (int i = 0; i < 20; ++i) {
    pairs.push_back({"q1", doc_name(i), std::nullopt, kTable1U1[i], kTable1U2[i]});
  }
  return pairs;
}

inline prm::JudgmentSet table1_set(const std::array<int, 20>& levels,
                                   const std::string& group) {
  std::vector<prm::Judgment> js;
  for (int i = 0; i < 20; ++i) {
    js.push_back({"q1", doc_name(i), group, levels[i], std::nullopt, std::nullopt});
  }
  return prm::JudgmentSet(scale3(), std::move(js));
}

/// Joint distribution of (U1, U2) labels; rows are U1, columns U2.
using Joint = std::vector<std::vector<double>>;

/// Symmetric 3x3 joint model with substantial top-level confusion.
inline Joint confusion_model() {
  return {{0.40, 0.08, 0.01},
          {0.08, 0.20, 0.06},
          {0.01, 0.06, 0.10}};
}

/// P(U2 >= theta | U1 = i) from the joint model.
inline double conditional(const Joint& m, int i, int theta) {
  double num = 0, den = 0;
  for (std::size_t j = 0; j < m.size(); ++j) {
    den += m[static_cast<std::size_t>(i)][j];
    if (static_cast<int>(j) >= theta) num += m[static_cast<std::size_t>(i)][j];
  }
  return num / den;
}

inline std::vector<prm::JudgmentPair> sample_pairs(const Joint& m, std::size_t n,
                                                   std::uint64_t seed) {
  std::vector<double> weights;
  for (const auto& row : m) weights.insert(weights.end(), row.begin(), row.end());
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> cell(weights.begin(), weights.end());
  const int levels = static_cast<int>(m.size());
  std::vector<prm::JudgmentPair> pairs;
  pairs.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int c = cell(rng);
    pairs.push_back({"t" + std::to_string(k % 25), "d" + std::to_string(k), std::nullopt,
                     c / levels, c % levels});
  }
  return pairs;
}

/// Uniformly random pairs on a scale with T + 1 levels.
inline std::vector<prm::JudgmentPair> random_pairs(int levels, std::size_t n,
                                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> level(0, levels - 1);
  std::vector<prm::JudgmentPair> pairs;
  for (std::size_t k = 0; k < n; ++k) {
    pairs.push_back({"t" + std::to_string(k % 7), "d" + std::to_string(k), std::nullopt,
                     level(rng), level(rng)});
  }
  return pairs;
}

/// A judged collection with one run over it.
struct Collection {
  prm::JudgmentSet judgments;
  prm::RunRanking run;
};

/// Random judgments (all docs judged) and a random run that retrieves a
/// subset of them plus some unjudged documents.
inline Collection random_collection(const prm::RelevanceScale& scale, int topics,
                                    int docs_per_topic, std::uint64_t seed,
                                    bool unjudged = true) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> level(0, scale.top());
  std::vector<prm::Judgment> js;
  prm::RunRanking run;
  run.system_id = "sys" + std::to_string(seed);
  for (int t = 0; t < topics; ++t) {
    const std::string topic = "t" + std::to_string(t);
    std::vector<std::string> docs;
    for (int d = 0; d < docs_per_topic; ++d) {
      const std::string doc = topic + "-d" + std::to_string(d);
      js.push_back({topic, doc, "U1", level(rng), std::nullopt, std::nullopt});
      docs.push_back(doc);
    }
    if (unjudged) {
      for (int d = 0; d < 3; ++d) docs.push_back(topic + "-x" + std::to_string(d));
    }
    std::shuffle(docs.begin(), docs.end(), rng);
    docs.resize(docs.size() * 3 / 4);
    auto& entries = run.topics[topic];
    for (std::size_t r = 0; r < docs.size(); ++r) {
      entries.push_back({docs[r], static_cast<int>(r) + 1,
                         static_cast<double>(docs.size() - r)});
    }
  }
  return {prm::JudgmentSet(scale, std::move(js)), std::move(run)};
}

// ---- Kendall oracle -------------------------------------------------------

struct PairCounts {
  std::int64_t concordant = 0, discordant = 0, ties_x = 0, ties_y = 0, pairs = 0;
};

/// O(n^2) enumeration of all pairs.
inline PairCounts brute_force_pairs(const std::vector<double>& x,
                                    const std::vector<double>& y) {
  PairCounts c;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      ++c.pairs;
      const bool tx = x[i] == x[j];
      const bool ty = y[i] == y[j];
      if (tx) ++c.ties_x;
      if (ty) ++c.ties_y;
      if (tx || ty) continue;
      if ((x[i] < x[j]) == (y[i] < y[j])) {
        ++c.concordant;
      } else {
        ++c.discordant;
      }
    }
  }
  return c;
}

inline double brute_force_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  const auto c = brute_force_pairs(x, y);
  const double s = static_cast<double>(c.concordant - c.discordant);
  return s / std::sqrt(static_cast<double>(c.pairs - c.ties_x) *
                       static_cast<double>(c.pairs - c.ties_y));
}

inline double brute_force_tau_a(const std::vector<double>& x, const std::vector<double>& y) {
  const auto c = brute_force_pairs(x, y);
  return static_cast<double>(c.concordant - c.discordant) / static_cast<double>(c.pairs);
}

// ---- robustness benchmark -------------------------------------------------

/// Two-group benchmark: every document has a latent grade, both assessor
/// groups label it independently through the same noisy channel, and systems
/// of graded skill rank documents by noisy latent grade.
struct Benchmark {
  prm::JudgmentSet u1;
  prm::JudgmentSet u2;
  std::vector<prm::RunRanking> runs;
};

/// Rows: latent grade 0..2; columns: assessed label 0..2.
inline Joint assessor_channel() {
  return {{0.86, 0.12, 0.02},
          {0.25, 0.62, 0.13},
          {0.05, 0.45, 0.50}};
}

inline Benchmark robustness_benchmark(std::uint64_t seed, int systems = 12,
                                      int topics = 25, int docs = 60) {
  std::mt19937_64 rng(seed);
  const auto channel = assessor_channel();
  std::discrete_distribution<int> latent_dist({0.62, 0.28, 0.10});
  std::vector<std::discrete_distribution<int>> label_dist;
  for (const auto& row : channel) label_dist.emplace_back(row.begin(), row.end());
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<prm::Judgment> j1, j2;
  std::vector<prm::RunRanking> runs(static_cast<std::size_t>(systems));
  for (int s = 0; s < systems; ++s) runs[static_cast<std::size_t>(s)].system_id = "s" + std::to_string(s);

  for (int t = 0; t < topics; ++t) {
    const std::string topic = "t" + std::to_string(t);
    std::vector<int> latent(static_cast<std::size_t>(docs));
    for (int d = 0; d < docs; ++d) {
      const std::string doc = topic + "-d" + std::to_string(d);
      latent[static_cast<std::size_t>(d)] = latent_dist(rng);
      j1.push_back({topic, doc, "U1", label_dist[static_cast<std::size_t>(latent[static_cast<std::size_t>(d)])](rng),
                    std::nullopt, std::nullopt});
      j2.push_back({topic, doc, "U2", label_dist[static_cast<std::size_t>(latent[static_cast<std::size_t>(d)])](rng),
                    std::nullopt, std::nullopt});
    }
    for (int s = 0; s < systems; ++s) {
      const double skill = 0.25 + 0.1 * s;
      std::vector<std::pair<double, int>> scored;
      for (int d = 0; d < docs; ++d) {
        scored.emplace_back(skill * latent[static_cast<std::size_t>(d)] + noise(rng), d);
      }
      std::sort(scored.begin(), scored.end(), std::greater<>());
      auto& entries = runs[static_cast<std::size_t>(s)].topics[topic];
      for (int r = 0; r < 20; ++r) {
        const auto& [score, d] = scored[static_cast<std::size_t>(r)];
        entries.push_back({topic + "-d" + std::to_string(d), r + 1, score});
      }
    }
  }
  return {prm::JudgmentSet(scale3(), std::move(j1)), prm::JudgmentSet(scale3(), std::move(j2)),
          std::move(runs)};
}

}  // namespace fixtures
