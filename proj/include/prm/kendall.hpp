#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace prm {

enum class TauVariant {
  /// (C - D) / (n (n - 1) / 2); ties count as neither.
  a,
  /// (C - D) / sqrt((n0 - n1)(n0 - n2)), correcting for ties in either list.
  b,
};

/// Pair statistics behind Kendall's tau.
struct TauCounts {
  std::int64_t pairs = 0;            // n0 = n (n - 1) / 2
  std::int64_t ties_x = 0;           // n1, pairs tied in x (incl. joint ties)
  std::int64_t ties_y = 0;           // n2, pairs tied in y (incl. joint ties)
  std::int64_t ties_xy = 0;          // n3, pairs tied in both
  std::int64_t concordant_minus_discordant = 0;
};

/// O(n log n) pair statistics (Knight's merge-sort algorithm).
TauCounts tau_counts(std::span<const double> x, std::span<const double> y);

/// tau from the counts. Throws EstimationError when it is undefined (fewer
/// than two items, or tau-b with one list entirely tied).
double tau_from_counts(const TauCounts& counts, TauVariant variant);

double kendall_tau(std::span<const double> x, std::span<const double> y,
                   TauVariant variant = TauVariant::b);

/// Systems ordered by non-increasing mean score (ties by system id).
struct SystemRanking {
  std::string metric;
  std::vector<std::pair<std::string, double>> entries;

  static SystemRanking from_scores(std::string metric,
                                   const std::map<std::string, double>& scores);
  static SystemRanking from_scores(
      std::string metric, std::vector<std::pair<std::string, double>> scores);
};

/// tau between two rankings of the same systems, compared by score.
/// Throws ValidationError when the system sets differ or have < 2 systems.
double kendall_tau(const SystemRanking& a, const SystemRanking& b,
                   TauVariant variant = TauVariant::b);

}  // namespace prm
