#include "prm/kendall.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "prm/errors.hpp"

namespace prm {

namespace {

/// Sum over runs of equal values of t (t - 1) / 2; v must be sorted.
std::int64_t tied_pairs(const std::vector<double>& v) {
  std::int64_t total = 0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i + 1;
    while (j < v.size() && v[j] == v[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    total += t * (t - 1) / 2;
    i = j;
  }
  return total;
}

/// Stable merge sort of v counting inversions (pairs i < j with v[i] > v[j]).
std::int64_t sort_counting_swaps(std::vector<double>& v, std::vector<double>& buf,
                                 std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = sort_counting_swaps(v, buf, lo, mid) +
                       sort_counting_swaps(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

TauCounts tau_counts(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("kendall tau needs lists of equal length");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isnan(x[i]) || std::isnan(y[i])) {
      throw ValidationError("kendall tau input contains NaN");
    }
  }
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  TauCounts c;
  c.pairs = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - (n > 0)) / 2;

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }
  c.ties_x = tied_pairs(xs);
  // joint ties: runs equal in both coordinates (adjacent after the sort)
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && xs[j] == xs[i] && ys[j] == ys[i]) ++j;
    const auto t = static_cast<std::int64_t>(j - i);
    c.ties_xy += t * (t - 1) / 2;
    i = j;
  }
  std::vector<double> buf(n);
  const std::int64_t swaps = sort_counting_swaps(ys, buf, 0, n);
  c.ties_y = tied_pairs(ys);
  // Pairs neither tied in x nor in y are concordant or discordant; each
  // discordant one is exactly one inversion of y in x-order.
  const std::int64_t untied = c.pairs - c.ties_x - c.ties_y + c.ties_xy;
  c.concordant_minus_discordant = untied - 2 * swaps;
  return c;
}

double tau_from_counts(const TauCounts& c, TauVariant variant) {
  if (c.pairs == 0) throw EstimationError("kendall tau needs at least two items");
  const auto s = static_cast<double>(c.concordant_minus_discordant);
  if (variant == TauVariant::a) return s / static_cast<double>(c.pairs);
  const std::int64_t dx = c.pairs - c.ties_x;
  const std::int64_t dy = c.pairs - c.ties_y;
  if (dx == 0 || dy == 0) {
    throw EstimationError("kendall tau-b undefined: all values tied in one list");
  }
  return s / std::sqrt(static_cast<double>(dx) * static_cast<double>(dy));
}

double kendall_tau(std::span<const double> x, std::span<const double> y,
                   TauVariant variant) {
  return tau_from_counts(tau_counts(x, y), variant);
}

SystemRanking SystemRanking::from_scores(
    std::string metric, std::vector<std::pair<std::string, double>> scores) {
  std::set<std::string> ids;
  for (const auto& [id, s] : scores) {
    if (!ids.insert(id).second) {
      throw ValidationError("system " + id + " listed twice in ranking");
    }
  }
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    return a.second > b.second || (a.second == b.second && a.first < b.first);
  });
  return SystemRanking{std::move(metric), std::move(scores)};
}

SystemRanking SystemRanking::from_scores(std::string metric,
                                         const std::map<std::string, double>& scores) {
  return from_scores(std::move(metric),
                     std::vector<std::pair<std::string, double>>(scores.begin(),
                                                                 scores.end()));
}

double kendall_tau(const SystemRanking& a, const SystemRanking& b,
                   TauVariant variant) {
  if (a.entries.size() < 2) {
    throw ValidationError("kendall tau needs at least two systems");
  }
  std::map<std::string, double> bs(b.entries.begin(), b.entries.end());
  if (bs.size() != a.entries.size()) {
    throw ValidationError("rankings cover different system sets");
  }
  std::vector<double> x, y;
  for (const auto& [id, score] : a.entries) {
    auto it = bs.find(id);
    if (it == bs.end()) {
      throw ValidationError("system " + id + " missing from the second ranking");
    }
    x.push_back(score);
    y.push_back(it->second);
  }
  return kendall_tau(x, y, variant);
}

}  // namespace prm
