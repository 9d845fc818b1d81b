#pragma once

#include <map>
#include <string>
#include <vector>

namespace prm {

struct RunEntry {
  std::string doc_id;
  int rank = 1;
  double score = 0.0;
};

/// Ranked results of one system, grouped by topic. Entries of a topic are
/// stored in rank order and ranks are exactly 1..n.
struct RunRanking {
  std::string system_id;
  std::map<std::string, std::vector<RunEntry>> topics;
  /// Non-fatal findings from parsing (score order disagreeing with rank).
  std::vector<std::string> warnings;

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [t, e] : topics) n += e.size();
    return n;
  }
};

}  // namespace prm
