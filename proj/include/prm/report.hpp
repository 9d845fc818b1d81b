#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace prm {

/// Per-topic values of one metric for one system, with their mean and the
/// standard error of the mean (sample std-dev with n - 1, over sqrt(n)).
struct MetricReport {
  std::string metric;
  std::string system_id;
  std::map<std::string, std::string> params;
  /// Ordered by topic id; aggregation runs in this order.
  std::map<std::string, double> per_topic;
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  std::size_t n_topics = 0;
  std::vector<std::string> excluded_topics;
  std::vector<std::string> warnings;
};

/// Fills mean, stderr_of_mean and n_topics from per_topic. Throws
/// EstimationError when per_topic is empty. A single topic has stderr 0.
void summarize(MetricReport& report);

/// `topic,value` rows then `mean,` and `stderr,` rows; full precision.
std::string to_csv(const MetricReport& report);
nlohmann::json to_json(const MetricReport& report);
/// trec_eval style `metric<TAB>topic<TAB>value` lines, 4 decimals, with the
/// mean on an `all` line.
std::string to_trec(const MetricReport& report);

/// Shortest text that round-trips the double.
std::string format_full(double value);
/// Fixed 4-decimal text.
std::string format_fixed4(double value);

}  // namespace prm
