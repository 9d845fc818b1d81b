#include "prm/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "prm/errors.hpp"

namespace prm {

void summarize(MetricReport& report) {
  const auto n = report.per_topic.size();
  if (n == 0) {
    throw EstimationError(report.metric + ": no topics to average");
  }
  double sum = 0.0;
  for (const auto& [topic, v] : report.per_topic) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const auto& [topic, v] : report.per_topic) ss += (v - mean) * (v - mean);
  report.mean = mean;
  report.n_topics = n;
  report.stderr_of_mean =
      n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n))
            : 0.0;
}

std::string format_full(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_fixed4(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  return buf;
}

std::string to_csv(const MetricReport& report) {
  std::ostringstream out;
  out << "topic,value\n";
  for (const auto& [topic, v] : report.per_topic) {
    out << topic << ',' << format_full(v) << '\n';
  }
  out << "mean," << format_full(report.mean) << '\n';
  out << "stderr," << format_full(report.stderr_of_mean) << '\n';
  return out.str();
}

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json doc;
  doc["metric"] = report.metric;
  doc["system"] = report.system_id;
  doc["params"] = report.params;
  doc["per_topic"] = report.per_topic;
  doc["mean"] = report.mean;
  doc["stderr"] = report.stderr_of_mean;
  doc["n_topics"] = report.n_topics;
  doc["excluded_topics"] = report.excluded_topics;
  doc["warnings"] = report.warnings;
  return doc;
}

std::string to_trec(const MetricReport& report) {
  std::ostringstream out;
  for (const auto& [topic, v] : report.per_topic) {
    out << report.metric << '\t' << topic << '\t' << format_fixed4(v) << '\n';
  }
  out << report.metric << "\tall\t" << format_fixed4(report.mean) << '\n';
  out << report.metric << "_stderr\tall\t" << format_fixed4(report.stderr_of_mean)
      << '\n';
  return out.str();
}

}  // namespace prm
