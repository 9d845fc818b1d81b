#include "prm/io.hpp"

#include <charconv>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "prm/errors.hpp"

namespace prm::io {

namespace {

using json = nlohmann::json;

/// Splits the next data line into fields. Returns false at end of input.
bool next_record(std::istream& in, std::vector<std::string>& fields,
                 std::size_t& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    fields.clear();
    std::string tok;
    while (ss >> tok) fields.push_back(tok);
    if (fields.empty() || fields.front().front() == '#') continue;
    return true;
  }
  return false;
}

long long to_integer(const std::string& s, const char* what, std::size_t line) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(std::string("non-integer ") + what + " '" + s + "'", line);
  }
  return v;
}

double to_real(const std::string& s, const char* what, std::size_t line) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(std::string("non-numeric ") + what + " '" + s + "'", line);
  }
  return v;
}

Level to_level(const std::string& s, const RelevanceScale& scale,
               std::size_t line, bool clamp_negative) {
  const long long raw = to_integer(s, "level", line);
  if (raw < 0 && clamp_negative) return 0;
  if (raw < 0 || raw > scale.top()) {
    throw ValidationError("line " + std::to_string(line) + ": level " + s +
                          (raw < 0 ? " < 0"
                                   : " > T=" + std::to_string(scale.top())));
  }
  return static_cast<Level>(raw);
}

}  // namespace

RelevanceScale parse_scale(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scale descriptor: ") + e.what(), 1);
  }
  if (!doc.is_object() || !doc.contains("levels")) {
    throw ValidationError("scale descriptor needs a 'levels' entry");
  }
  std::map<long long, std::string> by_index;
  const auto& levels = doc.at("levels");
  try {
    if (levels.is_array()) {
      long long next = 0;
      for (const auto& item : levels) {
        if (item.is_string()) {
          by_index.emplace(next++, item.get<std::string>());
          continue;
        }
        const auto index = item.at("index").get<long long>();
        if (index != next) {
          throw ValidationError("scale indices must be 0..T contiguous and "
                                "increasing; got " + std::to_string(index) +
                                " at position " + std::to_string(next));
        }
        by_index.emplace(index, item.at("label").get<std::string>());
        ++next;
      }
    } else if (levels.is_object()) {
      for (const auto& [k, v] : levels.items()) {
        by_index.emplace(to_integer(k, "scale index", 1), v.get<std::string>());
      }
    } else {
      throw ValidationError("scale 'levels' must be an array or an object");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scale descriptor: ") + e.what());
  }
  std::vector<std::string> labels;
  long long expected = 0;
  for (const auto& [index, label] : by_index) {
    if (index != expected++) {
      throw ValidationError("scale indices must be 0..T contiguous");
    }
    labels.push_back(label);
  }
  RelevanceScale scale(std::move(labels));
  if (doc.contains("T") && doc.at("T").get<long long>() != scale.top()) {
    throw ValidationError("scale declares T=" + doc.at("T").dump() + " but has " +
                          std::to_string(scale.size()) + " levels");
  }
  return scale;
}

namespace {

Judgment qrels_record(const std::vector<std::string>& f,
                      const RelevanceScale& scale, const std::string& group,
                      std::size_t line) {
  if (f.size() < 4) {
    throw ParseError("expected 'topic iteration doc level', got " +
                         std::to_string(f.size()) + " field(s)",
                     line);
  }
  Judgment j;
  j.topic_id = f[0];
  j.doc_id = f[2];
  j.assessor_group = group;
  j.level = to_level(f[3], scale, line, /*clamp_negative=*/true);
  for (std::size_t i = 4; i < f.size(); ++i) {
    const auto eq = f[i].find('=');
    if (eq == std::string::npos || eq + 1 == f[i].size()) {
      throw ParseError("unexpected field '" + f[i] + "'", line);
    }
    const auto key = f[i].substr(0, eq);
    const auto value = f[i].substr(eq + 1);
    if (key == "intent") {
      j.intent_id = value;
    } else if (key == "resource") {
      j.resource_id = value;
    } else {
      throw ParseError("unknown attribute '" + key + "'", line);
    }
  }
  return j;
}

}  // namespace

std::vector<Judgment> read_qrels_records(std::istream& in,
                                         const RelevanceScale& scale,
                                         const std::string& group) {
  std::vector<Judgment> out;
  std::vector<std::string> f;
  std::size_t line = 0;
  while (next_record(in, f, line)) {
    out.push_back(qrels_record(f, scale, group, line));
  }
  return out;
}

JudgmentSet parse_qrels(std::istream& in, const RelevanceScale& scale,
                        const std::string& group) {
  std::set<ItemKey> seen;
  std::vector<Judgment> records;
  std::vector<std::string> f;
  std::size_t line = 0;
  while (next_record(in, f, line)) {
    auto j = qrels_record(f, scale, group, line);
    if (!seen.insert(ItemKey{j.topic_id, j.doc_id, j.intent_id}).second) {
      throw ValidationError("line " + std::to_string(line) +
                            ": duplicate judgment for topic " + j.topic_id +
                            " doc " + j.doc_id);
    }
    records.push_back(std::move(j));
  }
  return JudgmentSet(scale, std::move(records));
}

std::vector<JudgmentPair> parse_pairs(std::istream& in,
                                      const RelevanceScale& scale) {
  std::vector<JudgmentPair> out;
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<std::string> f;
  std::size_t line = 0;
  while (next_record(in, f, line)) {
    if (f.size() != 4) {
      throw ParseError("expected 'topic doc level_u1 level_u2', got " +
                           std::to_string(f.size()) + " field(s)",
                       line);
    }
    if (!seen.emplace(f[0], f[1]).second) {
      throw ValidationError("line " + std::to_string(line) +
                            ": duplicate pair for topic " + f[0] + " doc " + f[1]);
    }
    out.push_back(JudgmentPair{f[0], f[1], std::nullopt,
                               to_level(f[2], scale, line, true),
                               to_level(f[3], scale, line, true)});
  }
  return out;
}

RunRanking parse_run(std::istream& in, const RunParseOptions& options) {
  RunRanking run;
  std::map<std::string, std::map<int, RunEntry>> by_rank;
  std::set<std::pair<std::string, std::string>> docs;
  std::vector<std::string> f;
  std::size_t line = 0;
  bool first = true;
  while (next_record(in, f, line)) {
    if (f.size() != 6) {
      throw ParseError("expected 'topic Q0 doc rank score system', got " +
                           std::to_string(f.size()) + " field(s)",
                       line);
    }
    if (first) {
      run.system_id = f[5];
      first = false;
    } else if (f[5] != run.system_id) {
      throw ValidationError("line " + std::to_string(line) +
                            ": inconsistent system id '" + f[5] + "' (expected '" +
                            run.system_id + "')");
    }
    const long long rank = to_integer(f[3], "rank", line);
    if (rank < 1 || rank > std::numeric_limits<int>::max()) {
      throw ValidationError("line " + std::to_string(line) + ": rank " + f[3] +
                            " < 1");
    }
    const double score = to_real(f[4], "score", line);
    if (!docs.emplace(f[0], f[2]).second && !options.allow_duplicate_docs) {
      throw ValidationError("line " + std::to_string(line) +
                            ": duplicate document " + f[2] + " for topic " + f[0]);
    }
    auto [it, inserted] = by_rank[f[0]].emplace(
        static_cast<int>(rank), RunEntry{f[2], static_cast<int>(rank), score});
    if (!inserted) {
      throw ValidationError("line " + std::to_string(line) + ": duplicate rank " +
                            f[3] + " for topic " + f[0]);
    }
  }
  for (auto& [topic, entries] : by_rank) {
    auto& list = run.topics[topic];
    int expected = 1;
    bool score_order_warned = false;
    for (auto& [rank, entry] : entries) {
      if (rank != expected) {
        throw ValidationError("non-contiguous ranks for topic " + topic +
                              ": missing rank " + std::to_string(expected));
      }
      ++expected;
      if (!list.empty() && entry.score > list.back().score &&
          !score_order_warned) {
        run.warnings.push_back("topic " + topic +
                               ": scores increase with rank; rank order kept");
        score_order_warned = true;
      }
      list.push_back(std::move(entry));
    }
  }
  return run;
}

TopicStrata parse_strata(std::istream& in) {
  TopicStrata out;
  std::vector<std::string> f;
  std::size_t line = 0;
  while (next_record(in, f, line)) {
    if (f.size() != 2) {
      throw ParseError("expected 'topic stratum'", line);
    }
    if (!out.emplace(f[0], f[1]).second) {
      throw ValidationError("line " + std::to_string(line) +
                            ": topic " + f[0] + " listed twice");
    }
  }
  return out;
}

IntentProbabilities parse_intents(std::istream& in) {
  IntentProbabilities out;
  std::vector<std::string> f;
  std::size_t line = 0;
  while (next_record(in, f, line)) {
    if (f.size() != 3) {
      throw ParseError("expected 'topic intent probability'", line);
    }
    const double p = to_real(f[2], "probability", line);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("line " + std::to_string(line) +
                            ": probability outside [0,1]");
    }
    if (!out[f[0]].emplace(f[1], p).second) {
      throw ValidationError("line " + std::to_string(line) + ": intent " + f[1] +
                            " listed twice for topic " + f[0]);
    }
  }
  return out;
}

std::vector<std::pair<std::string, double>> parse_ranking(std::istream& in) {
  std::vector<std::pair<std::string, double>> out;
  std::set<std::string> seen;
  std::vector<std::string> f;
  std::size_t line = 0;
  while (next_record(in, f, line)) {
    if (f.size() != 2) throw ParseError("expected 'system score'", line);
    if (!seen.insert(f[0]).second) {
      throw ValidationError("line " + std::to_string(line) + ": system " + f[0] +
                            " listed twice");
    }
    out.emplace_back(f[0], to_real(f[1], "score", line));
  }
  return out;
}

void write_qrels(std::ostream& out, const JudgmentSet& set) {
  for (const auto& j : set.judgments()) {
    out << j.topic_id << " 0 " << j.doc_id << ' ' << j.level;
    if (j.intent_id) out << " intent=" << *j.intent_id;
    if (j.resource_id) out << " resource=" << *j.resource_id;
    out << '\n';
  }
}

void write_pairs(std::ostream& out, const std::vector<JudgmentPair>& pairs) {
  for (const auto& p : pairs) {
    out << p.topic_id << ' ' << p.doc_id << ' ' << p.level_u1 << ' '
        << p.level_u2 << '\n';
  }
}

void write_run(std::ostream& out, const RunRanking& run) {
  std::ostringstream buf;
  buf.precision(17);
  for (const auto& [topic, entries] : run.topics) {
    for (const auto& e : entries) {
      buf << topic << " Q0 " << e.doc_id << ' ' << e.rank << ' ' << e.score
          << ' ' << run.system_id << '\n';
    }
  }
  out << buf.str();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

RelevanceScale load_scale(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_scale(in);
}

JudgmentSet load_qrels(const std::filesystem::path& path,
                       const RelevanceScale& scale, const std::string& group) {
  auto in = open_input(path);
  return parse_qrels(in, scale, group);
}

RunRanking load_run(const std::filesystem::path& path,
                    const RunParseOptions& options) {
  auto in = open_input(path);
  return parse_run(in, options);
}

}  // namespace prm::io
