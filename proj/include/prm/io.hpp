#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "prm/judgments.hpp"
#include "prm/run.hpp"
#include "prm/scale.hpp"

namespace prm::io {

// Text formats (whitespace separated, one record per line, lines starting
// with '#' and blank lines ignored):
//
//   qrels      topic iteration doc level [intent=ID] [resource=ID]
//   pairs      topic doc level_u1 level_u2
//   run        topic Q0 doc rank score system
//   strata     topic stratum
//   intents    topic intent probability
//   ranking    system score
//
// The scale descriptor is JSON:
//   {"T": 3, "levels": [{"index": 0, "label": "Non"}, ...]}

RelevanceScale parse_scale(std::istream& in);

/// Qrels records in file order, without the uniqueness check. Negative
/// levels clamp to 0; levels above T are a ValidationError.
std::vector<Judgment> read_qrels_records(std::istream& in,
                                         const RelevanceScale& scale,
                                         const std::string& group);

/// Qrels as a JudgmentSet; a repeated (topic, doc, intent) is an error.
JudgmentSet parse_qrels(std::istream& in, const RelevanceScale& scale,
                        const std::string& group);

std::vector<JudgmentPair> parse_pairs(std::istream& in,
                                      const RelevanceScale& scale);

struct RunParseOptions {
  /// Keep repeated (topic, doc) entries instead of failing; used for merged
  /// result lists where only the first occurrence earns gain.
  bool allow_duplicate_docs = false;
};

RunRanking parse_run(std::istream& in, const RunParseOptions& options = {});

TopicStrata parse_strata(std::istream& in);
IntentProbabilities parse_intents(std::istream& in);
std::vector<std::pair<std::string, double>> parse_ranking(std::istream& in);

void write_qrels(std::ostream& out, const JudgmentSet& set);
void write_pairs(std::ostream& out, const std::vector<JudgmentPair>& pairs);
void write_run(std::ostream& out, const RunRanking& run);

/// Opens a file for reading; throws IoError on failure.
std::ifstream open_input(const std::filesystem::path& path);

/// Convenience wrappers that open the file and forward to the parsers.
RelevanceScale load_scale(const std::filesystem::path& path);
JudgmentSet load_qrels(const std::filesystem::path& path,
                       const RelevanceScale& scale, const std::string& group);
RunRanking load_run(const std::filesystem::path& path,
                    const RunParseOptions& options = {});

}  // namespace prm::io
