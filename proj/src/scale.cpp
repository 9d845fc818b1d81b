#include "prm/scale.hpp"

#include <set>

#include "prm/errors.hpp"

namespace prm {

RelevanceScale::RelevanceScale(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (labels_.size() < 2) {
    throw ValidationError("relevance scale needs at least two levels (T >= 1)");
  }
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) throw ValidationError("relevance scale has an empty label");
    if (!seen.insert(l).second) {
      throw ValidationError("relevance scale label '" + l + "' is not unique");
    }
  }
}

RelevanceScale RelevanceScale::numeric(Level top) {
  if (top < 1) throw ValidationError("relevance scale needs T >= 1");
  std::vector<std::string> labels;
  for (Level i = 0; i <= top; ++i) labels.push_back(std::to_string(i));
  return RelevanceScale(std::move(labels));
}

const std::string& RelevanceScale::label(Level level) const {
  check(level);
  return labels_[static_cast<std::size_t>(level)];
}

void RelevanceScale::check(Level level) const {
  if (level < 0) {
    throw ValidationError("level " + std::to_string(level) + " < 0");
  }
  if (level > top()) {
    throw ValidationError("level " + std::to_string(level) +
                          " > T=" + std::to_string(top()));
  }
}

}  // namespace prm
