#pragma once

#include <string>
#include <vector>

namespace prm {

/// Index of an assessment level on a RelevanceScale (0 = non-relevant).
using Level = int;

/// Ordered assessment levels 0..T with unique, non-empty labels.
class RelevanceScale {
 public:
  /// Labels are given in level order; labels[i] names level i.
  explicit RelevanceScale(std::vector<std::string> labels);

  /// Scale 0..top labelled by the level digits.
  static RelevanceScale numeric(Level top);

  Level top() const { return static_cast<Level>(labels_.size()) - 1; }
  std::size_t size() const { return labels_.size(); }
  bool contains(Level level) const { return level >= 0 && level <= top(); }
  const std::string& label(Level level) const;
  const std::vector<std::string>& labels() const { return labels_; }

  /// Throws ValidationError when level is outside 0..T.
  void check(Level level) const;

  bool operator==(const RelevanceScale& other) const = default;

 private:
  std::vector<std::string> labels_;
};

}  // namespace prm
