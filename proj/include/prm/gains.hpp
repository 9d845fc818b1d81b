#pragma once

#include <span>
#include <string>
#include <vector>

#include "prm/disagreement.hpp"
#include "prm/scale.hpp"

namespace prm {

enum class GainKind { binary, linear, exponential, prm, udm, custom };

std::string to_string(GainKind kind);
GainKind parse_gain_kind(const std::string& s);

/// Resolved level -> gain mapping g(0..T). All gains are finite and >= 0.
class GainScheme {
 public:
  /// g(i) = 1 if i >= threshold else 0.
  static GainScheme binary(const RelevanceScale& scale, Level threshold);
  /// g(i) = i.
  static GainScheme linear(const RelevanceScale& scale);
  /// g(i) = 2^i - 1.
  static GainScheme exponential(const RelevanceScale& scale);
  /// g(i) = p_{R|i}. Every cell must be defined or overridden.
  static GainScheme prm(const DisagreementTable& table);
  /// g(T) = 1, g(0) = 0, g(i) = p_{T|i} in between. The table must be
  /// estimated at threshold T.
  static GainScheme udm(const DisagreementTable& table);
  static GainScheme custom(const RelevanceScale& scale, std::vector<double> gains);

  GainKind kind() const { return kind_; }
  std::string name() const { return to_string(kind_); }
  std::span<const double> gains() const { return gains_; }
  double gain(Level level) const;
  Level top() const { return static_cast<Level>(gains_.size()) - 1; }

 private:
  GainScheme(GainKind kind, std::vector<double> gains);

  GainKind kind_;
  std::vector<double> gains_;
};

/// Rank discount c(r), r >= 1.
class Discount {
 public:
  enum class Kind { log, zipf };

  /// c(r) = 1 / log_base(r + 1); base must exceed 1.
  static Discount log(double base = 2.0);
  /// c(r) = 1 / r.
  static Discount zipf();

  double operator()(int rank) const;
  Kind kind() const { return kind_; }
  double base() const { return base_; }
  std::string name() const;

 private:
  Discount(Kind kind, double base) : kind_(kind), base_(base) {}

  Kind kind_;
  double base_;
};

}  // namespace prm
