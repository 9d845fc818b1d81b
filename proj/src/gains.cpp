#include "prm/gains.hpp"

#include <cmath>
#include <sstream>

#include "prm/errors.hpp"

namespace prm {

std::string to_string(GainKind kind) {
  switch (kind) {
    case GainKind::binary: return "binary";
    case GainKind::linear: return "linear";
    case GainKind::exponential: return "exponential";
    case GainKind::prm: return "prm";
    case GainKind::udm: return "udm";
    case GainKind::custom: return "custom";
  }
  return "unknown";
}

GainKind parse_gain_kind(const std::string& s) {
  for (auto k : {GainKind::binary, GainKind::linear, GainKind::exponential,
                 GainKind::prm, GainKind::udm, GainKind::custom}) {
    if (to_string(k) == s) return k;
  }
  if (s == "exp") return GainKind::exponential;
  throw ValidationError("unknown gain scheme '" + s + "'");
}

GainScheme::GainScheme(GainKind kind, std::vector<double> gains)
    : kind_(kind), gains_(std::move(gains)) {
  for (std::size_t i = 0; i < gains_.size(); ++i) {
    if (!std::isfinite(gains_[i]) || gains_[i] < 0.0) {
      throw ValidationError("gain for level " + std::to_string(i) +
                            " must be finite and non-negative");
    }
  }
}

GainScheme GainScheme::binary(const RelevanceScale& scale, Level threshold) {
  const auto model = UserModel::at(scale, threshold);
  std::vector<double> g;
  for (Level i = 0; i <= scale.top(); ++i) g.push_back(model.relevant(i) ? 1.0 : 0.0);
  return GainScheme(GainKind::binary, std::move(g));
}

GainScheme GainScheme::linear(const RelevanceScale& scale) {
  std::vector<double> g;
  for (Level i = 0; i <= scale.top(); ++i) g.push_back(static_cast<double>(i));
  return GainScheme(GainKind::linear, std::move(g));
}

GainScheme GainScheme::exponential(const RelevanceScale& scale) {
  std::vector<double> g;
  for (Level i = 0; i <= scale.top(); ++i) g.push_back(std::exp2(i) - 1.0);
  return GainScheme(GainKind::exponential, std::move(g));
}

GainScheme GainScheme::prm(const DisagreementTable& table) {
  std::vector<double> g;
  for (Level i = 0; i <= table.scale().top(); ++i) g.push_back(table.require_p(i));
  return GainScheme(GainKind::prm, std::move(g));
}

GainScheme GainScheme::udm(const DisagreementTable& table) {
  const Level top = table.scale().top();
  if (table.threshold() != top) {
    throw ValidationError("UDM gains need a table estimated at threshold T=" +
                          std::to_string(top) + ", got threshold " +
                          std::to_string(table.threshold()));
  }
  std::vector<double> g(static_cast<std::size_t>(top) + 1, 0.0);
  g[static_cast<std::size_t>(top)] = 1.0;
  for (Level i = 1; i < top; ++i) g[static_cast<std::size_t>(i)] = table.require_p(i);
  return GainScheme(GainKind::udm, std::move(g));
}

GainScheme GainScheme::custom(const RelevanceScale& scale, std::vector<double> gains) {
  if (gains.size() != scale.size()) {
    throw ValidationError("custom gains need " + std::to_string(scale.size()) +
                          " values, got " + std::to_string(gains.size()));
  }
  return GainScheme(GainKind::custom, std::move(gains));
}

double GainScheme::gain(Level level) const {
  if (level < 0 || level > top()) {
    throw ValidationError("level " + std::to_string(level) + " outside gain scheme");
  }
  return gains_[static_cast<std::size_t>(level)];
}

Discount Discount::log(double base) {
  if (!(base > 1.0) || !std::isfinite(base)) {
    throw ValidationError("log discount base must be > 1");
  }
  return Discount(Kind::log, base);
}

Discount Discount::zipf() { return Discount(Kind::zipf, 0.0); }

double Discount::operator()(int rank) const {
  if (rank < 1) throw ValidationError("rank must be >= 1");
  const double r = static_cast<double>(rank);
  if (kind_ == Kind::zipf) return 1.0 / r;
  if (base_ == 2.0) return 1.0 / std::log2(r + 1.0);
  return std::log(base_) / std::log(r + 1.0);
}

std::string Discount::name() const {
  if (kind_ == Kind::zipf) return "zipf";
  std::ostringstream s;
  s << "log" << base_;
  return s.str();
}

}  // namespace prm
