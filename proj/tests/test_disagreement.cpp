#include <cmath>
#include <sstream>

#include "doctest.h"
#include "prm/errors.hpp"
#include "support.hpp"

using namespace prm;
using doctest::Approx;

namespace {

const RelevanceScale kScale = fixtures::scale3();
const UserModel kTop = UserModel::at(kScale, 2);

void check_cells(const DisagreementTable& t, std::vector<std::pair<int, int>> top_down) {
  for (std::size_t k = 0; k < top_down.size(); ++k) {
    const auto& c = t.cell(static_cast<Level>(top_down.size() - 1 - k));
    CHECK(c.numerator == top_down[k].first);
    CHECK(c.denominator == top_down[k].second);
    REQUIRE(c.p);
    CHECK(*c.p == static_cast<double>(top_down[k].first) / top_down[k].second);
  }
}

}  // namespace

TEST_CASE("user model bounds") {
  CHECK_THROWS_AS(UserModel::at(kScale, 0), ValidationError);
  CHECK_THROWS_AS(UserModel::at(kScale, 3), ValidationError);
  CHECK(UserModel::at(kScale, 1).relevant(2));
  CHECK_FALSE(UserModel::at(kScale, 2).relevant(1));
}

TEST_CASE("one-sided estimator on the worked example") {
  const auto pairs = fixtures::table1_pairs();
  check_cells(estimate_one_sided(pairs, kTop, kScale, Condition::u1), {{2, 4}, {3, 10}, {1, 6}});
  check_cells(estimate_one_sided(pairs, kTop, kScale, Condition::u2), {{2, 6}, {2, 7}, {0, 7}});
  check_cells(estimate_one_sided(swap_roles(pairs), kTop, kScale, Condition::u1),
              {{2, 6}, {2, 7}, {0, 7}});
}

TEST_CASE("symmetric estimator on the worked example") {
  const auto pairs = fixtures::table1_pairs();
  const auto t = estimate_symmetric(pairs, kTop, kScale);
  check_cells(t, {{4, 10}, {5, 17}, {1, 13}});
  check_cells(estimate_symmetric(swap_roles(pairs), kTop, kScale), {{4, 10}, {5, 17}, {1, 13}});
  CHECK(*t.cell(2).sigma == Approx(0.1549).epsilon(1e-3));
}

TEST_CASE("perfect agreement on a single level") {
  const std::vector<JudgmentPair> pairs(5, JudgmentPair{"1", "a", std::nullopt, 2, 2});
  const auto t = estimate_one_sided(pairs, UserModel::at(kScale, 1), kScale);
  CHECK(*t.p(2) == 1.0);
  CHECK_FALSE(t.p(1).has_value());
  CHECK_FALSE(t.p(0).has_value());
  CHECK_FALSE(t.cell(0).sigma.has_value());
  CHECK_THROWS_WITH_AS(t.require_p(1), doctest::Contains("level 1"), EstimationError);
}

TEST_CASE("estimation errors") {
  CHECK_THROWS_WITH_AS(estimate_symmetric({}, kTop, kScale),
                       doctest::Contains("no double judgments"), EstimationError);
  const std::vector<JudgmentPair> zeros(4, JudgmentPair{"1", "a", std::nullopt, 0, 0});
  CHECK_THROWS_WITH_AS(estimate_one_sided(zeros, kTop, kScale),
                       doctest::Contains("no usable double judgments"), EstimationError);
  CHECK_THROWS_AS(
      estimate_symmetric(fixtures::table1_pairs(), kTop, kScale, Collection::one_sided_subset),
      ValidationError);
}

TEST_CASE("cell sigma") {
  CHECK(cell_sigma(4, 10) == Approx(std::sqrt(0.4 * 0.6 / 10)));
  CHECK(cell_sigma(4, 10) == Approx(0.1549).epsilon(1e-3));
  CHECK(cell_sigma(0, 7) == 0.0);
  CHECK(cell_sigma(4, 4) == 0.0);
  CHECK_THROWS_AS(cell_sigma(0, 0), EstimationError);
}

TEST_CASE("sigma conservation and decomposition") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto pairs = fixtures::random_pairs(3, 10 + seed * 3, seed);
    const auto sym = estimate_symmetric(pairs, kTop, kScale);
    const auto a = estimate_one_sided(pairs, kTop, kScale, Condition::u1);
    const auto b = estimate_one_sided(pairs, kTop, kScale, Condition::u2);
    for (Level i = 0; i <= 2; ++i) {
      const auto& c = sym.cell(i);
      CHECK(c.numerator == a.cell(i).numerator + b.cell(i).numerator);
      CHECK(c.denominator == a.cell(i).denominator + b.cell(i).denominator);
      if (c.p) {
        CHECK(*c.sigma == cell_sigma(c.numerator, c.denominator));
        if (a.p(i) && b.p(i)) {
          CHECK(*c.p >= std::min(*a.p(i), *b.p(i)) - 1e-15);
          CHECK(*c.p <= std::max(*a.p(i), *b.p(i)) + 1e-15);
        }
      }
    }
  }
}

TEST_CASE("overrides") {
  const auto t = estimate_symmetric(fixtures::table1_pairs(), kTop, kScale).with_override(0, 0.0);
  CHECK(*t.p(0) == 0.0);
  CHECK(t.cell(0).overridden);
  CHECK_FALSE(t.cell(1).overridden);
  CHECK_THROWS_AS(t.with_override(1, 1.5), ValidationError);

  // An override makes an otherwise undefined cell usable.
  const std::vector<JudgmentPair> pairs(3, JudgmentPair{"1", "a", std::nullopt, 2, 1});
  const auto sparse = estimate_one_sided(pairs, kTop, kScale).with_override(0, 0.0);
  CHECK_FALSE(sparse.fully_defined());
  CHECK(sparse.require_p(0) == 0.0);
}

TEST_CASE("degenerate table") {
  const auto t = degenerate_table(fixtures::scale4(), UserModel::at(fixtures::scale4(), 2));
  CHECK(*t.p(0) == 0.0);
  CHECK(*t.p(1) == 0.0);
  CHECK(*t.p(2) == 1.0);
  CHECK(*t.p(3) == 1.0);
}

TEST_CASE("monotonicity warning") {
  // Level 1 is clearly more often judged top by the other group than level 2.
  std::vector<JudgmentPair> pairs;
  for (int k = 0; k < 200; ++k) {
    pairs.push_back({"1", "a" + std::to_string(k), std::nullopt, 1, 2});
    pairs.push_back({"1", "b" + std::to_string(k), std::nullopt, 2, 0});
  }
  const auto t = estimate_one_sided(pairs, kTop, kScale);
  CHECK_FALSE(t.warnings().empty());
  CHECK(estimate_symmetric(fixtures::table1_pairs(), kTop, kScale).warnings().empty());
}

TEST_CASE("threshold monotonicity on the worked example") {
  const auto pairs = fixtures::table1_pairs();
  const auto t2 = estimate_symmetric(pairs, UserModel::at(kScale, 2), kScale);
  const auto t1 = estimate_symmetric(pairs, UserModel::at(kScale, 1), kScale);
  for (Level i = 0; i <= 2; ++i) CHECK(*t1.p(i) >= *t2.p(i));
}

TEST_CASE("stratified estimation") {
  const auto pairs = fixtures::sample_pairs(fixtures::confusion_model(), 2000, 3);

  SUBCASE("single stratum equals the global estimate") {
    TopicStrata strata;
    for (const auto& p : pairs) strata[p.topic_id] = "all";
    const auto s = stratified_estimate(pairs, kScale, kTop, strata);
    REQUIRE(s.tables.size() == 1);
    const auto global = estimate_symmetric(pairs, kTop, kScale);
    for (Level i = 0; i <= 2; ++i) CHECK(*s.tables.at("all").p(i) == *global.p(i));
    CHECK(s.tables.at("all").stratum() == "all");
  }
  SUBCASE("partition additivity") {
    TopicStrata strata;
    for (const auto& p : pairs) {
      strata[p.topic_id] = std::stoi(p.topic_id.substr(1)) % 2 ? "odd" : "even";
    }
    const auto s = stratified_estimate(pairs, kScale, kTop, strata);
    const auto global = estimate_symmetric(pairs, kTop, kScale);
    for (Level i = 0; i <= 2; ++i) {
      CHECK(s.tables.at("odd").cell(i).numerator + s.tables.at("even").cell(i).numerator ==
            global.cell(i).numerator);
      CHECK(s.tables.at("odd").cell(i).denominator + s.tables.at("even").cell(i).denominator ==
            global.cell(i).denominator);
    }
  }
  SUBCASE("empty stratum omitted, missing stratum rejected") {
    TopicStrata strata;
    for (const auto& p : pairs) strata[p.topic_id] = "inf";
    strata["unused-topic"] = "nav";
    const auto s = stratified_estimate(pairs, kScale, kTop, strata);
    CHECK(s.tables.size() == 1);
    CHECK(s.warnings.size() == 1);
    strata.erase("t0");
    CHECK_THROWS_AS(stratified_estimate(pairs, kScale, kTop, strata), ValidationError);
  }
  SUBCASE("per-stratum estimates recover their models") {
    const fixtures::Joint nav = {{0.50, 0.05, 0.00}, {0.05, 0.10, 0.05}, {0.00, 0.05, 0.20}};
    const fixtures::Joint inf = {{0.30, 0.10, 0.05}, {0.10, 0.15, 0.08}, {0.05, 0.08, 0.09}};
    auto a = fixtures::sample_pairs(nav, 40000, 1);
    auto b = fixtures::sample_pairs(inf, 40000, 2);
    for (auto& p : a) p.topic_id = "nav-" + p.topic_id;
    for (auto& p : b) p.topic_id = "inf-" + p.topic_id;
    TopicStrata strata;
    for (const auto& p : a) strata[p.topic_id] = "nav";
    for (const auto& p : b) strata[p.topic_id] = "inf";
    auto all = a;
    all.insert(all.end(), b.begin(), b.end());
    const auto s = stratified_estimate(all, kScale, kTop, strata);
    const auto pooled = estimate_symmetric(all, kTop, kScale);
    for (Level i = 0; i <= 2; ++i) {
      const auto& tn = s.tables.at("nav");
      const auto& ti = s.tables.at("inf");
      CHECK(std::abs(*tn.p(i) - fixtures::conditional(nav, i, 2)) < 3 * *tn.cell(i).sigma + 1e-12);
      CHECK(std::abs(*ti.p(i) - fixtures::conditional(inf, i, 2)) < 3 * *ti.cell(i).sigma + 1e-12);
      CHECK(*pooled.p(i) >= std::min(*tn.p(i), *ti.p(i)));
      CHECK(*pooled.p(i) <= std::max(*tn.p(i), *ti.p(i)));
    }
  }
}

TEST_CASE("at least m of n users") {
  const auto t = estimate_symmetric(fixtures::table1_pairs(), kTop, kScale);
  CHECK(at_least_m_of_n(t, 2, 1, 1) == Approx(0.4));
  CHECK(binomial_upper_tail(0.5, 1, 2) == Approx(0.75));
  CHECK(at_least_m_of_n(t, 2, 2, 3) == Approx(0.352));
  CHECK(binomial_upper_tail(0.3, 4, 4) == Approx(0.3 * 0.3 * 0.3 * 0.3));
  CHECK_THROWS_AS(binomial_upper_tail(0.3, 0, 4), ValidationError);
  CHECK_THROWS_AS(at_least_m_of_n(t, 2, 3, 2), ValidationError);

  const std::vector<JudgmentPair> pairs(3, JudgmentPair{"1", "a", std::nullopt, 2, 1});
  const auto sparse = estimate_one_sided(pairs, kTop, kScale);
  CHECK_THROWS_AS(at_least_m_of_n(sparse, 0, 1, 1), EstimationError);
}

TEST_CASE("table serialization") {
  const auto t = estimate_one_sided(fixtures::table1_pairs(), kTop, kScale, Condition::u2)
                     .with_override(0, 0.0)
                     .with_stratum("nav");
  const auto doc = to_json(t);
  const auto back = table_from_json(doc, kScale);
  CHECK(to_json(back) == doc);
  CHECK(back.spec().condition == Condition::u2);
  CHECK(back.cell(0).overridden);

  const std::string text = format_table(t);
  CHECK(text.find("HRel") < text.find("Non"));
  CHECK(text.find("0.3333") != std::string::npos);

  auto bad = doc;
  bad["levels"][1]["label"] = "Other";
  CHECK_THROWS_AS(table_from_json(bad, kScale), ValidationError);
}
