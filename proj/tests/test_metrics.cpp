#include <cmath>
#include <random>

#include "doctest.h"
#include "prm/errors.hpp"
#include "prm/report.hpp"
#include "support.hpp"

using namespace prm;
using doctest::Approx;

namespace {

const RelevanceScale kScale = fixtures::scale3();

DisagreementTable table1_symmetric() {
  return estimate_symmetric(fixtures::table1_pairs(), UserModel::at(kScale, 2), kScale);
}

RankedLevels levels(std::initializer_list<int> l) {
  RankedLevels out;
  for (int v : l) out.push_back(v);
  return out;
}

RunRanking run_of(const std::string& topic, std::vector<std::string> docs,
                  const std::string& system = "s") {
  RunRanking r;
  r.system_id = system;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    r.topics[topic].push_back({docs[i], static_cast<int>(i) + 1, 100.0 - static_cast<double>(i)});
  }
  return r;
}

JudgmentSet judged(const std::string& topic, std::vector<std::pair<std::string, int>> docs) {
  std::vector<Judgment> js;
  for (const auto& [d, l] : docs) js.push_back({topic, d, "U1", l, std::nullopt, std::nullopt});
  return JudgmentSet(kScale, js);
}

}  // namespace

TEST_CASE("gain schemes") {
  const auto t = table1_symmetric();
  CHECK(GainScheme::binary(kScale, 2).gain(1) == 0.0);
  CHECK(GainScheme::binary(kScale, 1).gain(1) == 1.0);
  CHECK(GainScheme::linear(kScale).gain(2) == 2.0);
  CHECK(GainScheme::exponential(kScale).gain(2) == 3.0);
  CHECK(GainScheme::prm(t).gain(1) == *t.p(1));

  const auto udm = GainScheme::udm(t);
  CHECK(udm.gain(2) == 1.0);
  CHECK(udm.gain(0) == 0.0);
  CHECK(udm.gain(1) == *t.p(1));
  const auto low = estimate_symmetric(fixtures::table1_pairs(), UserModel::at(kScale, 1), kScale);
  CHECK_THROWS_AS(GainScheme::udm(low), ValidationError);

  CHECK_THROWS_AS(GainScheme::custom(kScale, {0, 1}), ValidationError);
  CHECK_THROWS_AS(GainScheme::custom(kScale, {0, -1, 2}), ValidationError);
  CHECK_THROWS_AS(GainScheme::custom(kScale, {0, NAN, 2}), ValidationError);

  const std::vector<JudgmentPair> sparse(3, JudgmentPair{"1", "a", std::nullopt, 2, 1});
  const auto undefined = estimate_one_sided(sparse, UserModel::at(kScale, 2), kScale);
  CHECK_THROWS_AS(GainScheme::prm(undefined), EstimationError);
  CHECK_NOTHROW(GainScheme::prm(undefined.with_override(0, 0).with_override(1, 0.2)));
}

TEST_CASE("discounts") {
  CHECK(Discount::log()(1) == 1.0);
  CHECK(Discount::log()(3) == Approx(0.5));
  CHECK(Discount::zipf()(4) == 0.25);
  CHECK(Discount::log(10.0)(9) == Approx(1.0));
  CHECK_THROWS_AS(Discount::log(1.0), ValidationError);
  for (int r = 1; r < 200; ++r) {
    CHECK(Discount::log()(r + 1) <= Discount::log()(r));
    CHECK(Discount::zipf()(r + 1) < Discount::zipf()(r));
    if (r >= 2) CHECK(Discount::zipf()(r) <= Discount::log()(r));
  }
}

TEST_CASE("relevance counts") {
  const std::vector<std::int64_t> hist = {6, 10, 4};
  CHECK(count_binary(hist, 2) == 4);
  CHECK(count_binary(hist, 1) == 14);
  CHECK(count_binary(std::vector<std::int64_t>{0, 0, 0}, 1) == 0);

  const auto t = table1_symmetric();
  CHECK(count_prm(hist, t) == Approx(6.0 / 13 + 10.0 * 5 / 17 + 4 * 0.4));
  CHECK(count_prm(hist, degenerate_table(kScale, UserModel::at(kScale, 2))) == 4);
  CHECK(count_prm(std::vector<std::int64_t>{0, 0, 0}, t) == 0);

  const std::vector<JudgmentPair> sparse(3, JudgmentPair{"1", "a", std::nullopt, 2, 1});
  const auto undefined = estimate_one_sided(sparse, UserModel::at(kScale, 2), kScale);
  CHECK_THROWS_WITH_AS(count_prm(hist, undefined), doctest::Contains("level 0"),
                       EstimationError);
  CHECK(count_prm(std::vector<std::int64_t>{0, 0, 5}, undefined) == 0.0);
}

TEST_CASE("expected precision") {
  const auto t = table1_symmetric();
  RankedLevels top(10, 2);
  CHECK(expected_precision_at(top, t, 10) == Approx(0.4));
  // Shorter lists still divide by the cutoff; missing ranks hold no result.
  CHECK(expected_precision_at(levels({2, 2}), t, 4) == Approx(0.8 / 4));
  CHECK(expected_precision_at(RankedLevels{2, std::nullopt}, t, 2) == Approx(0.2));
  CHECK_THROWS_AS(expected_precision_at(top, t, 0), ValidationError);

  // Monte Carlo over random users.
  std::mt19937_64 gen(17);
  std::uniform_int_distribution<int> lvl(0, 2);
  RankedLevels ranked;
  for (int i = 0; i < 20; ++i) ranked.push_back(lvl(gen));
  constexpr int kUsers = 100000;
  double sum = 0, sum_sq = 0;
  for (int u = 0; u < kUsers; ++u) {
    int rel = 0;
    for (int r = 0; r < 20; ++r) {
      if (std::bernoulli_distribution(*t.p(*ranked[static_cast<std::size_t>(r)]))(gen)) ++rel;
    }
    const double prec = rel / 20.0;
    sum += prec;
    sum_sq += prec * prec;
  }
  const double mean = sum / kUsers;
  const double se = std::sqrt((sum_sq / kUsers - mean * mean) / kUsers);
  CHECK(std::abs(expected_precision_at(ranked, t, 20) - mean) < 3 * se);
}

TEST_CASE("dcg") {
  const auto lin = GainScheme::linear(kScale);
  CHECK(dcg_at_k(levels({2, 0, 1}), lin, Discount::zipf(), 3) == Approx(2.0 + 1.0 / 3));
  CHECK(dcg_at_k(levels({2, 0, 1}), lin, Discount::log(), 3) == Approx(2.5));
  CHECK(dcg_at_k(levels({2}), GainScheme::binary(kScale, 2), Discount::zipf(), 5) == 1.0);
  CHECK(dcg_at_k(levels({2, 1}), lin, Discount::log(), 1) == 2.0);
  // Duplicates (no level) earn nothing but consume their rank.
  CHECK(dcg_at_k(RankedLevels{2, std::nullopt, 1}, lin, Discount::log(), 3) == Approx(2.5));
  CHECK_THROWS_AS(dcg_at_k(levels({1}), lin, Discount::log(), 0), ValidationError);

  std::mt19937_64 gen(1);
  std::uniform_int_distribution<int> lvl(0, 2);
  RankedLevels r;
  for (int i = 0; i < 30; ++i) r.push_back(lvl(gen));
  double prev = 0;
  for (int k = 1; k <= 35; ++k) {
    const double d = dcg_at_k(r, lin, Discount::log(), k);
    CHECK(d >= prev);
    prev = d;
  }
}

TEST_CASE("ideal dcg") {
  const auto prm_gain = GainScheme::prm(table1_symmetric());
  const std::vector<Level> pool = {2, 2, 1, 0};
  CHECK(ideal_dcg_at_k(pool, prm_gain, Discount::log(), 2) ==
        Approx(0.4 + 0.4 / std::log2(3.0)));
  CHECK(ideal_dcg_at_k(pool, prm_gain, Discount::log(), 2) == Approx(0.6524).epsilon(1e-4));
  CHECK(ideal_dcg_at_k(std::vector<Level>{0, 0}, GainScheme::binary(kScale, 1), Discount::log(),
                       5) == 0.0);
  // Rearrangement bound against any ordering of the same pool.
  std::vector<Level> perm = {0, 1, 2, 2};
  do {
    RankedLevels r(perm.begin(), perm.end());
    CHECK(dcg_at_k(r, prm_gain, Discount::log(), 3) <=
          ideal_dcg_at_k(pool, prm_gain, Discount::log(), 3) + 1e-15);
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("ndcg reports") {
  const auto q = judged("1", {{"a", 2}, {"b", 1}, {"c", 0}, {"d", 1}});
  const auto lin = GainScheme::linear(kScale);

  SUBCASE("perfect ordering") {
    const auto r = ndcg_at_k(run_of("1", {"a", "b", "d", "c"}), q, lin, Discount::log(), 3);
    CHECK(r.per_topic.at("1") == Approx(1.0));
    CHECK(r.mean == Approx(1.0));
    CHECK(r.n_topics == 1);
    CHECK(r.stderr_of_mean == 0.0);
    CHECK(r.metric == "ndcg@3");
  }
  SUBCASE("pool is the judged set, not the run") {
    const auto r = ndcg_at_k(run_of("1", {"b"}), q, lin, Discount::log(), 3);
    const double ideal = 2 + 1 / std::log2(3.0) + 0.5;
    CHECK(r.mean == Approx(1 / ideal));
    EvalOptions local;
    local.ideal_pool = IdealPool::run_local;
    CHECK(ndcg_at_k(run_of("1", {"b"}), q, lin, Discount::log(), 3, local).mean == Approx(1.0));
  }
  SUBCASE("unjudged documents and topics") {
    const auto run = run_of("1", {"x", "a"});
    const auto r = ndcg_at_k(run, q, lin, Discount::log(), 3);
    CHECK(r.mean == Approx((2 / std::log2(3.0)) / (2 + 1 / std::log2(3.0) + 0.5)));
    EvalOptions strict;
    strict.strict = true;
    CHECK_THROWS_AS(ndcg_at_k(run, q, lin, Discount::log(), 3, strict), ValidationError);

    auto two = run_of("1", {"a"});
    two.topics["2"].push_back({"a", 1, 1.0});
    CHECK(ndcg_at_k(two, q, lin, Discount::log(), 3).n_topics == 1);
    CHECK_THROWS_AS(ndcg_at_k(two, q, lin, Discount::log(), 3, strict), ValidationError);
  }
  SUBCASE("zero-ideal topics are excluded") {
    std::vector<Judgment> js = q.judgments();
    js.push_back({"2", "z", "U1", 0, std::nullopt, std::nullopt});
    auto run = run_of("1", {"a"});
    run.topics["2"].push_back({"z", 1, 1.0});
    const auto r = ndcg_at_k(run, JudgmentSet(kScale, js), lin, Discount::log(), 3);
    CHECK(r.n_topics == 1);
    CHECK(r.excluded_topics == std::vector<std::string>{"2"});
    CHECK_FALSE(r.warnings.empty());

    const auto only_zero = judged("2", {{"z", 0}});
    CHECK_THROWS_AS(ndcg_at_k(run_of("2", {"z"}), only_zero, lin, Discount::log(), 3),
                    EstimationError);
  }
  SUBCASE("duplicates earn gain once") {
    auto run = run_of("1", {"a", "a", "b"});
    const auto r = ndcg_at_k(run, q, lin, Discount::log(), 3);
    const double dcg = 2 + 1 / std::log2(4.0);
    CHECK(r.mean == Approx(dcg / (2 + 1 / std::log2(3.0) + 0.5)));
  }
  SUBCASE("range and scale invariance") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      const auto col = fixtures::random_collection(kScale, 3, 12, seed);
      const auto a = ndcg_at_k(col.run, col.judgments, lin, Discount::log(), 10);
      const auto b = ndcg_at_k(col.run, col.judgments, GainScheme::custom(kScale, {0, 7, 14}),
                               Discount::log(), 10);
      for (const auto& [t, v] : a.per_topic) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 + 1e-12);
        CHECK(b.per_topic.at(t) == Approx(v).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("intents are separate information needs") {
  std::vector<Judgment> js = {{"1", "a", "U1", 2, "i1", std::nullopt},
                              {"1", "b", "U1", 1, "i2", std::nullopt},
                              {"1", "b", "U1", 0, "i1", std::nullopt}};
  const JudgmentSet set(kScale, js);
  const Qrels q(set);
  CHECK(q.needs_of("1") == std::vector<std::string>{"1:i1", "1:i2"});
  const auto r = ndcg_at_k(run_of("1", {"b", "a"}), set, GainScheme::linear(kScale),
                           Discount::log(), 2);
  CHECK(r.per_topic.at("1:i2") == Approx(1.0));
  CHECK(r.per_topic.at("1:i1") == Approx((2 / std::log2(3.0)) / 2));
}

TEST_CASE("metric report aggregation") {
  MetricReport r;
  r.metric = "m";
  r.per_topic = {{"a", 1.0}, {"b", 2.0}, {"c", 4.0}};
  summarize(r);
  CHECK(r.mean == Approx(7.0 / 3));
  const double sd = std::sqrt(((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) +
                               (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 2);
  CHECK(r.stderr_of_mean == Approx(sd / std::sqrt(3.0)));
  CHECK(to_csv(r) ==
        "topic,value\na,1\nb,2\nc,4\nmean," + format_full(r.mean) + "\nstderr," +
            format_full(r.stderr_of_mean) + "\n");
  CHECK(to_trec(r).find("m\tall\t2.3333") != std::string::npos);
  CHECK(to_json(r)["per_topic"]["c"] == 4.0);
  MetricReport empty;
  CHECK_THROWS_AS(summarize(empty), EstimationError);
}

TEST_CASE("counts in the top resources of a resource ranking") {
  std::vector<Judgment> js;
  // Resource e1: two HRel and one Rel; e2: one Rel; e3: one HRel.
  js.push_back({"1", "e1-a", "U1", 2, std::nullopt, "e1"});
  js.push_back({"1", "e1-b", "U1", 2, std::nullopt, "e1"});
  js.push_back({"1", "e1-c", "U1", 1, std::nullopt, "e1"});
  js.push_back({"1", "e2-a", "U1", 1, std::nullopt, "e2"});
  js.push_back({"1", "e3-a", "U1", 2, std::nullopt, "e3"});
  js.push_back({"2", "e1-z", "U1", 0, std::nullopt, "e1"});
  js.push_back({"2", "e3-z", "U1", 2, std::nullopt, "e3"});
  const JudgmentSet set(kScale, js);
  RunRanking rs;
  rs.system_id = "rs";
  rs.topics["1"] = {{"e2", 1, 3}, {"e1", 2, 2}, {"e3", 3, 1}};
  rs.topics["2"] = {{"e1", 1, 2}, {"e3", 2, 1}};
  const auto t = table1_symmetric();

  const auto bin = count_in_top_resources(rs, set, 2, std::nullopt, 2);
  CHECK(bin.per_topic.at("1") == 2);
  CHECK(bin.per_topic.at("2") == 1);
  const auto prm_counts = count_in_top_resources(rs, set, 2, t, 2);
  CHECK(prm_counts.per_topic.at("1") == Approx(2 * 0.4 + 2 * 5.0 / 17));
  CHECK(prm_counts.per_topic.at("2") == Approx(1.0 / 13 + 0.4));
  CHECK(prm_counts.mean == Approx((2 * 0.4 + 2 * 5.0 / 17 + 1.0 / 13 + 0.4) / 2));
}
