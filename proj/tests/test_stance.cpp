#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "polaris/errors.hpp"
#include "polaris/rng.hpp"
#include "polaris/stance.hpp"

using namespace polaris;
using namespace polaris::testing;

namespace {

Corpus five_submission_corpus() {
  std::vector<Submission> subs;
  for (int i = 0; i < 5; ++i) subs.push_back(make_post("s" + std::to_string(i), "a", 100 + i));
  return build_corpus(std::move(subs));
}

LabelSource source(const std::string& name, int priority,
                   std::vector<std::pair<std::string, Stance>> items,
                   LabelKind kind = LabelKind::Predicted) {
  LabelSource s;
  s.name = name;
  s.kind = kind;
  s.priority = priority;
  for (auto& [id, st] : items) s.assignments[id] = st;
  return s;
}

}  // namespace

TEST_CASE("merge_labels: gold overrides predicted") {
  Corpus c = five_submission_corpus();
  auto gold = source("gold", 0, {{"s0", Stance::Pro}}, LabelKind::Gold);
  auto pred = source("pred", 1, {{"s0", Stance::Neutral}, {"s1", Stance::Anti}});
  merge_labels(c, {gold, pred});
  CHECK(c.submissions[*c.find("s0")].stance == Stance::Pro);
  CHECK(c.submissions[*c.find("s1")].stance == Stance::Anti);
  CHECK(!c.submissions[*c.find("s2")].stance.has_value());
}

TEST_CASE("merge_labels: partial overlap matches the hand-built table") {
  Corpus c = five_submission_corpus();
  auto gold = source("gold", 0, {{"s0", Stance::Pro}, {"s1", Stance::Pro}}, LabelKind::Gold);
  auto pred = source("pred", 1,
                     {{"s1", Stance::Anti}, {"s2", Stance::Anti}, {"s3", Stance::Neutral}});
  const MergeReport report = merge_labels(c, {gold, pred});
  // hand enumeration: s0 pro (gold), s1 pro (gold wins), s2 anti, s3 neutral, s4 none
  CHECK(c.submissions[*c.find("s0")].stance == Stance::Pro);
  CHECK(c.submissions[*c.find("s1")].stance == Stance::Pro);
  CHECK(c.submissions[*c.find("s2")].stance == Stance::Anti);
  CHECK(c.submissions[*c.find("s3")].stance == Stance::Neutral);
  CHECK(!c.submissions[*c.find("s4")].stance.has_value());
  CHECK(report.labelled == 4);
}

TEST_CASE("merge_labels: unresolved ids counted, not fatal") {
  Corpus c = five_submission_corpus();
  auto pred = source("pred", 1, {{"nope", Stance::Pro}, {"s0", Stance::Anti}});
  const MergeReport report = merge_labels(c, {pred});
  CHECK(report.unresolved == 1);
  CHECK(report.labelled == 1);
}

TEST_CASE("merge_labels: overlapping same-priority sources are fatal") {
  Corpus c = five_submission_corpus();
  auto a = source("a", 1, {{"s0", Stance::Pro}});
  auto b = source("b", 1, {{"s0", Stance::Anti}});
  CHECK_THROWS_AS(merge_labels(c, {a, b}), DataError);

  SUBCASE("disjoint same-priority sources are fine") {
    auto d = source("d", 1, {{"s1", Stance::Anti}});
    CHECK_NOTHROW(merge_labels(c, {a, d}));
  }
}

TEST_CASE("eval_classifier: identity is perfect") {
  std::unordered_map<std::string, Stance> gold = {
      {"a", Stance::Pro}, {"b", Stance::Anti}, {"c", Stance::Neutral}, {"d", Stance::Anti}};
  const EvalResult r = eval_classifier(gold, gold);
  CHECK(r.accuracy == doctest::Approx(1.0));
  CHECK(r.macro_f1 == doctest::Approx(1.0));
  CHECK(r.n == 4);
}

TEST_CASE("eval_classifier: diagonal confusion gives per-class F1 = 1") {
  std::array<std::array<std::uint64_t, 3>, 3> confusion = {{{2, 0, 0}, {0, 2, 0}, {0, 0, 2}}};
  const EvalResult r = eval_from_confusion(confusion);
  for (int c = 0; c < kNumStances; ++c) CHECK(r.per_class[c].f1 == doctest::Approx(1.0));
}

TEST_CASE("eval_classifier: metrics match brute-force per-class computation") {
  // confusion [gold][pred] = [[1,1,0],[0,2,0],[1,0,1]]
  std::array<std::array<std::uint64_t, 3>, 3> confusion = {{{1, 1, 0}, {0, 2, 0}, {1, 0, 1}}};
  const EvalResult r = eval_from_confusion(confusion);
  CHECK(r.n == 6);
  CHECK(r.accuracy == doctest::Approx(4.0 / 6.0));
  // class pro: tp=1, predicted=2, actual=2 -> p=0.5 r=0.5 f1=0.5
  CHECK(r.per_class[0].precision == doctest::Approx(0.5));
  CHECK(r.per_class[0].recall == doctest::Approx(0.5));
  CHECK(r.per_class[0].f1 == doctest::Approx(0.5));
  // class anti: tp=2, predicted=3, actual=2 -> p=2/3 r=1 f1=0.8
  CHECK(r.per_class[1].f1 == doctest::Approx(0.8));
  // class neutral: tp=1, predicted=1, actual=2 -> p=1 r=0.5 f1=2/3
  CHECK(r.per_class[2].f1 == doctest::Approx(2.0 / 3.0));
  CHECK(r.macro_f1 == doctest::Approx((0.5 + 0.8 + 2.0 / 3.0) / 3.0));
}

TEST_CASE("eval_classifier: absent class contributes F1 = 0") {
  std::array<std::array<std::uint64_t, 3>, 3> confusion = {{{3, 0, 0}, {0, 3, 0}, {0, 0, 0}}};
  const EvalResult r = eval_from_confusion(confusion);
  CHECK(r.per_class[2].f1 == 0.0);
  CHECK(r.macro_f1 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("eval_classifier: empty intersection is fatal") {
  std::unordered_map<std::string, Stance> gold = {{"a", Stance::Pro}};
  std::unordered_map<std::string, Stance> pred = {{"b", Stance::Pro}};
  CHECK_THROWS_AS(eval_classifier(gold, pred), DataError);
}

TEST_CASE("random_chance_macro_f1") {
  SUBCASE("uniform distribution gives 1/3") {
    CHECK(random_chance_macro_f1({1.0 / 3, 1.0 / 3, 1.0 / 3}) == doctest::Approx(1.0 / 3));
  }
  SUBCASE("published class balance gives 0.263") {
    CHECK(random_chance_macro_f1({0.05, 0.183, 0.767}) == doctest::Approx(0.263).epsilon(0.01));
  }
  SUBCASE("degenerate single-class distribution gives 1/6") {
    CHECK(random_chance_macro_f1({1.0, 0.0, 0.0}) == doctest::Approx(1.0 / 6));
  }
  SUBCASE("negative fraction is fatal") {
    CHECK_THROWS_AS(random_chance_macro_f1({-0.1, 0.5, 0.6}), std::invalid_argument);
  }
  SUBCASE("maximised at the uniform distribution") {
    auto rng = make_rng(13, "stance.simplex");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double at_uniform = random_chance_macro_f1({1.0 / 3, 1.0 / 3, 1.0 / 3});
    for (int i = 0; i < 2000; ++i) {
      double a = u(rng), b = u(rng), c = u(rng);
      const double s = a + b + c;
      if (s == 0.0) continue;
      CHECK(random_chance_macro_f1({a / s, b / s, c / s}) <= at_uniform + 1e-12);
    }
  }
}
