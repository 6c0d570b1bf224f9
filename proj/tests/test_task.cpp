#include "doctest.h"

#include "derivforge/task.hpp"
#include "oracles.hpp"
#include "worked_fixtures.hpp"

using namespace derivforge;

TEST_CASE("Damerau-Levenshtein examples") {
  CHECK(damerau_levenshtein("abc", "abc") == 0);
  CHECK(damerau_levenshtein("ab", "ba") == 1);
  CHECK(damerau_levenshtein("-1", "1") == 1);
  CHECK(oracles::edit_distance_oracle("ab", "ba") == 1);
  CHECK(oracles::edit_distance_oracle("-1", "1") == 1);
}

TEST_CASE("Damerau-Levenshtein agrees with the edit-sequence oracle (spot sample)") {
  // the exhaustive length <= 6 sweep runs in the acceptance suite
  auto strings = oracles::all_strings("abc", 4);
  for (std::size_t i = 0; i < strings.size(); i += 7)
    for (std::size_t j = 0; j < strings.size(); j += 11)
      CHECK(damerau_levenshtein(strings[i], strings[j]) ==
            oracles::edit_distance_oracle(strings[i], strings[j]));
}

TEST_CASE("structured pairs: separation, provenance, inequality") {
  GenHyperParams hp;
  hp.L_f = 3;
  Rng rng(77);
  for (std::uint64_t s = 0; s < 50; ++s) {
    Derivation d = generate_derivation(hp, s);
    TaskExamplePair x = build_structured_pair(d, rng);
    CHECK(x.context.size() == 2);
    CHECK(*x.final_annotation == d.steps.back().annotation);
    CHECK(candidates_equal(x.positive, Candidate(d.steps.back().equation)));
    CHECK_FALSE(candidates_equal(x.positive, x.negative));
    REQUIRE(x.negative_annotation.has_value());
    CHECK_FALSE(*x.negative_annotation == *x.final_annotation);
    // the stored annotation re-derives the negative exactly (AR precondition)
    std::vector<Equation> eqs;
    for (const auto& st : x.context) eqs.push_back(st.equation);
    auto re = apply_annotation(eqs, *x.negative_annotation);
    REQUIRE(re.has_value());
    CHECK(candidates_equal(Candidate(*re), x.negative));
  }
}

TEST_CASE("negative generation rejects the truth annotation and positive equation") {
  GenHyperParams hp;
  hp.L_f = 2;
  Rng rng(88);
  for (std::uint64_t s = 0; s < 200; ++s) {
    Derivation d = generate_derivation(hp, s);
    auto [ann, eq] = generate_negative_equation(d, rng);
    CHECK_FALSE(ann == d.steps.back().annotation);
    CHECK_FALSE(eq == d.steps.back().equation);
  }
}

TEST_CASE("calculus pair: the worked -T + sin(U) example") {
  Expr premise = -Expr::symbol("T") + Expr::sin(Expr::symbol("U"));
  SymbolId T = make_symbol("T");
  Expr positive = differentiate(premise, T);
  CHECK(positive == Expr::integer(-1));
  Rng rng(99);
  auto cands = candidate_negatives(premise, T, CalcMode::Diff, rng);
  // contains the other-variable derivative cos(U)
  bool has_cosU = false;
  for (const auto& c : cands) has_cosU |= c == Expr::cos(Expr::symbol("U"));
  CHECK(has_cosU);
  // with the distractor list {1, cos(U)}, "1" wins by edit distance
  Expr neg = rank_negative(positive, {Expr::integer(1), Expr::cos(Expr::symbol("U"))});
  CHECK(neg == Expr::integer(1));
}

TEST_CASE("calculus pair difficulty preconditions") {
  Rng rng(111);
  Expr single = Expr::cos(Expr::symbol("x"));
  CHECK_THROWS_AS(build_calculus_pair(single, CalcMode::Diff, CalcDifficulty::Standard, rng),
                  std::invalid_argument);
  TaskExamplePair easy = build_calculus_pair(single, CalcMode::Diff, CalcDifficulty::Easy, rng);
  CHECK(easy.difficulty == CalcDifficulty::Easy);
  CHECK(easy.variable == make_symbol("x"));
  CHECK(candidates_equal(easy.positive,
                         Candidate(-Expr::sin(Expr::symbol("x")))));
}

TEST_CASE("integration without a rule raises IntegrationUnsupported") {
  Rng rng(112);
  // outside the rule set with respect to either variable
  Expr hopeless = Expr::cos(Expr::sin(Expr::symbol("Z"))) +
                  Expr::cos(Expr::sin(Expr::symbol("o")));
  CHECK_THROWS_AS(build_calculus_pair(hopeless, CalcMode::Int, CalcDifficulty::Standard, rng),
                  IntegrationUnsupported);
}

TEST_CASE("negative has strictly positive distance; ties break by string order") {
  Expr positive = Expr::integer(2) * Expr::symbol("x");
  // distances: "2 y" -> 1, "3 y" -> 2; identical candidate must be skipped
  Expr same = positive;
  Expr close = Expr::integer(2) * Expr::symbol("y");
  Expr far = Expr::integer(3) * Expr::symbol("y");
  CHECK(rank_negative(positive, {far, same, close}) == close);
  // tie: "2 o" and "2 y" both at distance 1 -> lexicographically smaller string
  Expr tie = Expr::integer(2) * Expr::symbol("o");
  CHECK(rank_negative(positive, {close, tie}) == tie);
  CHECK_THROWS_AS(rank_negative(positive, {same}), NoCandidates);
}

TEST_CASE("linearization formats") {
  // direct calculus positive: "x^{2} [SEP] x [SEP] 2 x" with label True
  TaskExamplePair x;
  x.task = TaskKind::Calculus;
  x.mode = CalcMode::Diff;
  x.premise = Candidate(Expr::power(Expr::symbol("x"), Expr::integer(2)));
  x.variable = make_symbol("x");
  x.positive = Candidate(Expr::integer(2) * Expr::symbol("x"));
  x.negative = Candidate(Expr::integer(2));
  auto [pos_str, pos_label] = linearize(x, Which::Positive);
  CHECK(pos_str == "x^{2} [SEP] x [SEP] 2 x");
  CHECK(pos_label == true);
  auto [neg_str, neg_label] = linearize(x, Which::Negative);
  CHECK(neg_str == "x^{2} [SEP] x [SEP] 2");
  CHECK(neg_label == false);

  // structured shape: "[ann, eq], ... [SEP] final annotation [SEP] candidate"
  TaskExamplePair y;
  y.task = TaskKind::Structured;
  y.steps_total = 2;
  y.context = {{Annotation{"premise"}, fixtures::eq1()}};
  y.final_annotation = Annotation{"differentiate", 1, std::nullopt, Expr::symbol("Z")};
  y.positive = Candidate(fixtures::eq2());
  y.negative = Candidate(fixtures::eq1());
  auto [s, label] = linearize(y, Which::Positive);
  CHECK(s == "[['premise'], S{\\left(Z,o \\right)} = \\int \\frac{Z}{o} \\, dZ]"
             " [SEP] ['differentiate', 1, Z]"
             " [SEP] \\frac{\\partial}{\\partial Z} S{\\left(Z,o \\right)} = "
             "\\frac{\\partial}{\\partial Z} \\left(\\int \\frac{Z}{o} \\, dZ \\right)");
  CHECK(label == true);
}

TEST_CASE("10000-sequence scan: no positive equals its negative") {
  GenHyperParams hp;
  hp.L_f = 2;
  Rng rng(113);
  for (std::uint64_t s = 0; s < 250; ++s) {
    Derivation d = generate_derivation(hp, s);
    TaskExamplePair x = build_structured_pair(d, rng);
    CHECK_FALSE(candidates_equal(x.positive, x.negative));
  }
}
