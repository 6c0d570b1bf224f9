#include "doctest.h"

#include "derivforge/perturb.hpp"
#include "oracles.hpp"
#include "worked_fixtures.hpp"

using namespace derivforge;

namespace {

TaskExamplePair sample_structured(std::uint64_t seed) {
  GenHyperParams hp;
  hp.L_f = 3;
  Derivation d = generate_derivation(hp, seed);
  Rng rng(derive_seed(seed, 1));
  TaskExamplePair x = build_structured_pair(d, rng);
  x.id = "fixture-" + std::to_string(seed);
  return x;
}

TaskExamplePair sample_calculus(std::uint64_t seed, CalcMode mode) {
  Rng rng(seed);
  for (int i = 0; i < 1000; ++i) {
    try {
      Expr rhs = generate_premise_rhs(default_vocabulary(), 3, rng);
      if (free_symbols(rhs).size() < 2) continue;
      TaskExamplePair x = build_calculus_pair(rhs, mode, CalcDifficulty::Standard, rng);
      x.id = "calc-" + std::to_string(seed);
      return x;
    } catch (const std::exception&) {
      continue;
    }
  }
  throw std::runtime_error("no calculus fixture");
}

bool no_english_vars(const TaskExamplePair& x) {
  return detail::example_english_variables(x).empty();
}

int candidate_nodes(const Candidate& c) {
  if (std::holds_alternative<Expr>(c)) return std::get<Expr>(c).node_count();
  const Equation& eq = std::get<Equation>(c);
  return eq.lhs.node_count() + eq.rhs.node_count();
}

}  // namespace

TEST_CASE("greek alphabet: ten symbols, disjoint from the English vocabulary") {
  const auto& g = greek_alphabet();
  CHECK(g.size() == 10);
  for (const auto& s : g) {
    CHECK(s.alphabet == Alphabet::Greek);
    for (const auto& e : default_vocabulary()) CHECK(s.name != e.name);
  }
}

TEST_CASE("VR: tree shapes and labels invariant, no English variables remain") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    TaskExamplePair x = sample_structured(seed);
    Rng rng(seed);
    TaskExamplePair y = rename_variables(x, rng);
    CHECK(y.perturbation == "vr");
    CHECK(y.source_id == x.id);
    CHECK(y.id == x.id + "-vr");
    CHECK(no_english_vars(y));
    REQUIRE(y.context.size() == x.context.size());
    for (std::size_t i = 0; i < x.context.size(); ++i) {
      CHECK(y.context[i].equation.lhs.node_count() == x.context[i].equation.lhs.node_count());
      CHECK(y.context[i].equation.rhs.node_count() == x.context[i].equation.rhs.node_count());
      CHECK(y.context[i].annotation.op == x.context[i].annotation.op);
    }
    CHECK(candidate_nodes(y.positive) == candidate_nodes(x.positive));
    CHECK(candidate_nodes(y.negative) == candidate_nodes(x.negative));
  }
}

TEST_CASE("VR: injectivity of the sampled map") {
  TaskExamplePair x = sample_structured(3);
  Rng rng(4);
  TaskExamplePair y = rename_variables(x, rng);
  // distinct variables stay distinct: variable counts match
  CHECK(detail::example_english_variables(x).size() ==
        [&] {
          std::set<SymbolId> greek;
          auto add = [&](const Expr& e, auto&& self) -> void {
            if (e.kind() == NodeKind::Symbol && e.symbol_id().alphabet == Alphabet::Greek)
              greek.insert(e.symbol_id());
            if ((e.kind() == NodeKind::Derivative || e.kind() == NodeKind::Integral) &&
                e.bound_var().alphabet == Alphabet::Greek)
              greek.insert(e.bound_var());
            for (const auto& k : e.operands()) self(k, self);
          };
          for (const auto& s : y.context) {
            add(s.equation.lhs, add);
            add(s.equation.rhs, add);
          }
          const Equation& pos = std::get<Equation>(y.positive);
          const Equation& neg = std::get<Equation>(y.negative);
          add(pos.lhs, add);
          add(pos.rhs, add);
          add(neg.lhs, add);
          add(neg.rhs, add);
          return greek.size();
        }());
}

TEST_CASE("VR: more than ten variables is rejected") {
  TaskExamplePair x;
  x.task = TaskKind::Structured;
  std::vector<Expr> terms;
  for (int i = 0; i < 11; ++i) terms.push_back(Expr::symbol(default_vocabulary()[i]));
  Equation eq{Expr::symbol("Q"), Expr::sum(terms)};
  x.context = {{Annotation{"premise"}, eq}};
  x.final_annotation = Annotation{"add", 1, std::nullopt, Expr::integer(1)};
  x.negative_annotation = Annotation{"add", 1, std::nullopt, Expr::integer(2)};
  x.positive = Candidate(eq);
  x.negative = Candidate(eq);
  Rng rng(5);
  CHECK_THROWS_AS(rename_variables(x, rng), TooManyVariables);
}

TEST_CASE("EE: involution, side swap, substitution-name mirroring") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    TaskExamplePair x = sample_structured(seed);
    TaskExamplePair y = exchange_expressions(x);
    CHECK(y.perturbation == "ee");
    for (std::size_t i = 0; i < x.context.size(); ++i) {
      CHECK(y.context[i].equation.lhs == x.context[i].equation.rhs);
      CHECK(y.context[i].equation.rhs == x.context[i].equation.lhs);
    }
    TaskExamplePair z = exchange_expressions(y);
    CHECK(z.context.size() == x.context.size());
    for (std::size_t i = 0; i < x.context.size(); ++i) {
      CHECK(z.context[i].equation == x.context[i].equation);
      CHECK(z.context[i].annotation.op == x.context[i].annotation.op);
    }
    CHECK(candidates_equal(z.positive, x.positive));
    CHECK(candidates_equal(z.negative, x.negative));
    CHECK(*z.final_annotation == *x.final_annotation);
  }
  // substitution names flip
  TaskExamplePair x;
  x.task = TaskKind::Structured;
  x.context = fixtures::chain();
  x.context.pop_back();
  x.final_annotation = Annotation{"substitute_LHS_for_RHS", 3, 2};
  x.negative_annotation = Annotation{"substitute_RHS_for_LHS", 3, 2};
  x.positive = Candidate(fixtures::eq4());
  x.negative = Candidate(fixtures::eq1());
  TaskExamplePair y = exchange_expressions(x);
  CHECK(y.final_annotation->op == "substitute_RHS_for_LHS");
  CHECK(y.negative_annotation->op == "substitute_LHS_for_RHS");
  // premise swaps: S(Z,o) = int ... becomes int ... = S(Z,o)
  CHECK((y.context[0].equation == Equation{fixtures::eq1().rhs, fixtures::eq1().lhs}));
}

TEST_CASE("AR: labels swap and the new positive re-derives from its annotation") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    TaskExamplePair x = sample_structured(seed);
    TaskExamplePair y = replace_annotation(x);
    CHECK(y.perturbation == "ar");
    CHECK(candidates_equal(y.positive, x.negative));
    CHECK(candidates_equal(y.negative, x.positive));
    CHECK(*y.final_annotation == *x.negative_annotation);
    std::vector<Equation> eqs;
    for (const auto& s : y.context) eqs.push_back(s.equation);
    auto re = apply_annotation(eqs, *y.final_annotation);
    REQUIRE(re.has_value());
    CHECK(candidates_equal(Candidate(*re), y.positive));
  }
  TaskExamplePair bare = sample_structured(0);
  bare.negative_annotation.reset();
  CHECK_THROWS_AS(replace_annotation(bare), MissingProvenance);
}

TEST_CASE("EC: the worked example conversion") {
  TaskExamplePair x;
  x.task = TaskKind::Calculus;
  x.mode = CalcMode::Diff;
  x.id = "calc-0";
  x.premise = Candidate(Expr::power(Expr::symbol("x"), Expr::integer(2)));
  x.variable = make_symbol("x");
  x.positive = Candidate(Expr::integer(2) * Expr::symbol("x"));
  x.negative = Candidate(Expr::integer(2));
  Rng rng(6);
  TaskExamplePair y = convert_to_equations(x, rng);
  const Equation& prem = std::get<Equation>(*y.premise);
  CHECK(prem.rhs == Expr::power(Expr::symbol("x"), Expr::integer(2)));
  REQUIRE(prem.lhs.kind() == NodeKind::Symbol);
  SymbolId fresh = prem.lhs.symbol_id();
  CHECK(fresh.name != "x");
  const Equation& pos = std::get<Equation>(y.positive);
  CHECK(pos.lhs == Expr::derivative(Expr::symbol(fresh), make_symbol("x")));
  CHECK(pos.rhs == Expr::integer(2) * Expr::symbol("x"));
  auto [s, label] = linearize(y, Which::Positive);
  CHECK(s == prem.lhs.symbol_id().name + " = x^{2} [SEP] x [SEP] "
             "\\frac{\\partial}{\\partial x} " + fresh.name + " = 2 x");
  CHECK(label);
}

TEST_CASE("EC: integration mode puts the operator on the premise") {
  TaskExamplePair x = sample_calculus(7, CalcMode::Int);
  Rng rng(8);
  TaskExamplePair y = convert_to_equations(x, rng);
  const Equation& prem = std::get<Equation>(*y.premise);
  CHECK(prem.lhs.kind() == NodeKind::Derivative);
  const Equation& pos = std::get<Equation>(y.positive);
  CHECK(pos.lhs.kind() == NodeKind::Symbol);
  // semantic check: differentiating the candidate RHS recovers the premise RHS
  Expr back = differentiate(pos.rhs, *y.variable);
  Expr target = canonicalize(std::get<Expr>(*x.premise));
  if (!(back == target)) {
    Rng prng(9);
    auto env = oracles::random_env(prng, free_symbols(target));
    CHECK(oracles::close_rel(eval_numeric(back, env), eval_numeric(target, env), 1e-8));
  }
}

TEST_CASE("EC: positives re-verify by differentiation (diff mode)") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    TaskExamplePair x = sample_calculus(seed, CalcMode::Diff);
    Rng rng(seed + 1);
    TaskExamplePair y = convert_to_equations(x, rng);
    const Equation& prem = std::get<Equation>(*y.premise);
    const Equation& pos = std::get<Equation>(y.positive);
    CHECK(differentiate(prem.rhs, *y.variable) == pos.rhs);
  }
}

TEST_CASE("EC: exhausted vocabulary is rejected") {
  TaskExamplePair x;
  x.task = TaskKind::Calculus;
  x.mode = CalcMode::Diff;
  std::vector<Expr> all;
  for (const auto& s : default_vocabulary()) all.push_back(Expr::symbol(s));
  Expr premise = Expr::sum(all);
  x.premise = Candidate(premise);
  x.variable = make_symbol("x");
  x.positive = Candidate(Expr::integer(1));
  x.negative = Candidate(Expr::integer(0));
  Rng rng(10);
  CHECK_THROWS_AS(convert_to_equations(x, rng), VocabularyExhausted);
}
