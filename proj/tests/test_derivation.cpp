#include "doctest.h"

#include "derivforge/derivation.hpp"
#include "derivforge/sexpr.hpp"
#include "oracles.hpp"
#include "worked_fixtures.hpp"

using namespace derivforge;

TEST_CASE("history weights: calibration, singleton, bias off") {
  auto w = equation_history_weights(3, 1.08);
  CHECK(w.back() / w.front() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(equation_history_weights(1, 7.5) == std::vector<double>{8.5});
  auto flat = equation_history_weights(4, 0.0);
  for (double x : flat) CHECK(x == 1.0);
}

TEST_CASE("empirical history bias: newest/oldest ratio = 2.0 +- 0.1") {
  Rng rng(55);
  auto w = equation_history_weights(3, 1.08);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 10000; ++i) ++counts[rng.weighted(w)];
  double ratio = double(counts[2]) / double(counts[0]);
  CHECK(ratio > 1.9);
  CHECK(ratio < 2.1);
}

TEST_CASE("annotation rendering") {
  CHECK(render_annotation(Annotation{"premise"}) == "['premise']");
  CHECK(render_annotation(Annotation{"differentiate", 1, std::nullopt,
                                     Expr::symbol("Z")}) == "['differentiate', 1, Z]");
  CHECK(render_annotation(Annotation{"substitute_LHS_for_RHS", 3, 2}) ==
        "['substitute_LHS_for_RHS', 3, 2]");
}

TEST_CASE("forced steps reproduce the worked derivation") {
  GenHyperParams hp;
  std::vector<DerivationStep> chain = {{Annotation{"premise"}, fixtures::eq1()}};

  auto s2 = try_step(chain, Annotation{"differentiate", 1, std::nullopt,
                                       Expr::symbol("Z")}, hp);
  REQUIRE(s2.has_value());
  CHECK(s2->equation == fixtures::eq2());
  chain.push_back(*s2);

  auto s3 = try_step(chain, Annotation{"minus", 1, std::nullopt,
                                       Expr::derivative(fixtures::fn_S(), fixtures::sym_Z())},
                     hp);
  REQUIRE(s3.has_value());
  CHECK(s3->equation == fixtures::eq3());
  chain.push_back(*s3);

  auto s4 = try_step(chain, Annotation{"substitute_LHS_for_RHS", 3, 2}, hp);
  REQUIRE(s4.has_value());
  CHECK(s4->equation == fixtures::eq4());
}

TEST_CASE("duplicate results are invalid") {
  GenHyperParams hp;
  std::vector<DerivationStep> chain = {{Annotation{"premise"}, fixtures::eq1()}};
  // add 0 reproduces equation 1 exactly
  CHECK_FALSE(try_step(chain, Annotation{"add", 1, std::nullopt, Expr::integer(0)}, hp)
                  .has_value());
}

TEST_CASE("renaming premise defines a fresh function over free symbols") {
  std::vector<DerivationStep> chain = {{Annotation{"premise"}, fixtures::eq1()}};
  Rng rng(66);
  for (int i = 0; i < 50; ++i) {
    DerivationStep s = renaming_premise(chain, default_vocabulary(), rng);
    CHECK(s.annotation.op == "renaming_premise");
    REQUIRE(s.equation.lhs.kind() == NodeKind::FunctionApp);
    auto fs = free_symbols(s.equation.rhs);
    CHECK_FALSE(fs.empty());
    std::vector<SymbolId> args;
    for (const auto& a : s.equation.lhs.operands()) args.push_back(a.symbol_id());
    CHECK(args == std::vector<SymbolId>(fs.begin(), fs.end()));
    // fresh name: not used anywhere in the chain
    CHECK_FALSE(detail::chain_symbol_names(chain).count(s.equation.lhs.func_name().name));
  }
}

TEST_CASE("extract_derivation on the worked chain") {
  auto chain = fixtures::chain();
  auto d = extract_derivation(chain, 4);
  REQUIRE(d.has_value());
  REQUIRE(d->steps.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(d->steps[i].equation == chain[i].equation);
  CHECK(d->steps[3].annotation.eq1 == 3);
  CHECK(d->steps[3].annotation.eq2 == 2);
  CHECK_FALSE(extract_derivation(chain, 6).has_value());
}

TEST_CASE("extraction drops dangling steps (closure oracle)") {
  auto chain = fixtures::chain();
  // insert a never-referenced step between (1) and (2)
  Equation spur{Expr::symbol("q"), Expr::cos(Expr::symbol("w"))};
  std::vector<DerivationStep> noisy = {chain[0],
                                       {Annotation{"renaming_premise"}, spur},
                                       chain[1], chain[2], chain[3]};
  // re-point the original indices past the insertion
  noisy[2].annotation.eq1 = 1;
  noisy[3].annotation.eq1 = 1;
  noisy[4].annotation.eq1 = 4;
  noisy[4].annotation.eq2 = 3;
  auto closure = oracles::closure_oracle(noisy, 4);
  CHECK(closure == std::set<int>{0, 2, 3, 4});
  auto d = extract_derivation(noisy, 4);
  REQUIRE(d.has_value());
  CHECK(d->steps.size() == 4);
  CHECK(d->steps[0].equation == chain[0].equation);
  CHECK(d->steps[3].equation == chain[3].equation);
}

TEST_CASE("generate_derivation: determinism and shape") {
  GenHyperParams hp;
  hp.L_f = 3;
  Derivation a = generate_derivation(hp, 42);
  Derivation b = generate_derivation(hp, 42);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].equation == b.steps[i].equation);
    CHECK(a.steps[i].annotation == b.steps[i].annotation);
  }

  GenHyperParams hp2;
  hp2.L_f = 2;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Derivation d = generate_derivation(hp2, s);
    REQUIRE(d.steps.size() == 2);
    CHECK(d.steps[0].annotation.op == "premise");
    CHECK(d.steps[1].annotation.eq1.has_value());
  }
}

TEST_CASE("derivation invariants over 1000 generated derivations") {
  GenHyperParams hp;
  hp.L_f = 3;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    Derivation d = generate_derivation(hp, s);
    REQUIRE(d.steps.size() == 3);
    CHECK(d.steps[0].annotation.op == "premise");
    // acyclicity and closure self-containedness via the oracle
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
      const Annotation& a = d.steps[i].annotation;
      if (a.eq1) CHECK(*a.eq1 <= static_cast<int>(i));
      if (a.eq2) CHECK(*a.eq2 <= static_cast<int>(i));
    }
    auto closure = oracles::closure_oracle(d.steps, static_cast<int>(d.steps.size()) - 1);
    CHECK(closure.size() == d.steps.size());
    // distinct equations, size caps, non-trivial identities
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
      CHECK(d.steps[i].equation.lhs.node_count() <= hp.max_nodes);
      CHECK(d.steps[i].equation.rhs.node_count() <= hp.max_nodes);
      CHECK_FALSE(d.steps[i].equation.lhs == d.steps[i].equation.rhs);
      for (std::size_t j = i + 1; j < d.steps.size(); ++j)
        CHECK_FALSE(d.steps[i].equation == d.steps[j].equation);
    }
    CHECK(d.steps.back().annotation.eq1.has_value());
  }
}
