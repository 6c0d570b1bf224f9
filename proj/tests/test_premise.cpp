#include "doctest.h"

#include "derivforge/premise.hpp"
#include "derivforge/calculus.hpp"
#include "derivforge/sexpr.hpp"

using namespace derivforge;

TEST_CASE("vocabulary: 48 English letters excluding {i, e, d, O}") {
  const auto& v = default_vocabulary();
  CHECK(v.size() == 48);
  std::set<std::string> names;
  for (const auto& s : v) names.insert(s.name);
  for (const char* banned : {"i", "e", "d", "O"}) CHECK(names.count(banned) == 0);
  CHECK(names.count("Z") == 1);
  CHECK(names.count("o") == 1);
}

TEST_CASE("max_complexity = 1 forces a single pool application") {
  PremiseConfig cfg;
  cfg.max_complexity = 1;
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    Equation eq = generate_premise(cfg, rng);
    // one initial application over fresh symbols, no wrappers
    switch (eq.rhs.kind()) {
      case NodeKind::Cos:
      case NodeKind::Sin:
      case NodeKind::Exp:
      case NodeKind::Log:
        CHECK(eq.rhs.operands()[0].kind() == NodeKind::Symbol);
        break;
      case NodeKind::Sum:
      case NodeKind::Product:
      case NodeKind::Power:
        for (const auto& k : eq.rhs.operands()) {
          bool simple = k.kind() == NodeKind::Symbol || k.kind() == NodeKind::Integer ||
                        (k.kind() == NodeKind::Product && k.node_count() <= 3) ||
                        (k.kind() == NodeKind::Power && k.node_count() <= 3);
          CHECK(simple);
        }
        break;
      default:
        FAIL(("unexpected premise RHS shape: " + to_sexpr(eq.rhs)).c_str());
    }
  }
}

TEST_CASE("premise invariants over 1000 premises") {
  PremiseConfig cfg;
  Rng rng(22);
  for (int i = 0; i < 1000; ++i) {
    Equation eq = generate_premise(cfg, rng);
    REQUIRE(eq.lhs.kind() == NodeKind::FunctionApp);
    // LHS args are exactly the RHS free symbols, in canonical order
    auto fs = free_symbols(eq.rhs);
    std::vector<SymbolId> args;
    for (const auto& a : eq.lhs.operands()) args.push_back(a.symbol_id());
    CHECK(args == std::vector<SymbolId>(fs.begin(), fs.end()));
    // the function symbol never occurs in the RHS
    CHECK_FALSE(fs.count(eq.lhs.func_name()));
    // the RHS never contains FunctionApp nodes
    CHECK_FALSE(contains_kind(eq.rhs, NodeKind::FunctionApp));
  }
}

TEST_CASE("premise generation is deterministic") {
  PremiseConfig cfg;
  Rng a(33), b(33);
  for (int i = 0; i < 20; ++i) {
    Equation ea = generate_premise(cfg, a);
    Equation eb = generate_premise(cfg, b);
    CHECK(ea == eb);
  }
}

TEST_CASE("vocabulary exhaustion") {
  PremiseConfig cfg;
  cfg.vocabulary = {make_symbol("x")};  // RHS consumes the only symbol
  Rng rng(44);
  CHECK_THROWS_AS(generate_premise(cfg, rng), VocabularyExhausted);
}
