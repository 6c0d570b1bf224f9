#pragma once

// Random premise equations of controllable complexity: an initial pool
// application over fresh symbols, a uniformly sampled number of wrapper
// applications, then a fresh function symbol applied to the RHS free
// symbols as the LHS.

#include <vector>

#include "derivforge/calculus.hpp"
#include "derivforge/expr.hpp"
#include "derivforge/rng.hpp"

namespace derivforge {

struct VocabularyExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 48 English letters: upper/lowercase ASCII excluding {i, e, d, O}.
inline const std::vector<SymbolId>& default_vocabulary() {
  static const std::vector<SymbolId> vocab = [] {
    std::vector<SymbolId> v;
    for (char c = 'a'; c <= 'z'; ++c)
      if (c != 'i' && c != 'e' && c != 'd') v.push_back(make_symbol(std::string(1, c)));
    for (char c = 'A'; c <= 'Z'; ++c)
      if (c != 'O') v.push_back(make_symbol(std::string(1, c)));
    return v;
  }();
  return vocab;
}

struct PremiseConfig {
  int max_complexity = 3;
  std::vector<SymbolId> vocabulary = default_vocabulary();
  std::uint64_t rng_seed = 0;
};

namespace detail {

inline Expr apply_arith(OperatorId op, const Expr& a, const Expr& b) {
  switch (op) {
    case OperatorId::Add: return a + b;
    case OperatorId::Minus: return a - b;
    case OperatorId::Times: return a * b;
    case OperatorId::Divide: return a / b;
    case OperatorId::Power: return Expr::power(a, b);
    default: throw std::invalid_argument("not an arithmetic operator");
  }
}

inline Expr apply_elementary(OperatorId op, const Expr& a) {
  switch (op) {
    case OperatorId::Cos: return Expr::cos(a);
    case OperatorId::Sin: return Expr::sin(a);
    case OperatorId::Exp: return Expr::exp(a);
    case OperatorId::Log: return Expr::log(a);
    default: throw std::invalid_argument("not an elementary operator");
  }
}

}  // namespace detail

// Premise RHS machinery, also used directly by the direct-calculus task.
// With a single-symbol vocabulary the initial application is forced to
// arity 1 (arity 2 needs two distinct symbols).
inline Expr generate_premise_rhs(const std::vector<SymbolId>& vocab, int max_complexity,
                                 Rng& rng) {
  static const std::vector<OperatorId> unary_pool = {OperatorId::Cos, OperatorId::Sin,
                                                     OperatorId::Exp, OperatorId::Log};
  static const std::vector<OperatorId> binary_init_pool = {
      OperatorId::Add, OperatorId::Minus, OperatorId::Times, OperatorId::Power,
      OperatorId::Divide};
  static const std::vector<OperatorId> binary_wrap_pool = {
      OperatorId::Add,   OperatorId::Minus,         OperatorId::Times,
      OperatorId::Power, OperatorId::Divide,        OperatorId::Differentiate,
      OperatorId::Integrate};

  if (vocab.empty()) throw VocabularyExhausted("empty vocabulary");
  int init_arity = vocab.size() < 2 ? 1 : 1 + static_cast<int>(rng.below(2));
  Expr rhs;
  if (init_arity == 1) {
    OperatorId r = rng.pick(unary_pool);
    rhs = detail::apply_elementary(r, Expr::symbol(rng.pick(vocab)));
  } else {
    OperatorId r = rng.pick(binary_init_pool);
    const SymbolId& s1 = rng.pick(vocab);
    SymbolId s2 = s1;
    while (s2 == s1) s2 = rng.pick(vocab);
    rhs = detail::apply_arith(r, Expr::symbol(s1), Expr::symbol(s2));
  }
  int complexity = max_complexity > 0 ? static_cast<int>(rng.below(max_complexity)) : 0;
  for (int i = 0; i < complexity; ++i) {
    int a = 1 + static_cast<int>(rng.below(2));
    if (a == 1) {
      rhs = detail::apply_elementary(rng.pick(unary_pool), rhs);
    } else {
      OperatorId r = rng.pick(binary_wrap_pool);
      if (r == OperatorId::Differentiate || r == OperatorId::Integrate) {
        // bind an existing symbol of the RHS
        auto fs = free_symbols(rhs);
        std::vector<SymbolId> pool(fs.begin(), fs.end());
        const SymbolId& v = rng.pick(pool);
        rhs = r == OperatorId::Differentiate ? Expr::derivative(rhs, v)
                                             : Expr::integral(rhs, v);
      } else {
        rhs = detail::apply_arith(r, rhs, Expr::symbol(rng.pick(vocab)));
      }
    }
  }
  return rhs;
}

inline Equation generate_premise(const PremiseConfig& cfg, Rng& rng) {
  Expr rhs = generate_premise_rhs(cfg.vocabulary, cfg.max_complexity, rng);
  auto fs = free_symbols(rhs);
  std::vector<SymbolId> fresh;
  for (const auto& s : cfg.vocabulary)
    if (!fs.count(s)) fresh.push_back(s);
  if (fresh.empty())
    throw VocabularyExhausted("no fresh symbol available for the premise LHS");
  SymbolId fname = rng.pick(fresh);
  std::vector<SymbolId> args(fs.begin(), fs.end());  // canonical symbol order
  return Equation{Expr::function_app(std::move(fname), std::move(args)), std::move(rhs)};
}

}  // namespace derivforge
