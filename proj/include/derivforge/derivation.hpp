#pragma once

// Biased operator/equation sampling, step validity checking, and
// self-contained derivation extraction.

#include <optional>
#include <string>
#include <vector>

#include "derivforge/calculus.hpp"
#include "derivforge/expr.hpp"
#include "derivforge/latex.hpp"
#include "derivforge/premise.hpp"
#include "derivforge/rng.hpp"

namespace derivforge {

struct GenerationBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Machine-readable justification of a step: operator name plus operand
// references. Equation indices are 1-based and reference strictly earlier
// equations.
struct Annotation {
  std::string op;
  std::optional<int> eq1;
  std::optional<int> eq2;
  std::optional<Expr> operand;

  friend bool operator==(const Annotation& a, const Annotation& b) {
    return a.op == b.op && a.eq1 == b.eq1 && a.eq2 == b.eq2 &&
           a.operand.has_value() == b.operand.has_value() &&
           (!a.operand || *a.operand == *b.operand);
  }
  friend bool operator!=(const Annotation& a, const Annotation& b) { return !(a == b); }
};

// "['differentiate', 1, Z]"-style rendering.
inline std::string render_annotation(const Annotation& a) {
  std::string out = "['" + a.op + "'";
  if (a.eq1) out += ", " + std::to_string(*a.eq1);
  if (a.eq2)
    out += ", " + std::to_string(*a.eq2);
  else if (a.operand)
    out += ", " + to_latex(*a.operand);
  return out + "]";
}

struct DerivationStep {
  Annotation annotation;
  Equation equation;
};

struct GenHyperParams {
  double p0 = 1, p1 = 2, p2 = 4;            // arity weights
  double p_r = 1, p_e = 2, p_c = 2, p_s = 2;  // pool repetition biases
  double p_h = 1.08;                        // history-bias strength
  int L_i = 0;                              // initial chain length; 0 => L_f + 4
  int L_f = 3;                              // target extracted length
  int max_nodes = 60;                       // per-side expression size cap
  int max_complexity = 3;                   // premise complexity
  int retry_cap = 10000;
  std::vector<SymbolId> vocabulary = default_vocabulary();

  int initial_length() const { return L_i > 0 ? L_i : L_f + 4; }
};

struct Derivation {
  std::vector<DerivationStep> steps;
  std::uint64_t seed = 0;
  GenHyperParams hyperparams;
};

// weight(k) = 1 + p_h * ((k+1)/n)^3 for chronological index k in [0, n-1].
// At p_h = 1.08 the newest of three candidates is twice as likely as the
// oldest.
inline std::vector<double> equation_history_weights(int n, double p_h) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    double frac = static_cast<double>(k + 1) / n;
    w[static_cast<std::size_t>(k)] = 1.0 + p_h * frac * frac * frac;
  }
  return w;
}

// Applies an arity >= 1 annotation to the listed equations. Returns nullopt
// when the referenced operation fails one of its own checks (pattern absent,
// invalid operand, no applicable integration rule).
inline std::optional<Equation> apply_annotation(const std::vector<Equation>& eqs,
                                                const Annotation& ann) {
  auto op = operator_from_name(ann.op);
  if (!op || arity(*op) == 0)
    throw std::invalid_argument("apply_annotation: not an applicable operator: " + ann.op);
  if (!ann.eq1 || *ann.eq1 < 1 || static_cast<std::size_t>(*ann.eq1) > eqs.size())
    throw std::invalid_argument("apply_annotation: equation index out of range");
  const Equation& e1 = eqs[static_cast<std::size_t>(*ann.eq1 - 1)];
  try {
    switch (*op) {
      case OperatorId::Cos:
      case OperatorId::Sin:
      case OperatorId::Exp:
      case OperatorId::Log:
      case OperatorId::Expand:
        return apply_both_sides(e1, *op);
      case OperatorId::EvaluateDerivatives:
        return evaluate_derivatives(e1);
      case OperatorId::EvaluateIntegrals:
        return evaluate_integrals(e1);
      case OperatorId::Add:
      case OperatorId::Minus:
      case OperatorId::Times:
      case OperatorId::Divide:
      case OperatorId::Power:
      case OperatorId::Differentiate:
      case OperatorId::Integrate:
        if (!ann.operand)
          throw std::invalid_argument("apply_annotation: missing expression operand");
        return apply_both_sides(e1, *op, ann.operand);
      case OperatorId::SubsLHSForRHS:
      case OperatorId::SubsRHSForLHS: {
        if (!ann.eq2 || *ann.eq2 < 1 || static_cast<std::size_t>(*ann.eq2) > eqs.size())
          throw std::invalid_argument("apply_annotation: missing source equation index");
        const Equation& e2 = eqs[static_cast<std::size_t>(*ann.eq2 - 1)];
        return *op == OperatorId::SubsLHSForRHS ? substitute_lhs_for_rhs(e1, e2)
                                                : substitute_rhs_for_lhs(e1, e2);
      }
      default:
        throw std::invalid_argument("apply_annotation: unsupported operator");
    }
  } catch (const InvalidOperand&) {
    return std::nullopt;
  } catch (const PatternAbsent&) {
    return std::nullopt;
  } catch (const NoIntegralPresent&) {
    return std::nullopt;
  }
}

// Validity checks on a candidate new equation: canonically distinct from
// every prior equation, trivial identities rejected, sides within the size
// cap.
inline bool valid_new_equation(const std::vector<DerivationStep>& chain, const Equation& eq,
                               const GenHyperParams& hp) {
  if (eq.lhs == eq.rhs) return false;
  if (eq.lhs.node_count() > hp.max_nodes || eq.rhs.node_count() > hp.max_nodes)
    return false;
  for (const auto& s : chain)
    if (s.equation == eq) return false;
  return true;
}

// Applies a forced annotation to the chain, running the full validity
// checks. The sampling in step() funnels through this.
inline std::optional<DerivationStep> try_step(const std::vector<DerivationStep>& chain,
                                              const Annotation& ann,
                                              const GenHyperParams& hp) {
  std::vector<Equation> eqs;
  eqs.reserve(chain.size());
  for (const auto& s : chain) eqs.push_back(s.equation);
  auto eq = apply_annotation(eqs, ann);
  if (!eq || !valid_new_equation(chain, *eq, hp)) return std::nullopt;
  return DerivationStep{ann, std::move(*eq)};
}

namespace detail {

inline void collect_subtrees(const Expr& e, std::vector<Expr>& out, int max_size) {
  if (e.node_count() <= max_size &&
      std::find(out.begin(), out.end(), e) == out.end())
    out.push_back(e);
  for (const auto& k : e.operands()) collect_subtrees(k, out, max_size);
}

inline std::vector<Expr> chain_subexpressions(const std::vector<DerivationStep>& chain,
                                              int max_size) {
  std::vector<Expr> out;
  for (const auto& s : chain) {
    collect_subtrees(s.equation.lhs, out, max_size);
    collect_subtrees(s.equation.rhs, out, max_size);
  }
  return out;
}

inline void collect_symbol_names(const Expr& e, std::set<std::string>& out) {
  if (e.kind() == NodeKind::Symbol) out.insert(e.symbol_id().name);
  if (e.kind() == NodeKind::Derivative || e.kind() == NodeKind::Integral)
    out.insert(e.bound_var().name);
  if (e.kind() == NodeKind::FunctionApp) out.insert(e.func_name().name);
  for (const auto& k : e.operands()) collect_symbol_names(k, out);
}

inline std::set<std::string> chain_symbol_names(const std::vector<DerivationStep>& chain) {
  std::set<std::string> out;
  for (const auto& s : chain) {
    collect_symbol_names(s.equation.lhs, out);
    collect_symbol_names(s.equation.rhs, out);
  }
  return out;
}

inline std::vector<SymbolId> equation_variables(const Equation& eq) {
  auto fs = free_symbols(eq);
  return std::vector<SymbolId>(fs.begin(), fs.end());
}

}  // namespace detail

// Defines a new function of a previously derived expression: the RHS is a
// uniformly sampled subexpression (or full side) with at least one free
// symbol, the LHS a fresh function over its free symbols.
inline DerivationStep renaming_premise(const std::vector<DerivationStep>& chain,
                                       const std::vector<SymbolId>& vocab, Rng& rng) {
  std::vector<Expr> pool;
  for (const Expr& e : detail::chain_subexpressions(chain, 1 << 20))
    if (!free_symbols(e).empty()) pool.push_back(e);
  if (pool.empty()) throw VocabularyExhausted("no expression with free symbols to rename");
  Expr rhs = rng.pick(pool);
  auto used = detail::chain_symbol_names(chain);
  std::vector<SymbolId> fresh;
  for (const auto& s : vocab)
    if (!used.count(s.name)) fresh.push_back(s);
  if (fresh.empty()) throw VocabularyExhausted("no fresh function symbol left");
  SymbolId fname = rng.pick(fresh);
  auto fs = free_symbols(rhs);
  std::vector<SymbolId> args(fs.begin(), fs.end());
  Equation eq{Expr::function_app(std::move(fname), std::move(args)), std::move(rhs)};
  return DerivationStep{Annotation{"renaming_premise"}, std::move(eq)};
}

// One sampled step of the chain-growing loop. Invalid outcomes are normal;
// callers retry.
inline std::optional<DerivationStep> step(const std::vector<DerivationStep>& chain,
                                          const GenHyperParams& hp, Rng& rng) {
  if (chain.empty()) throw std::invalid_argument("step: empty chain");
  std::size_t arity_choice = rng.weighted({hp.p0, hp.p1, hp.p2});

  if (arity_choice == 0) {
    std::size_t which = rng.weighted({1.0, hp.p_r});
    try {
      if (which == 0) {
        PremiseConfig cfg{hp.max_complexity, hp.vocabulary, 0};
        Equation eq = generate_premise(cfg, rng);
        // the fresh function name must not collide with anything in the chain
        if (detail::chain_symbol_names(chain).count(eq.lhs.func_name().name))
          return std::nullopt;
        if (!valid_new_equation(chain, eq, hp)) return std::nullopt;
        return DerivationStep{Annotation{"premise"}, std::move(eq)};
      }
      DerivationStep s = renaming_premise(chain, hp.vocabulary, rng);
      if (!valid_new_equation(chain, s.equation, hp)) return std::nullopt;
      return s;
    } catch (const VocabularyExhausted&) {
      return std::nullopt;
    }
  }

  auto history_pick = [&]() -> int {
    return static_cast<int>(
               rng.weighted(equation_history_weights(static_cast<int>(chain.size()), hp.p_h))) +
           1;
  };

  if (arity_choice == 1) {
    static const std::vector<OperatorId> pool = {
        OperatorId::Cos,  OperatorId::Sin,    OperatorId::Exp,
        OperatorId::Log,  OperatorId::Expand, OperatorId::EvaluateDerivatives,
        OperatorId::EvaluateIntegrals};
    std::vector<double> w = {1, 1, 1, 1, 1, hp.p_e, hp.p_e};
    OperatorId op = pool[rng.weighted(w)];
    Annotation ann{std::string(operator_name(op)), history_pick()};
    return try_step(chain, ann, hp);
  }

  static const std::vector<OperatorId> arith = {OperatorId::Add, OperatorId::Minus,
                                                OperatorId::Times, OperatorId::Divide,
                                                OperatorId::Power};
  std::vector<OperatorId> pool = arith;
  std::vector<double> w(arith.size(), 1.0);
  pool.push_back(OperatorId::Differentiate);
  pool.push_back(OperatorId::Integrate);
  w.push_back(hp.p_c);
  w.push_back(hp.p_c);
  if (chain.size() >= 2) {
    // substitution needs a second, distinct source equation
    pool.push_back(OperatorId::SubsLHSForRHS);
    pool.push_back(OperatorId::SubsRHSForLHS);
    w.push_back(hp.p_s);
    w.push_back(hp.p_s);
  }
  OperatorId op = pool[rng.weighted(w)];
  int e1 = history_pick();
  Annotation ann{std::string(operator_name(op)), e1};

  if (op == OperatorId::Differentiate || op == OperatorId::Integrate) {
    auto vars = detail::equation_variables(chain[static_cast<std::size_t>(e1 - 1)].equation);
    if (vars.empty()) return std::nullopt;
    ann.operand = Expr::symbol(rng.pick(vars));
  } else if (op == OperatorId::SubsLHSForRHS || op == OperatorId::SubsRHSForLHS) {
    int e2 = history_pick();
    if (e2 == e1) return std::nullopt;
    ann.eq2 = e2;
  } else if (op == OperatorId::Power) {
    // small integer exponents or a fresh symbol; unbounded exponents
    // explode expression size
    std::vector<Expr> choices = {Expr::integer(2), Expr::integer(3)};
    auto used = detail::chain_symbol_names(chain);
    for (const auto& s : hp.vocabulary) {
      if (!used.count(s.name)) {
        choices.push_back(Expr::symbol(s));
        break;
      }
    }
    ann.operand = rng.pick(choices);
  } else {
    // numbers, variables, and subexpressions from the chain
    std::vector<Expr> elements = {Expr::integer(1), Expr::integer(2), Expr::integer(3)};
    for (const Expr& e : detail::chain_subexpressions(chain, 9))
      if (std::find(elements.begin(), elements.end(), e) == elements.end())
        elements.push_back(e);
    Expr operand = rng.pick(elements);
    if (op == OperatorId::Divide && operand.is_integer(0)) return std::nullopt;
    ann.operand = std::move(operand);
  }
  return try_step(chain, ann, hp);
}

// Walks backward from each candidate final step, computing the transitive
// closure of annotation index references. Returns the compacted derivation
// when a closure has exactly L_f steps, starts from a plain premise, and
// ends with an arity >= 1 step.
inline std::optional<Derivation> extract_derivation(const std::vector<DerivationStep>& chain,
                                                    int L_f) {
  for (int final = static_cast<int>(chain.size()) - 1; final >= 0; --final) {
    if (!chain[static_cast<std::size_t>(final)].annotation.eq1) continue;
    std::vector<int> stack = {final};
    std::set<int> closure;
    while (!stack.empty()) {
      int i = stack.back();
      stack.pop_back();
      if (!closure.insert(i).second) continue;
      const Annotation& a = chain[static_cast<std::size_t>(i)].annotation;
      if (a.eq1) stack.push_back(*a.eq1 - 1);
      if (a.eq2) stack.push_back(*a.eq2 - 1);
    }
    if (static_cast<int>(closure.size()) != L_f) continue;
    std::vector<int> ordered(closure.begin(), closure.end());
    if (chain[static_cast<std::size_t>(ordered.front())].annotation.op != "premise") continue;
    std::map<int, int> remap;  // old 1-based -> new 1-based
    for (std::size_t k = 0; k < ordered.size(); ++k)
      remap[ordered[k] + 1] = static_cast<int>(k) + 1;
    Derivation d;
    for (int idx : ordered) {
      DerivationStep s = chain[static_cast<std::size_t>(idx)];
      if (s.annotation.eq1) s.annotation.eq1 = remap.at(*s.annotation.eq1);
      if (s.annotation.eq2) s.annotation.eq2 = remap.at(*s.annotation.eq2);
      d.steps.push_back(std::move(s));
    }
    return d;
  }
  return std::nullopt;
}

// Repeats {seed premise; grow chain to L_i; attempt extraction at L_f}
// until success. Deterministic given (hp, seed).
inline Derivation generate_derivation(const GenHyperParams& hp, std::uint64_t seed) {
  Rng rng(seed);
  PremiseConfig cfg{hp.max_complexity, hp.vocabulary, seed};
  const int L_i = hp.initial_length();
  for (int attempt = 0; attempt < hp.retry_cap; ++attempt) {
    std::vector<DerivationStep> chain;
    chain.push_back(DerivationStep{Annotation{"premise"}, generate_premise(cfg, rng)});
    int tries = 0;
    while (static_cast<int>(chain.size()) < L_i && tries < 64 * L_i) {
      ++tries;
      if (auto s = step(chain, hp, rng)) chain.push_back(std::move(*s));
    }
    if (static_cast<int>(chain.size()) < L_i) continue;
    if (auto d = extract_derivation(chain, hp.L_f)) {
      d->seed = seed;
      d->hyperparams = hp;
      return std::move(*d);
    }
  }
  throw GenerationBudgetExceeded("no derivation of the requested length within the retry cap");
}

}  // namespace derivforge
