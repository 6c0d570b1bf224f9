#pragma once

// The four systematic perturbations: variable renaming (VR), expression
// exchange (EE), annotation replacement (AR), and equality conversion (EC).

#include <string>
#include <vector>

#include "derivforge/premise.hpp"
#include "derivforge/task.hpp"

namespace derivforge {

struct TooManyVariables : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingProvenance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const std::vector<SymbolId>& greek_alphabet() {
  static const std::vector<SymbolId> alphabet = [] {
    std::vector<SymbolId> v;
    for (const auto& n : greek_symbol_names())
      v.push_back(SymbolId{n, Alphabet::Greek, SymbolRole::Variable});
    return v;
  }();
  return alphabet;
}

namespace detail {

inline void collect_english_variables(const Expr& e, std::set<SymbolId>& out) {
  if (e.kind() == NodeKind::Symbol && e.symbol_id().role == SymbolRole::Variable &&
      e.symbol_id().alphabet == Alphabet::English)
    out.insert(e.symbol_id());
  if ((e.kind() == NodeKind::Derivative || e.kind() == NodeKind::Integral) &&
      e.bound_var().alphabet == Alphabet::English)
    out.insert(e.bound_var());
  if (e.kind() == NodeKind::FunctionApp) {
    for (const auto& a : e.operands())
      if (a.symbol_id().alphabet == Alphabet::English) out.insert(a.symbol_id());
    return;
  }
  for (const auto& k : e.operands()) collect_english_variables(k, out);
}

// Applies fn to every expression and equation in the example, including
// annotation operand expressions.
template <class ExprFn, class EqFn>
inline TaskExamplePair map_example(const TaskExamplePair& x, ExprFn fe, EqFn feq) {
  TaskExamplePair y = x;
  for (auto& s : y.context) {
    s.equation = feq(s.equation);
    if (s.annotation.operand) s.annotation.operand = fe(*s.annotation.operand);
  }
  auto map_ann = [&](std::optional<Annotation>& a) {
    if (a && a->operand) a->operand = fe(*a->operand);
  };
  map_ann(y.final_annotation);
  map_ann(y.negative_annotation);
  auto map_cand = [&](Candidate& c) {
    if (std::holds_alternative<Expr>(c))
      c = fe(std::get<Expr>(c));
    else
      c = feq(std::get<Equation>(c));
  };
  if (y.premise) map_cand(*y.premise);
  map_cand(y.positive);
  map_cand(y.negative);
  return y;
}

inline std::set<SymbolId> example_english_variables(const TaskExamplePair& x) {
  std::set<SymbolId> vars;
  for (const auto& s : x.context) {
    collect_english_variables(s.equation.lhs, vars);
    collect_english_variables(s.equation.rhs, vars);
    if (s.annotation.operand) collect_english_variables(*s.annotation.operand, vars);
  }
  auto from_ann = [&](const std::optional<Annotation>& a) {
    if (a && a->operand) collect_english_variables(*a->operand, vars);
  };
  from_ann(x.final_annotation);
  from_ann(x.negative_annotation);
  auto from_cand = [&](const Candidate& c) {
    if (std::holds_alternative<Expr>(c)) {
      collect_english_variables(std::get<Expr>(c), vars);
    } else {
      collect_english_variables(std::get<Equation>(c).lhs, vars);
      collect_english_variables(std::get<Equation>(c).rhs, vars);
    }
  };
  if (x.premise) from_cand(*x.premise);
  from_cand(x.positive);
  from_cand(x.negative);
  if (x.variable && x.variable->alphabet == Alphabet::English) vars.insert(*x.variable);
  return vars;
}

inline std::set<SymbolId> example_all_symbols(const TaskExamplePair& x) {
  std::set<SymbolId> out = example_english_variables(x);
  // function names matter for freshness too
  auto add_names = [&](const Expr& e, auto&& self) -> void {
    if (e.kind() == NodeKind::FunctionApp) out.insert(e.func_name());
    for (const auto& k : e.operands()) self(k, self);
  };
  for (const auto& s : x.context) {
    add_names(s.equation.lhs, add_names);
    add_names(s.equation.rhs, add_names);
  }
  auto from_cand = [&](const Candidate& c) {
    if (std::holds_alternative<Equation>(c)) {
      add_names(std::get<Equation>(c).lhs, add_names);
      add_names(std::get<Equation>(c).rhs, add_names);
    } else {
      add_names(std::get<Expr>(c), add_names);
    }
  };
  if (x.premise) from_cand(*x.premise);
  from_cand(x.positive);
  from_cand(x.negative);
  return out;
}

}  // namespace detail

// VR: an injective English-variable -> Greek map applied uniformly to every
// equation, expression, and annotation operand. Function names unchanged;
// label unchanged; tree shape isomorphic.
inline TaskExamplePair rename_variables(const TaskExamplePair& x, Rng& rng) {
  auto vars = detail::example_english_variables(x);
  const auto& greek = greek_alphabet();
  if (vars.size() > greek.size())
    throw TooManyVariables("example has more distinct variables than Greek symbols");
  std::vector<SymbolId> targets = greek;
  rng.shuffle(targets);
  std::vector<std::pair<SymbolId, SymbolId>> mapping;
  std::size_t i = 0;
  for (const auto& v : vars) mapping.emplace_back(v, targets[i++]);
  auto fe = [&](const Expr& e) {
    Expr out = e;
    for (const auto& [from, to] : mapping)
      out = substitute(out, Expr::symbol(from), Expr::symbol(to));
    return out;
  };
  auto feq = [&](const Equation& eq) { return Equation{fe(eq.lhs), fe(eq.rhs)}; };
  TaskExamplePair y = detail::map_example(x, fe, feq);
  if (y.variable) {
    for (const auto& [from, to] : mapping)
      if (*y.variable == from) y.variable = to;
  }
  y.perturbation = "vr";
  y.source_id = x.id;
  y.id = x.id + "-vr";
  return y;
}

// EE: swaps lhs/rhs of every equation (including candidate finals) and
// replaces each substitution annotation with its mirror. Involution.
inline TaskExamplePair exchange_expressions(const TaskExamplePair& x) {
  if (x.task != TaskKind::Structured)
    throw std::invalid_argument("exchange_expressions applies to structured examples");
  auto swap_eq = [](const Equation& eq) { return Equation{eq.rhs, eq.lhs}; };
  auto keep = [](const Expr& e) { return e; };
  TaskExamplePair y = detail::map_example(x, keep, swap_eq);
  auto flip = [](Annotation& a) {
    if (a.op == "substitute_LHS_for_RHS")
      a.op = "substitute_RHS_for_LHS";
    else if (a.op == "substitute_RHS_for_LHS")
      a.op = "substitute_LHS_for_RHS";
  };
  for (auto& s : y.context) flip(s.annotation);
  if (y.final_annotation) flip(*y.final_annotation);
  if (y.negative_annotation) flip(*y.negative_annotation);
  y.perturbation = "ee";
  y.source_id = x.id;
  y.id = x.id + "-ee";
  return y;
}

// AR: the final annotation becomes the negative's generating annotation and
// the labels swap, i.e. the former negative is now the entailed candidate.
inline TaskExamplePair replace_annotation(const TaskExamplePair& x) {
  if (x.task != TaskKind::Structured)
    throw std::invalid_argument("replace_annotation applies to structured examples");
  if (!x.negative_annotation || !x.final_annotation)
    throw MissingProvenance("negative lacks a stored generating annotation");
  TaskExamplePair y = x;
  y.final_annotation = x.negative_annotation;
  y.negative_annotation = x.final_annotation;
  y.positive = x.negative;
  y.negative = x.positive;
  y.perturbation = "ar";
  y.source_id = x.id;
  y.id = x.id + "-ar";
  return y;
}

// EC: converts direct-calculus expressions into equivalent equations with a
// fresh LHS symbol. Differentiation: premise P -> "y = P", candidate C ->
// "d/dv y = C". Integration: the premise side carries the differential
// operator instead.
inline TaskExamplePair convert_to_equations(const TaskExamplePair& x, Rng& rng) {
  if (x.task != TaskKind::Calculus)
    throw std::invalid_argument("convert_to_equations applies to direct-calculus examples");
  if (!x.premise || !std::holds_alternative<Expr>(*x.premise))
    throw std::invalid_argument("example was already converted to equations");
  auto used = detail::example_all_symbols(x);
  std::vector<SymbolId> fresh;
  for (const auto& s : default_vocabulary())
    if (!used.count(s)) fresh.push_back(s);
  if (fresh.empty()) throw VocabularyExhausted("no unused symbol for the fresh LHS");
  SymbolId y_sym = fresh[rng.below(fresh.size())];
  Expr y_expr = Expr::symbol(y_sym);
  const Expr& premise = std::get<Expr>(*x.premise);
  const SymbolId& v = *x.variable;
  TaskExamplePair y = x;
  auto to_eq = [&](const Candidate& c, bool with_operator) -> Candidate {
    const Expr& e = std::get<Expr>(c);
    Expr lhs = with_operator ? Expr::derivative(y_expr, v) : y_expr;
    return Candidate(Equation{std::move(lhs), e});
  };
  if (x.mode == CalcMode::Diff) {
    y.premise = Candidate(Equation{y_expr, premise});
    y.positive = to_eq(x.positive, true);
    y.negative = to_eq(x.negative, true);
  } else {
    y.premise = Candidate(Equation{Expr::derivative(y_expr, v), premise});
    y.positive = to_eq(x.positive, false);
    y.negative = to_eq(x.negative, false);
  }
  y.perturbation = "ec";
  y.source_id = x.id;
  y.id = x.id + "-ec";
  return y;
}

// Dispatcher used by dataset-level perturbation.
inline TaskExamplePair perturb_example(const TaskExamplePair& x, const std::string& kind,
                                       Rng& rng) {
  if (kind == "vr") return rename_variables(x, rng);
  if (kind == "ee") return exchange_expressions(x);
  if (kind == "ar") return replace_annotation(x);
  if (kind == "ec") return convert_to_equations(x, rng);
  throw std::invalid_argument("unknown perturbation kind: " + kind);
}

}  // namespace derivforge
