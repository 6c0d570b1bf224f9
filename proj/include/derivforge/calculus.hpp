#pragma once

// The 18-operator inventory: arithmetic both-sides operators, elementary
// function wraps, derivative/integral setup and evaluation, and equation
// substitution.

#include <array>
#include <optional>
#include <string_view>

#include "derivforge/expr.hpp"

namespace derivforge {

enum class OperatorId {
  Premise,
  RenamingPremise,
  Cos,
  Sin,
  Exp,
  Log,
  Expand,
  EvaluateDerivatives,
  EvaluateIntegrals,
  Add,
  Minus,
  Times,
  Divide,
  Power,
  Differentiate,
  Integrate,
  SubsLHSForRHS,
  SubsRHSForLHS,
};

inline constexpr std::array<OperatorId, 18> all_operators = {
    OperatorId::Premise,        OperatorId::RenamingPremise,
    OperatorId::Cos,            OperatorId::Sin,
    OperatorId::Exp,            OperatorId::Log,
    OperatorId::Expand,         OperatorId::EvaluateDerivatives,
    OperatorId::EvaluateIntegrals,
    OperatorId::Add,            OperatorId::Minus,
    OperatorId::Times,          OperatorId::Divide,
    OperatorId::Power,          OperatorId::Differentiate,
    OperatorId::Integrate,      OperatorId::SubsLHSForRHS,
    OperatorId::SubsRHSForLHS,
};

inline int arity(OperatorId op) {
  switch (op) {
    case OperatorId::Premise:
    case OperatorId::RenamingPremise:
      return 0;
    case OperatorId::Cos:
    case OperatorId::Sin:
    case OperatorId::Exp:
    case OperatorId::Log:
    case OperatorId::Expand:
    case OperatorId::EvaluateDerivatives:
    case OperatorId::EvaluateIntegrals:
      return 1;
    default:
      return 2;
  }
}

inline std::string_view operator_name(OperatorId op) {
  switch (op) {
    case OperatorId::Premise: return "premise";
    case OperatorId::RenamingPremise: return "renaming_premise";
    case OperatorId::Cos: return "cos";
    case OperatorId::Sin: return "sin";
    case OperatorId::Exp: return "exp";
    case OperatorId::Log: return "log";
    case OperatorId::Expand: return "expand";
    case OperatorId::EvaluateDerivatives: return "evaluate_derivatives";
    case OperatorId::EvaluateIntegrals: return "evaluate_integrals";
    case OperatorId::Add: return "add";
    case OperatorId::Minus: return "minus";
    case OperatorId::Times: return "times";
    case OperatorId::Divide: return "divide";
    case OperatorId::Power: return "power";
    case OperatorId::Differentiate: return "differentiate";
    case OperatorId::Integrate: return "integrate";
    case OperatorId::SubsLHSForRHS: return "substitute_LHS_for_RHS";
    case OperatorId::SubsRHSForLHS: return "substitute_RHS_for_LHS";
  }
  return {};
}

inline std::optional<OperatorId> operator_from_name(std::string_view name) {
  for (OperatorId op : all_operators)
    if (operator_name(op) == name) return op;
  return std::nullopt;
}

struct InvalidOperand : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct PatternAbsent : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoIntegralPresent : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool contains_kind(const Expr& e, NodeKind k) {
  if (e.kind() == k) return true;
  for (const auto& c : e.operands())
    if (contains_kind(c, k)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Differentiation. Total: anything outside the rule set falls back to an
// unevaluated Derivative node.

inline Expr differentiate(const Expr& e, const SymbolId& v) {
  if (!free_symbols(e).count(v)) return Expr::integer(0);
  switch (e.kind()) {
    case NodeKind::Integer:
      return Expr::integer(0);
    case NodeKind::Symbol:
      return Expr::integer(1);  // e == v; the v-free case returned above
    case NodeKind::Sum: {
      std::vector<Expr> terms;
      for (const auto& t : e.operands()) terms.push_back(differentiate(t, v));
      return Expr::sum(std::move(terms));
    }
    case NodeKind::Product: {
      std::vector<Expr> terms;
      const auto& fs = e.operands();
      for (size_t i = 0; i < fs.size(); ++i) {
        std::vector<Expr> factors;
        for (size_t j = 0; j < fs.size(); ++j)
          factors.push_back(j == i ? differentiate(fs[j], v) : fs[j]);
        terms.push_back(Expr::product(std::move(factors)));
      }
      return Expr::sum(std::move(terms));
    }
    case NodeKind::Power: {
      const Expr& base = e.operands()[0];
      const Expr& expo = e.operands()[1];
      bool base_dep = free_symbols(base).count(v) > 0;
      bool expo_dep = free_symbols(expo).count(v) > 0;
      if (!expo_dep) {
        // n * b^(n-1) * b'
        return expo * Expr::power(base, expo - Expr::integer(1)) * differentiate(base, v);
      }
      if (!base_dep) {
        // b^x * log(b) * x'
        return e * Expr::log(base) * differentiate(expo, v);
      }
      // b^x * (x' log b + x b' / b)
      return e * (differentiate(expo, v) * Expr::log(base) +
                  expo * differentiate(base, v) / base);
    }
    case NodeKind::Cos:
      return -(Expr::sin(e.operands()[0]) * differentiate(e.operands()[0], v));
    case NodeKind::Sin:
      return Expr::cos(e.operands()[0]) * differentiate(e.operands()[0], v);
    case NodeKind::Exp:
      return e * differentiate(e.operands()[0], v);
    case NodeKind::Log:
      return differentiate(e.operands()[0], v) / e.operands()[0];
    case NodeKind::Integral:
      // fundamental theorem: d/dv of an integral over v is the integrand
      if (e.bound_var() == v) return e.operands()[0];
      return Expr::derivative(e, v);
    case NodeKind::Derivative:
    case NodeKind::FunctionApp:
      return Expr::derivative(e, v);
  }
  return Expr::derivative(e, v);
}

// ---------------------------------------------------------------------------
// Integration over a closed rule set: linearity, power rule for v^n
// (integer n != -1 or v-free symbolic n), v^-1 -> log v, cos/sin/exp of
// linear arguments a*v + b with a,b v-free, v-free factors pulled out.
// Emits no integration constant. Returns nullopt (NoRule) otherwise.

namespace detail {

// Matches a*v + b with a, b free of v. Returns {a, b}.
inline std::optional<std::pair<Expr, Expr>> match_linear(const Expr& e, const SymbolId& v) {
  Expr var = Expr::symbol(v);
  auto match_term = [&](const Expr& t) -> std::optional<Expr> {
    if (t == var) return Expr::integer(1);
    if (t.kind() == NodeKind::Product) {
      std::vector<Expr> rest;
      bool found = false;
      for (const auto& f : t.operands()) {
        if (!found && f == var) {
          found = true;
          continue;
        }
        if (free_symbols(f).count(v)) return std::nullopt;
        rest.push_back(f);
      }
      if (!found) return std::nullopt;
      return Expr::product(std::move(rest));
    }
    return std::nullopt;
  };
  if (!free_symbols(e).count(v)) return std::nullopt;
  if (auto a = match_term(e)) return std::make_pair(*a, Expr::integer(0));
  if (e.kind() == NodeKind::Sum) {
    std::optional<Expr> a;
    std::vector<Expr> constant_terms;
    for (const auto& t : e.operands()) {
      if (!free_symbols(t).count(v)) {
        constant_terms.push_back(t);
        continue;
      }
      if (a) return std::nullopt;  // more than one v-dependent term
      a = match_term(t);
      if (!a) return std::nullopt;
    }
    if (!a) return std::nullopt;
    return std::make_pair(*a, Expr::sum(std::move(constant_terms)));
  }
  return std::nullopt;
}

}  // namespace detail

inline std::optional<Expr> integrate(const Expr& e, const SymbolId& v) {
  if (!free_symbols(e).count(v)) return e * Expr::symbol(v);
  Expr var = Expr::symbol(v);
  switch (e.kind()) {
    case NodeKind::Symbol:
      // e == v
      return Expr::power(var, Expr::integer(2)) / Expr::integer(2);
    case NodeKind::Sum: {
      std::vector<Expr> parts;
      for (const auto& t : e.operands()) {
        auto p = integrate(t, v);
        if (!p) return std::nullopt;
        parts.push_back(std::move(*p));
      }
      return Expr::sum(std::move(parts));
    }
    case NodeKind::Product: {
      std::vector<Expr> free_part;
      std::vector<Expr> dep_part;
      for (const auto& f : e.operands())
        (free_symbols(f).count(v) ? dep_part : free_part).push_back(f);
      if (dep_part.size() != 1) return std::nullopt;
      auto inner = integrate(dep_part[0], v);
      if (!inner) return std::nullopt;
      free_part.push_back(std::move(*inner));
      return Expr::product(std::move(free_part));
    }
    case NodeKind::Power: {
      const Expr& base = e.operands()[0];
      const Expr& expo = e.operands()[1];
      if (base != var) return std::nullopt;
      if (free_symbols(expo).count(v)) return std::nullopt;
      if (expo.is_integer(-1)) return Expr::log(var);
      // v^n -> v^(n+1) / (n+1); n is an integer != -1 or v-free symbolic
      Expr n1 = expo + Expr::integer(1);
      return Expr::power(var, n1) / n1;
    }
    case NodeKind::Cos:
    case NodeKind::Sin:
    case NodeKind::Exp: {
      auto lin = detail::match_linear(e.operands()[0], v);
      if (!lin) return std::nullopt;
      const Expr& a = lin->first;
      if (a.is_integer(0)) return std::nullopt;
      if (e.kind() == NodeKind::Cos) return Expr::sin(e.operands()[0]) / a;
      if (e.kind() == NodeKind::Sin) return -(Expr::cos(e.operands()[0]) / a);
      return Expr::exp(e.operands()[0]) / a;
    }
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Distributes products over sums, recursively.

inline Expr expand(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Integer:
    case NodeKind::Symbol:
    case NodeKind::FunctionApp:
      return e;
    case NodeKind::Sum: {
      std::vector<Expr> ops;
      for (const auto& t : e.operands()) ops.push_back(expand(t));
      return Expr::sum(std::move(ops));
    }
    case NodeKind::Product: {
      std::vector<Expr> factors;
      for (const auto& f : e.operands()) factors.push_back(expand(f));
      for (size_t i = 0; i < factors.size(); ++i) {
        if (factors[i].kind() != NodeKind::Sum) continue;
        std::vector<Expr> rest;
        for (size_t j = 0; j < factors.size(); ++j)
          if (j != i) rest.push_back(factors[j]);
        std::vector<Expr> terms;
        for (const auto& t : factors[i].operands()) {
          std::vector<Expr> fs = rest;
          fs.push_back(t);
          terms.push_back(expand(Expr::product(std::move(fs))));
        }
        return Expr::sum(std::move(terms));
      }
      return Expr::product(std::move(factors));
    }
    case NodeKind::Power:
      return Expr::power(expand(e.operands()[0]), expand(e.operands()[1]));
    case NodeKind::Cos:
      return Expr::cos(expand(e.operands()[0]));
    case NodeKind::Sin:
      return Expr::sin(expand(e.operands()[0]));
    case NodeKind::Exp:
      return Expr::exp(expand(e.operands()[0]));
    case NodeKind::Log:
      return Expr::log(expand(e.operands()[0]));
    case NodeKind::Derivative:
      return Expr::derivative(expand(e.operands()[0]), e.bound_var());
    case NodeKind::Integral:
      return Expr::integral(expand(e.operands()[0]), e.bound_var());
  }
  return e;
}

// ---------------------------------------------------------------------------
// Both-sides application of arity-1 wraps and arity-2 arithmetic/setup ops.

inline Equation apply_both_sides(const Equation& eq, OperatorId op,
                                 const std::optional<Expr>& operand = std::nullopt) {
  auto per_side = [&](const Expr& side) -> Expr {
    switch (op) {
      case OperatorId::Cos: return Expr::cos(side);
      case OperatorId::Sin: return Expr::sin(side);
      case OperatorId::Exp: return Expr::exp(side);
      case OperatorId::Log: return Expr::log(side);
      case OperatorId::Expand: return expand(side);
      case OperatorId::Add: return side + *operand;
      case OperatorId::Minus: return side - *operand;
      case OperatorId::Times: return side * *operand;
      case OperatorId::Divide: return side / *operand;
      case OperatorId::Power: return Expr::power(side, *operand);
      case OperatorId::Differentiate: return Expr::derivative(side, operand->symbol_id());
      case OperatorId::Integrate: return Expr::integral(side, operand->symbol_id());
      default:
        throw std::invalid_argument("apply_both_sides: unsupported operator " +
                                    std::string(operator_name(op)));
    }
  };
  if (arity(op) == 2) {
    if (!operand) throw std::invalid_argument("apply_both_sides: missing operand");
    if (op == OperatorId::Divide && operand->is_integer(0))
      throw InvalidOperand("divide by syntactic zero");
    if (op == OperatorId::Power && operand->is_integer(0))
      throw InvalidOperand("power with zero operand");
    if ((op == OperatorId::Differentiate || op == OperatorId::Integrate) &&
        (operand->kind() != NodeKind::Symbol ||
         operand->symbol_id().role != SymbolRole::Variable))
      throw std::invalid_argument("differentiate/integrate operand must be a variable");
  } else if (operand) {
    throw std::invalid_argument("apply_both_sides: unexpected operand");
  }
  return Equation{per_side(eq.lhs), per_side(eq.rhs)};
}

// ---------------------------------------------------------------------------
// Evaluation of unevaluated Derivative / Integral nodes.

namespace detail {

inline Expr evaluate_derivatives_expr(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Integer:
    case NodeKind::Symbol:
    case NodeKind::FunctionApp:
      return e;
    case NodeKind::Sum: {
      std::vector<Expr> ops;
      for (const auto& k : e.operands()) ops.push_back(evaluate_derivatives_expr(k));
      return Expr::sum(std::move(ops));
    }
    case NodeKind::Product: {
      std::vector<Expr> ops;
      for (const auto& k : e.operands()) ops.push_back(evaluate_derivatives_expr(k));
      return Expr::product(std::move(ops));
    }
    case NodeKind::Power:
      return Expr::power(evaluate_derivatives_expr(e.operands()[0]),
                         evaluate_derivatives_expr(e.operands()[1]));
    case NodeKind::Cos:
      return Expr::cos(evaluate_derivatives_expr(e.operands()[0]));
    case NodeKind::Sin:
      return Expr::sin(evaluate_derivatives_expr(e.operands()[0]));
    case NodeKind::Exp:
      return Expr::exp(evaluate_derivatives_expr(e.operands()[0]));
    case NodeKind::Log:
      return Expr::log(evaluate_derivatives_expr(e.operands()[0]));
    case NodeKind::Integral:
      return Expr::integral(evaluate_derivatives_expr(e.operands()[0]), e.bound_var());
    case NodeKind::Derivative: {
      Expr body = evaluate_derivatives_expr(e.operands()[0]);
      Expr d = differentiate(body, e.bound_var());
      // opaque bodies (FunctionApp or blocked integrals) stay unevaluated
      if (contains_kind(d, NodeKind::Derivative))
        return Expr::derivative(std::move(body), e.bound_var());
      return d;
    }
  }
  return e;
}

inline std::optional<Expr> evaluate_integrals_expr(const Expr& e, bool& found) {
  switch (e.kind()) {
    case NodeKind::Integer:
    case NodeKind::Symbol:
    case NodeKind::FunctionApp:
      return e;
    default:
      break;
  }
  std::vector<Expr> kids;
  for (const auto& k : e.operands()) {
    auto r = evaluate_integrals_expr(k, found);
    if (!r) return std::nullopt;
    kids.push_back(std::move(*r));
  }
  switch (e.kind()) {
    case NodeKind::Sum:
      return Expr::sum(std::move(kids));
    case NodeKind::Product:
      return Expr::product(std::move(kids));
    case NodeKind::Power:
      return Expr::power(kids[0], kids[1]);
    case NodeKind::Cos:
      return Expr::cos(kids[0]);
    case NodeKind::Sin:
      return Expr::sin(kids[0]);
    case NodeKind::Exp:
      return Expr::exp(kids[0]);
    case NodeKind::Log:
      return Expr::log(kids[0]);
    case NodeKind::Derivative:
      return Expr::derivative(kids[0], e.bound_var());
    case NodeKind::Integral: {
      found = true;
      return integrate(kids[0], e.bound_var());
    }
    default:
      return e;
  }
}

}  // namespace detail

inline Equation evaluate_derivatives(const Equation& eq) {
  return Equation{detail::evaluate_derivatives_expr(eq.lhs),
                  detail::evaluate_derivatives_expr(eq.rhs)};
}

// NoRule propagates as nullopt; throws NoIntegralPresent when the equation
// contains no Integral node at all.
inline std::optional<Equation> evaluate_integrals(const Equation& eq) {
  if (!contains_kind(eq.lhs, NodeKind::Integral) &&
      !contains_kind(eq.rhs, NodeKind::Integral))
    throw NoIntegralPresent("equation contains no integral");
  bool found = false;
  auto l = detail::evaluate_integrals_expr(eq.lhs, found);
  if (!l) return std::nullopt;
  auto r = detail::evaluate_integrals_expr(eq.rhs, found);
  if (!r) return std::nullopt;
  return Equation{std::move(*l), std::move(*r)};
}

// ---------------------------------------------------------------------------
// Equation substitution. substitute_LHS_for_RHS identifies the source LHS
// within the target RHS and substitutes the source RHS for it; the mirror
// identifies the source RHS within the target LHS.

inline Equation substitute_lhs_for_rhs(const Equation& target, const Equation& source) {
  if (!target.rhs.contains(source.lhs))
    throw PatternAbsent("source LHS does not occur in target RHS");
  return Equation{target.lhs, substitute(target.rhs, source.lhs, source.rhs)};
}

inline Equation substitute_rhs_for_lhs(const Equation& target, const Equation& source) {
  if (!target.lhs.contains(source.rhs))
    throw PatternAbsent("source RHS does not occur in target LHS");
  return Equation{substitute(target.lhs, source.rhs, source.lhs), target.rhs};
}

}  // namespace derivforge
