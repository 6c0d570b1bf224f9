#pragma once

// Deterministic LaTeX rendering. Division renders as \frac, integrals as
// \int ... \, d<var>, partial derivatives as \frac{\partial}{\partial <var>}.

#include <string>

#include "derivforge/expr.hpp"

namespace derivforge {

inline std::string to_latex(const Expr& e);

namespace detail {

inline std::string symbol_latex(const SymbolId& s) {
  if (s.alphabet == Alphabet::Greek) return "\\" + s.name;
  return s.name;
}

// Splits an integer sign off a term so sums can render "a - b".
// Returns {negative, magnitude-rendering}.
inline std::pair<bool, std::string> signed_latex(const Expr& t) {
  if (t.kind() == NodeKind::Integer && t.int_value() < 0)
    return {true, std::to_string(-t.int_value())};
  if (t.kind() == NodeKind::Product) {
    for (const auto& f : t.operands()) {
      if (f.kind() == NodeKind::Integer && f.int_value() < 0) {
        std::vector<Expr> rest;
        for (const auto& g : t.operands())
          if (&g != &f) rest.push_back(g);
        if (f.int_value() != -1) rest.push_back(Expr::integer(-f.int_value()));
        return {true, to_latex(Expr::product(std::move(rest)))};
      }
    }
  }
  return {false, to_latex(t)};
}

inline std::string parenthesize(const std::string& s) {
  return "\\left(" + s + " \\right)";
}

inline bool needs_parens_as_factor(const Expr& e) {
  return e.kind() == NodeKind::Sum ||
         (e.kind() == NodeKind::Integer && e.int_value() < 0);
}

inline std::string factor_latex(const Expr& f) {
  std::string s = to_latex(f);
  return needs_parens_as_factor(f) ? parenthesize(s) : s;
}

inline bool needs_parens_as_base(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Sum:
    case NodeKind::Product:
    case NodeKind::Power:
    case NodeKind::Derivative:
    case NodeKind::Integral:
      return true;
    case NodeKind::Integer:
      return e.int_value() < 0;
    default:
      return false;
  }
}

}  // namespace detail

inline std::string to_latex(const Expr& e) {
  using namespace detail;
  switch (e.kind()) {
    case NodeKind::Integer:
      return std::to_string(e.int_value());
    case NodeKind::Symbol:
      return symbol_latex(e.symbol_id());
    case NodeKind::Sum: {
      std::string out;
      bool first = true;
      for (const auto& t : e.operands()) {
        auto [neg, body] = signed_latex(t);
        if (first) {
          out += neg ? "-" + body : body;
          first = false;
        } else {
          out += neg ? " - " + body : " + " + body;
        }
      }
      return out;
    }
    case NodeKind::Product: {
      bool negative = false;
      long long coeff = 1;
      std::vector<std::string> num;
      std::vector<std::string> den;
      for (const auto& f : e.operands()) {
        if (f.kind() == NodeKind::Integer) {
          coeff = f.int_value();
          continue;
        }
        if (f.kind() == NodeKind::Power && f.operands()[1].kind() == NodeKind::Integer &&
            f.operands()[1].int_value() < 0) {
          long long ex = -f.operands()[1].int_value();
          den.push_back(ex == 1 ? factor_latex(f.operands()[0])
                                : to_latex(Expr::power(f.operands()[0], Expr::integer(ex))));
          continue;
        }
        num.push_back(factor_latex(f));
      }
      if (coeff < 0) {
        negative = true;
        coeff = -coeff;
      }
      if (coeff != 1 || num.empty()) num.insert(num.begin(), std::to_string(coeff));
      std::string numerator;
      for (size_t i = 0; i < num.size(); ++i) numerator += (i ? " " : "") + num[i];
      std::string out;
      if (den.empty()) {
        out = numerator;
      } else {
        std::string denominator;
        for (size_t i = 0; i < den.size(); ++i) denominator += (i ? " " : "") + den[i];
        out = "\\frac{" + numerator + "}{" + denominator + "}";
      }
      return negative ? "-" + out : out;
    }
    case NodeKind::Power: {
      const Expr& base = e.operands()[0];
      const Expr& expo = e.operands()[1];
      if (expo.kind() == NodeKind::Integer && expo.int_value() < 0) {
        long long ex = -expo.int_value();
        std::string inner = ex == 1 ? to_latex(base)
                                    : to_latex(Expr::power(base, Expr::integer(ex)));
        return "\\frac{1}{" + inner + "}";
      }
      std::string b = to_latex(base);
      if (needs_parens_as_base(base)) b = parenthesize(b);
      return b + "^{" + to_latex(expo) + "}";
    }
    case NodeKind::Cos:
      return "\\cos{\\left(" + to_latex(e.operands()[0]) + " \\right)}";
    case NodeKind::Sin:
      return "\\sin{\\left(" + to_latex(e.operands()[0]) + " \\right)}";
    case NodeKind::Exp:
      return "e^{" + to_latex(e.operands()[0]) + "}";
    case NodeKind::Log:
      return "\\log{\\left(" + to_latex(e.operands()[0]) + " \\right)}";
    case NodeKind::Derivative: {
      const Expr& body = e.operands()[0];
      std::string b = to_latex(body);
      if (body.kind() == NodeKind::Sum || body.kind() == NodeKind::Integral)
        b = parenthesize(b);
      return "\\frac{\\partial}{\\partial " + symbol_latex(e.bound_var()) + "} " + b;
    }
    case NodeKind::Integral: {
      const Expr& body = e.operands()[0];
      std::string b = to_latex(body);
      if (body.kind() == NodeKind::Sum) b = parenthesize(b);
      return "\\int " + b + " \\, d" + symbol_latex(e.bound_var());
    }
    case NodeKind::FunctionApp: {
      std::string args;
      for (size_t i = 0; i < e.operands().size(); ++i)
        args += (i ? "," : "") + symbol_latex(e.operands()[i].symbol_id());
      return symbol_latex(e.func_name()) + "{\\left(" + args + " \\right)}";
    }
  }
  return {};
}

inline std::string to_latex(const Equation& eq) {
  return to_latex(eq.lhs) + " = " + to_latex(eq.rhs);
}

}  // namespace derivforge
