#pragma once

// Immutable canonical expression trees and equations.
//
// Every Expr is canonical by construction: Sum/Product operands are
// flattened and sorted under a fixed total node order, integer constants
// are folded, Power(x,1) never appears, subtraction is Sum with
// Product(-1, .) and division is Product with Power(., -1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace derivforge {

enum class Alphabet { English, Greek };
enum class SymbolRole { Variable, FunctionName };

struct SymbolId {
  std::string name;
  Alphabet alphabet = Alphabet::English;
  SymbolRole role = SymbolRole::Variable;
};

inline bool operator==(const SymbolId& a, const SymbolId& b) { return a.name == b.name; }
inline bool operator!=(const SymbolId& a, const SymbolId& b) { return a.name != b.name; }
inline bool operator<(const SymbolId& a, const SymbolId& b) { return a.name < b.name; }

// The ten Greek names admitted by the perturbation alphabet, written as
// ASCII names everywhere except LaTeX output.
inline const std::vector<std::string>& greek_symbol_names() {
  static const std::vector<std::string> names = {
      "alpha", "beta", "gamma", "delta", "epsilon",
      "zeta",  "eta",  "theta", "lambda", "mu"};
  return names;
}

inline bool is_greek_name(const std::string& n) {
  const auto& g = greek_symbol_names();
  return std::find(g.begin(), g.end(), n) != g.end();
}

inline SymbolId make_symbol(std::string name, SymbolRole role = SymbolRole::Variable) {
  Alphabet a = is_greek_name(name) ? Alphabet::Greek : Alphabet::English;
  return SymbolId{std::move(name), a, role};
}

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnevaluableNode : EvalError {
  using EvalError::EvalError;
};
struct DomainError : EvalError {
  using EvalError::EvalError;
};

// Enumerator order doubles as the canonical node ordering.
enum class NodeKind {
  Integer,
  Symbol,
  Cos,
  Sin,
  Exp,
  Log,
  Sum,
  Product,
  Power,
  Derivative,
  Integral,
  FunctionApp,
};

class Expr {
 public:
  Expr() : Expr(integer(0)) {}

  static Expr integer(long long v) {
    Node n;
    n.kind = NodeKind::Integer;
    n.value = v;
    return Expr(std::move(n));
  }

  static Expr symbol(SymbolId s) {
    Node n;
    n.kind = NodeKind::Symbol;
    n.sym = std::move(s);
    return Expr(std::move(n));
  }

  static Expr symbol(std::string name) { return symbol(make_symbol(std::move(name))); }

  static Expr sum(std::vector<Expr> operands) {
    std::vector<Expr> flat;
    for (auto& op : operands) {
      if (op.kind() == NodeKind::Sum)
        flat.insert(flat.end(), op.operands().begin(), op.operands().end());
      else
        flat.push_back(std::move(op));
    }
    long long constant = 0;
    std::vector<Expr> terms;
    for (auto& t : flat) {
      if (t.kind() == NodeKind::Integer)
        constant += t.int_value();
      else
        terms.push_back(std::move(t));
    }
    if (constant != 0) terms.push_back(integer(constant));
    if (terms.empty()) return integer(0);
    std::sort(terms.begin(), terms.end(),
              [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
    if (terms.size() == 1) return terms.front();
    Node n;
    n.kind = NodeKind::Sum;
    n.kids = std::move(terms);
    return Expr(std::move(n));
  }

  static Expr product(std::vector<Expr> operands) {
    std::vector<Expr> flat;
    for (auto& op : operands) {
      if (op.kind() == NodeKind::Product)
        flat.insert(flat.end(), op.operands().begin(), op.operands().end());
      else
        flat.push_back(std::move(op));
    }
    long long numerator = 1, denominator = 1;
    std::vector<Expr> factors;
    for (auto& f : flat) {
      if (f.kind() == NodeKind::Integer) {
        numerator *= f.int_value();
      } else if (f.kind() == NodeKind::Power && f.operands()[0].kind() == NodeKind::Integer &&
                 f.operands()[1].kind() == NodeKind::Integer &&
                 f.operands()[1].int_value() == -1 && f.operands()[0].int_value() != 0) {
        denominator *= f.operands()[0].int_value();
      } else {
        factors.push_back(std::move(f));
      }
    }
    if (numerator == 0) return integer(0);
    if (denominator < 0) numerator = -numerator, denominator = -denominator;
    long long g = std::gcd(numerator, denominator);
    numerator /= g;
    denominator /= g;
    if (denominator != 1)
      factors.push_back(power(integer(denominator), integer(-1)));
    if (numerator != 1) factors.push_back(integer(numerator));
    if (factors.empty()) return integer(1);
    std::sort(factors.begin(), factors.end(),
              [](const Expr& a, const Expr& b) { return compare(a, b) < 0; });
    if (factors.size() == 1) return factors.front();
    Node n;
    n.kind = NodeKind::Product;
    n.kids = std::move(factors);
    return Expr(std::move(n));
  }

  static Expr power(Expr base, Expr exponent) {
    if (exponent.kind() == NodeKind::Integer && exponent.int_value() == 1) return base;
    if (exponent.kind() == NodeKind::Integer && exponent.int_value() == 0) return integer(1);
    if (base.kind() == NodeKind::Integer && base.int_value() == 1) return integer(1);
    Node n;
    n.kind = NodeKind::Power;
    n.kids = {std::move(base), std::move(exponent)};
    return Expr(std::move(n));
  }

  static Expr cos(Expr a) { return unary(NodeKind::Cos, std::move(a)); }
  static Expr sin(Expr a) { return unary(NodeKind::Sin, std::move(a)); }
  static Expr exp(Expr a) { return unary(NodeKind::Exp, std::move(a)); }
  static Expr log(Expr a) { return unary(NodeKind::Log, std::move(a)); }

  static Expr derivative(Expr body, SymbolId v) {
    Node n;
    n.kind = NodeKind::Derivative;
    n.sym = std::move(v);
    n.kids = {std::move(body)};
    return Expr(std::move(n));
  }

  static Expr integral(Expr body, SymbolId v) {
    Node n;
    n.kind = NodeKind::Integral;
    n.sym = std::move(v);
    n.kids = {std::move(body)};
    return Expr(std::move(n));
  }

  static Expr function_app(SymbolId name, std::vector<SymbolId> args) {
    name.role = SymbolRole::FunctionName;
    Node n;
    n.kind = NodeKind::FunctionApp;
    n.sym = std::move(name);
    for (auto& a : args) n.kids.push_back(symbol(std::move(a)));
    return Expr(std::move(n));
  }

  NodeKind kind() const { return node_->kind; }
  long long int_value() const { return node_->value; }
  const SymbolId& symbol_id() const { return node_->sym; }
  const SymbolId& bound_var() const { return node_->sym; }
  const SymbolId& func_name() const { return node_->sym; }
  const std::vector<Expr>& operands() const { return node_->kids; }

  bool is_integer(long long v) const {
    return kind() == NodeKind::Integer && int_value() == v;
  }

  static int compare(const Expr& a, const Expr& b) {
    if (a.node_ == b.node_) return 0;
    if (a.kind() != b.kind())
      return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
    switch (a.kind()) {
      case NodeKind::Integer:
        if (a.int_value() != b.int_value()) return a.int_value() < b.int_value() ? -1 : 1;
        return 0;
      case NodeKind::Symbol:
        return a.symbol_id().name.compare(b.symbol_id().name) < 0   ? -1
               : a.symbol_id().name.compare(b.symbol_id().name) > 0 ? 1
                                                                    : 0;
      case NodeKind::Derivative:
      case NodeKind::Integral:
      case NodeKind::FunctionApp: {
        int c = a.node_->sym.name.compare(b.node_->sym.name);
        if (c != 0) return c < 0 ? -1 : 1;
        break;
      }
      default:
        break;
    }
    const auto& ka = a.operands();
    const auto& kb = b.operands();
    size_t n = std::min(ka.size(), kb.size());
    for (size_t i = 0; i < n; ++i) {
      int c = compare(ka[i], kb[i]);
      if (c != 0) return c;
    }
    if (ka.size() != kb.size()) return ka.size() < kb.size() ? -1 : 1;
    return 0;
  }

  friend bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }
  friend bool operator!=(const Expr& a, const Expr& b) { return compare(a, b) != 0; }
  friend bool operator<(const Expr& a, const Expr& b) { return compare(a, b) < 0; }

  int node_count() const {
    int n = 1;
    for (const auto& k : operands()) n += k.node_count();
    return n;
  }

  // True when `pattern` occurs as a subtree (or as a bound variable /
  // function argument symbol).
  bool contains(const Expr& pattern) const {
    if (*this == pattern) return true;
    if (pattern.kind() == NodeKind::Symbol &&
        (kind() == NodeKind::Derivative || kind() == NodeKind::Integral) &&
        bound_var() == pattern.symbol_id())
      return true;
    for (const auto& k : operands())
      if (k.contains(pattern)) return true;
    return false;
  }

 private:
  struct Node {
    NodeKind kind = NodeKind::Integer;
    long long value = 0;
    SymbolId sym;
    std::vector<Expr> kids;
  };

  explicit Expr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

  static Expr unary(NodeKind k, Expr a) {
    Node n;
    n.kind = k;
    n.kids = {std::move(a)};
    return Expr(std::move(n));
  }

  std::shared_ptr<const Node> node_;
};

inline Expr operator+(const Expr& a, const Expr& b) { return Expr::sum({a, b}); }
inline Expr operator*(const Expr& a, const Expr& b) { return Expr::product({a, b}); }
inline Expr operator-(const Expr& a) { return Expr::product({Expr::integer(-1), a}); }
inline Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }
inline Expr reciprocal(const Expr& a) { return Expr::power(a, Expr::integer(-1)); }
inline Expr operator/(const Expr& a, const Expr& b) { return a * reciprocal(b); }

// Rebuilds the tree bottom-up through the canonicalizing constructors.
// Exprs are canonical by construction, so this is idempotent.
inline Expr canonicalize(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Integer:
    case NodeKind::Symbol:
      return e;
    case NodeKind::Sum: {
      std::vector<Expr> ops;
      for (const auto& k : e.operands()) ops.push_back(canonicalize(k));
      return Expr::sum(std::move(ops));
    }
    case NodeKind::Product: {
      std::vector<Expr> ops;
      for (const auto& k : e.operands()) ops.push_back(canonicalize(k));
      return Expr::product(std::move(ops));
    }
    case NodeKind::Power:
      return Expr::power(canonicalize(e.operands()[0]), canonicalize(e.operands()[1]));
    case NodeKind::Cos:
      return Expr::cos(canonicalize(e.operands()[0]));
    case NodeKind::Sin:
      return Expr::sin(canonicalize(e.operands()[0]));
    case NodeKind::Exp:
      return Expr::exp(canonicalize(e.operands()[0]));
    case NodeKind::Log:
      return Expr::log(canonicalize(e.operands()[0]));
    case NodeKind::Derivative:
      return Expr::derivative(canonicalize(e.operands()[0]), e.bound_var());
    case NodeKind::Integral:
      return Expr::integral(canonicalize(e.operands()[0]), e.bound_var());
    case NodeKind::FunctionApp:
      return e;
  }
  return e;
}

inline void collect_free_symbols(const Expr& e, std::set<SymbolId>& out) {
  switch (e.kind()) {
    case NodeKind::Symbol:
      if (e.symbol_id().role == SymbolRole::Variable) out.insert(e.symbol_id());
      return;
    case NodeKind::Derivative:
    case NodeKind::Integral:
      out.insert(e.bound_var());
      break;
    default:
      break;
  }
  for (const auto& k : e.operands()) collect_free_symbols(k, out);
}

inline std::set<SymbolId> free_symbols(const Expr& e) {
  std::set<SymbolId> out;
  collect_free_symbols(e, out);
  return out;
}

// Replaces every maximal subtree equal to `pattern` by `replacement`.
// Symbol patterns also rename bound variables and function arguments when
// the replacement is itself a symbol.
inline Expr substitute(const Expr& e, const Expr& pattern, const Expr& replacement) {
  if (e == pattern) return replacement;
  const bool sym_rename = pattern.kind() == NodeKind::Symbol &&
                          replacement.kind() == NodeKind::Symbol;
  switch (e.kind()) {
    case NodeKind::Integer:
    case NodeKind::Symbol:
      return e;
    case NodeKind::Sum: {
      std::vector<Expr> ops;
      for (const auto& k : e.operands()) ops.push_back(substitute(k, pattern, replacement));
      return Expr::sum(std::move(ops));
    }
    case NodeKind::Product: {
      std::vector<Expr> ops;
      for (const auto& k : e.operands()) ops.push_back(substitute(k, pattern, replacement));
      return Expr::product(std::move(ops));
    }
    case NodeKind::Power:
      return Expr::power(substitute(e.operands()[0], pattern, replacement),
                         substitute(e.operands()[1], pattern, replacement));
    case NodeKind::Cos:
      return Expr::cos(substitute(e.operands()[0], pattern, replacement));
    case NodeKind::Sin:
      return Expr::sin(substitute(e.operands()[0], pattern, replacement));
    case NodeKind::Exp:
      return Expr::exp(substitute(e.operands()[0], pattern, replacement));
    case NodeKind::Log:
      return Expr::log(substitute(e.operands()[0], pattern, replacement));
    case NodeKind::Derivative:
    case NodeKind::Integral: {
      SymbolId v = e.bound_var();
      if (sym_rename && v == pattern.symbol_id()) v = replacement.symbol_id();
      Expr body = substitute(e.operands()[0], pattern, replacement);
      return e.kind() == NodeKind::Derivative ? Expr::derivative(std::move(body), std::move(v))
                                              : Expr::integral(std::move(body), std::move(v));
    }
    case NodeKind::FunctionApp: {
      if (!sym_rename) return e;
      std::vector<SymbolId> args;
      bool changed = false;
      for (const auto& a : e.operands()) {
        SymbolId s = a.symbol_id();
        if (s == pattern.symbol_id()) {
          s = replacement.symbol_id();
          changed = true;
        }
        args.push_back(std::move(s));
      }
      if (!changed) return e;
      return Expr::function_app(e.func_name(), std::move(args));
    }
  }
  return e;
}

inline double eval_numeric(const Expr& e, const std::map<SymbolId, double>& env) {
  switch (e.kind()) {
    case NodeKind::Integer:
      return static_cast<double>(e.int_value());
    case NodeKind::Symbol: {
      auto it = env.find(e.symbol_id());
      if (it == env.end()) throw EvalError("unbound symbol: " + e.symbol_id().name);
      return it->second;
    }
    case NodeKind::Sum: {
      double s = 0;
      for (const auto& k : e.operands()) s += eval_numeric(k, env);
      return s;
    }
    case NodeKind::Product: {
      double p = 1;
      for (const auto& k : e.operands()) p *= eval_numeric(k, env);
      return p;
    }
    case NodeKind::Power: {
      double b = eval_numeric(e.operands()[0], env);
      double x = eval_numeric(e.operands()[1], env);
      if (b == 0.0 && x < 0.0) throw DomainError("0 raised to a negative power");
      double r = std::pow(b, x);
      if (std::isnan(r)) throw DomainError("power outside the real domain");
      return r;
    }
    case NodeKind::Cos:
      return std::cos(eval_numeric(e.operands()[0], env));
    case NodeKind::Sin:
      return std::sin(eval_numeric(e.operands()[0], env));
    case NodeKind::Exp:
      return std::exp(eval_numeric(e.operands()[0], env));
    case NodeKind::Log: {
      double a = eval_numeric(e.operands()[0], env);
      if (a <= 0.0) throw DomainError("log of a non-positive value");
      return std::log(a);
    }
    case NodeKind::Derivative:
    case NodeKind::Integral:
    case NodeKind::FunctionApp:
      throw UnevaluableNode("cannot evaluate unevaluated calculus or opaque function node");
  }
  throw EvalError("unreachable");
}

struct Equation {
  Expr lhs;
  Expr rhs;

  friend bool operator==(const Equation& a, const Equation& b) {
    return a.lhs == b.lhs && a.rhs == b.rhs;
  }
  friend bool operator!=(const Equation& a, const Equation& b) { return !(a == b); }
};

inline std::set<SymbolId> free_symbols(const Equation& eq) {
  std::set<SymbolId> out;
  collect_free_symbols(eq.lhs, out);
  collect_free_symbols(eq.rhs, out);
  return out;
}

inline int node_count(const Equation& eq) {
  return eq.lhs.node_count() + eq.rhs.node_count();
}

}  // namespace derivforge
