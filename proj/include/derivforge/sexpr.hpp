#pragma once

// Lossless machine round-trip format for expressions and equations.
//
// Grammar (bit-exact): atoms are integers or symbol names; forms:
//   (+ e e+) (* e e+) (^ e e) (cos e) (sin e) (exp e) (log e)
//   (deriv e sym) (int e sym) (fn NAME sym+) (= e e)
// UTF-8; Greek symbols are written by their ASCII names ("alpha"...).

#include <cctype>
#include <string>
#include <string_view>
#include <variant>

#include "derivforge/expr.hpp"

namespace derivforge {

struct ParseError : std::runtime_error {
  ParseError(std::size_t off, std::string exp)
      : std::runtime_error("parse error at offset " + std::to_string(off) +
                           ": expected " + exp),
        offset(off),
        expected(std::move(exp)) {}
  std::size_t offset;
  std::string expected;
};

inline std::string to_sexpr(const Expr& e) {
  switch (e.kind()) {
    case NodeKind::Integer:
      return std::to_string(e.int_value());
    case NodeKind::Symbol:
      return e.symbol_id().name;
    case NodeKind::Sum:
    case NodeKind::Product: {
      std::string out = e.kind() == NodeKind::Sum ? "(+" : "(*";
      for (const auto& k : e.operands()) out += " " + to_sexpr(k);
      return out + ")";
    }
    case NodeKind::Power:
      return "(^ " + to_sexpr(e.operands()[0]) + " " + to_sexpr(e.operands()[1]) + ")";
    case NodeKind::Cos:
      return "(cos " + to_sexpr(e.operands()[0]) + ")";
    case NodeKind::Sin:
      return "(sin " + to_sexpr(e.operands()[0]) + ")";
    case NodeKind::Exp:
      return "(exp " + to_sexpr(e.operands()[0]) + ")";
    case NodeKind::Log:
      return "(log " + to_sexpr(e.operands()[0]) + ")";
    case NodeKind::Derivative:
      return "(deriv " + to_sexpr(e.operands()[0]) + " " + e.bound_var().name + ")";
    case NodeKind::Integral:
      return "(int " + to_sexpr(e.operands()[0]) + " " + e.bound_var().name + ")";
    case NodeKind::FunctionApp: {
      std::string out = "(fn " + e.func_name().name;
      for (const auto& a : e.operands()) out += " " + a.symbol_id().name;
      return out + ")";
    }
  }
  return {};
}

inline std::string to_sexpr(const Equation& eq) {
  return "(= " + to_sexpr(eq.lhs) + " " + to_sexpr(eq.rhs) + ")";
}

namespace detail {

class SexprParser {
 public:
  explicit SexprParser(std::string_view s) : s_(s) {}

  std::variant<Expr, Equation> parse_any() {
    skip_ws();
    std::variant<Expr, Equation> result =
        peek_equation() ? std::variant<Expr, Equation>(parse_equation())
                        : std::variant<Expr, Equation>(parse_expr());
    skip_ws();
    if (pos_ != s_.size()) throw ParseError(pos_, "end of input");
    return result;
  }

  Equation parse_equation_only() {
    skip_ws();
    Equation eq = parse_equation();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError(pos_, "end of input");
    return eq;
  }

  Expr parse_expr_only() {
    skip_ws();
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError(pos_, "end of input");
    return e;
  }

 private:
  bool peek_equation() {
    // "(=" at the current position.
    std::size_t p = pos_;
    if (p < s_.size() && s_[p] == '(') {
      ++p;
      while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
      return p < s_.size() && s_[p] == '=';
    }
    return false;
  }

  Equation parse_equation() {
    expect('(');
    std::string op = parse_token();
    if (op != "=") throw ParseError(pos_, "'='");
    Expr lhs = parse_expr();
    Expr rhs = parse_expr();
    expect(')');
    return Equation{std::move(lhs), std::move(rhs)};
  }

  Expr parse_expr() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError(pos_, "expression");
    char c = s_[pos_];
    if (c == '(') return parse_form();
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) return parse_integer();
    if (std::isalpha(static_cast<unsigned char>(c)))
      return Expr::symbol(make_symbol(parse_token()));
    throw ParseError(pos_, "integer, symbol, or '('");
  }

  Expr parse_form() {
    expect('(');
    std::string head = parse_token();
    if (head == "+" || head == "*") {
      std::vector<Expr> ops;
      ops.push_back(parse_expr());
      ops.push_back(parse_expr());
      while (!peek_close()) ops.push_back(parse_expr());
      expect(')');
      return head == "+" ? Expr::sum(std::move(ops)) : Expr::product(std::move(ops));
    }
    if (head == "^") {
      Expr b = parse_expr();
      Expr e = parse_expr();
      expect(')');
      return Expr::power(std::move(b), std::move(e));
    }
    if (head == "cos" || head == "sin" || head == "exp" || head == "log") {
      Expr a = parse_expr();
      expect(')');
      if (head == "cos") return Expr::cos(std::move(a));
      if (head == "sin") return Expr::sin(std::move(a));
      if (head == "exp") return Expr::exp(std::move(a));
      return Expr::log(std::move(a));
    }
    if (head == "deriv" || head == "int") {
      Expr body = parse_expr();
      SymbolId v = make_symbol(parse_symbol_token());
      expect(')');
      return head == "deriv" ? Expr::derivative(std::move(body), std::move(v))
                             : Expr::integral(std::move(body), std::move(v));
    }
    if (head == "fn") {
      SymbolId name = make_symbol(parse_symbol_token(), SymbolRole::FunctionName);
      std::vector<SymbolId> args;
      args.push_back(make_symbol(parse_symbol_token()));
      while (!peek_close()) args.push_back(make_symbol(parse_symbol_token()));
      expect(')');
      return Expr::function_app(std::move(name), std::move(args));
    }
    throw ParseError(pos_, "operator head (+ * ^ cos sin exp log deriv int fn =)");
  }

  Expr parse_integer() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < s_.size() && s_[pos_] == '-') ++pos_;
    std::size_t digits = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ == digits) throw ParseError(start, "integer");
    return Expr::integer(std::stoll(std::string(s_.substr(start, pos_ - start))));
  }

  std::string parse_symbol_token() {
    skip_ws();
    std::size_t start = pos_;
    std::string t = parse_token();
    if (t.empty() || !std::isalpha(static_cast<unsigned char>(t[0])))
      throw ParseError(start, "symbol name");
    return t;
  }

  std::string parse_token() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
           s_[pos_] != '(' && s_[pos_] != ')')
      ++pos_;
    if (pos_ == start) throw ParseError(start, "token");
    return std::string(s_.substr(start, pos_ - start));
  }

  bool peek_close() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError(pos_, "')'");
    return s_[pos_] == ')';
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c)
      throw ParseError(pos_, std::string("'") + c + "'");
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::variant<Expr, Equation> parse_sexpr(std::string_view s) {
  return detail::SexprParser(s).parse_any();
}

inline Expr parse_expr_sexpr(std::string_view s) {
  return detail::SexprParser(s).parse_expr_only();
}

inline Equation parse_equation_sexpr(std::string_view s) {
  return detail::SexprParser(s).parse_equation_only();
}

}  // namespace derivforge
