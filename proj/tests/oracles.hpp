#pragma once

// Independent oracles used by the test suite: random expression generation,
// central finite differences, a brute-force dependency-closure computation,
// and a brute-force edit-sequence search for the edit distance.

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "derivforge/derivation.hpp"
#include "derivforge/expr.hpp"
#include "derivforge/rng.hpp"

namespace oracles {

using namespace derivforge;

// --------------------------------------------------------------------------
// Random expression trees. `numeric_only` excludes Derivative / Integral /
// FunctionApp so eval_numeric is total on the result.

inline Expr random_expr(Rng& rng, int depth, bool numeric_only,
                        const std::vector<SymbolId>& symbols) {
  if (depth <= 0 || rng.below(4) == 0) {
    if (rng.below(3) == 0)
      return Expr::integer(static_cast<long long>(rng.below(7)) - 3);
    return Expr::symbol(rng.pick(symbols));
  }
  std::size_t kinds = numeric_only ? 8 : 10;
  switch (rng.below(kinds)) {
    case 0:
      return random_expr(rng, depth - 1, numeric_only, symbols) +
             random_expr(rng, depth - 1, numeric_only, symbols);
    case 1:
      return random_expr(rng, depth - 1, numeric_only, symbols) -
             random_expr(rng, depth - 1, numeric_only, symbols);
    case 2:
      return random_expr(rng, depth - 1, numeric_only, symbols) *
             random_expr(rng, depth - 1, numeric_only, symbols);
    case 3:
      return Expr::power(random_expr(rng, depth - 1, numeric_only, symbols),
                         Expr::integer(static_cast<long long>(rng.below(3)) + 2));
    case 4:
      return Expr::cos(random_expr(rng, depth - 1, numeric_only, symbols));
    case 5:
      return Expr::sin(random_expr(rng, depth - 1, numeric_only, symbols));
    case 6:
      return Expr::exp(random_expr(rng, depth - 1, numeric_only, symbols));
    case 7:
      return Expr::log(random_expr(rng, depth - 1, numeric_only, symbols));
    case 8: {
      Expr body = random_expr(rng, depth - 1, numeric_only, symbols);
      return rng.below(2) ? Expr::derivative(body, rng.pick(symbols))
                          : Expr::integral(body, rng.pick(symbols));
    }
    default: {
      std::set<SymbolId> args;
      std::size_t n = 1 + rng.below(3);
      while (args.size() < n) args.insert(rng.pick(symbols));
      return Expr::function_app(make_symbol("F" + std::to_string(rng.below(5)),
                                            SymbolRole::FunctionName),
                                std::vector<SymbolId>(args.begin(), args.end()));
    }
  }
}

// Environment with values away from obvious singularities.
inline std::map<SymbolId, double> random_env(Rng& rng, const std::set<SymbolId>& symbols) {
  std::map<SymbolId, double> env;
  for (const auto& s : symbols) env[s] = 0.3 + rng.real() * 1.4;  // in [0.3, 1.7]
  return env;
}

// --------------------------------------------------------------------------
// Central finite differences.

inline double finite_difference(const Expr& e, const SymbolId& v,
                                std::map<SymbolId, double> env, double h = 1e-5) {
  double x = env.at(v);
  env[v] = x + h;
  double hi = eval_numeric(e, env);
  env[v] = x - h;
  double lo = eval_numeric(e, env);
  return (hi - lo) / (2 * h);
}

inline bool close_rel(double a, double b, double rel) {
  double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
  return std::fabs(a - b) <= rel * scale;
}

// --------------------------------------------------------------------------
// Dependency closure by exhaustive backward marking, independent of
// extract_derivation's traversal.

inline std::set<int> closure_oracle(const std::vector<DerivationStep>& chain, int final) {
  std::set<int> closure = {final};
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i : std::set<int>(closure)) {
      const Annotation& a = chain[static_cast<std::size_t>(i)].annotation;
      for (auto ref : {a.eq1, a.eq2})
        if (ref && closure.insert(*ref - 1).second) changed = true;
    }
  }
  return closure;
}

// --------------------------------------------------------------------------
// Brute-force edit-sequence search: iterative deepening over edit scripts of
// insert / delete / substitute / adjacent transpose applied left to right,
// never revisiting transposed characters (optimal string alignment).

namespace detail {

inline bool editable_within(const char* a, std::size_t n, const char* b, std::size_t m,
                            int budget) {
  while (n > 0 && m > 0 && *a == *b) ++a, --n, ++b, --m;
  if (n == 0) return static_cast<int>(m) <= budget;
  if (m == 0) return static_cast<int>(n) <= budget;
  if (budget == 0) return false;
  // substitute a[0] -> b[0]
  if (editable_within(a + 1, n - 1, b + 1, m - 1, budget - 1)) return true;
  // delete a[0]
  if (editable_within(a + 1, n - 1, b, m, budget - 1)) return true;
  // insert b[0]
  if (editable_within(a, n, b + 1, m - 1, budget - 1)) return true;
  // transpose a[0..1] when it yields b[0..1]
  if (n >= 2 && m >= 2 && a[0] == b[1] && a[1] == b[0] &&
      editable_within(a + 2, n - 2, b + 2, m - 2, budget - 1))
    return true;
  return false;
}

}  // namespace detail

inline int edit_distance_oracle(const std::string& a, const std::string& b) {
  int cap = static_cast<int>(std::max(a.size(), b.size()));
  for (int k = 0; k <= cap; ++k)
    if (detail::editable_within(a.data(), a.size(), b.data(), b.size(), k)) return k;
  return cap;
}

// All strings of length <= max_len over the given alphabet.
inline std::vector<std::string> all_strings(const std::string& alphabet, int max_len) {
  std::vector<std::string> out = {""};
  std::size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (char c : alphabet) out.push_back(out[i] + c);
    begin = end;
  }
  return out;
}

}  // namespace oracles
