#pragma once

// Next-equation-prediction examples for the two task variants: structured
// derivations and direct calculus, including negative generation and
// linearization.

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "derivforge/derivation.hpp"
#include "derivforge/latex.hpp"

namespace derivforge {

struct NegativeGenerationFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoCandidates : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IntegrationUnsupported : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegeneratePositive : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TaskKind { Structured, Calculus };
enum class CalcMode { Diff, Int };
enum class CalcDifficulty { Standard, Easy };
enum class Which { Positive, Negative };

// A candidate final item: an equation for structured derivations, an
// expression for direct calculus (an equation after the EC perturbation).
using Candidate = std::variant<Expr, Equation>;

inline std::string candidate_latex(const Candidate& c) {
  return std::holds_alternative<Expr>(c) ? to_latex(std::get<Expr>(c))
                                         : to_latex(std::get<Equation>(c));
}

inline bool candidates_equal(const Candidate& a, const Candidate& b) {
  if (a.index() != b.index()) return false;
  if (std::holds_alternative<Expr>(a)) return std::get<Expr>(a) == std::get<Expr>(b);
  return std::get<Equation>(a) == std::get<Equation>(b);
}

struct TaskExamplePair {
  std::string id;
  TaskKind task = TaskKind::Structured;
  int steps_total = 0;  // structured: 2|3|4
  CalcMode mode = CalcMode::Diff;
  CalcDifficulty difficulty = CalcDifficulty::Standard;

  // structured context: steps 1..n-1
  std::vector<DerivationStep> context;
  std::optional<Annotation> final_annotation;
  std::optional<Annotation> negative_annotation;  // AR provenance

  // direct-calculus context
  std::optional<Candidate> premise;
  std::optional<SymbolId> variable;

  Candidate positive = Expr::integer(0);
  Candidate negative = Expr::integer(0);

  std::string perturbation;  // "", "vr", "ee", "ar", "ec"
  std::string source_id;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Damerau-Levenshtein distance, optimal-string-alignment variant:
// insert / delete / substitute / adjacent transpose, no re-edits of
// transposed substrings.

inline int damerau_levenshtein(std::string_view a, std::string_view b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      int cost = a[i - 1] == b[j - 1] ? 0 : 1;
      int best = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
        best = std::min(best, d[i - 2][j - 2] + 1);
      d[i][j] = best;
    }
  }
  return d[n][m];
}

// ---------------------------------------------------------------------------
// Structured derivations.

// Samples a valid alternative (operator, operands) over the derivation's
// context equations, rejecting results canonically equal to the positive.
// Returns the alternative annotation (stored for AR) and its equation.
inline std::pair<Annotation, Equation> generate_negative_equation(const Derivation& d,
                                                                  Rng& rng) {
  if (d.steps.size() < 2)
    throw std::invalid_argument("generate_negative_equation: derivation too short");
  std::vector<DerivationStep> context(d.steps.begin(), d.steps.end() - 1);
  const Annotation& truth_ann = d.steps.back().annotation;
  const Equation& positive = d.steps.back().equation;
  GenHyperParams hp = d.hyperparams;
  hp.p0 = 0;  // negatives always apply an operation to a previous equation
  for (int attempt = 0; attempt < 2000; ++attempt) {
    auto s = step(context, hp, rng);
    if (!s) continue;
    if (s->annotation == truth_ann) continue;
    if (s->equation == positive) continue;
    return {std::move(s->annotation), std::move(s->equation)};
  }
  throw NegativeGenerationFailed("no valid alternative final equation found");
}

// Separates the final step: context = steps 1..n-1, final annotation and
// positive from step n, negative from an alternative final operation.
inline TaskExamplePair build_structured_pair(const Derivation& d, Rng& rng) {
  if (d.steps.size() < 2 || d.steps.size() > 4)
    throw std::invalid_argument("build_structured_pair: derivation length must be 2..4");
  TaskExamplePair x;
  x.task = TaskKind::Structured;
  x.steps_total = static_cast<int>(d.steps.size());
  x.context.assign(d.steps.begin(), d.steps.end() - 1);
  x.final_annotation = d.steps.back().annotation;
  x.positive = d.steps.back().equation;
  auto [ann, eq] = generate_negative_equation(d, rng);
  x.negative_annotation = std::move(ann);
  x.negative = std::move(eq);
  x.seed = d.seed;
  return x;
}

// ---------------------------------------------------------------------------
// Direct calculus.

namespace detail {

inline Expr apply_calc(CalcMode mode, const Expr& e, const SymbolId& v) {
  if (mode == CalcMode::Diff) return differentiate(e, v);
  auto r = integrate(e, v);
  if (!r) throw IntegrationUnsupported("no integration rule for the premise");
  return *r;
}

}  // namespace detail

// Distractor pool: the operation applied with respect to the premise's
// other variables, plus the operation applied to fresh random expressions
// over the same symbol set.
inline std::vector<Expr> candidate_negatives(const Expr& premise, const SymbolId& v,
                                             CalcMode mode, Rng& rng, int fresh_count = 5) {
  Expr truth = detail::apply_calc(mode, premise, v);
  std::vector<Expr> out;
  auto push_unique = [&](const Expr& e) {
    if (e == truth) return;
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
  };
  auto fs = free_symbols(premise);
  std::vector<SymbolId> symbols(fs.begin(), fs.end());
  for (const auto& u : symbols) {
    if (u == v) continue;
    if (mode == CalcMode::Diff) {
      push_unique(differentiate(premise, u));
    } else if (auto r = integrate(premise, u)) {
      push_unique(*r);
    }
  }
  for (int k = 0; k < fresh_count; ++k) {
    Expr fresh = generate_premise_rhs(symbols, 3, rng);
    if (mode == CalcMode::Diff) {
      push_unique(differentiate(fresh, v));
    } else if (auto r = integrate(fresh, v)) {
      push_unique(*r);
    }
  }
  if (out.empty()) throw NoCandidates("all candidates collapsed to the ground truth");
  return out;
}

// The negative is the candidate at minimum positive Damerau-Levenshtein
// distance from the ground-truth rendering; ties break by string order.
inline Expr rank_negative(const Expr& positive, const std::vector<Expr>& candidates) {
  std::string truth = to_latex(positive);
  std::optional<Expr> best;
  int best_dist = 0;
  std::string best_str;
  for (const auto& c : candidates) {
    std::string s = to_latex(c);
    int dist = damerau_levenshtein(truth, s);
    if (dist == 0) continue;
    if (!best || dist < best_dist || (dist == best_dist && s < best_str)) {
      best = c;
      best_dist = dist;
      best_str = s;
    }
  }
  if (!best) throw NoCandidates("no candidate at positive distance");
  return *best;
}

inline TaskExamplePair build_calculus_pair(const Expr& premise, CalcMode mode,
                                           CalcDifficulty difficulty, Rng& rng) {
  auto fs = free_symbols(premise);
  if (difficulty == CalcDifficulty::Standard && fs.size() < 2)
    throw std::invalid_argument("standard difficulty requires >= 2 free variables");
  if (difficulty == CalcDifficulty::Easy && fs.size() != 1)
    throw std::invalid_argument("easy difficulty requires exactly 1 free variable");
  std::vector<SymbolId> symbols(fs.begin(), fs.end());
  SymbolId v = symbols[rng.below(symbols.size())];
  Expr positive = detail::apply_calc(mode, premise, v);
  if (positive == premise) throw DegeneratePositive("operation left the premise unchanged");
  Expr negative = rank_negative(positive, candidate_negatives(premise, v, mode, rng));
  TaskExamplePair x;
  x.task = TaskKind::Calculus;
  x.mode = mode;
  x.difficulty = difficulty;
  x.premise = Candidate(premise);
  x.variable = v;
  x.positive = Candidate(std::move(positive));
  x.negative = Candidate(std::move(negative));
  return x;
}

// ---------------------------------------------------------------------------
// Linearization: "[annotation, equation]" steps comma separated, components
// [SEP] separated; direct calculus is premise [SEP] variable [SEP] candidate.

inline std::pair<std::string, bool> linearize(const TaskExamplePair& x, Which which) {
  const Candidate& cand = which == Which::Positive ? x.positive : x.negative;
  std::string out;
  if (x.task == TaskKind::Structured) {
    for (std::size_t i = 0; i < x.context.size(); ++i) {
      if (i) out += ", ";
      out += "[" + render_annotation(x.context[i].annotation) + ", " +
             to_latex(x.context[i].equation) + "]";
    }
    out += " [SEP] " + render_annotation(*x.final_annotation);
    out += " [SEP] " + candidate_latex(cand);
  } else {
    out = candidate_latex(*x.premise);
    out += " [SEP] " + detail::symbol_latex(*x.variable);
    out += " [SEP] " + candidate_latex(cand);
  }
  return {std::move(out), which == Which::Positive};
}

}  // namespace derivforge
