#pragma once

// Deterministic dataset assembly: Table-1 split sizes, JSONL storage in both
// s-expression and LaTeX renderings, manifests with content checksums, and
// the perturbed / extrapolation views of the static test sets.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "derivforge/perturb.hpp"
#include "derivforge/sexpr.hpp"
#include "derivforge/task.hpp"
#include "json.hpp"

namespace derivforge {

struct SchemaError : std::runtime_error {
  std::size_t record;
  std::string field;
  SchemaError(std::size_t record_, std::string field_, const std::string& what_)
      : std::runtime_error("record " + std::to_string(record_) + ", field '" + field_ +
                           "': " + what_),
        record(record_),
        field(std::move(field_)) {}
};

struct WriteConflict : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Task variants and split sizes.

struct VariantSpec {
  std::string name;
  TaskKind task = TaskKind::Structured;
  int steps = 0;  // structured
  CalcMode mode = CalcMode::Diff;
  CalcDifficulty difficulty = CalcDifficulty::Standard;
  std::size_t train = 0, dev = 0, test = 0;
};

inline const std::vector<std::string>& all_variant_names() {
  static const std::vector<std::string> names = {"structured-2", "structured-3",
                                                 "structured-4", "calculus-diff",
                                                 "calculus-int"};
  return names;
}

inline VariantSpec variant_from_name(const std::string& name) {
  VariantSpec v;
  v.name = name;
  if (name == "structured-2" || name == "structured-3" || name == "structured-4") {
    v.task = TaskKind::Structured;
    v.steps = name.back() - '0';
    v.train = 20000, v.dev = 5000, v.test = 4000;
    return v;
  }
  if (name == "calculus-diff" || name == "calculus-int") {
    v.task = TaskKind::Calculus;
    v.mode = name == "calculus-diff" ? CalcMode::Diff : CalcMode::Int;
    v.train = 32000, v.dev = 8000, v.test = 4000;
    return v;
  }
  if (name == "calculus-diff-easy" || name == "calculus-int-easy") {
    v.task = TaskKind::Calculus;
    v.mode = name == "calculus-diff-easy" ? CalcMode::Diff : CalcMode::Int;
    v.difficulty = CalcDifficulty::Easy;
    v.train = 0, v.dev = 0, v.test = 1500;
    return v;
  }
  throw std::invalid_argument("unknown task variant: " + name);
}

inline std::size_t scaled_size(std::size_t full, double scale) {
  return full == 0 ? 0 : static_cast<std::size_t>(std::ceil(scale * static_cast<double>(full)));
}

// ---------------------------------------------------------------------------
// Parallelism helpers.

inline unsigned worker_count() {
  if (const char* env = std::getenv("DERIVFORGE_THREADS")) {
    long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

// Runs f(i) for i in [0, n); work is split into contiguous stripes.
template <class F>
inline void parallel_for(std::size_t n, F&& f) {
  unsigned workers = std::min<std::size_t>(worker_count(), n ? n : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        f(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// JSON serialization.

inline constexpr const char* kLabelConvention = "1=entailed,0=not_entailed";

inline nlohmann::json annotation_to_json(const Annotation& a) {
  nlohmann::json j;
  j["op"] = a.op;
  j["eq1"] = a.eq1 ? nlohmann::json(*a.eq1) : nlohmann::json();
  j["eq2"] = a.eq2 ? nlohmann::json(*a.eq2) : nlohmann::json();
  j["operand_sexpr"] = a.operand ? nlohmann::json(to_sexpr(*a.operand)) : nlohmann::json();
  return j;
}

inline Annotation annotation_from_json(const nlohmann::json& j, std::size_t record,
                                       const std::string& field) {
  if (!j.is_object() || !j.contains("op"))
    throw SchemaError(record, field, "annotation must be an object with an 'op' field");
  Annotation a;
  a.op = j.at("op").get<std::string>();
  if (j.contains("eq1") && !j.at("eq1").is_null()) a.eq1 = j.at("eq1").get<int>();
  if (j.contains("eq2") && !j.at("eq2").is_null()) a.eq2 = j.at("eq2").get<int>();
  if (j.contains("operand_sexpr") && !j.at("operand_sexpr").is_null()) {
    try {
      a.operand = parse_expr_sexpr(j.at("operand_sexpr").get<std::string>());
    } catch (const ParseError& e) {
      throw SchemaError(record, field + ".operand_sexpr", e.what());
    }
  }
  return a;
}

inline std::string candidate_sexpr(const Candidate& c) {
  return std::holds_alternative<Expr>(c) ? to_sexpr(std::get<Expr>(c))
                                         : to_sexpr(std::get<Equation>(c));
}

inline std::string task_field(const TaskExamplePair& x) {
  if (x.task == TaskKind::Structured) return "structured-" + std::to_string(x.steps_total);
  return x.mode == CalcMode::Diff ? "calculus-diff" : "calculus-int";
}

inline nlohmann::json pair_to_json(const TaskExamplePair& x) {
  nlohmann::json j;
  j["id"] = x.id;
  j["task"] = task_field(x);
  j["difficulty"] = x.difficulty == CalcDifficulty::Easy ? "easy" : "standard";
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : x.context) {
    steps.push_back({{"annotation", annotation_to_json(s.annotation)},
                     {"eq_sexpr", to_sexpr(s.equation)},
                     {"eq_latex", to_latex(s.equation)}});
  }
  j["steps"] = std::move(steps);
  j["final_annotation"] =
      x.final_annotation ? annotation_to_json(*x.final_annotation) : nlohmann::json();
  j["negative_annotation"] =
      x.negative_annotation ? annotation_to_json(*x.negative_annotation) : nlohmann::json();
  j["premise_sexpr"] = x.premise ? nlohmann::json(candidate_sexpr(*x.premise)) : nlohmann::json();
  j["premise_latex"] = x.premise ? nlohmann::json(candidate_latex(*x.premise)) : nlohmann::json();
  j["variable"] = x.variable ? nlohmann::json(x.variable->name) : nlohmann::json();
  j["positive_sexpr"] = candidate_sexpr(x.positive);
  j["positive_latex"] = candidate_latex(x.positive);
  j["negative_sexpr"] = candidate_sexpr(x.negative);
  j["negative_latex"] = candidate_latex(x.negative);
  j["label_convention"] = kLabelConvention;
  j["perturbation"] = x.perturbation;
  j["source_id"] = x.source_id;
  j["seed"] = x.seed;
  return j;
}

namespace detail {

inline Candidate candidate_from_sexpr(const std::string& s, std::size_t record,
                                      const std::string& field) {
  try {
    auto v = parse_sexpr(s);
    if (std::holds_alternative<Expr>(v)) return Candidate(std::get<Expr>(v));
    return Candidate(std::get<Equation>(v));
  } catch (const ParseError& e) {
    throw SchemaError(record, field, e.what());
  }
}

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* field,
                                           std::size_t record) {
  if (!j.contains(field)) throw SchemaError(record, field, "missing field");
  return j.at(field);
}

}  // namespace detail

inline TaskExamplePair pair_from_json(const nlohmann::json& j, std::size_t record = 0) {
  using detail::require_field;
  TaskExamplePair x;
  x.id = require_field(j, "id", record).get<std::string>();
  std::string task = require_field(j, "task", record).get<std::string>();
  if (task.rfind("structured-", 0) == 0) {
    x.task = TaskKind::Structured;
    x.steps_total = task.back() - '0';
  } else if (task == "calculus-diff" || task == "calculus-int") {
    x.task = TaskKind::Calculus;
    x.mode = task == "calculus-diff" ? CalcMode::Diff : CalcMode::Int;
  } else {
    throw SchemaError(record, "task", "unknown task variant: " + task);
  }
  x.difficulty = require_field(j, "difficulty", record).get<std::string>() == "easy"
                     ? CalcDifficulty::Easy
                     : CalcDifficulty::Standard;
  for (const auto& s : require_field(j, "steps", record)) {
    DerivationStep step;
    step.annotation = annotation_from_json(s.at("annotation"), record, "steps.annotation");
    try {
      step.equation = parse_equation_sexpr(s.at("eq_sexpr").get<std::string>());
    } catch (const ParseError& e) {
      throw SchemaError(record, "steps.eq_sexpr", e.what());
    }
    x.context.push_back(std::move(step));
  }
  if (x.task == TaskKind::Structured) {
    const auto& fa = require_field(j, "final_annotation", record);
    if (fa.is_null()) throw SchemaError(record, "final_annotation", "required for structured tasks");
    x.final_annotation = annotation_from_json(fa, record, "final_annotation");
    const auto& na = require_field(j, "negative_annotation", record);
    if (na.is_null())
      throw SchemaError(record, "negative_annotation", "required for structured tasks");
    x.negative_annotation = annotation_from_json(na, record, "negative_annotation");
  } else {
    const auto& pj = require_field(j, "premise_sexpr", record);
    if (pj.is_null()) throw SchemaError(record, "premise_sexpr", "required for calculus tasks");
    x.premise = detail::candidate_from_sexpr(pj.get<std::string>(), record, "premise_sexpr");
    const auto& vj = require_field(j, "variable", record);
    if (vj.is_null()) throw SchemaError(record, "variable", "required for calculus tasks");
    x.variable = make_symbol(vj.get<std::string>());
  }
  x.positive = detail::candidate_from_sexpr(
      require_field(j, "positive_sexpr", record).get<std::string>(), record, "positive_sexpr");
  x.negative = detail::candidate_from_sexpr(
      require_field(j, "negative_sexpr", record).get<std::string>(), record, "negative_sexpr");
  x.perturbation = require_field(j, "perturbation", record).get<std::string>();
  x.source_id = require_field(j, "source_id", record).get<std::string>();
  x.seed = require_field(j, "seed", record).get<std::uint64_t>();
  return x;
}

// ---------------------------------------------------------------------------
// JSONL storage, write-once unless forced.

inline void write_jsonl(const std::filesystem::path& path,
                        const std::vector<TaskExamplePair>& pairs, bool force = false) {
  if (!force && std::filesystem::exists(path))
    throw WriteConflict("refusing to overwrite " + path.string() + " without --force");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& x : pairs) out << pair_to_json(x).dump() << '\n';
}

inline std::vector<TaskExamplePair> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  std::vector<TaskExamplePair> out;
  std::string line;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    ++record;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(record, "<line>", e.what());
    }
    try {
      out.push_back(pair_from_json(j, record));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(record, "<record>", e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Content hashing: dedup key and manifest checksum (FNV-1a 64).

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Canonical serialization of the pair's mathematical content, excluding the
// id/seed bookkeeping so duplicates are caught across splits.
inline std::string pair_content_key(const TaskExamplePair& x) {
  std::string key = task_field(x);
  key += x.difficulty == CalcDifficulty::Easy ? "|easy" : "|std";
  for (const auto& s : x.context)
    key += "|" + render_annotation(s.annotation) + "|" + to_sexpr(s.equation);
  if (x.final_annotation) key += "|" + render_annotation(*x.final_annotation);
  if (x.negative_annotation) key += "|" + render_annotation(*x.negative_annotation);
  if (x.premise) key += "|" + candidate_sexpr(*x.premise);
  if (x.variable) key += "|" + x.variable->name;
  key += "|" + candidate_sexpr(x.positive) + "|" + candidate_sexpr(x.negative);
  return key;
}

// ---------------------------------------------------------------------------
// Dataset assembly.

struct DatasetManifest {
  std::string task;
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::size_t train = 0, dev = 0, test = 0;
  GenHyperParams hyperparams;
  std::string perturbation;  // "" for static sets
  std::string source_task;   // lineage for perturbed/extrapolation views
  std::string checksum;      // FNV-1a 64 over the concatenated JSONL lines
};

struct Dataset {
  std::vector<TaskExamplePair> train, dev, test;
  DatasetManifest manifest;
};

inline std::string dataset_checksum(const Dataset& d) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto* split : {&d.train, &d.dev, &d.test})
    for (const auto& x : *split) h = fnv1a64(pair_to_json(x).dump() + "\n", h);
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
  const auto& hp = m.hyperparams;
  return nlohmann::json{
      {"task", m.task},
      {"scale", m.scale},
      {"seed", m.seed},
      {"splits", {{"train", m.train}, {"dev", m.dev}, {"test", m.test}}},
      {"hyperparams",
       {{"p0", hp.p0},
        {"p1", hp.p1},
        {"p2", hp.p2},
        {"p_r", hp.p_r},
        {"p_e", hp.p_e},
        {"p_c", hp.p_c},
        {"p_s", hp.p_s},
        {"p_h", hp.p_h},
        {"max_nodes", hp.max_nodes},
        {"max_complexity", hp.max_complexity}}},
      {"perturbation", m.perturbation},
      {"source_task", m.source_task},
      {"checksum", m.checksum}};
}

inline void write_manifest(const std::filesystem::path& path, const DatasetManifest& m,
                           bool force = false) {
  if (!force && std::filesystem::exists(path))
    throw WriteConflict("refusing to overwrite " + path.string() + " without --force");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << manifest_to_json(m).dump(2) << '\n';
}

namespace detail {

// One record attempt, fully determined by (variant, base seed, index).
inline std::optional<TaskExamplePair> make_pair_for_index(const VariantSpec& v,
                                                          const GenHyperParams& hp,
                                                          std::uint64_t base_seed,
                                                          std::uint64_t index) {
  std::uint64_t rs = derive_seed(base_seed, index);
  if (v.task == TaskKind::Structured) {
    GenHyperParams local = hp;
    local.L_f = v.steps;
    try {
      Derivation d = generate_derivation(local, rs);
      Rng nrng(derive_seed(rs, 1));
      TaskExamplePair x = build_structured_pair(d, nrng);
      x.seed = rs;
      return x;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  Rng rng(rs);
  for (int attempt = 0; attempt < 200; ++attempt) {
    try {
      std::vector<SymbolId> vocab;
      if (v.difficulty == CalcDifficulty::Easy)
        vocab = {rng.pick(default_vocabulary())};
      else
        vocab = default_vocabulary();
      Expr rhs = generate_premise_rhs(vocab, hp.max_complexity, rng);
      std::size_t nvars = free_symbols(rhs).size();
      if (v.difficulty == CalcDifficulty::Standard && nvars < 2) continue;
      if (v.difficulty == CalcDifficulty::Easy && nvars != 1) continue;
      TaskExamplePair x = build_calculus_pair(rhs, v.mode, v.difficulty, rng);
      x.seed = rs;
      return x;
    } catch (const std::exception&) {
      continue;
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Fills train, then dev, then test from a deterministic stream of per-index
// records; batches are generated in parallel but consumed in index order, so
// the result is independent of thread count.
inline Dataset assemble(const std::string& variant_name, double scale, std::uint64_t seed,
                        const GenHyperParams& hp = GenHyperParams{}) {
  VariantSpec v = variant_from_name(variant_name);
  if (scale <= 0 || scale > 1) throw std::invalid_argument("scale must be in (0, 1]");
  std::size_t n_train = scaled_size(v.train, scale);
  std::size_t n_dev = scaled_size(v.dev, scale);
  std::size_t n_test = scaled_size(v.test, scale);
  std::size_t need = n_train + n_dev + n_test;

  std::vector<TaskExamplePair> accepted;
  accepted.reserve(need);
  std::set<std::uint64_t> seen;
  std::uint64_t index = 0;
  const std::size_t batch = std::max<std::size_t>(256, std::size_t(worker_count()) * 64);
  while (accepted.size() < need) {
    if (index > 64 * need + 100000)
      throw GenerationBudgetExceeded("dataset assembly exceeded its retry budget for " +
                                     variant_name);
    std::vector<std::optional<TaskExamplePair>> results(batch);
    parallel_for(batch, [&](std::size_t k) {
      results[k] = detail::make_pair_for_index(v, hp, seed, index + k);
    });
    for (auto& r : results) {
      if (accepted.size() >= need) break;
      if (!r) continue;
      std::uint64_t key = fnv1a64(pair_content_key(*r));
      if (!seen.insert(key).second) continue;
      accepted.push_back(std::move(*r));
    }
    index += batch;
  }

  Dataset d;
  auto take = [&](std::vector<TaskExamplePair>& out, std::size_t n, const char* split,
                  std::size_t offset) {
    out.assign(accepted.begin() + offset, accepted.begin() + offset + n);
    for (std::size_t i = 0; i < out.size(); ++i) {
      char idx[16];
      std::snprintf(idx, sizeof idx, "%06zu", i);
      out[i].id = variant_name + "-" + split + "-" + idx;
    }
  };
  take(d.train, n_train, "train", 0);
  take(d.dev, n_dev, "dev", n_train);
  take(d.test, n_test, "test", n_train + n_dev);
  d.manifest.task = variant_name;
  d.manifest.scale = scale;
  d.manifest.seed = seed;
  d.manifest.train = n_train;
  d.manifest.dev = n_dev;
  d.manifest.test = n_test;
  d.manifest.hyperparams = hp;
  d.manifest.checksum = dataset_checksum(d);
  return d;
}

// Applies one perturbation kind to every record; |output| = |input|.
inline std::vector<TaskExamplePair> perturb_records(const std::vector<TaskExamplePair>& in,
                                                    const std::string& kind) {
  std::vector<TaskExamplePair> out(in.size());
  parallel_for(in.size(), [&](std::size_t i) {
    Rng rng(derive_seed(in[i].seed, fnv1a64(kind)));
    out[i] = perturb_example(in[i], kind, rng);
  });
  return out;
}

// Step-count-reduced test sets for structured extrapolation (the s-1 and s-2
// report columns), same cardinality as the static test set, fresh seeds.
inline Dataset extrapolation_view(const std::string& variant_name, int minus, double scale,
                                  std::uint64_t seed, const GenHyperParams& hp = GenHyperParams{}) {
  VariantSpec v = variant_from_name(variant_name);
  if (v.task != TaskKind::Structured)
    throw std::invalid_argument("extrapolation views exist for structured tasks only");
  if (minus < 1 || v.steps - minus < 2)
    throw std::invalid_argument("reduced step count must stay in [2, steps)");
  std::string reduced = "structured-" + std::to_string(v.steps - minus);
  VariantSpec rv = variant_from_name(reduced);
  rv.train = rv.dev = 0;
  std::size_t n_test = scaled_size(v.test, scale);
  // reuse assemble's machinery by shrinking the reduced variant to test-only
  Dataset d;
  {
    std::vector<TaskExamplePair> accepted;
    std::set<std::uint64_t> seen;
    std::uint64_t base = derive_seed(seed, 0x1000 + static_cast<std::uint64_t>(minus));
    std::uint64_t index = 0;
    const std::size_t batch = std::max<std::size_t>(256, std::size_t(worker_count()) * 64);
    while (accepted.size() < n_test) {
      if (index > 64 * n_test + 100000)
        throw GenerationBudgetExceeded("extrapolation view exceeded its retry budget");
      std::vector<std::optional<TaskExamplePair>> results(batch);
      parallel_for(batch, [&](std::size_t k) {
        results[k] = detail::make_pair_for_index(rv, hp, base, index + k);
      });
      for (auto& r : results) {
        if (accepted.size() >= n_test) break;
        if (!r) continue;
        std::uint64_t key = fnv1a64(pair_content_key(*r));
        if (!seen.insert(key).second) continue;
        accepted.push_back(std::move(*r));
      }
      index += batch;
    }
    d.test = std::move(accepted);
    for (std::size_t i = 0; i < d.test.size(); ++i) {
      char idx[16];
      std::snprintf(idx, sizeof idx, "%06zu", i);
      d.test[i].id = variant_name + "-minus" + std::to_string(minus) + "-test-" + idx;
    }
  }
  d.manifest.task = variant_name + "-minus" + std::to_string(minus);
  d.manifest.scale = scale;
  d.manifest.seed = seed;
  d.manifest.test = n_test;
  d.manifest.hyperparams = hp;
  d.manifest.source_task = variant_name;
  d.manifest.checksum = dataset_checksum(d);
  return d;
}

// The easier single-variable calculus set (1.5k examples at full scale).
inline Dataset easy_calculus_view(CalcMode mode, double scale, std::uint64_t seed,
                                  const GenHyperParams& hp = GenHyperParams{}) {
  std::string name = mode == CalcMode::Diff ? "calculus-diff-easy" : "calculus-int-easy";
  Dataset d = assemble(name, scale, seed, hp);
  d.manifest.source_task = mode == CalcMode::Diff ? "calculus-diff" : "calculus-int";
  d.manifest.checksum = dataset_checksum(d);
  return d;
}

}  // namespace derivforge
