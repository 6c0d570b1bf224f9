#pragma once

// Scores externally produced prediction files: accuracy and F1, paired
// generalisation metrics over static/perturbed lineages, operator-frequency
// analyses, and the static-vs-perturbed delta grids.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "derivforge/dataset.hpp"

namespace derivforge {

struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LineageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptySubset : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One line of a prediction file: {"id": str, "variant": "pos"|"neg",
// "label": 0|1}.
struct Prediction {
  std::string id;
  bool positive_variant = true;
  int label = 0;
};

inline std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + " for reading");
  std::vector<Prediction> out;
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
    Prediction p;
    try {
      p.id = j.at("id").get<std::string>();
      std::string variant = j.at("variant").get<std::string>();
      if (variant != "pos" && variant != "neg")
        throw SchemaError(record, "variant", "must be 'pos' or 'neg'");
      p.positive_variant = variant == "pos";
      p.label = j.at("label").get<int>();
      if (p.label != 0 && p.label != 1)
        throw SchemaError(record, "label", "must be 0 or 1");
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(record, "<record>", e.what());
    }
    out.push_back(std::move(p));
  }
  return out;
}

// Emits the trivial always-entailed baseline for a gold set.
inline std::vector<Prediction> all_positive_baseline(const std::vector<TaskExamplePair>& gold) {
  std::vector<Prediction> out;
  out.reserve(2 * gold.size());
  for (const auto& x : gold) {
    out.push_back({x.id, true, 1});
    out.push_back({x.id, false, 1});
  }
  return out;
}

struct Scores {
  std::size_t total = 0;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0;
  double f1_positive = 0;
  double f1_macro = 0;
};

namespace detail {

inline double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  double denom = 2.0 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * tp / denom;
}

// id -> (pos prediction, neg prediction), with coverage validation.
inline std::map<std::string, std::pair<int, int>> index_predictions(
    const std::vector<Prediction>& preds, const std::vector<TaskExamplePair>& gold) {
  std::map<std::string, std::pair<int, int>> by_id;  // -1 = unseen
  for (const auto& x : gold) {
    if (!by_id.emplace(x.id, std::make_pair(-1, -1)).second)
      throw CoverageError("duplicate id in gold set: " + x.id);
  }
  for (const auto& p : preds) {
    auto it = by_id.find(p.id);
    if (it == by_id.end()) throw CoverageError("prediction for unknown id: " + p.id);
    int& slot = p.positive_variant ? it->second.first : it->second.second;
    if (slot != -1)
      throw CoverageError("duplicate prediction for id " + p.id +
                          (p.positive_variant ? " (pos)" : " (neg)"));
    slot = p.label;
  }
  for (const auto& [id, labels] : by_id) {
    if (labels.first == -1) throw CoverageError("missing pos prediction for id " + id);
    if (labels.second == -1) throw CoverageError("missing neg prediction for id " + id);
  }
  return by_id;
}

}  // namespace detail

// Accuracy over all sequences; F1 on the entailed class (each pair
// contributes one gold-1 pos sequence and one gold-0 neg sequence).
inline Scores score(const std::vector<Prediction>& preds,
                    const std::vector<TaskExamplePair>& gold) {
  auto by_id = detail::index_predictions(preds, gold);
  Scores s;
  for (const auto& [id, labels] : by_id) {
    // positive sequence: gold label 1
    if (labels.first == 1)
      ++s.tp;
    else
      ++s.fn;
    // negative sequence: gold label 0
    if (labels.second == 1)
      ++s.fp;
    else
      ++s.tn;
  }
  s.total = 2 * by_id.size();
  s.accuracy = s.total == 0 ? 0.0 : double(s.tp + s.tn) / double(s.total);
  s.f1_positive = detail::f1_from_counts(s.tp, s.fp, s.fn);
  double f1_negative = detail::f1_from_counts(s.tn, s.fn, s.fp);
  s.f1_macro = (s.f1_positive + f1_negative) / 2.0;
  return s;
}

// ---------------------------------------------------------------------------
// Paired generalisation metrics: static±, All, NotP.

struct PairedMetrics {
  double static_pm = 0;  // both static sequences of the pair correct
  double all = 0;        // static pair and every perturbed pair fully correct
  double not_p = 0;      // static positive correct, every perturbed positive wrong
  std::size_t pairs = 0;
};

struct ScoredSet {
  std::vector<TaskExamplePair> gold;
  std::vector<Prediction> preds;
};

inline PairedMetrics paired_metrics(const ScoredSet& statics,
                                    const std::map<std::string, ScoredSet>& perturbed) {
  auto static_by_id = detail::index_predictions(statics.preds, statics.gold);
  // source_id -> per-kind (pos correct, pair correct)
  struct Outcome {
    bool pos_correct = false, pair_correct = false;
  };
  std::map<std::string, std::map<std::string, Outcome>> lineage;
  for (const auto& [kind, set] : perturbed) {
    auto by_id = detail::index_predictions(set.preds, set.gold);
    for (const auto& x : set.gold) {
      if (x.source_id.empty())
        throw LineageError("perturbed record " + x.id + " lacks a source_id");
      const auto& labels = by_id.at(x.id);
      Outcome o;
      o.pos_correct = labels.first == 1;
      o.pair_correct = labels.first == 1 && labels.second == 0;
      lineage[x.source_id][kind] = o;
    }
  }
  PairedMetrics m;
  m.pairs = static_by_id.size();
  if (m.pairs == 0) throw EmptySubset("static set is empty");
  std::size_t n_static = 0, n_all = 0, n_notp = 0;
  for (const auto& [id, labels] : static_by_id) {
    bool static_pos = labels.first == 1;
    bool static_pair = static_pos && labels.second == 0;
    if (static_pair) ++n_static;
    const std::map<std::string, Outcome>* outs = nullptr;
    if (!perturbed.empty()) {
      auto it = lineage.find(id);
      if (it == lineage.end() || it->second.size() != perturbed.size())
        throw LineageError("static id " + id + " has no counterpart in every perturbed set");
      outs = &it->second;
    }
    if (static_pair && outs) {
      bool all_ok = true;
      for (const auto& [kind, o] : *outs) all_ok = all_ok && o.pair_correct;
      if (all_ok) ++n_all;
    }
    if (static_pos && outs) {
      bool every_pos_wrong = true;
      for (const auto& [kind, o] : *outs) every_pos_wrong = every_pos_wrong && !o.pos_correct;
      if (every_pos_wrong) ++n_notp;
    }
  }
  m.static_pm = double(n_static) / double(m.pairs);
  m.all = double(n_all) / double(m.pairs);
  m.not_p = double(n_notp) / double(m.pairs);
  return m;
}

// ---------------------------------------------------------------------------
// Operator-frequency report: final-step operator frequency in a subset,
// normalized against the reference (static) set.

struct OperatorFrequency {
  std::string op;
  double subset_freq = 0;
  double reference_freq = 0;
  double ratio = 0;
};

namespace detail {

inline std::string final_operator(const TaskExamplePair& x) {
  if (x.task == TaskKind::Structured && x.final_annotation) return x.final_annotation->op;
  return x.mode == CalcMode::Diff ? "differentiate" : "integrate";
}

inline std::map<std::string, double> operator_frequencies(
    const std::vector<TaskExamplePair>& set) {
  std::map<std::string, double> freq;
  for (const auto& x : set) freq[final_operator(x)] += 1.0;
  for (auto& [op, f] : freq) f /= double(set.size());
  return freq;
}

}  // namespace detail

inline std::vector<OperatorFrequency> operator_frequency_report(
    const std::vector<TaskExamplePair>& subset, const std::vector<TaskExamplePair>& reference) {
  if (subset.empty()) throw EmptySubset("operator report subset is empty");
  if (reference.empty()) throw EmptySubset("operator report reference is empty");
  auto sub = detail::operator_frequencies(subset);
  auto ref = detail::operator_frequencies(reference);
  std::vector<OperatorFrequency> out;
  for (const auto& [op, f] : sub) {
    auto it = ref.find(op);
    if (it == ref.end()) continue;  // absent from reference: ratio undefined
    out.push_back({op, f, it->second, f / it->second});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    return a.op < b.op;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Static-vs-perturbed delta grids for structured and calculus reports.

struct GridReport {
  std::vector<std::string> columns;
  std::map<std::string, Scores> scores;  // by column; absent column => blank
  std::string static_column = "Static";
};

inline std::vector<std::string> grid_columns(TaskKind task) {
  if (task == TaskKind::Structured)
    return {"Static", "VR", "EE", "AR", "s-1", "s-2"};
  return {"Static", "VR", "EC", "Easy"};
}

inline GridReport delta_report(TaskKind task, const Scores& statics,
                               const std::map<std::string, Scores>& others) {
  GridReport g;
  g.columns = grid_columns(task);
  g.scores["Static"] = statics;
  for (const auto& [col, s] : others) {
    if (std::find(g.columns.begin(), g.columns.end(), col) == g.columns.end())
      throw std::invalid_argument("unknown report column: " + col);
    g.scores[col] = s;
  }
  return g;
}

inline nlohmann::json grid_to_json(const GridReport& g) {
  nlohmann::json cols = nlohmann::json::array();
  const Scores& st = g.scores.at(g.static_column);
  for (const auto& c : g.columns) {
    auto it = g.scores.find(c);
    if (it == g.scores.end()) {
      cols.push_back({{"column", c}});
      continue;
    }
    const Scores& s = it->second;
    cols.push_back({{"column", c},
                    {"accuracy", s.accuracy},
                    {"f1", s.f1_positive},
                    {"f1_macro", s.f1_macro},
                    {"delta_accuracy", st.accuracy - s.accuracy},
                    {"delta_f1", st.f1_positive - s.f1_positive}});
  }
  return nlohmann::json{{"columns", cols}};
}

inline std::string grid_to_text(const GridReport& g) {
  auto cell = [](double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%8.4f", v);
    return std::string(buf);
  };
  std::string header = "metric   ";
  for (const auto& c : g.columns) {
    char buf[16];
    std::snprintf(buf, sizeof buf, " %8s", c.c_str());
    header += buf;
  }
  const Scores& st = g.scores.at(g.static_column);
  std::string acc = "accuracy ", f1 = "f1       ", d_acc = "d-acc    ", d_f1 = "d-f1     ";
  for (const auto& c : g.columns) {
    auto it = g.scores.find(c);
    if (it == g.scores.end()) {
      for (std::string* row : {&acc, &f1, &d_acc, &d_f1}) *row += "        -";
      continue;
    }
    const Scores& s = it->second;
    acc += " " + cell(s.accuracy);
    f1 += " " + cell(s.f1_positive);
    d_acc += " " + cell(st.accuracy - s.accuracy);
    d_f1 += " " + cell(st.f1_positive - s.f1_positive);
  }
  return header + "\n" + acc + "\n" + f1 + "\n" + d_acc + "\n" + d_f1 + "\n";
}

}  // namespace derivforge
