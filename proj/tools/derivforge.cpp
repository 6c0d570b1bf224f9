// derivforge: batch entry points for generating annotated derivation
// datasets, applying systematic perturbations, and scoring prediction files.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "derivforge/dataset.hpp"
#include "derivforge/metrics.hpp"

namespace fs = std::filesystem;
using namespace derivforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

std::string variant_name_from(const std::string& task, int steps, const std::string& mode,
                              bool easy) {
  if (task == "structured") {
    if (steps < 2 || steps > 4) throw CLI::ValidationError("--steps", "must be 2, 3, or 4");
    return "structured-" + std::to_string(steps);
  }
  if (task == "calculus") {
    if (mode != "diff" && mode != "int")
      throw CLI::ValidationError("--mode", "must be 'diff' or 'int'");
    return "calculus-" + mode + (easy ? "-easy" : "");
  }
  throw CLI::ValidationError("--task", "must be 'structured' or 'calculus'");
}

void write_dataset(const Dataset& d, const fs::path& dir, bool force) {
  write_jsonl(dir / "train.jsonl", d.train, force);
  write_jsonl(dir / "dev.jsonl", d.dev, force);
  write_jsonl(dir / "test.jsonl", d.test, force);
  write_manifest(dir / "manifest.json", d.manifest, force);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"annotated derivation dataset generator and evaluation harness"};
  app.require_subcommand(1);

  // --- generate --------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "assemble a static dataset with manifest");
  std::string g_task, g_mode = "diff", g_out = ".";
  int g_steps = 3;
  double g_scale = 1.0;
  std::uint64_t g_seed = 0;
  bool g_force = false, g_seed_set = false;
  gen->add_option("--task", g_task, "structured | calculus")->required();
  gen->add_option("--steps", g_steps, "derivation length (structured: 2|3|4)");
  gen->add_option("--mode", g_mode, "calculus mode: diff | int");
  gen->add_option("--scale", g_scale, "fraction of the full split sizes, in (0,1]");
  gen->add_option("--seed", g_seed, "global generation seed")
      ->required()
      ->each([&](const std::string&) { g_seed_set = true; });
  gen->add_option("--out", g_out, "output directory (a <variant>/ subdir is created)");
  gen->add_flag("--force", g_force, "overwrite existing outputs");

  // --- perturb ---------------------------------------------------------
  auto* per = app.add_subcommand("perturb", "apply one perturbation to a dataset file");
  std::string p_kind, p_in, p_out;
  bool p_force = false;
  per->add_option("--kind", p_kind, "vr | ee | ar | ec")->required();
  per->add_option("--in", p_in, "input JSONL")->required();
  per->add_option("--out", p_out, "output JSONL")->required();
  per->add_flag("--force", p_force, "overwrite existing outputs");

  // --- extrapolate -----------------------------------------------------
  auto* ext = app.add_subcommand("extrapolate",
                                 "generate step-reduced or easy extrapolation test sets");
  std::string e_task = "structured", e_mode = "diff", e_out = ".";
  int e_steps = 4, e_minus = 1;
  double e_scale = 1.0;
  std::uint64_t e_seed = 0;
  bool e_easy = false, e_force = false;
  ext->add_option("--task", e_task, "structured | calculus");
  ext->add_option("--steps", e_steps, "trained step count (structured)");
  ext->add_option("--minus", e_minus, "step reduction: 1 | 2");
  ext->add_option("--mode", e_mode, "calculus mode: diff | int");
  ext->add_flag("--easy", e_easy, "emit the easier single-variable calculus set");
  ext->add_option("--scale", e_scale, "fraction of the full view size");
  ext->add_option("--seed", e_seed, "generation seed")->required();
  ext->add_option("--out", e_out, "output directory");
  ext->add_flag("--force", e_force, "overwrite existing outputs");

  // --- score -----------------------------------------------------------
  auto* sco = app.add_subcommand("score", "accuracy/F1 of a prediction file against gold");
  std::string s_gold, s_preds, s_baseline_out;
  sco->add_option("--gold", s_gold, "gold JSONL")->required();
  sco->add_option("--preds", s_preds, "prediction JSONL");
  sco->add_option("--all-positive-baseline", s_baseline_out,
                  "write the always-entailed baseline predictions here instead of scoring");
  bool s_force = false;
  sco->add_flag("--force", s_force, "overwrite existing outputs");

  // --- report ----------------------------------------------------------
  auto* rep = app.add_subcommand("report", "static-vs-perturbed delta grid and paired metrics");
  std::string r_task = "structured", r_static_gold, r_static_preds, r_json_out;
  std::vector<std::string> r_columns;  // NAME:gold:preds
  bool r_paired = false, r_force = false;
  rep->add_option("--task", r_task, "structured | calculus");
  rep->add_option("--static-gold", r_static_gold, "static gold JSONL")->required();
  rep->add_option("--static-preds", r_static_preds, "static prediction JSONL")->required();
  rep->add_option("--perturbed", r_columns,
                  "repeatable column spec NAME:gold.jsonl:preds.jsonl (NAME from the grid)");
  rep->add_flag("--paired", r_paired, "also print paired metrics (static±, All, NotP)");
  rep->add_option("--json", r_json_out, "also write the grid as JSON to this path");
  rep->add_flag("--force", r_force, "overwrite existing outputs");

  // --- inspect ---------------------------------------------------------
  auto* ins = app.add_subcommand("inspect", "pretty-print one example from a dataset file");
  std::string i_in, i_id;
  ins->add_option("--in", i_in, "dataset JSONL")->required();
  ins->add_option("--id", i_id, "example id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      (void)g_seed_set;
      std::string name = variant_name_from(g_task, g_steps, g_mode, false);
      Dataset d = assemble(name, g_scale, g_seed);
      fs::path dir = fs::path(g_out) / name;
      write_dataset(d, dir, g_force);
      std::cout << name << ": train " << d.train.size() << ", dev " << d.dev.size()
                << ", test " << d.test.size() << ", checksum " << d.manifest.checksum
                << "\n";
      return kExitOk;
    }
    if (*per) {
      if (p_kind != "vr" && p_kind != "ee" && p_kind != "ar" && p_kind != "ec")
        throw CLI::ValidationError("--kind", "must be vr, ee, ar, or ec");
      auto in = read_jsonl(p_in);
      auto out = perturb_records(in, p_kind);
      write_jsonl(p_out, out, p_force);
      std::cout << p_kind << ": " << out.size() << " records -> " << p_out << "\n";
      return kExitOk;
    }
    if (*ext) {
      Dataset d;
      std::string name;
      if (e_easy || e_task == "calculus") {
        if (!e_easy)
          throw CLI::ValidationError("--easy", "calculus extrapolation requires --easy");
        CalcMode mode = e_mode == "int" ? CalcMode::Int : CalcMode::Diff;
        d = easy_calculus_view(mode, e_scale, e_seed);
        name = d.manifest.task;
      } else {
        name = variant_name_from("structured", e_steps, "", false);
        d = extrapolation_view(name, e_minus, e_scale, e_seed);
        name = d.manifest.task;
      }
      fs::path dir = fs::path(e_out) / name;
      write_jsonl(dir / "test.jsonl", d.test, e_force);
      write_manifest(dir / "manifest.json", d.manifest, e_force);
      std::cout << name << ": test " << d.test.size() << ", checksum "
                << d.manifest.checksum << "\n";
      return kExitOk;
    }
    if (*sco) {
      auto gold = read_jsonl(s_gold);
      if (!s_baseline_out.empty()) {
        auto base = all_positive_baseline(gold);
        if (!s_force && fs::exists(s_baseline_out))
          throw WriteConflict("refusing to overwrite " + s_baseline_out + " without --force");
        std::ofstream out(s_baseline_out, std::ios::binary | std::ios::trunc);
        for (const auto& p : base)
          out << nlohmann::json{{"id", p.id},
                                {"variant", p.positive_variant ? "pos" : "neg"},
                                {"label", p.label}}
                     .dump()
              << '\n';
        std::cout << "baseline: " << base.size() << " predictions -> " << s_baseline_out
                  << "\n";
        return kExitOk;
      }
      if (s_preds.empty())
        throw CLI::ValidationError("--preds", "required unless --all-positive-baseline");
      auto preds = read_predictions(s_preds);
      Scores s = score(preds, gold);
      std::cout << nlohmann::json{{"accuracy", s.accuracy},
                                  {"f1", s.f1_positive},
                                  {"f1_macro", s.f1_macro},
                                  {"total_sequences", s.total},
                                  {"tp", s.tp},
                                  {"fp", s.fp},
                                  {"fn", s.fn},
                                  {"tn", s.tn}}
                       .dump(2)
                << "\n";
      return kExitOk;
    }
    if (*rep) {
      TaskKind task = r_task == "calculus" ? TaskKind::Calculus : TaskKind::Structured;
      ScoredSet statics{read_jsonl(r_static_gold), read_predictions(r_static_preds)};
      Scores s_static = score(statics.preds, statics.gold);
      std::map<std::string, Scores> columns;
      std::map<std::string, ScoredSet> perturbed;
      for (const auto& spec : r_columns) {
        auto c1 = spec.find(':');
        auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
          throw CLI::ValidationError("--perturbed", "expected NAME:gold.jsonl:preds.jsonl");
        std::string name = spec.substr(0, c1);
        ScoredSet set{read_jsonl(spec.substr(c1 + 1, c2 - c1 - 1)),
                      read_predictions(spec.substr(c2 + 1))};
        columns[name] = score(set.preds, set.gold);
        if (!set.gold.empty() && !set.gold.front().source_id.empty())
          perturbed[name] = std::move(set);
      }
      GridReport grid = delta_report(task, s_static, columns);
      std::cout << grid_to_text(grid);
      if (r_paired) {
        PairedMetrics pm = paired_metrics(statics, perturbed);
        std::cout << "paired: static+- " << pm.static_pm << ", All " << pm.all << ", NotP "
                  << pm.not_p << " over " << pm.pairs << " pairs\n";
      }
      if (!r_json_out.empty()) {
        if (!r_force && fs::exists(r_json_out))
          throw WriteConflict("refusing to overwrite " + r_json_out + " without --force");
        std::ofstream out(r_json_out, std::ios::binary | std::ios::trunc);
        out << grid_to_json(grid).dump(2) << '\n';
      }
      return kExitOk;
    }
    if (*ins) {
      auto records = read_jsonl(i_in);
      for (const auto& x : records) {
        if (x.id != i_id) continue;
        std::cout << "id: " << x.id << "  task: " << task_field(x) << "\n";
        int n = 1;
        for (const auto& s : x.context) {
          std::cout << "  (" << n++ << ")  " << to_latex(s.equation) << "    "
                    << render_annotation(s.annotation) << "\n";
        }
        if (x.premise)
          std::cout << "  premise:  " << candidate_latex(*x.premise) << "\n";
        if (x.variable) std::cout << "  variable: " << x.variable->name << "\n";
        if (x.final_annotation)
          std::cout << "  final annotation: " << render_annotation(*x.final_annotation)
                    << "\n";
        std::cout << "  positive: " << candidate_latex(x.positive) << "\n";
        std::cout << "  negative: " << candidate_latex(x.negative) << "\n";
        if (x.negative_annotation)
          std::cout << "  negative annotation: " << render_annotation(*x.negative_annotation)
                    << "\n";
        return kExitOk;
      }
      std::cerr << "error: id not found: " << i_id << "\n";
      return kExitData;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
