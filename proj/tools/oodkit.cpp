// oodkit: command-line front end for OOD scoring, evaluation and budgeting.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oodkit/budget.hpp"
#include "oodkit/error.hpp"
#include "oodkit/harness.hpp"
#include "oodkit/splits.hpp"
#include "oodkit/tensor_io.hpp"

namespace {

using nlohmann::json;
using oodkit::Error;

int fail(const std::string& code, const std::string& message, int exit_code = 1) {
  json j;
  j["error"] = code;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
  return exit_code;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("OODKIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error("invalid_argument", "OODKIT_SEED is not an unsigned integer");
    }
  }
  return 0;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(oodkit::read_file(path));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

struct SynthArgs {
  oodkit::SyntheticSpec spec;
  std::string mode = "far";
  std::string out;
};

struct SplitArgs {
  std::string classes;
  double fraction = 0.25;
  bool far = false;
  std::string out;
};

struct EvalArgs {
  std::string config;
  std::vector<std::string> dumps;
  std::string scenario;
  std::vector<std::string> scorers;
  double temperature = oodkit::kDefaultTemperature;
  double ridge_scale = oodkit::kDefaultRidgeScale;
  std::string split;
  std::string out;
  std::uint64_t seed = 0;
  std::string method;
  double budget_fraction = 0.0;
};

struct ReportArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> group_by;
  oodkit::PivotSpec spec;
  std::string out = ".";
};

struct BudgetArgs {
  std::string method;
  std::string backbone;
  std::string backbones_file;
  std::int64_t h = 0;
  std::int64_t layers = 0;
  std::int64_t r = 0;
  std::int64_t prefix_length = 0;
  std::int64_t total = 0;
  double fraction = 0.0;
  bool as_json = false;
};

struct ValidateArgs {
  std::string dump;
  std::string expect;
  oodkit::DatasetStats stats;
};

int run_synth(const SynthArgs& a) {
  oodkit::SyntheticSpec spec = a.spec;
  spec.ood_mode = oodkit::parse_ood_mode(a.mode);
  const auto data = oodkit::make_synthetic(spec);
  oodkit::write_synthetic(data, a.out);
  std::cout << (std::filesystem::path(a.out) / "hidden").string() << "\n"
            << (std::filesystem::path(a.out) / "logits").string() << "\n";
  return 0;
}

int run_split(const SplitArgs& a, std::uint64_t seed) {
  const auto names = read_lines(a.classes);
  const auto manifest = a.far ? oodkit::make_far_split(names)
                              : oodkit::make_close_split(names, a.fraction, seed);
  const std::string text = oodkit::manifest_to_json(manifest);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    oodkit::write_file_atomic(a.out, text);
  }
  return 0;
}

int run_eval(const EvalArgs& a, const CLI::App& cmd) {
  oodkit::ExperimentConfig cfg;
  cfg.seed = default_seed();
  if (!a.config.empty()) cfg = oodkit::config_from_json(oodkit::read_file(a.config), cfg);
  if (cmd.count("--dump")) cfg.dump_stems.assign(a.dumps.begin(), a.dumps.end());
  if (cmd.count("--scenario")) cfg.scenario = oodkit::parse_scenario(a.scenario);
  if (cmd.count("--scorers")) {
    cfg.scorers.clear();
    for (const auto& s : a.scorers) cfg.scorers.push_back(oodkit::parse_scorer(s));
  }
  if (cmd.count("--temperature")) cfg.temperature = a.temperature;
  if (cmd.count("--ridge-scale")) cfg.ridge_scale = a.ridge_scale;
  if (cmd.count("--split")) cfg.split = a.split;
  if (cmd.count("--out")) cfg.output_dir = a.out;
  if (cmd.count("--seed")) cfg.seed = a.seed;
  if (cmd.count("--method")) cfg.method_name = a.method;
  if (cmd.count("--budget-fraction")) cfg.budget_fraction = a.budget_fraction;

  const auto rows = oodkit::run_eval(cfg);
  std::cout << oodkit::reports_to_csv(rows);
  return 0;
}

int run_report(ReportArgs a) {
  std::vector<oodkit::EvalReport> rows;
  for (const auto& path : a.inputs) {
    auto part = oodkit::parse_report_rows(oodkit::read_file(path));
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (!a.group_by.empty()) a.spec.group_by = a.group_by;
  const auto tables = oodkit::pivot(rows, a.spec);
  const std::size_t n = oodkit::write_pivot(tables, a.spec, a.out);
  std::cout << n << " table(s) written to " << a.out << "\n";
  return 0;
}

int run_budget(const BudgetArgs& a, const CLI::App& cmd) {
  const auto method = oodkit::parse_petl_method(a.method);
  std::vector<oodkit::BackboneGeometry> table = oodkit::builtin_backbones();
  if (!a.backbones_file.empty()) table = oodkit::parse_backbones(oodkit::read_file(a.backbones_file));

  std::int64_t h = a.h;
  std::int64_t layers = a.layers;
  std::int64_t total = a.total;
  if (!a.backbone.empty()) {
    const auto& g = oodkit::find_backbone(table, a.backbone);
    if (!cmd.count("--h")) h = g.hidden_dim;
    if (!cmd.count("--L")) layers = g.layers;
    if (!cmd.count("--total")) total = g.total_params;
  }
  const bool solve = cmd.count("--fraction") > 0;
  if (solve == (cmd.count("--r") > 0)) {
    throw Error("invalid_argument", "give exactly one of --r (count) or --fraction (solve)");
  }
  std::optional<std::int64_t> prefix;
  if (cmd.count("--prefix-length")) prefix = a.prefix_length;

  std::int64_t r = a.r;
  if (solve) r = oodkit::solve_bottleneck(method, h, layers, a.fraction, total, prefix);
  const auto result = oodkit::count_params({.method = method,
                                            .hidden_dim = h,
                                            .layers = layers,
                                            .bottleneck = r,
                                            .prefix_length = prefix.value_or(0),
                                            .total_backbone_params = total});
  if (a.as_json) {
    json j;
    j["method"] = std::string(oodkit::to_string(method));
    j["hidden_dim"] = h;
    j["layers"] = layers;
    j["bottleneck"] = r;
    if (prefix) j["prefix_length"] = *prefix;
    j["trainable_params"] = result.trainable_params;
    j["total_backbone_params"] = total;
    j["fraction"] = total > 0 ? json(result.fraction) : json(nullptr);
    std::cout << j.dump() << "\n";
  } else {
    std::cout << (solve ? r : result.trainable_params) << "\n";
  }
  std::cerr << "note: counts exclude biases and the classification head; real "
               "configurations add small bias terms\n";
  return 0;
}

int run_validate(const ValidateArgs& a, const CLI::App& cmd) {
  const auto dump = oodkit::read_dump(a.dump);
  oodkit::DatasetStats expected = a.stats;
  if (!a.expect.empty()) {
    const auto known = oodkit::known_stats(a.expect);
    if (!known) throw Error("invalid_argument", "unknown dataset preset '" + a.expect + "'");
    expected = *known;
  } else if (!cmd.count("--train")) {
    throw Error("invalid_argument", "give --expect or explicit --train/--val/... counts");
  }
  const auto report = oodkit::validate_stats(dump, expected);
  json j;
  j["ok"] = report.ok();
  j["mismatches"] = json::array();
  for (const auto& m : report.mismatches) {
    j["mismatches"].push_back({{"field", m.field}, {"expected", m.expected}, {"observed", m.observed}});
  }
  std::cout << j.dump() << "\n";
  if (!report.ok()) {
    return fail("stats_mismatch", std::to_string(report.mismatches.size()) +
                                      " count(s) differ from the expected statistics");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oodkit: OOD scoring, evaluation and PETL budgeting"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic hidden/logit dumps");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--classes", synth.spec.n_classes, "Number of IND classes");
  synth_cmd->add_option("--dim", synth.spec.dim, "Feature dimension");
  synth_cmd->add_option("--n-per-class", synth.spec.n_per_class, "Train rows per class");
  synth_cmd->add_option("--separation", synth.spec.class_separation, "Distance between class means");
  synth_cmd->add_option("--mode", synth.mode, "far | close");
  synth_cmd->add_option("--offset", synth.spec.ood_offset,
                        "far: distance in separation units; close: position in (0,1)");
  synth_cmd->add_option("--seed", synth.spec.seed, "Seed (default: $OODKIT_SEED or 0)");

  SplitArgs split;
  std::uint64_t split_seed = 0;
  auto* split_cmd = app.add_subcommand("split", "Build a far/close-OOD class manifest");
  split_cmd->add_option("--classes", split.classes, "File with one class name per line")->required();
  split_cmd->add_option("--fraction", split.fraction, "Fraction of classes held out as OOD");
  split_cmd->add_option("--seed", split_seed, "Seed (default: $OODKIT_SEED or 0)");
  split_cmd->add_flag("--far", split.far, "All classes IND; OOD comes from test_ood rows");
  split_cmd->add_option("--out", split.out, "Write manifest here instead of stdout");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score dumps and write AUROC/FPR@95 reports");
  eval_cmd->add_option("--config", ev.config, "JSON config; flags override its values");
  eval_cmd->add_option("--dump", ev.dumps, "Dump stem (repeatable)");
  eval_cmd->add_option("--scenario", ev.scenario, "far_ood | close_ood");
  eval_cmd->add_option("--scorers", ev.scorers, "msp,energy,mahalanobis,cosine")->delimiter(',');
  eval_cmd->add_option("--temperature", ev.temperature, "Energy temperature");
  eval_cmd->add_option("--ridge-scale", ev.ridge_scale, "Covariance ridge scale");
  eval_cmd->add_option("--split", ev.split, "Split manifest JSON");
  eval_cmd->add_option("--out", ev.out, "Output directory");
  eval_cmd->add_option("--seed", ev.seed, "Recorded seed");
  eval_cmd->add_option("--method", ev.method, "Method label for report rows");
  eval_cmd->add_option("--budget-fraction", ev.budget_fraction, "Budget label for report rows");

  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Pivot report rows into tables and plot data");
  report_cmd->add_option("--in", rep.inputs, "report.json file(s)")->required();
  report_cmd->add_option("--group-by", rep.group_by, "Fields that split tables")->delimiter(',');
  report_cmd->add_option("--rows", rep.spec.row_field, "Row field");
  report_cmd->add_option("--cols", rep.spec.col_field, "Column field");
  report_cmd->add_option("--metric", rep.spec.metric, "Cell metric");
  report_cmd->add_option("--out", rep.out, "Output directory");

  BudgetArgs bud;
  auto* budget_cmd = app.add_subcommand("budget", "PETL trainable-parameter budget");
  budget_cmd->set_help_flag("--help", "Print this help message and exit");
  budget_cmd->add_option("--method", bud.method, "adapter | lora | prefix")->required();
  budget_cmd->add_option("--backbone", bud.backbone, "Built-in geometry (gpt2-s ... gpt-j)");
  budget_cmd->add_option("--backbones", bud.backbones_file, "JSON geometry table");
  budget_cmd->add_option("--h", bud.h, "Hidden size");
  budget_cmd->add_option("--L", bud.layers, "Number of layers");
  budget_cmd->add_option("--r", bud.r, "Bottleneck dimension (count mode)");
  budget_cmd->add_option("--prefix-length", bud.prefix_length, "Prefix length");
  budget_cmd->add_option("--total", bud.total, "Backbone parameter count");
  budget_cmd->add_option("--fraction", bud.fraction, "Target fraction (solve mode)");
  budget_cmd->add_flag("--json", bud.as_json, "Print a JSON object");

  ValidateArgs val;
  auto* validate_cmd = app.add_subcommand("validate", "Compare dump row counts to dataset statistics");
  validate_cmd->add_option("--dump", val.dump, "Dump stem")->required();
  validate_cmd->add_option("--expect", val.expect, "clinc | banking77");
  validate_cmd->add_option("--train", val.stats.n_train);
  validate_cmd->add_option("--val", val.stats.n_val);
  validate_cmd->add_option("--test-ind", val.stats.n_test_ind);
  validate_cmd->add_option("--test-ood", val.stats.n_test_ood);
  validate_cmd->add_option("--classes", val.stats.n_classes);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*synth_cmd) {
      if (!synth_cmd->count("--seed")) synth.spec.seed = default_seed();
      return run_synth(synth);
    }
    if (*split_cmd) return run_split(split, split_cmd->count("--seed") ? split_seed : default_seed());
    if (*eval_cmd) return run_eval(ev, *eval_cmd);
    if (*report_cmd) return run_report(rep);
    if (*budget_cmd) return run_budget(bud, *budget_cmd);
    if (*validate_cmd) return run_validate(val, *validate_cmd);
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
