#include "oodkit/harness.hpp"

#include <charconv>
#include <set>

#include "json.hpp"
#include "oodkit/detection.hpp"
#include "oodkit/error.hpp"

namespace oodkit {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json row_to_json(const EvalReport& r) {
  json j;
  j["dataset"] = r.dataset;
  j["scenario"] = r.scenario;
  j["backbone_name"] = r.backbone_name;
  j["method_name"] = r.method_name;
  j["budget_fraction"] = r.budget_fraction ? json(*r.budget_fraction) : json(nullptr);
  j["scorer_id"] = r.scorer_id;
  j["auroc"] = r.auroc;
  j["fpr_at_95"] = r.fpr_at_95;
  j["accuracy"] = r.accuracy ? json(*r.accuracy) : json(nullptr);
  j["n_ind"] = r.n_ind;
  j["n_ood"] = r.n_ood;
  return j;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ExperimentConfig config_from_json(std::string_view text, ExperimentConfig cfg) {
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error("malformed_config", "config must be a JSON object");
    if (j.contains("dump_stems")) {
      cfg.dump_stems.clear();
      for (const auto& s : j["dump_stems"]) cfg.dump_stems.emplace_back(s.get<std::string>());
    }
    if (j.contains("scenario")) cfg.scenario = parse_scenario(j["scenario"].get<std::string>());
    if (j.contains("scorers")) {
      cfg.scorers.clear();
      for (const auto& s : j["scorers"]) cfg.scorers.push_back(parse_scorer(s.get<std::string>()));
    }
    if (j.contains("temperature")) cfg.temperature = j["temperature"].get<double>();
    if (j.contains("ridge_scale")) cfg.ridge_scale = j["ridge_scale"].get<double>();
    if (j.contains("split") && !j["split"].is_null()) cfg.split = j["split"].get<std::string>();
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("method_name")) cfg.method_name = j["method_name"].get<std::string>();
    if (j.contains("budget_fraction") && !j["budget_fraction"].is_null()) {
      cfg.budget_fraction = j["budget_fraction"].get<double>();
    }
  } catch (const json::exception& e) {
    throw Error("malformed_config", e.what());
  }
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) { 
  json j;
  json stems = json::array();
  for (const auto& s : cfg.dump_stems) stems.push_back(s.string());
  json scorers = json::array();
  for (Scorer s : cfg.scorers) scorers.push_back(std::string(to_string(s)));
  j["dump_stems"] = stems;
  j["scenario"] = std::string(to_string(cfg.scenario));
  j["scorers"] = scorers;
  j["temperature"] = cfg.temperature;
  j["ridge_scale"] = cfg.ridge_scale;
  j["split"] = cfg.split ? json(cfg.split->string()) : json(nullptr);
  j["output_dir"] = cfg.output_dir.string();
  j["seed"] = cfg.seed;
  j["method_name"] = cfg.method_name;
  j["budget_fraction"] = cfg.budget_fraction ? json(*cfg.budget_fraction) : json(nullptr);
  return j.dump(2) + "\n";
}

std::vector<EvalReport> evaluate(const ExperimentConfig& cfg) {
  if (cfg.scorers.empty()) throw Error("invalid_argument", "at least one scorer is required");
  if (cfg.dump_stems.empty()) throw Error("invalid_argument", "at least one dump is required");

  std::optional<SplitManifest> manifest;
  Scenario scenario = cfg.scenario;
  if (cfg.split) {
    manifest = manifest_from_json(read_file(*cfg.split));
    scenario = manifest->scenario;
  }

  constexpr SplitTag kInd[] = {SplitTag::kTestInd};
  constexpr SplitTag kOod[] = {SplitTag::kTestOod};

  std::vector<EvalReport> rows;
  std::set<Scorer> used;
  for (const auto& stem : cfg.dump_stems) {
    Dump dump = read_dump(stem);
    if (manifest) dump = apply_split(dump, *manifest);

    const Dump ind = select_rows(dump, kInd);
    const Dump ood = select_rows(dump, kOod);

    for (Scorer scorer : cfg.scorers) {
      if (required_kind(scorer) != dump.meta.kind) continue;
      used.insert(scorer);
      if (ind.rows() == 0) {
        throw Error("missing_test_ind", stem.string() + ": no rows tagged test_ind");
      }
      if (ood.rows() == 0) {
        throw Error("missing_test_ood", stem.string() + ": no rows tagged test_ood");
      }
      const FittedModel model = fit_scorer(scorer, dump, cfg.ridge_scale);
      const ScoreParams params{.temperature = cfg.temperature};
      const ScoreSeries ind_scores = score_set(scorer, ind, model, params);
      const ScoreSeries ood_scores = score_set(scorer, ood, model, params);

      EvalReport row;
      row.dataset = stem.filename().string();
      row.scenario = std::string(to_string(scenario));
      row.backbone_name = dump.meta.backbone_name;
      row.method_name = cfg.method_name;
      row.budget_fraction = cfg.budget_fraction;
      row.scorer_id = std::string(to_string(scorer));
      row.auroc = auroc(ind_scores.values, ood_scores.values);
      row.fpr_at_95 = fpr_at_tpr(ind_scores.values, ood_scores.values, 0.95);
      if (dump.meta.kind == DumpKind::kLogits) row.accuracy = accuracy(dump, SplitTag::kTestInd);
      row.n_ind = ind.rows();
      row.n_ood = ood.rows();
      rows.push_back(std::move(row));
    }
  }
  for (Scorer scorer : cfg.scorers) {
    if (!used.contains(scorer)) {
      throw Error("kind_mismatch", std::string(to_string(scorer)) + " needs a " +
                                       std::string(to_string(required_kind(scorer))) +
                                       " dump but none was given");
    }
  }
  return rows;
}

std::vector<EvalReport> run_eval(const ExperimentConfig& cfg) {
  auto rows = evaluate(cfg);
  fs::create_directories(cfg.output_dir);
  write_file_atomic(cfg.output_dir / "report.json", reports_to_json(rows, cfg));
  write_file_atomic(cfg.output_dir / "report.csv", reports_to_csv(rows));
  return rows;
}

std::string reports_to_json(const std::vector<EvalReport>& rows, const ExperimentConfig& cfg) {
  json doc;
  doc["config"] = json::parse(config_to_json(cfg));
  doc["rows"] = json::array();
  for (const auto& r : rows) doc["rows"].push_back(row_to_json(r));
  return doc.dump(2) + "\n";
}

std::string reports_to_csv(const std::vector<EvalReport>& rows) {
  std::string out;
  const auto& fields = report_fields();
  for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + fields[i];
  out += "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ",";
      out += csv_escape(field_label(r, fields[i]));
    }
    out += "\n";
  }
  return out;
}

std::vector<EvalReport> parse_report_rows(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("schema", std::string("report is not valid JSON: ") + e.what());
  }
  const json& rows = doc.is_object() && doc.contains("rows") ? doc["rows"] : doc;
  if (!rows.is_array()) throw Error("schema", "report rows must be a JSON array");

  std::vector<EvalReport> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json& j = rows[i];
    for (const auto& f : report_fields()) {
      if (!j.is_object() || !j.contains(f)) {
        throw Error("schema", "report row " + std::to_string(i) + " lacks field '" + f + "'");
      }
    }
    try {
      EvalReport r;
      r.dataset = j["dataset"].get<std::string>();
      r.scenario = j["scenario"].get<std::string>();
      r.backbone_name = j["backbone_name"].get<std::string>();
      r.method_name = j["method_name"].get<std::string>();
      if (!j["budget_fraction"].is_null()) r.budget_fraction = j["budget_fraction"].get<double>();
      r.scorer_id = j["scorer_id"].get<std::string>();
      r.auroc = j["auroc"].get<double>();
      r.fpr_at_95 = j["fpr_at_95"].get<double>();
      if (!j["accuracy"].is_null()) r.accuracy = j["accuracy"].get<double>();
      r.n_ind = j["n_ind"].get<std::size_t>();
      r.n_ood = j["n_ood"].get<std::size_t>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error("schema", "report row " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace oodkit
