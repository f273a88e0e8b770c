#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oodkit/metrics.hpp"
#include "oodkit/scoring.hpp"
#include "oodkit/splits.hpp"
#include "oodkit/tensor_io.hpp"

namespace oodkit {

// ---------------------------------------------------------------------------
// Synthetic benchmark data
// ---------------------------------------------------------------------------

enum class OodMode { kFar, kClose };

std::string_view to_string(OodMode mode);
OodMode parse_ood_mode(std::string_view text);

/// Desk-scale stand-in for the two evaluation scenarios.
///
/// IND class k is a unit-covariance Gaussian around (separation / sqrt 2) * e_k,
/// so every pair of class means is `separation` apart. Far mode places the
/// outlier blob on the axis through the centroid pointing away from all means,
/// at distance ood_offset * separation from each of them. Close mode places it
/// on the segment between the first two means, at fraction ood_offset from
/// the first (0.5 = midway); there ood_offset must lie in (0, 1).
///
/// Logits are -||x - mu_k||^2 / 2, the log-likelihood of each unit-covariance
/// class, so their softmax is the exact class posterior.
struct SyntheticSpec {
  std::size_t n_classes = 4;
  std::size_t dim = 32;
  std::size_t n_per_class = 100;  // train rows per class; test_ind gets half as many
  double class_separation = 8.0;
  OodMode ood_mode = OodMode::kFar;
  double ood_offset = 10.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dump hidden;
  Dump logits;
};

SyntheticData make_synthetic(const SyntheticSpec& spec);

// Writes <out_dir>/hidden.{json,bin} and <out_dir>/logits.{json,bin}.
void write_synthetic(const SyntheticData& data, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::vector<std::filesystem::path> dump_stems;
  Scenario scenario = Scenario::kFarOod;
  std::vector<Scorer> scorers = {Scorer::kMsp, Scorer::kEnergy, Scorer::kMahalanobis,
                                 Scorer::kCosine};
  double temperature = kDefaultTemperature;
  double ridge_scale = kDefaultRidgeScale;
  std::optional<std::filesystem::path> split;
  std::filesystem::path output_dir = ".";
  std::uint64_t seed = 0;
  std::string method_name = "frozen";
  std::optional<double> budget_fraction;
};

// Keys as in ExperimentConfig; missing keys keep their defaults.
ExperimentConfig config_from_json(std::string_view text, ExperimentConfig base = {});
std::string config_to_json(const ExperimentConfig& config);

// One row per (dump, scorer) pair whose input kinds agree, in config order.
std::vector<EvalReport> evaluate(const ExperimentConfig& config);

// evaluate() plus <output_dir>/report.json and report.csv.
std::vector<EvalReport> run_eval(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Report files and pivot tables
// ---------------------------------------------------------------------------

std::string reports_to_json(const std::vector<EvalReport>& rows, const ExperimentConfig& config);
std::string reports_to_csv(const std::vector<EvalReport>& rows);

// Accepts either a report.json document ({"rows": [...]}) or a bare row array.
// Throws "schema" if any row lacks a field.
std::vector<EvalReport> parse_report_rows(std::string_view json_text);

inline const std::vector<std::string>& report_fields() {
  static const std::vector<std::string> fields = {
      "dataset", "scenario", "backbone_name", "method_name", "budget_fraction", "scorer_id",
      "auroc",   "fpr_at_95", "accuracy",     "n_ind",       "n_ood"};
  return fields;
}

// Textual label of a row field, "" for an absent optional value.
std::string field_label(const EvalReport& row, std::string_view field);
std::optional<double> metric_value(const EvalReport& row, std::string_view field);

struct PivotSpec {
  std::vector<std::string> group_by = {"scenario", "method_name", "budget_fraction"};
  std::string row_field = "backbone_name";
  std::string col_field = "scorer_id";
  std::string metric = "auroc";
};

struct PivotTable {
  std::vector<std::pair<std::string, std::string>> group;  // (field, label)
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<std::optional<double>>> cells;  // [row][col]
};

// Labels keep first-appearance order. Throws "schema" for unknown fields and
// "duplicate_cell" when two rows land in the same cell.
std::vector<PivotTable> pivot(const std::vector<EvalReport>& rows, const PivotSpec& spec);

std::string pivot_to_json(const std::vector<PivotTable>& tables, const PivotSpec& spec);
std::string pivot_table_to_csv(const PivotTable& table, const PivotSpec& spec);
// Long-form plot series: series,x,y (series = column label, x = row label).
std::string plot_series_csv(const PivotTable& table);

// Writes pivot.json, pivot_<i>.csv and plot_<i>.csv into out_dir; returns the
// number of tables.
std::size_t write_pivot(const std::vector<PivotTable>& tables, const PivotSpec& spec,
                        const std::filesystem::path& out_dir);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace oodkit
