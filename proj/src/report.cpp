#include "oodkit/harness.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "oodkit/error.hpp"

namespace oodkit {
namespace {

using nlohmann::json;

void require_field(std::string_view field) {
  const auto& fields = report_fields();
  if (std::find(fields.begin(), fields.end(), field) == fields.end()) {
    throw Error("schema", "unknown report field '" + std::string(field) + "'");
  }
}

std::size_t index_of(std::vector<std::string>& labels, const std::string& label) {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it != labels.end()) return static_cast<std::size_t>(it - labels.begin());
  labels.push_back(label);
  return labels.size() - 1;
}

std::string opt_label(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

std::string field_label(const EvalReport& r, std::string_view f) {
  if (f == "dataset") return r.dataset;
  if (f == "scenario") return r.scenario;
  if (f == "backbone_name") return r.backbone_name;
  if (f == "method_name") return r.method_name;
  if (f == "budget_fraction") return opt_label(r.budget_fraction);
  if (f == "scorer_id") return r.scorer_id;
  if (f == "auroc") return format_double(r.auroc);
  if (f == "fpr_at_95") return format_double(r.fpr_at_95);
  if (f == "accuracy") return opt_label(r.accuracy);
  if (f == "n_ind") return std::to_string(r.n_ind);
  if (f == "n_ood") return std::to_string(r.n_ood);
  throw Error("schema", "unknown report field '" + std::string(f) + "'");
}

std::optional<double> metric_value(const EvalReport& r, std::string_view f) {
  if (f == "auroc") return r.auroc;
  if (f == "fpr_at_95") return r.fpr_at_95;
  if (f == "accuracy") return r.accuracy;
  if (f == "budget_fraction") return r.budget_fraction;
  if (f == "n_ind") return static_cast<double>(r.n_ind);
  if (f == "n_ood") return static_cast<double>(r.n_ood);
  throw Error("schema", "'" + std::string(f) + "' is not a numeric report field");
}

std::vector<PivotTable> pivot(const std::vector<EvalReport>& rows, const PivotSpec& spec) {
  if (rows.empty()) throw Error("empty", "no report rows to pivot");
  for (const auto& f : spec.group_by) require_field(f);
  require_field(spec.row_field);
  require_field(spec.col_field);
  require_field(spec.metric);

  std::vector<PivotTable> tables;
  std::vector<std::vector<std::string>> keys;
  // Cells are filled after labels are known.
  std::vector<std::vector<std::tuple<std::size_t, std::size_t, std::optional<double>>>> pending;

  for (const auto& r : rows) {
    std::vector<std::string> key;
    for (const auto& f : spec.group_by) key.push_back(field_label(r, f));
    auto it = std::find(keys.begin(), keys.end(), key);
    std::size_t t = static_cast<std::size_t>(it - keys.begin());
    if (it == keys.end()) {
      keys.push_back(key);
      PivotTable table;
      for (std::size_t i = 0; i < key.size(); ++i) table.group.emplace_back(spec.group_by[i], key[i]);
      tables.push_back(std::move(table));
      pending.emplace_back();
    }
    PivotTable& table = tables[t];
    const std::size_t ri = index_of(table.row_labels, field_label(r, spec.row_field));
    const std::size_t ci = index_of(table.col_labels, field_label(r, spec.col_field));
    pending[t].emplace_back(ri, ci, metric_value(r, spec.metric));
  }

  for (std::size_t t = 0; t < tables.size(); ++t) {
    PivotTable& table = tables[t];
    table.cells.assign(table.row_labels.size(),
                       std::vector<std::optional<double>>(table.col_labels.size()));
    std::vector<std::vector<bool>> seen(table.row_labels.size(),
                                        std::vector<bool>(table.col_labels.size(), false));
    for (const auto& [ri, ci, value] : pending[t]) {
      if (seen[ri][ci]) {
        throw Error("duplicate_cell", "several rows map to cell (" + table.row_labels[ri] + ", " +
                                          table.col_labels[ci] +
                                          "); add a distinguishing field to group_by");
      }
      seen[ri][ci] = true;
      table.cells[ri][ci] = value;
    }
  }
  return tables;
}

std::string pivot_to_json(const std::vector<PivotTable>& tables, const PivotSpec& spec) {
  json out = json::array();
  for (const auto& t : tables) {
    json j;
    json group = json::object();
    for (const auto& [f, label] : t.group) group[f] = label;
    j["group"] = group;
    j["row_field"] = spec.row_field;
    j["col_field"] = spec.col_field;
    j["metric"] = spec.metric;
    j["rows"] = t.row_labels;
    j["cols"] = t.col_labels;
    json cells = json::array();
    for (const auto& row : t.cells) {
      json r = json::array();
      for (const auto& v : row) r.push_back(v ? json(*v) : json(nullptr));
      cells.push_back(r);
    }
    j["cells"] = cells;
    out.push_back(j);
  }
  return out.dump(2) + "\n";
}

std::string pivot_table_to_csv(const PivotTable& t, const PivotSpec& spec) {
  std::string out = spec.row_field;
  for (const auto& c : t.col_labels) out += "," + c;
  out += "\n";
  for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
    out += t.row_labels[r];
    for (const auto& v : t.cells[r]) out += "," + (v ? format_double(*v) : std::string());
    out += "\n";
  }
  return out;
}

std::string plot_series_csv(const PivotTable& t) {
  std::string out = "series,x,y\n";
  for (std::size_t c = 0; c < t.col_labels.size(); ++c) {
    for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
      const auto& v = t.cells[r][c];
      if (!v) continue;
      out += t.col_labels[c] + "," + t.row_labels[r] + "," + format_double(*v) + "\n";
    }
  }
  return out;
}

std::size_t write_pivot(const std::vector<PivotTable>& tables, const PivotSpec& spec,
                        const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / "pivot.json", pivot_to_json(tables, spec));
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const std::string suffix = std::to_string(i) + ".csv";
    write_file_atomic(out_dir / ("pivot_" + suffix), pivot_table_to_csv(tables[i], spec));
    write_file_atomic(out_dir / ("plot_" + suffix), plot_series_csv(tables[i]));
  }
  return tables.size();
}

}  // namespace oodkit
