#include "oodkit/splits.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "json.hpp"
#include "oodkit/error.hpp"
#include "oodkit/rng.hpp"

namespace oodkit {
namespace {

using nlohmann::json;

void sort_unique_or_throw(std::vector<std::string>& names) {
  std::sort(names.begin(), names.end());
  const auto dup = std::adjacent_find(names.begin(), names.end());
  if (dup != names.end()) throw Error("duplicate_class", "duplicate class name '" + *dup + "'");
}

}  // namespace

std::string_view to_string(Scenario scenario) {
  return scenario == Scenario::kFarOod ? "far_ood" : "close_ood";
}

Scenario parse_scenario(std::string_view text) {
  if (text == "far_ood" || text == "far") return Scenario::kFarOod;
  if (text == "close_ood" || text == "close") return Scenario::kCloseOod;
  throw Error("invalid_argument", "unknown scenario '" + std::string(text) + "'");
}

SplitManifest make_close_split(std::vector<std::string> class_names, double fraction,
                               std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error("invalid_argument", "OOD class fraction must lie in (0, 1)");
  }
  sort_unique_or_throw(class_names);
  const std::size_t total = class_names.size();
  const auto n_ood = static_cast<std::size_t>(std::round(fraction * static_cast<double>(total)));
  if (n_ood == 0) {
    throw Error("invalid_argument", "fraction " + std::to_string(fraction) + " of " +
                                        std::to_string(total) + " classes holds out none");
  }
  if (total < n_ood + 2) {
    throw Error("invalid_argument", "split leaves " + std::to_string(total - n_ood) +
                                        " IND classes; at least 2 are required");
  }

  SplitMix64 rng(seed);
  for (std::size_t i = total - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(class_names[i], class_names[j]);
  }

  SplitManifest m;
  m.scenario = Scenario::kCloseOod;
  m.seed = seed;
  m.ood_class_fraction = fraction;
  m.ood_classes.assign(class_names.begin(), class_names.begin() + static_cast<std::ptrdiff_t>(n_ood));
  m.ind_classes.assign(class_names.begin() + static_cast<std::ptrdiff_t>(n_ood), class_names.end());
  std::sort(m.ood_classes.begin(), m.ood_classes.end());
  std::sort(m.ind_classes.begin(), m.ind_classes.end());
  return m;
}

SplitManifest make_far_split(std::vector<std::string> ind_class_names) {
  if (ind_class_names.empty()) throw Error("invalid_argument", "far-OOD split needs at least one class");
  sort_unique_or_throw(ind_class_names);
  SplitManifest m;
  m.scenario = Scenario::kFarOod;
  m.ind_classes = std::move(ind_class_names);
  return m;
}

Dump apply_split(const Dump& dump, const SplitManifest& manifest) {
  const std::set<std::string> ind(manifest.ind_classes.begin(), manifest.ind_classes.end());
  const std::set<std::string> ood(manifest.ood_classes.begin(), manifest.ood_classes.end());

  std::vector<std::string> kept;
  for (const auto& name : dump.meta.class_names) {
    if (ind.contains(name)) {
      kept.push_back(name);
    } else if (!ood.contains(name)) {
      throw Error("unknown_class", "class '" + name + "' is not listed in the split manifest");
    }
  }
  std::sort(kept.begin(), kept.end());
  std::map<std::string, int> new_index;
  for (std::size_t i = 0; i < kept.size(); ++i) new_index[kept[i]] = static_cast<int>(i);

  // old label -> new label, or kUnknownLabel for held-out classes
  std::vector<int> remap(dump.meta.class_names.size(), kUnknownLabel);
  std::vector<std::size_t> columns(kept.size());
  for (std::size_t c = 0; c < dump.meta.class_names.size(); ++c) {
    const auto it = new_index.find(dump.meta.class_names[c]);
    if (it == new_index.end()) continue;
    remap[c] = it->second;
    columns[static_cast<std::size_t>(it->second)] = c;
  }

  const bool logits = dump.meta.kind == DumpKind::kLogits;
  Dump out;
  out.meta = dump.meta;
  out.meta.class_names = kept;
  out.meta.dim = logits ? kept.size() : dump.meta.dim;
  out.meta.n = 0;
  out.meta.label_ids.clear();
  out.meta.split_tag.clear();

  for (std::size_t i = 0; i < dump.rows(); ++i) {
    const int label = dump.meta.label_ids[i];
    SplitTag tag = dump.meta.split_tag[i];
    int new_label = label;
    if (label >= 0) {
      new_label = remap[static_cast<std::size_t>(label)];
      if (new_label == kUnknownLabel) {
        if (tag == SplitTag::kTrain || tag == SplitTag::kVal) continue;
        tag = SplitTag::kTestOod;
      }
    }
    const auto r = dump.row(i);
    if (logits) {
      for (std::size_t c : columns) out.data.push_back(r[c]);
    } else {
      out.data.insert(out.data.end(), r.begin(), r.end());
    }
    out.meta.label_ids.push_back(new_label);
    out.meta.split_tag.push_back(tag);
    ++out.meta.n;
  }
  if (out.meta.n == 0) throw Error("empty", "split removed every row");
  validate(out);
  return out;
}

std::string manifest_to_json(const SplitManifest& m) {
  json j;
  j["scenario"] = std::string(to_string(m.scenario));
  j["ind_classes"] = m.ind_classes;
  j["ood_classes"] = m.ood_classes;
  j["seed"] = m.seed;
  j["ood_class_fraction"] = m.ood_class_fraction ? json(*m.ood_class_fraction) : json(nullptr);
  return j.dump(2) + "\n";
}

SplitManifest manifest_from_json(std::string_view text) {
  SplitManifest m;
  try {
    const json j = json::parse(text);
    m.scenario = parse_scenario(j.at("scenario").get<std::string>());
    m.ind_classes = j.at("ind_classes").get<std::vector<std::string>>();
    m.ood_classes = j.value("ood_classes", std::vector<std::string>{});
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("ood_class_fraction") && !j["ood_class_fraction"].is_null()) {
      m.ood_class_fraction = j["ood_class_fraction"].get<double>();
    }
  } catch (const json::exception& e) {
    throw Error("malformed_manifest", e.what());
  }
  sort_unique_or_throw(m.ind_classes);
  sort_unique_or_throw(m.ood_classes);
  for (const auto& name : m.ood_classes) {
    if (std::binary_search(m.ind_classes.begin(), m.ind_classes.end(), name)) {
      throw Error("malformed_manifest", "class '" + name + "' is both IND and OOD");
    }
  }
  return m;
}

DatasetStats observed_stats(const Dump& dump) {
  return DatasetStats{
      .n_train = count_rows(dump, SplitTag::kTrain),
      .n_val = count_rows(dump, SplitTag::kVal),
      .n_test_ind = count_rows(dump, SplitTag::kTestInd),
      .n_test_ood = count_rows(dump, SplitTag::kTestOod),
      .n_classes = dump.meta.class_names.size(),
  };
}

StatsReport validate_stats(const Dump& dump, const DatasetStats& expected) {
  StatsReport report;
  report.observed = observed_stats(dump);
  const auto check = [&](const char* field, std::size_t want, std::size_t got) {
    if (want != got) report.mismatches.push_back({field, want, got});
  };
  check("n_train", expected.n_train, report.observed.n_train);
  check("n_val", expected.n_val, report.observed.n_val);
  check("n_test_ind", expected.n_test_ind, report.observed.n_test_ind);
  check("n_test_ood", expected.n_test_ood, report.observed.n_test_ood);
  check("n_classes", expected.n_classes, report.observed.n_classes);
  return report;
}

std::optional<DatasetStats> known_stats(std::string_view name) {
  if (name == "clinc" || name == "clinc150") {
    return DatasetStats{.n_train = 15000, .n_val = 3000, .n_test_ind = 4500, .n_test_ood = 1000,
                        .n_classes = 150};
  }
  if (name == "banking" || name == "banking77") {
    return DatasetStats{.n_train = 7812, .n_val = 1520, .n_test_ind = 3040, .n_test_ood = 0,
                        .n_classes = 77};
  }
  return std::nullopt;
}

}  // namespace oodkit
