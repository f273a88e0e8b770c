#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oodkit/tensor_io.hpp"

namespace oodkit {

enum class Scenario { kFarOod, kCloseOod };

std::string_view to_string(Scenario scenario);
Scenario parse_scenario(std::string_view text);

struct SplitManifest {
  Scenario scenario = Scenario::kFarOod;
  std::vector<std::string> ind_classes;  // sorted
  std::vector<std::string> ood_classes;  // sorted; empty for far-OOD
  std::uint64_t seed = 0;
  std::optional<double> ood_class_fraction;  // close-OOD only

  bool operator==(const SplitManifest&) const = default;
};

// Sorts the names, Fisher-Yates shuffles them with SplitMix64(seed) and holds
// out the first round(fraction * K) (half away from zero) as OOD classes.
SplitManifest make_close_split(std::vector<std::string> class_names, double fraction,
                               std::uint64_t seed);

// All classes IND; outliers come from rows already tagged test_ood.
SplitManifest make_far_split(std::vector<std::string> ind_class_names);

// Rows of OOD classes become test_ood with label -1 (their train/val rows
// are dropped); IND labels are re-densified over the sorted IND names.
// Logit dumps keep only the IND columns, in the new label order.
Dump apply_split(const Dump& dump, const SplitManifest& manifest);

std::string manifest_to_json(const SplitManifest& manifest);
SplitManifest manifest_from_json(std::string_view text);

struct DatasetStats {
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t n_test_ind = 0;
  std::size_t n_test_ood = 0;
  std::size_t n_classes = 1;
};

struct StatsMismatch {
  std::string field;
  std::size_t expected = 0;
  std::size_t observed = 0;
};

struct StatsReport {
  DatasetStats observed;
  std::vector<StatsMismatch> mismatches;
  bool ok() const { return mismatches.empty(); }
};

DatasetStats observed_stats(const Dump& dump);
StatsReport validate_stats(const Dump& dump, const DatasetStats& expected);

// Published row counts: "clinc" (150 intents, 15000/3000/4500/1000) and
// "banking77" (77 intents, 7812/1520/3040 before any class split).
std::optional<DatasetStats> known_stats(std::string_view name);

}  // namespace oodkit
