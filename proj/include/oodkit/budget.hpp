#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oodkit {

enum class PetlMethod { kAdapter, kLora, kPrefix };

std::string_view to_string(PetlMethod method);
PetlMethod parse_petl_method(std::string_view text);

struct PetlSpec {
  PetlMethod method = PetlMethod::kLora;
  std::int64_t hidden_dim = 0;
  std::int64_t layers = 0;
  std::int64_t bottleneck = 0;
  std::int64_t prefix_length = 0;          // prefix only
  std::int64_t total_backbone_params = 0;  // 0 = unknown, fraction reported as 0
};

struct BudgetResult {
  std::int64_t trainable_params = 0;
  double fraction = 0.0;
};

// Adapter and LoRA: 4*L*h*r. Prefix: h*(2*L*r + l). Biases and the
// classification head are not counted. Throws "overflow" if the count does
// not fit in 64 bits.
BudgetResult count_params(const PetlSpec& spec);

// Largest r >= 1 with count_params(r) <= target_fraction * total.
std::int64_t solve_bottleneck(PetlMethod method, std::int64_t hidden_dim, std::int64_t layers,
                              double target_fraction, std::int64_t total_backbone_params,
                              std::optional<std::int64_t> prefix_length = std::nullopt);

struct BackboneGeometry {
  std::string name;
  std::int64_t hidden_dim = 0;
  std::int64_t layers = 0;
  std::int64_t total_params = 0;
};

// GPT2-S/M/L/XL, GPT-Neo 2.7B and GPT-J 6B. Totals count the transformer
// body with token/position embeddings but without a language-model head,
// since a classification head replaces it.
const std::vector<BackboneGeometry>& builtin_backbones();

// JSON array of {"name","hidden_dim","layers","total_params"} objects.
std::vector<BackboneGeometry> parse_backbones(std::string_view json_text);

const BackboneGeometry& find_backbone(const std::vector<BackboneGeometry>& table,
                                      std::string_view name);

}  // namespace oodkit
