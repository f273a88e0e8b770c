#include "oodkit/budget.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "json.hpp"
#include "oodkit/error.hpp"

namespace oodkit {
namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw Error("overflow", "parameter count overflows 64-bit integer");
  }
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw Error("overflow", "parameter count overflows 64-bit integer");
  }
  return out;
}

void require_positive(std::int64_t v, const char* what) {
  if (v < 1) throw Error("invalid_argument", std::string(what) + " must be >= 1");
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(PetlMethod method) {
  switch (method) {
    case PetlMethod::kAdapter: return "adapter";
    case PetlMethod::kLora: return "lora";
    case PetlMethod::kPrefix: return "prefix";
  }
  return "?";
}

PetlMethod parse_petl_method(std::string_view text) {
  const std::string t = lowercase(text);
  if (t == "adapter") return PetlMethod::kAdapter;
  if (t == "lora") return PetlMethod::kLora;
  if (t == "prefix") return PetlMethod::kPrefix;
  throw Error("invalid_argument", "unknown PETL method '" + std::string(text) + "'");
}

BudgetResult count_params(const PetlSpec& spec) {
  require_positive(spec.hidden_dim, "hidden_dim");
  require_positive(spec.layers, "layers");
  require_positive(spec.bottleneck, "bottleneck");
  if (spec.total_backbone_params < 0) {
    throw Error("invalid_argument", "total_backbone_params must be nonnegative");
  }

  BudgetResult result;
  const std::int64_t lhr = checked_mul(checked_mul(spec.layers, spec.hidden_dim), spec.bottleneck);
  switch (spec.method) {
    case PetlMethod::kAdapter:
    case PetlMethod::kLora:
      result.trainable_params = checked_mul(4, lhr);
      break;
    case PetlMethod::kPrefix:
      require_positive(spec.prefix_length, "prefix_length");
      result.trainable_params =
          checked_add(checked_mul(2, lhr), checked_mul(spec.hidden_dim, spec.prefix_length));
      break;
  }
  if (spec.total_backbone_params > 0) {
    result.fraction = static_cast<double>(result.trainable_params) /
                      static_cast<double>(spec.total_backbone_params);
  }
  return result;
}

std::int64_t solve_bottleneck(PetlMethod method, std::int64_t hidden_dim, std::int64_t layers,
                              double target_fraction, std::int64_t total_backbone_params,
                              std::optional<std::int64_t> prefix_length) {
  if (!(target_fraction > 0.0) || !std::isfinite(target_fraction)) {
    throw Error("invalid_argument", "target fraction must be positive");
  }
  require_positive(hidden_dim, "hidden_dim");
  require_positive(layers, "layers");
  require_positive(total_backbone_params, "total_backbone_params");
  if (method == PetlMethod::kPrefix && !prefix_length) {
    throw Error("invalid_argument", "prefix tuning needs a prefix length");
  }

  PetlSpec spec{.method = method,
                .hidden_dim = hidden_dim,
                .layers = layers,
                .bottleneck = 1,
                .prefix_length = prefix_length.value_or(0),
                .total_backbone_params = total_backbone_params};

  // Budget in parameters; the relative slack lets a target computed as
  // count/total land back on that exact count.
  const long double budget = static_cast<long double>(target_fraction) *
                             static_cast<long double>(total_backbone_params) * (1.0L + 1e-12L);
  const auto fits = [&](std::int64_t r) {
    spec.bottleneck = r;
    return static_cast<long double>(count_params(spec).trainable_params) <= budget;
  };

  // count(r) = slope * r + offset; the closed-form guess is then corrected
  // against count_params itself.
  const bool prefix = method == PetlMethod::kPrefix;
  const long double slope =
      static_cast<long double>(prefix ? 2 : 4) * static_cast<long double>(layers) * hidden_dim;
  const long double offset =
      prefix ? static_cast<long double>(hidden_dim) * spec.prefix_length : 0.0L;
  const long double guess = std::floor((budget - offset) / slope);
  if (guess > 1e17L) throw Error("overflow", "bottleneck solution exceeds 64-bit range");
  auto r = static_cast<std::int64_t>(guess);
  r = std::max<std::int64_t>(r, 1);
  while (fits(r + 1)) ++r;
  while (r >= 1 && !fits(r)) --r;
  if (r < 1) {
    throw Error("no_fit", "no bottleneck r >= 1 fits a budget of " +
                              std::to_string(target_fraction) + " of " +
                              std::to_string(total_backbone_params) + " parameters");
  }
  return r;
}

const std::vector<BackboneGeometry>& builtin_backbones() {
  static const std::vector<BackboneGeometry> table = {
      {"gpt2-s", 768, 12, 124'439'808},
      {"gpt2-m", 1024, 24, 354'823'168},
      {"gpt2-l", 1280, 36, 774'030'080},
      {"gpt2-xl", 1600, 48, 1'557'611'200},
      {"gpt-neo", 2560, 32, 2'651'307'520},
      {"gpt-j", 4096, 28, 5'844'393'984},
  };
  return table;
}

std::vector<BackboneGeometry> parse_backbones(std::string_view json_text) {
  std::vector<BackboneGeometry> out;
  try {
    for (const auto& item : nlohmann::json::parse(json_text)) {
      out.push_back({item.at("name").get<std::string>(), item.at("hidden_dim").get<std::int64_t>(),
                     item.at("layers").get<std::int64_t>(),
                     item.at("total_params").get<std::int64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed_config", std::string("backbone table: ") + e.what());
  }
  return out;
}

const BackboneGeometry& find_backbone(const std::vector<BackboneGeometry>& table,
                                      std::string_view name) {
  const std::string key = lowercase(name);
  for (const auto& g : table) {
    if (lowercase(g.name) == key) return g;
  }
  throw Error("unknown_backbone", "no geometry for backbone '" + std::string(name) + "'");
}

}  // namespace oodkit
