#include "oodkit/harness.hpp"

#include <cmath>
#include <cstdio>

#include "oodkit/error.hpp"
#include "oodkit/rng.hpp"

namespace oodkit {

std::string_view to_string(OodMode mode) { return mode == OodMode::kFar ? "far" : "close"; }

OodMode parse_ood_mode(std::string_view text) {
  if (text == "far" || text == "far_ood") return OodMode::kFar;
  if (text == "close" || text == "close_ood") return OodMode::kClose;
  throw Error("invalid_argument", "unknown OOD mode '" + std::string(text) + "'");
}

SyntheticData make_synthetic(const SyntheticSpec& spec) {
  const std::size_t k = spec.n_classes;
  const std::size_t d = spec.dim;
  if (k < 1 || d < 1 || spec.n_per_class < 1) {
    throw Error("degenerate", "n_classes, dim and n_per_class must be >= 1");
  }
  if (d < k) {
    throw Error("degenerate", "dim must be >= n_classes to place class means on a simplex");
  }
  if (!(spec.class_separation > 0.0) || !(spec.ood_offset > 0.0)) {
    throw Error("degenerate", "class_separation and ood_offset must be positive");
  }

  const double scale = spec.class_separation / std::sqrt(2.0);
  std::vector<std::vector<double>> means(k, std::vector<double>(d, 0.0));
  for (std::size_t c = 0; c < k; ++c) means[c][c] = scale;

  std::vector<double> ood_center(d, 0.0);
  if (spec.ood_mode == OodMode::kFar) {
    // Centroid, then outward along -1_K / sqrt(K), which is orthogonal to
    // every (mu_k - centroid); the blob is equidistant from all means.
    const double centroid = scale / static_cast<double>(k);
    const double radius_sq = scale * scale - scale * scale / static_cast<double>(k);
    const double target = spec.ood_offset * spec.class_separation;
    const double along = std::sqrt(std::max(0.0, target * target - radius_sq));
    for (std::size_t c = 0; c < k; ++c) {
      ood_center[c] = centroid - along / std::sqrt(static_cast<double>(k));
    }
  } else {
    if (k < 2) throw Error("degenerate", "close mode needs at least 2 classes");
    if (spec.ood_offset >= 1.0) {
      throw Error("degenerate", "close mode ood_offset is a position in (0, 1) between two means");
    }
    for (std::size_t j = 0; j < d; ++j) {
      ood_center[j] = means[0][j] + spec.ood_offset * (means[1][j] - means[0][j]);
    }
  }

  SplitMix64 rng(spec.seed);
  const std::size_t n_test = std::max<std::size_t>(1, spec.n_per_class / 2);

  DumpMeta meta;
  meta.kind = DumpKind::kHidden;
  meta.dim = d;
  meta.backbone_name = "synthetic";
  char note[256];
  std::snprintf(note, sizeof(note),
                "synthetic mode=%s classes=%zu dim=%zu n_per_class=%zu separation=%g "
                "offset=%g seed=%llu",
                std::string(to_string(spec.ood_mode)).c_str(), k, d, spec.n_per_class,
                spec.class_separation, spec.ood_offset,
                static_cast<unsigned long long>(spec.seed));
  meta.source_note = note;
  for (std::size_t c = 0; c < k; ++c) {
    char name[32];
    std::snprintf(name, sizeof(name), "class_%03zu", c);
    meta.class_names.emplace_back(name);
  }

  std::vector<float> hidden;
  const auto emit = [&](const std::vector<double>& center, int label, SplitTag tag) {
    for (std::size_t j = 0; j < d; ++j) {
      hidden.push_back(static_cast<float>(center[j] + rng.normal()));
    }
    meta.label_ids.push_back(label);
    meta.split_tag.push_back(tag);
  };
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < spec.n_per_class; ++i) emit(means[c], static_cast<int>(c), SplitTag::kTrain);
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < n_test; ++i) emit(means[c], static_cast<int>(c), SplitTag::kTestInd);
  }
  for (std::size_t i = 0; i < n_test * k; ++i) emit(ood_center, kUnknownLabel, SplitTag::kTestOod);
  meta.n = meta.label_ids.size();

  SyntheticData out;
  out.hidden.meta = meta;
  out.hidden.data = std::move(hidden);

  out.logits.meta = meta;
  out.logits.meta.kind = DumpKind::kLogits;
  out.logits.meta.dim = k;
  out.logits.data.reserve(meta.n * k);
  for (std::size_t i = 0; i < meta.n; ++i) {
    const auto x = out.hidden.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      double dist = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = static_cast<double>(x[j]) - means[c][j];
        dist += diff * diff;
      }
      out.logits.data.push_back(static_cast<float>(-0.5 * dist));
    }
  }
  validate(out.hidden);
  validate(out.logits);
  return out;
}

void write_synthetic(const SyntheticData& data, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_dump(data.hidden, out_dir / "hidden");
  write_dump(data.logits, out_dir / "logits");
}

}  // namespace oodkit
