#include "oodkit/detection.hpp"

#include <cmath>

namespace oodkit {

DetectionDecision decide(const ScoreSeries& scores, double delta) {
  DetectionDecision out;
  out.threshold_delta = delta;
  out.scorer = scores.scorer;
  out.decisions.reserve(scores.values.size());
  for (double v : scores.values) {
    if (std::isnan(v)) throw Error("non_finite", "score series contains NaN");
    out.decisions.push_back(v >= delta ? Decision::kInd : Decision::kOod);
  }
  return out;
}

double accuracy(const LogitSet& logits, SplitTag restrict_to) {
  if (logits.meta.kind != DumpKind::kLogits) {
    throw Error("kind_mismatch", "accuracy needs a logits dump");
  }
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (logits.meta.split_tag[i] != restrict_to) continue;
    const int label = logits.meta.label_ids[i];
    if (label < 0) {
      throw Error("unknown_label", "row " + std::to_string(i) + " has no class label");
    }
    const auto r = logits.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < r.size(); ++j) {
      if (r[j] > r[best]) best = j;
    }
    ++total;
    if (static_cast<int>(best) == label) ++correct;
  }
  if (total == 0) {
    throw Error("empty", "no rows tagged " + std::string(to_string(restrict_to)));
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace oodkit
