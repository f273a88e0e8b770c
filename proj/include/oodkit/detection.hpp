#pragma once

#include <vector>

#include "oodkit/scoring.hpp"
#include "oodkit/tensor_io.hpp"

namespace oodkit {

enum class Decision { kInd, kOod };

struct DetectionDecision {
  double threshold_delta = 0.0;
  std::vector<Decision> decisions;
  Scorer scorer = Scorer::kMsp;
};

// IND iff score >= delta (the boundary counts as IND).
DetectionDecision decide(const ScoreSeries& scores, double delta);

// Fraction of rows with split tag `restrict_to` whose argmax logit (lowest
// index on ties) equals the row label.
double accuracy(const LogitSet& logits, SplitTag restrict_to = SplitTag::kTestInd);

}  // namespace oodkit
