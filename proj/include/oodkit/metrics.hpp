#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace oodkit {

// IND is the positive class throughout: TPR is the fraction of IND scores
// accepted, FPR the fraction of OOD scores accepted.

struct RocCurve {
  // (fpr, tpr) from threshold +inf down to -inf, one point per distinct score.
  std::vector<std::pair<double, double>> points;

  double area() const;
};

/// Mann-Whitney AUROC with half credit for ties, computed from midranks in
/// O(n log n) using exact integer accumulation.
double auroc(std::span<const double> ind_scores, std::span<const double> ood_scores);

/// FPR at the largest threshold whose TPR reaches target_tpr.
double fpr_at_tpr(std::span<const double> ind_scores, std::span<const double> ood_scores,
                  double target_tpr = 0.95);

RocCurve roc_curve(std::span<const double> ind_scores, std::span<const double> ood_scores);

struct EvalReport {
  std::string dataset;
  std::string scenario;
  std::string backbone_name;
  std::string method_name;
  std::optional<double> budget_fraction;
  std::string scorer_id;
  double auroc = 0.0;
  double fpr_at_95 = 0.0;
  std::optional<double> accuracy;
  std::size_t n_ind = 0;
  std::size_t n_ood = 0;
};

}  // namespace oodkit
