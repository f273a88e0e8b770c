#include "oodkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "oodkit/error.hpp"

namespace oodkit {
namespace {

void check_inputs(std::span<const double> ind, std::span<const double> ood) {
  if (ind.empty() || ood.empty()) {
    throw Error("empty", "metric needs nonempty IND and OOD score lists");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(ind.begin(), ind.end(), finite) ||
      !std::all_of(ood.begin(), ood.end(), finite)) {
    throw Error("non_finite", "metric inputs must be finite");
  }
}

struct Tagged {
  double score;
  bool ind;
};

// Descending by score.
std::vector<Tagged> merge_sorted(std::span<const double> ind, std::span<const double> ood) {
  std::vector<Tagged> all;
  all.reserve(ind.size() + ood.size());
  for (double s : ind) all.push_back({s, true});
  for (double s : ood) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](const Tagged& a, const Tagged& b) { return a.score > b.score; });
  return all;
}

}  // namespace

double auroc(std::span<const double> ind_scores, std::span<const double> ood_scores) {
  check_inputs(ind_scores, ood_scores);
  std::vector<Tagged> all = merge_sorted(ind_scores, ood_scores);
  std::reverse(all.begin(), all.end());  // ascending ranks

  // Doubled midrank of a tie block occupying 0-based positions [i, j) is
  // (i + 1) + j, an integer, so the rank sum stays exact.
  std::uint64_t doubled_rank_sum = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i + 1;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    std::uint64_t ind_in_block = 0;
    for (std::size_t t = i; t < j; ++t) ind_in_block += all[t].ind ? 1 : 0;
    doubled_rank_sum += ind_in_block * static_cast<std::uint64_t>(i + 1 + j);
    i = j;
  }
  const auto n_ind = static_cast<std::uint64_t>(ind_scores.size());
  const auto n_ood = static_cast<std::uint64_t>(ood_scores.size());
  const std::uint64_t doubled_u = doubled_rank_sum - n_ind * (n_ind + 1);
  return static_cast<double>(doubled_u) / static_cast<double>(2 * n_ind * n_ood);
}

double fpr_at_tpr(std::span<const double> ind_scores, std::span<const double> ood_scores,
                  double target_tpr) {
  check_inputs(ind_scores, ood_scores);
  if (!(target_tpr > 0.0 && target_tpr <= 1.0)) {
    throw Error("invalid_argument", "target TPR must lie in (0, 1]");
  }
  const std::size_t n = ind_scores.size();
  // Smallest k with k / n >= target, evaluated the same way TPR is.
  auto k = static_cast<std::size_t>(std::ceil(target_tpr * static_cast<double>(n)));
  k = std::clamp<std::size_t>(k, 1, n);
  while (k > 1 && static_cast<double>(k - 1) / static_cast<double>(n) >= target_tpr) --k;
  while (k < n && static_cast<double>(k) / static_cast<double>(n) < target_tpr) ++k;

  std::vector<double> ind(ind_scores.begin(), ind_scores.end());
  std::nth_element(ind.begin(), ind.begin() + static_cast<std::ptrdiff_t>(k - 1), ind.end(),
                   std::greater<>());
  const double delta = ind[k - 1];
  const auto accepted = std::count_if(ood_scores.begin(), ood_scores.end(),
                                      [delta](double s) { return s >= delta; });
  return static_cast<double>(accepted) / static_cast<double>(ood_scores.size());
}

RocCurve roc_curve(std::span<const double> ind_scores, std::span<const double> ood_scores) {
  check_inputs(ind_scores, ood_scores);
  const std::vector<Tagged> all = merge_sorted(ind_scores, ood_scores);
  const auto n_ind = static_cast<double>(ind_scores.size());
  const auto n_ood = static_cast<double>(ood_scores.size());

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) {
      (all[j].ind ? tp : fp) += 1;
      ++j;
    }
    curve.points.emplace_back(static_cast<double>(fp) / n_ood, static_cast<double>(tp) / n_ind);
    i = j;
  }
  return curve;
}

double RocCurve::area() const {
  double sum = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const auto [x0, y0] = points[i - 1];
    const auto [x1, y1] = points[i];
    sum += (x1 - x0) * (y0 + y1) * 0.5;
  }
  return sum;
}

}  // namespace oodkit
