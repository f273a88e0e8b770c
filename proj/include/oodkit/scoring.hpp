#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <concepts>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "oodkit/error.hpp"
#include "oodkit/tensor_io.hpp"

namespace oodkit {

// All scorers are oriented so that a larger score means "more in-distribution".
enum class Scorer { kMsp, kEnergy, kMahalanobis, kCosine };

std::string_view to_string(Scorer scorer);
Scorer parse_scorer(std::string_view text);
// msp/energy consume logits, mahalanobis/cosine consume hidden states.
DumpKind required_kind(Scorer scorer);

inline constexpr double kDefaultTemperature = 1.0;
inline constexpr double kDefaultRidgeScale = 1e-6;

namespace detail {
template <std::floating_point T>
double max_of(std::span<const T> row) {
  if (row.empty()) throw Error("invalid_argument", "empty logit row");
  return static_cast<double>(*std::max_element(row.begin(), row.end()));
}
}  // namespace detail

/// Maximum softmax probability, evaluated as 1 / sum_j exp(f_j - max f).
template <std::floating_point T>
double msp_score(std::span<const T> logits) {
  const double top = detail::max_of(logits);
  double denom = 0.0;
  for (T f : logits) denom += std::exp(static_cast<double>(f) - top);
  return 1.0 / denom;
}

/// Negative free energy T * log sum_j exp(f_j / T), via max-shifted log-sum-exp.
template <std::floating_point T>
double energy_score(std::span<const T> logits, double temperature = kDefaultTemperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error("invalid_argument", "energy temperature must be positive and finite");
  }
  const double top = detail::max_of(logits) / temperature;
  double sum = 0.0;
  for (T f : logits) sum += std::exp(static_cast<double>(f) / temperature - top);
  return temperature * (top + std::log(sum));
}

inline double msp_score(const std::vector<double>& logits) {
  return msp_score(std::span<const double>(logits));
}
inline double energy_score(const std::vector<double>& logits,
                           double temperature = kDefaultTemperature) {
  return energy_score(std::span<const double>(logits), temperature);
}

/// Class-conditional Gaussians sharing one pooled covariance.
struct GaussianModel {
  Eigen::MatrixXd means;       // K x d
  Eigen::MatrixXd covariance;  // d x d pooled within-class scatter / n
  Eigen::MatrixXd precision;   // (covariance + ridge_eps * I)^-1
  double ridge_eps = 0.0;
  std::vector<int> class_labels;         // label id of each mean row
  std::vector<std::size_t> class_counts;

  // Inverse Cholesky factor W with precision = W^T W; distances are computed
  // as squared Euclidean norms in the whitened space.
  Eigen::MatrixXd whitener;
  Eigen::MatrixXd whitened_means;  // K x d

  std::size_t dim() const { return static_cast<std::size_t>(means.cols()); }
  std::size_t num_classes() const { return static_cast<std::size_t>(means.rows()); }
};

// `rows` is n x d; labels[i] >= 0 names the class of row i. Throws
// "degenerate" when a class has fewer than 2 rows and "solve_failed" when
// covariance + eps*I is not positive definite.
GaussianModel fit_gaussian(const Eigen::MatrixXd& rows, std::span<const int> labels,
                           double ridge_scale = kDefaultRidgeScale);

// Fits on the rows of `set` tagged train.
GaussianModel fit_gaussian(const EmbeddingSet& set, double ridge_scale = kDefaultRidgeScale);

double mahalanobis_score(const GaussianModel& model, std::span<const double> h);
double mahalanobis_score(const GaussianModel& model, std::span<const float> h);

/// Unit-normalized reference rows for exact nearest-neighbour cosine search.
class CosineIndex {
 public:
  explicit CosineIndex(const Eigen::MatrixXd& rows);
  // Uses the rows of `set` tagged train.
  explicit CosineIndex(const EmbeddingSet& set);

  double score(std::span<const double> query) const;
  double score(std::span<const float> query) const;
  Eigen::VectorXd score_batch(const Eigen::MatrixXd& queries) const;

  std::size_t size() const { return static_cast<std::size_t>(unit_rows_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(unit_rows_.cols()); }

 private:
  Eigen::MatrixXd unit_rows_;
};

double cosine_nn_score(const Eigen::MatrixXd& train_rows, std::span<const double> query);

struct ScoreSeries {
  std::vector<double> values;
  Scorer scorer = Scorer::kMsp;
  std::map<std::string, double> params;
};

struct ScoreParams {
  double temperature = kDefaultTemperature;
};

using FittedModel = std::variant<std::monostate, GaussianModel, CosineIndex>;

// Builds what a representation scorer needs from the train rows of `train`;
// returns monostate for logit scorers.
FittedModel fit_scorer(Scorer scorer, const Dump& train,
                       double ridge_scale = kDefaultRidgeScale);

// Scores every row of `inputs`.
ScoreSeries score_set(Scorer scorer, const Dump& inputs, const FittedModel& model = {},
                      const ScoreParams& params = {});

// Copies a dump (all rows) into a dense n x d double matrix.
Eigen::MatrixXd to_matrix(const Dump& dump);

}  // namespace oodkit
