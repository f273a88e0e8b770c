#include "oodkit/scoring.hpp"

#include <limits>

namespace oodkit {
namespace {

void check_dim(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw Error("dimension_mismatch", "expected dimension " + std::to_string(expected) +
                                          ", got " + std::to_string(got));
  }
}

Eigen::MatrixXd train_matrix(const Dump& set, std::vector<int>* labels) {
  constexpr SplitTag kTrainOnly[] = {SplitTag::kTrain};
  const Dump train = select_rows(set, kTrainOnly);
  if (train.rows() == 0) {
    throw Error("missing_train", "dump has no rows tagged train");
  }
  if (labels != nullptr) *labels = train.meta.label_ids;
  return to_matrix(train);
}

double min_whitened_distance(const GaussianModel& model, const Eigen::VectorXd& z) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < model.whitened_means.rows(); ++k) {
    best = std::min(best, (z - model.whitened_means.row(k).transpose()).squaredNorm());
  }
  return best;
}

double score_whitened(const GaussianModel& model, const Eigen::VectorXd& h) {
  const Eigen::VectorXd z = model.whitener * h;
  // Quadratic form of a PD matrix; clamp rounding noise at the means.
  return -std::max(0.0, min_whitened_distance(model, z));
}

}  // namespace

std::string_view to_string(Scorer scorer) {
  switch (scorer) {
    case Scorer::kMsp: return "msp";
    case Scorer::kEnergy: return "energy";
    case Scorer::kMahalanobis: return "mahalanobis";
    case Scorer::kCosine: return "cosine";
  }
  return "?";
}

Scorer parse_scorer(std::string_view text) {
  if (text == "msp") return Scorer::kMsp;
  if (text == "energy") return Scorer::kEnergy;
  if (text == "mahalanobis") return Scorer::kMahalanobis;
  if (text == "cosine") return Scorer::kCosine;
  throw Error("invalid_argument", "unknown scorer '" + std::string(text) + "'");
}

DumpKind required_kind(Scorer scorer) {
  return scorer == Scorer::kMsp || scorer == Scorer::kEnergy ? DumpKind::kLogits
                                                             : DumpKind::kHidden;
}

Eigen::MatrixXd to_matrix(const Dump& dump) {
  Eigen::MatrixXd m(dump.rows(), dump.cols());
  for (std::size_t i = 0; i < dump.rows(); ++i) {
    const auto r = dump.row(i);
    for (std::size_t j = 0; j < dump.cols(); ++j) m(i, j) = r[j];
  }
  return m;
}

GaussianModel fit_gaussian(const Eigen::MatrixXd& rows, std::span<const int> labels,
                           double ridge_scale) {
  const auto n = rows.rows();
  const auto d = rows.cols();
  if (d < 1 || n < 1) throw Error("invalid_argument", "fit_gaussian needs a nonempty matrix");
  if (static_cast<std::size_t>(n) != labels.size()) {
    throw Error("invalid_argument", "row/label count mismatch");
  }
  if (!(ridge_scale >= 0.0) || !std::isfinite(ridge_scale)) {
    throw Error("invalid_argument", "ridge_scale must be finite and nonnegative");
  }

  std::map<int, std::vector<Eigen::Index>> members;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 0) {
      throw Error("invalid_argument", "training row " + std::to_string(i) + " has no class label");
    }
    members[label].push_back(i);
  }

  GaussianModel model;
  const auto k = static_cast<Eigen::Index>(members.size());
  model.means.setZero(k, d);
  Eigen::MatrixXd centered(n, d);
  Eigen::Index c = 0;
  for (const auto& [label, idx] : members) {
    if (idx.size() < 2) {
      throw Error("degenerate", "class " + std::to_string(label) + " has " +
                                    std::to_string(idx.size()) +
                                    " training row(s); at least 2 are required");
    }
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(d);
    for (auto i : idx) mean += rows.row(i);
    mean /= static_cast<double>(idx.size());
    for (auto i : idx) centered.row(i) = rows.row(i) - mean;
    model.means.row(c++) = mean;
    model.class_labels.push_back(label);
    model.class_counts.push_back(idx.size());
  }

  model.covariance = (centered.transpose() * centered) / static_cast<double>(n);
  model.covariance = 0.5 * (model.covariance + model.covariance.transpose()).eval();

  const double trace = model.covariance.trace();
  // Zero scatter has no scale to borrow, so the ridge falls back to ridge_scale itself.
  model.ridge_eps = trace > 0.0 ? ridge_scale * trace / static_cast<double>(d) : ridge_scale;

  Eigen::MatrixXd regularized = model.covariance;
  regularized.diagonal().array() += model.ridge_eps;
  Eigen::LLT<Eigen::MatrixXd> llt(regularized);
  if (llt.info() != Eigen::Success) {
    throw Error("solve_failed",
                "pooled covariance is not positive definite after ridging (eps=" +
                    std::to_string(model.ridge_eps) + ")");
  }
  const Eigen::MatrixXd lower = llt.matrixL();
  model.whitener = lower.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
  if (!model.whitener.allFinite()) {
    throw Error("solve_failed", "pooled covariance inverse is not finite");
  }
  model.precision = model.whitener.transpose() * model.whitener;
  model.whitened_means = model.means * model.whitener.transpose();
  return model;
}

GaussianModel fit_gaussian(const EmbeddingSet& set, double ridge_scale) {
  if (set.meta.kind != DumpKind::kHidden) {
    throw Error("kind_mismatch", "fit_gaussian needs a hidden-state dump");
  }
  std::vector<int> labels;
  const Eigen::MatrixXd rows = train_matrix(set, &labels);
  return fit_gaussian(rows, labels, ridge_scale);
}

double mahalanobis_score(const GaussianModel& model, std::span<const double> h) {
  check_dim(model.dim(), h.size());
  return score_whitened(
      model, Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size())));
}

double mahalanobis_score(const GaussianModel& model, std::span<const float> h) {
  check_dim(model.dim(), h.size());
  return score_whitened(
      model, Eigen::Map<const Eigen::VectorXf>(h.data(), static_cast<Eigen::Index>(h.size()))
                 .cast<double>());
}

CosineIndex::CosineIndex(const Eigen::MatrixXd& rows) : unit_rows_(rows) {
  if (rows.rows() == 0 || rows.cols() == 0) {
    throw Error("invalid_argument", "cosine reference set is empty");
  }
  for (Eigen::Index i = 0; i < unit_rows_.rows(); ++i) {
    const double norm = unit_rows_.row(i).norm();
    if (!(norm > 0.0)) {
      throw Error("zero_norm", "reference row " + std::to_string(i) + " has zero norm");
    }
    unit_rows_.row(i) /= norm;
  }
}

CosineIndex::CosineIndex(const EmbeddingSet& set) : CosineIndex(train_matrix(set, nullptr)) {}

double CosineIndex::score(std::span<const double> query) const {
  check_dim(dim(), query.size());
  Eigen::MatrixXd q =
      Eigen::Map<const Eigen::RowVectorXd>(query.data(), static_cast<Eigen::Index>(query.size()));
  return score_batch(q)(0);
}

double CosineIndex::score(std::span<const float> query) const {
  check_dim(dim(), query.size());
  Eigen::MatrixXd q =
      Eigen::Map<const Eigen::RowVectorXf>(query.data(), static_cast<Eigen::Index>(query.size()))
          .cast<double>();
  return score_batch(q)(0);
}

Eigen::VectorXd CosineIndex::score_batch(const Eigen::MatrixXd& queries) const {
  check_dim(dim(), static_cast<std::size_t>(queries.cols()));
  Eigen::MatrixXd unit = queries;
  for (Eigen::Index i = 0; i < unit.rows(); ++i) {
    const double norm = unit.row(i).norm();
    if (!(norm > 0.0)) {
      throw Error("zero_norm", "query row " + std::to_string(i) + " has zero norm");
    }
    unit.row(i) /= norm;
  }
  const Eigen::MatrixXd sims = unit * unit_rows_.transpose();
  Eigen::VectorXd best = sims.rowwise().maxCoeff();
  return best.cwiseMax(-1.0).cwiseMin(1.0);
}

double cosine_nn_score(const Eigen::MatrixXd& train_rows, std::span<const double> query) {
  return CosineIndex(train_rows).score(query);
}

FittedModel fit_scorer(Scorer scorer, const Dump& train, double ridge_scale) {
  switch (scorer) {
    case Scorer::kMahalanobis: return fit_gaussian(train, ridge_scale);
    case Scorer::kCosine:
      if (train.meta.kind != DumpKind::kHidden) {
        throw Error("kind_mismatch", "cosine scorer needs a hidden-state dump");
      }
      return CosineIndex(train);
    default: return std::monostate{};
  }
}

ScoreSeries score_set(Scorer scorer, const Dump& inputs, const FittedModel& model,
                      const ScoreParams& params) {
  if (inputs.meta.kind != required_kind(scorer)) {
    throw Error("kind_mismatch", std::string(to_string(scorer)) + " scorer needs a " +
                                     std::string(to_string(required_kind(scorer))) +
                                     " dump, got " + std::string(to_string(inputs.meta.kind)));
  }
  ScoreSeries out;
  out.scorer = scorer;
  out.values.resize(inputs.rows());

  switch (scorer) {
    case Scorer::kMsp:
      for (std::size_t i = 0; i < inputs.rows(); ++i) out.values[i] = msp_score(inputs.row(i));
      break;
    case Scorer::kEnergy:
      out.params["temperature"] = params.temperature;
      for (std::size_t i = 0; i < inputs.rows(); ++i) {
        out.values[i] = energy_score(inputs.row(i), params.temperature);
      }
      break;
    case Scorer::kMahalanobis: {
      const auto* gaussian = std::get_if<GaussianModel>(&model);
      if (gaussian == nullptr) {
        throw Error("missing_model", "mahalanobis scoring needs a fitted Gaussian model");
      }
      check_dim(gaussian->dim(), inputs.cols());
      out.params["ridge_eps"] = gaussian->ridge_eps;
      if (inputs.rows() == 0) break;
      const Eigen::MatrixXd z = to_matrix(inputs) * gaussian->whitener.transpose();
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        out.values[static_cast<std::size_t>(i)] =
            -std::max(0.0, min_whitened_distance(*gaussian, z.row(i).transpose()));
      }
      break;
    }
    case Scorer::kCosine: {
      const auto* index = std::get_if<CosineIndex>(&model);
      if (index == nullptr) {
        throw Error("missing_model", "cosine scoring needs a reference set");
      }
      if (inputs.rows() == 0) break;
      const Eigen::VectorXd s = index->score_batch(to_matrix(inputs));
      out.values.assign(s.data(), s.data() + s.size());
      break;
    }
  }
  return out;
}

}  // namespace oodkit
