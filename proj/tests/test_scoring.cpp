#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "oodkit/error.hpp"
#include "oodkit/harness.hpp"
#include "oodkit/scoring.hpp"
#include "oracles.hpp"

namespace oodkit {
namespace {

using V = std::vector<double>;

Dump logit_dump(const std::vector<V>& rows) {
  Dump d;
  d.meta.kind = DumpKind::kLogits;
  d.meta.n = rows.size();
  d.meta.dim = rows[0].size();
  for (std::size_t j = 0; j < d.meta.dim; ++j) d.meta.class_names.push_back("c" + std::to_string(j));
  d.meta.label_ids.assign(rows.size(), 0);
  d.meta.split_tag.assign(rows.size(), SplitTag::kTestInd);
  for (const auto& r : rows) {
    for (double v : r) d.data.push_back(static_cast<float>(v));
  }
  return d;
}

Eigen::MatrixXd mat(const std::vector<V>& rows) {
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

// --- MSP -------------------------------------------------------------------

TEST(Msp, Examples) {
  EXPECT_NEAR(msp_score(V{2, 2, 2}), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(msp_score(V{5}), 1.0);
  EXPECT_NEAR(msp_score(V{10, 0, 0}), 0.9999092083843409, 1e-15);
  EXPECT_THROW(msp_score(V{}), Error);
}

TEST(Msp, ShiftInvarianceAndRange) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 5.0);
  for (int t = 0; t < 200; ++t) {
    V f(1 + t % 9);
    for (auto& v : f) v = g(rng);
    const double c = g(rng) * 10.0;
    V shifted = f;
    for (auto& v : shifted) v += c;
    const double p = msp_score(f);
    EXPECT_NEAR(msp_score(shifted), p, 1e-12);
    EXPECT_GT(p, 0.0);
    EXPECT_LE(p, 1.0);
    EXPECT_GE(p, 1.0 / static_cast<double>(f.size()) - 1e-15);
  }
}

TEST(Msp, HugeLogitsStayFinite) {
  EXPECT_NEAR(msp_score(V{1000, 1000}), 0.5, 1e-15);
  EXPECT_NEAR(msp_score(V{-1000, -1000, -1000, -1000}), 0.25, 1e-15);
}

// --- Energy ----------------------------------------------------------------

TEST(Energy, Examples) {
  for (double c : {-7.5, 0.0, 3.25, 1e6}) EXPECT_DOUBLE_EQ(energy_score(V{c}, 1.0), c);
  EXPECT_NEAR(energy_score(V{0, 0}, 1.0), 0.6931471805599453, 1e-15);
  EXPECT_NEAR(energy_score(V{1, 1, 1, 1}, 2.0), 3.772588722239781, 1e-14);
  EXPECT_THROW(energy_score(V{1, 2}, 0.0), Error);
  EXPECT_THROW(energy_score(V{1, 2}, -1.0), Error);
  EXPECT_THROW(energy_score(V{}, 1.0), Error);
}

TEST(Energy, ShiftEquivarianceBoundsMonotonicity) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 4.0);
  std::uniform_real_distribution<double> temp(0.1, 5.0);
  for (int t = 0; t < 200; ++t) {
    V f(1 + t % 12);
    for (auto& v : f) v = g(rng);
    const double T = temp(rng);
    const double c = g(rng) * 3.0;
    V shifted = f;
    for (auto& v : shifted) v += c;
    EXPECT_NEAR(energy_score(shifted, T), energy_score(f, T) + c, 1e-9);

    const double top = *std::max_element(f.begin(), f.end());
    const double e1 = energy_score(f, 1.0);
    EXPECT_LE(top, e1 + 1e-12);
    EXPECT_LE(e1, top + std::log(static_cast<double>(f.size())) + 1e-12);

    V bumped = f;
    bumped[static_cast<std::size_t>(t) % f.size()] += 0.5;
    // Raising one logit never lowers the energy; rounding can leave it equal
    // when the raised logit sits far below the maximum.
    EXPECT_GE(energy_score(bumped, T), energy_score(f, T));
    const auto arg = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
    bumped = f;
    bumped[arg] += 0.5;
    EXPECT_GT(energy_score(bumped, T), energy_score(f, T));
  }
}

// --- Gaussian fit ------------------------------------------------------------

TEST(FitGaussian, HandArithmetic) {
  const auto m = fit_gaussian(mat({{1, 0}, {-1, 0}, {0, 1}, {0, -1}}), std::vector<int>{0, 0, 0, 0});
  EXPECT_NEAR(m.means(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(m.means(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(m.covariance(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(m.covariance(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(m.covariance(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(m.ridge_eps, 1e-6 * 1.0 / 2.0, 1e-20);
  EXPECT_EQ(m.class_counts, (std::vector<std::size_t>{4}));
}

TEST(FitGaussian, ZeroScatter) {
  const double ridge = 1e-3;
  const auto m = fit_gaussian(mat({{1, 2}, {1, 2}, {5, 5}, {5, 5}}), std::vector<int>{0, 0, 1, 1},
                              ridge);
  EXPECT_TRUE(m.covariance.isZero(0.0));
  EXPECT_DOUBLE_EQ(m.ridge_eps, ridge);
  EXPECT_TRUE(m.precision.isApprox(Eigen::Matrix2d::Identity() / ridge, 1e-12));
  // No ridge at all cannot be inverted.
  EXPECT_THROW(fit_gaussian(mat({{1, 2}, {1, 2}}), std::vector<int>{0, 0}, 0.0), Error);
}

TEST(FitGaussian, MatchesBruteForcePooledScatter) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<V> rows;
    std::vector<int> labels;
    for (int i = 0; i < 30; ++i) {
      const int label = i % 2;
      rows.push_back({g(rng) + 3.0 * label, 0.5 * g(rng) + 0.3 * g(rng) - label});
      labels.push_back(label);
    }
    const auto model = fit_gaussian(mat(rows), labels, 0.0);
    const auto oracle = testing::pooled_scatter(rows, labels);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) EXPECT_NEAR(model.covariance(a, b), oracle.covariance[a][b], 1e-10);
      for (int k = 0; k < 2; ++k) EXPECT_NEAR(model.means(k, a), oracle.means[k][a], 1e-12);
    }
  }
}

TEST(FitGaussian, InvariantsOnRankDeficientData) {
  // n < d: the scatter is singular, the ridge makes it invertible.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Eigen::MatrixXd rows(6, 10);
  for (Eigen::Index i = 0; i < rows.size(); ++i) rows.data()[i] = g(rng);
  const std::vector<int> labels = {0, 0, 0, 1, 1, 1};
  const auto m = fit_gaussian(rows, labels);
  EXPECT_TRUE(m.covariance.isApprox(m.covariance.transpose(), 1e-9));
  Eigen::MatrixXd reg = m.covariance;
  reg.diagonal().array() += m.ridge_eps;
  const Eigen::MatrixXd prod = m.precision * reg;
  EXPECT_LE((prod - Eigen::MatrixXd::Identity(10, 10)).norm(), 1e-6 * 10);
}

TEST(FitGaussian, Errors) {
  EXPECT_THROW(fit_gaussian(mat({{1, 2}, {3, 4}, {5, 6}}), std::vector<int>{0, 0, 1}), Error);
  try {
    fit_gaussian(mat({{1, 2}, {3, 4}, {5, 6}}), std::vector<int>{0, 0, 1});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "degenerate");
  }
  EXPECT_THROW(fit_gaussian(mat({{1, 2}, {3, 4}}), std::vector<int>{0, -1}), Error);
}

// --- Mahalanobis -------------------------------------------------------------

// Four points whose pooled covariance is exactly the identity around `center`.
void add_identity_class(std::vector<V>& rows, std::vector<int>& labels, V center, int label) {
  const double s = std::sqrt(2.0);
  for (V off : {V{s, 0}, V{-s, 0}, V{0, s}, V{0, -s}}) {
    rows.push_back({center[0] + off[0], center[1] + off[1]});
    labels.push_back(label);
  }
}

TEST(Mahalanobis, IdentityCovarianceIsSquaredDistance) {
  std::vector<V> rows;
  std::vector<int> labels;
  add_identity_class(rows, labels, {0, 0}, 0);
  const auto m = fit_gaussian(mat(rows), labels, 0.0);
  EXPECT_NEAR(mahalanobis_score(m, std::span<const double>(V{3, 4})), -25.0, 1e-12);
}

TEST(Mahalanobis, MinimumOverClasses) {
  std::vector<V> rows;
  std::vector<int> labels;
  add_identity_class(rows, labels, {0, 0}, 0);
  add_identity_class(rows, labels, {10, 0}, 1);
  const auto m = fit_gaussian(mat(rows), labels, 0.0);
  EXPECT_NEAR(mahalanobis_score(m, std::span<const double>(V{1, 0})), -1.0, 1e-12);
  EXPECT_NEAR(mahalanobis_score(m, std::span<const double>(V{10, 0})), 0.0, 1e-12);
  EXPECT_THROW(mahalanobis_score(m, std::span<const double>(V{1, 0, 0})), Error);
}

TEST(Mahalanobis, NonDiagonalMatchesClosedForm2x2Inverse) {
  const std::vector<V> rows = {{2, 1}, {-2, -1}, {1, 2}, {-1, -2}, {0.5, -0.25}, {-0.5, 0.25}};
  const std::vector<int> labels(rows.size(), 0);
  const auto m = fit_gaussian(mat(rows), labels, 0.0);
  const auto oracle = testing::pooled_scatter(rows, labels);
  const auto& s = oracle.covariance;
  const double det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
  const testing::Matrix inv = {{s[1][1] / det, -s[0][1] / det}, {-s[1][0] / det, s[0][0] / det}};
  for (V h : {V{1, 1}, V{-3, 2}, V{0.1, -0.7}, V{5, 5}}) {
    EXPECT_NEAR(mahalanobis_score(m, std::span<const double>(h)),
                testing::explicit_mahalanobis(oracle.means, inv, h), 1e-8);
  }
}

TEST(Mahalanobis, LinearInvariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 3;
    Eigen::MatrixXd rows(40, d);
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
      labels.push_back(i % 3);
      for (int j = 0; j < d; ++j) rows(i, j) = g(rng) + 2.0 * (i % 3 == j);
    }
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    a += 2.0 * Eigen::MatrixXd::Identity(d, d);
    ASSERT_GT(std::abs(a.determinant()), 1e-3);

    const auto base = fit_gaussian(rows, labels, 0.0);
    const auto moved = fit_gaussian(rows * a.transpose(), labels, 0.0);
    for (int q = 0; q < 5; ++q) {
      Eigen::VectorXd h(d);
      for (int j = 0; j < d; ++j) h(j) = 3.0 * g(rng);
      const Eigen::VectorXd ah = a * h;
      const double s0 = mahalanobis_score(base, std::span<const double>(h.data(), d));
      const double s1 = mahalanobis_score(moved, std::span<const double>(ah.data(), d));
      EXPECT_NEAR(s1, s0, 1e-6 * std::max(1.0, std::abs(s0)));
    }
  }
}

TEST(Mahalanobis, TrainingRowsScoreNonPositive) {
  SyntheticSpec spec;
  spec.n_classes = 3;
  spec.dim = 4;
  spec.n_per_class = 30;
  const auto data = make_synthetic(spec);
  const auto model = fit_gaussian(data.hidden);
  constexpr SplitTag kTrain[] = {SplitTag::kTrain};
  const Dump train = select_rows(data.hidden, kTrain);
  const auto series = score_set(Scorer::kMahalanobis, train, model);
  for (double v : series.values) EXPECT_LE(v, 0.0);
  // Oracle scan: the class means themselves attain the maximum score 0, and
  // every training row is at or below that.
  for (Eigen::Index k = 0; k < model.means.rows(); ++k) {
    const Eigen::VectorXd mu = model.means.row(k).transpose();
    EXPECT_NEAR(mahalanobis_score(model, std::span<const double>(mu.data(), mu.size())), 0.0, 1e-9);
  }
}

// --- Cosine ------------------------------------------------------------------

TEST(Cosine, Examples) {
  const Eigen::MatrixXd train = mat({{1, 0}, {0, 1}, {3, -4}});
  EXPECT_NEAR(cosine_nn_score(train, V{3, -4}), 1.0, 1e-15);
  EXPECT_NEAR(cosine_nn_score(mat({{1, 0}}), V{0, 1}), 0.0, 1e-15);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(cosine_nn_score(mat({{1, 0}, {0, 1}}), V{r, r}), 0.7071067811865475, 1e-15);
}

TEST(Cosine, ZeroNormRejected) {
  EXPECT_THROW(cosine_nn_score(mat({{1, 0}}), V{0, 0}), Error);
  EXPECT_THROW(cosine_nn_score(mat({{0, 0}, {1, 0}}), V{1, 0}), Error);
}

TEST(Cosine, PositiveScaleInvariance) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> alpha(0.01, 100.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd train(8, 5);
    for (Eigen::Index i = 0; i < train.size(); ++i) train.data()[i] = g(rng);
    V q(5);
    for (auto& v : q) v = g(rng);
    const double s = cosine_nn_score(train, q);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    V q2 = q;
    const double a = alpha(rng);
    for (auto& v : q2) v *= a;
    EXPECT_NEAR(cosine_nn_score(train, q2), s, 1e-12);
    Eigen::MatrixXd t2 = train;
    t2.row(trial % 8) *= alpha(rng);
    EXPECT_NEAR(cosine_nn_score(t2, q), s, 1e-12);
  }
}

// --- Batch wrapper -----------------------------------------------------------

TEST(ScoreSet, MatchesRowwiseOperations) {
  const Dump logits = logit_dump({{1, 2, 3}, {0, 0, 0}, {-1, 4, 2}});
  const auto msp = score_set(Scorer::kMsp, logits);
  ASSERT_EQ(msp.values.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(msp.values[i], msp_score(logits.row(i)));

  const auto energy = score_set(Scorer::kEnergy, logit_dump({{0, 0}, {1, 1}}), {}, {.temperature = 1.0});
  EXPECT_NEAR(energy.values[0], 0.6931471805599453, 1e-15);
  EXPECT_NEAR(energy.values[1], 1.6931471805599454, 1e-15);
  EXPECT_EQ(energy.params.at("temperature"), 1.0);
}

TEST(ScoreSet, KindAndModelErrors) {
  const Dump logits = logit_dump({{1, 2}});
  try {
    score_set(Scorer::kMahalanobis, logits);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "kind_mismatch");
  }
  Dump hidden = logits;
  hidden.meta.kind = DumpKind::kHidden;
  EXPECT_THROW(score_set(Scorer::kMsp, hidden), Error);
  try {
    score_set(Scorer::kCosine, hidden);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "missing_model");
  }
  // hidden dump without train rows
  try {
    fit_scorer(Scorer::kMahalanobis, hidden);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "missing_train");
  }
}

TEST(ScoreSet, AllScorersRankIndAboveOodOnSeparatedMixture) {
  SyntheticSpec spec;
  spec.seed = 17;
  const auto data = make_synthetic(spec);
  constexpr SplitTag kInd[] = {SplitTag::kTestInd};
  constexpr SplitTag kOod[] = {SplitTag::kTestOod};
  for (Scorer s : {Scorer::kMsp, Scorer::kEnergy, Scorer::kMahalanobis, Scorer::kCosine}) {
    const Dump& dump = required_kind(s) == DumpKind::kLogits ? data.logits : data.hidden;
    const auto model = fit_scorer(s, dump);
    const auto ind = score_set(s, select_rows(dump, kInd), model);
    const auto ood = score_set(s, select_rows(dump, kOod), model);
    const double mi = std::accumulate(ind.values.begin(), ind.values.end(), 0.0) / ind.values.size();
    const double mo = std::accumulate(ood.values.begin(), ood.values.end(), 0.0) / ood.values.size();
    EXPECT_GT(mi, mo) << to_string(s);
  }
}

}  // namespace
}  // namespace oodkit
