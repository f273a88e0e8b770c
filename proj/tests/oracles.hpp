#pragma once

// Independent reference implementations used only by the tests. None of them
// share code paths with the library routines they check.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace oodkit::testing {

// O(n*m) pairwise Mann-Whitney statistic with half credit for ties.
inline double pairwise_auroc(const std::vector<double>& ind, const std::vector<double>& ood) {
  std::uint64_t doubled = 0;
  for (double a : ind) {
    for (double b : ood) {
      if (a > b) doubled += 2;
      else if (a == b) doubled += 1;
    }
  }
  return static_cast<double>(doubled) / (2.0 * static_cast<double>(ind.size() * ood.size()));
}

// Linear threshold scan: try every IND score as delta, keep the largest one
// whose TPR reaches the target.
inline double scan_fpr_at_tpr(const std::vector<double>& ind, const std::vector<double>& ood,
                              double target) {
  double best_delta = -INFINITY;
  bool found = false;
  for (double delta : ind) {
    std::size_t tp = 0;
    for (double s : ind) tp += s >= delta;
    if (static_cast<double>(tp) / static_cast<double>(ind.size()) >= target &&
        (!found || delta > best_delta)) {
      best_delta = delta;
      found = true;
    }
  }
  std::size_t fp = 0;
  for (double s : ood) fp += s >= best_delta;
  return static_cast<double>(fp) / static_cast<double>(ood.size());
}

using Matrix = std::vector<std::vector<double>>;

inline Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, std::vector<double>(c, 0.0)); }

// Gauss-Jordan inverse with partial pivoting.
inline Matrix invert(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    std::swap(inv[col], inv[piv]);
    const double p = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= p;
      inv[col][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

struct PooledGaussian {
  Matrix means;  // one row per distinct label, ascending label order
  Matrix covariance;
};

// Per-class means, then Sum over rows of (x - mu)(x - mu)^T / n accumulated
// entry by entry.
inline PooledGaussian pooled_scatter(const Matrix& rows, const std::vector<int>& labels) {
  int max_label = 0;
  for (int l : labels) max_label = std::max(max_label, l);
  const std::size_t d = rows[0].size();
  Matrix sums = zeros(static_cast<std::size_t>(max_label) + 1, d);
  std::vector<double> counts(static_cast<std::size_t>(max_label) + 1, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    counts[labels[i]] += 1.0;
    for (std::size_t j = 0; j < d; ++j) sums[labels[i]][j] += rows[i][j];
  }
  PooledGaussian g;
  std::vector<int> present;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) continue;
    std::vector<double> mu(d);
    for (std::size_t j = 0; j < d; ++j) mu[j] = sums[c][j] / counts[c];
    g.means.push_back(mu);
  }
  std::vector<std::size_t> slot(counts.size(), 0);
  for (std::size_t c = 0, s = 0; c < counts.size(); ++c) {
    if (counts[c] > 0) slot[c] = s++;
  }
  g.covariance = zeros(d, d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& mu = g.means[slot[labels[i]]];
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        g.covariance[a][b] += (rows[i][a] - mu[a]) * (rows[i][b] - mu[b]);
      }
    }
  }
  for (auto& r : g.covariance) {
    for (auto& v : r) v /= static_cast<double>(rows.size());
  }
  return g;
}

// -min_k (h - mu_k)^T P (h - mu_k) with P an explicit inverse.
inline double explicit_mahalanobis(const Matrix& means, const Matrix& precision,
                                   const std::vector<double>& h) {
  double best = INFINITY;
  for (const auto& mu : means) {
    double q = 0.0;
    for (std::size_t a = 0; a < h.size(); ++a) {
      for (std::size_t b = 0; b < h.size(); ++b) {
        q += (h[a] - mu[a]) * precision[a][b] * (h[b] - mu[b]);
      }
    }
    best = std::min(best, q);
  }
  return -best;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("oodkit_test_" + name + "_" + std::to_string(std::random_device{}()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oodkit::testing
