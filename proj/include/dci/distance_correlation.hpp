#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dci/errors.hpp"

namespace dci {

// Paired observations (alpha_i, beta_i): one side scalar, the other a vector
// of fixed dimension d >= 1.
struct ObservationSet {
  std::vector<double> alpha;
  std::vector<std::vector<double>> beta;

  std::size_t n() const { return alpha.size(); }
};

enum class Side { alpha, beta };

// Double-centered pairwise distance tables A and B. Symmetric, with all row
// and column sums zero up to round-off.
struct CenteredDistanceMatrices {
  std::size_t n = 0;
  std::vector<double> a;  // n x n, row-major
  std::vector<double> b;
};

namespace detail {

inline void double_center(std::vector<double>& d, std::size_t n) {
  std::vector<double> row_mean(n, 0.0), col_mean(n, 0.0);
  long double grand = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j < n; ++j) acc += d[i * n + j];
    row_mean[i] = static_cast<double>(acc / n);
    grand += acc;
  }
  for (std::size_t j = 0; j < n; ++j) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < n; ++i) acc += d[i * n + j];
    col_mean[j] = static_cast<double>(acc / n);
  }
  const double grand_mean = static_cast<double>(grand / (static_cast<long double>(n) * n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] += grand_mean - row_mean[i] - col_mean[j];
}

inline long double dot(std::span<const double> u, std::span<const double> v) {
  long double acc = 0.0L;
  for (std::size_t k = 0; k < u.size(); ++k) acc += static_cast<long double>(u[k]) * v[k];
  return acc;
}

}  // namespace detail

inline CenteredDistanceMatrices center_distances(const ObservationSet& obs) {
  const std::size_t n = obs.n();
  if (n < 2) throw data_error("need at least two observations");
  if (obs.beta.size() != n) throw data_error("alpha and beta lengths differ");
  const std::size_t d = obs.beta.front().size();
  if (d < 1) throw data_error("beta vectors must have dimension >= 1");
  for (const auto& v : obs.beta)
    if (v.size() != d) throw data_error("beta vectors have inconsistent dimensions");

  CenteredDistanceMatrices cd;
  cd.n = n;
  cd.a.assign(n * n, 0.0);
  cd.b.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = std::abs(obs.alpha[i] - obs.alpha[j]);
      long double acc = 0.0L;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = obs.beta[i][k] - obs.beta[j][k];
        acc += static_cast<long double>(diff) * diff;
      }
      const double db = std::sqrt(static_cast<double>(acc));
      cd.a[i * n + j] = cd.a[j * n + i] = da;
      cd.b[i * n + j] = cd.b[j * n + i] = db;
    }
  }
  detail::double_center(cd.a, n);
  detail::double_center(cd.b, n);
  return cd;
}

// Empirical distance covariance (1/n) * sqrt(sum_ij A_ij B_ij). The sum is
// clamped at zero to absorb round-off; a materially negative sum indicates a
// broken invariant and is reported as an internal error.
inline double dcov(const CenteredDistanceMatrices& cd) {
  const long double sum = detail::dot(cd.a, cd.b);
  const long double floor = -1e-9L * static_cast<long double>(cd.n) * static_cast<long double>(cd.n);
  if (sum < floor) throw internal_error("distance covariance sum is negative beyond round-off");
  const long double clamped = sum > 0.0L ? sum : 0.0L;
  return static_cast<double>(std::sqrt(static_cast<double>(clamped)) / static_cast<double>(cd.n));
}

inline double dvar(const CenteredDistanceMatrices& cd, Side side) {
  const auto& m = side == Side::alpha ? cd.a : cd.b;
  const long double sum = detail::dot(m, m);
  return static_cast<double>(std::sqrt(static_cast<double>(sum)) / static_cast<double>(cd.n));
}

// Empirical distance correlation in [0, 1]; exactly zero when either side has
// zero distance variance.
inline double dcor(const CenteredDistanceMatrices& cd) {
  const double va = dvar(cd, Side::alpha);
  const double vb = dvar(cd, Side::beta);
  if (va == 0.0 || vb == 0.0) return 0.0;
  const double r = dcov(cd) / std::sqrt(va * vb);
  return std::clamp(r, 0.0, 1.0);
}

inline double dcor(const ObservationSet& obs) { return dcor(center_distances(obs)); }

// Convenience for two scalar observation lists.
inline double dcor(std::span<const double> alpha, std::span<const double> beta) {
  ObservationSet obs;
  obs.alpha.assign(alpha.begin(), alpha.end());
  obs.beta.reserve(beta.size());
  for (double v : beta) obs.beta.push_back({v});
  return dcor(obs);
}

}  // namespace dci
