#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dci/errors.hpp"

namespace dci {

// Paired realizations of two integer-coded discrete variables. Codes may be
// any finite integers (e.g. negatives produced by discretization); supports
// are whatever values were actually observed.
struct PairedSample {
  std::vector<int> x;
  std::vector<int> y;

  std::size_t n() const { return x.size(); }

  void push(int xv, int yv) {
    x.push_back(xv);
    y.push_back(yv);
  }

  PairedSample swapped() const { return PairedSample{y, x}; }
};

// Raw co-occurrence counts over the observed supports, sorted ascending.
struct JointCounts {
  std::vector<int> x_support;
  std::vector<int> y_support;
  std::vector<std::uint64_t> counts;  // row-major, rows() x cols()
  std::uint64_t n = 0;

  std::size_t rows() const { return x_support.size(); }
  std::size_t cols() const { return y_support.size(); }
  std::uint64_t at(std::size_t i, std::size_t j) const { return counts[i * cols() + j]; }

  JointCounts transposed() const {
    JointCounts t;
    t.x_support = y_support;
    t.y_support = x_support;
    t.n = n;
    t.counts.assign(counts.size(), 0);
    for (std::size_t i = 0; i < rows(); ++i)
      for (std::size_t j = 0; j < cols(); ++j) t.counts[j * rows() + i] = at(i, j);
    return t;
  }
};

// Dense joint probability table; every row and column has positive mass
// because the supports contain only observed values.
struct JointPmf {
  std::vector<int> x_support;
  std::vector<int> y_support;
  std::vector<double> p;  // row-major, rows() x cols()

  std::size_t rows() const { return x_support.size(); }
  std::size_t cols() const { return y_support.size(); }
  double at(std::size_t i, std::size_t j) const { return p[i * cols() + j]; }
  double& at(std::size_t i, std::size_t j) { return p[i * cols() + j]; }

  JointPmf transposed() const {
    JointPmf t;
    t.x_support = y_support;
    t.y_support = x_support;
    t.p.assign(p.size(), 0.0);
    for (std::size_t i = 0; i < rows(); ++i)
      for (std::size_t j = 0; j < cols(); ++j) t.p[j * rows() + i] = at(i, j);
    return t;
  }
};

enum class Direction { x_to_y, y_to_x };

// One factorization of a joint table: the marginal of the conditioning side
// and one conditional row per support point of that side.
struct FactorizedView {
  std::vector<double> marginal;
  std::vector<std::vector<double>> conditional;
};

namespace detail {

inline std::vector<int> sorted_distinct(std::span<const int> values) {
  std::vector<int> out(values.begin(), values.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline std::size_t index_of(const std::vector<int>& support, int value) {
  return static_cast<std::size_t>(std::lower_bound(support.begin(), support.end(), value) - support.begin());
}

}  // namespace detail

inline JointCounts count_table(const PairedSample& sample) {
  if (sample.n() == 0) throw data_error("empty sample");
  JointCounts c;
  c.x_support = detail::sorted_distinct(sample.x);
  c.y_support = detail::sorted_distinct(sample.y);
  c.counts.assign(c.rows() * c.cols(), 0);
  c.n = sample.n();
  for (std::size_t t = 0; t < sample.n(); ++t) {
    std::size_t i = detail::index_of(c.x_support, sample.x[t]);
    std::size_t j = detail::index_of(c.y_support, sample.y[t]);
    ++c.counts[i * c.cols() + j];
  }
  return c;
}

inline JointPmf to_pmf(const JointCounts& counts) {
  JointPmf joint;
  joint.x_support = counts.x_support;
  joint.y_support = counts.y_support;
  joint.p.resize(counts.counts.size());
  const double n = static_cast<double>(counts.n);
  for (std::size_t k = 0; k < counts.counts.size(); ++k)
    joint.p[k] = static_cast<double>(counts.counts[k]) / n;
  return joint;
}

// Maximum-likelihood frequency table, no smoothing. Supports are the sorted
// distinct observed values, so zero-mass rows/columns never occur.
inline JointPmf estimate_joint(const PairedSample& sample) { return to_pmf(count_table(sample)); }

inline FactorizedView factorize(const JointPmf& joint, Direction direction) {
  const JointPmf* table = &joint;
  JointPmf flipped;
  if (direction == Direction::y_to_x) {
    flipped = joint.transposed();
    table = &flipped;
  }
  FactorizedView view;
  const std::size_t m = table->rows();
  const std::size_t l = table->cols();
  view.marginal.resize(m);
  view.conditional.assign(m, std::vector<double>(l));
  for (std::size_t i = 0; i < m; ++i) {
    long double row_sum = 0.0L;
    for (std::size_t j = 0; j < l; ++j) row_sum += table->at(i, j);
    view.marginal[i] = static_cast<double>(row_sum);
    for (std::size_t j = 0; j < l; ++j) view.conditional[i][j] = table->at(i, j) / view.marginal[i];
  }
  return view;
}

}  // namespace dci
