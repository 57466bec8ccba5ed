#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "dci/discrete_dist.hpp"
#include "dci/rng.hpp"
#include "dci/synthetic.hpp"

using namespace dci;

namespace {

PairedSample make_sample(std::initializer_list<std::pair<int, int>> records) {
  PairedSample s;
  for (auto [x, y] : records) s.push(x, y);
  return s;
}

double l1_distance(const JointPmf& a, const JointPmf& b) {
  REQUIRE(a.x_support == b.x_support);
  REQUIRE(a.y_support == b.y_support);
  double acc = 0.0;
  for (std::size_t k = 0; k < a.p.size(); ++k) acc += std::abs(a.p[k] - b.p[k]);
  return acc;
}

}  // namespace

TEST_CASE("estimate_joint counts frequencies over observed supports") {
  const auto joint = estimate_joint(make_sample({{0, 0}, {0, 0}, {1, 1}, {1, 1}}));
  REQUIRE(joint.x_support == std::vector<int>{0, 1});
  REQUIRE(joint.y_support == std::vector<int>{0, 1});
  REQUIRE(joint.p == std::vector<double>{0.5, 0.0, 0.0, 0.5});

  const auto single = estimate_joint(make_sample({{3, 7}}));
  REQUIRE(single.rows() == 1);
  REQUIRE(single.cols() == 1);
  REQUIRE(single.p == std::vector<double>{1.0});

  REQUIRE_THROWS_MATCHES(estimate_joint(PairedSample{}), data_error,
                         Catch::Matchers::Message("empty sample"));
}

TEST_CASE("estimate_joint sorts supports and is order invariant") {
  const auto sample = make_sample({{5, -2}, {-1, 3}, {5, 3}, {-1, -2}, {5, -2}});
  const auto joint = estimate_joint(sample);
  REQUIRE(joint.x_support == std::vector<int>{-1, 5});
  REQUIRE(joint.y_support == std::vector<int>{-2, 3});

  PairedSample shuffled = sample;
  Rng rng(3);
  std::vector<std::size_t> order(sample.n());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  shuffled.x.clear();
  shuffled.y.clear();
  for (auto i : order) shuffled.push(sample.x[i], sample.y[i]);
  const auto joint2 = estimate_joint(shuffled);
  REQUIRE(joint.p == joint2.p);
}

TEST_CASE("estimate_joint converges to the generating table") {
  DiscreteModel model;
  model.kind = ModelKind::reference_set;
  model.x_support = {1, 2, 3, 4};
  model.y_support = {1, 2, 3, 4};
  model.px = {0.4, 0.3, 0.2, 0.1};
  model.conditional = {{0.25, 0.25, 0.25, 0.25},
                       {0.7, 0.1, 0.1, 0.1},
                       {0.05, 0.05, 0.45, 0.45},
                       {0.1, 0.2, 0.3, 0.4}};
  Rng rng(11);
  const auto sample = sample_model(model, 10000, rng);
  const auto estimated = estimate_joint(sample);
  REQUIRE(l1_distance(estimated, model_joint(model)) < 0.05);
}

TEST_CASE("factorize splits a joint into marginal and conditionals") {
  JointPmf uniform{{0, 1}, {0, 1}, {0.25, 0.25, 0.25, 0.25}};
  const auto view = factorize(uniform, Direction::x_to_y);
  REQUIRE(view.marginal == std::vector<double>{0.5, 0.5});
  for (const auto& row : view.conditional) REQUIRE(row == std::vector<double>{0.5, 0.5});

  JointPmf diagonal{{0, 1}, {0, 1}, {0.5, 0.0, 0.0, 0.5}};
  const auto det = factorize(diagonal, Direction::x_to_y);
  REQUIRE(det.conditional[0] == std::vector<double>{1.0, 0.0});
  REQUIRE(det.conditional[1] == std::vector<double>{0.0, 1.0});
}

TEST_CASE("factorize directions mirror for symmetric joints") {
  JointPmf sym{{1, 2, 3},
               {1, 2, 3},
               {0.2, 0.05, 0.05, 0.05, 0.2, 0.05, 0.05, 0.05, 0.3}};
  const auto xy = factorize(sym, Direction::x_to_y);
  const auto yx = factorize(sym, Direction::y_to_x);
  REQUIRE(xy.marginal == yx.marginal);
  REQUIRE(xy.conditional == yx.conditional);
}

TEST_CASE("factorize of the transpose equals the opposite direction") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    PairedSample sample;
    const std::size_t n = 5 + rng.below(60);
    for (std::size_t t = 0; t < n; ++t)
      sample.push(rng.uniform_int(-3, 3), rng.uniform_int(0, 4));
    const auto joint = estimate_joint(sample);
    const auto a = factorize(joint, Direction::x_to_y);
    const auto b = factorize(joint.transposed(), Direction::y_to_x);
    REQUIRE(a.marginal == b.marginal);
    REQUIRE(a.conditional == b.conditional);
  }
}

TEST_CASE("factorization reassembles the joint") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    PairedSample sample;
    const std::size_t n = 10 + rng.below(100);
    for (std::size_t t = 0; t < n; ++t)
      sample.push(rng.uniform_int(0, 5), rng.uniform_int(0, 7));
    const auto joint = estimate_joint(sample);
    for (auto direction : {Direction::x_to_y, Direction::y_to_x}) {
      const auto view = factorize(joint, direction);
      const auto table = direction == Direction::x_to_y ? joint : joint.transposed();
      double total = 0.0;
      for (std::size_t i = 0; i < table.rows(); ++i) {
        double row_sum = 0.0;
        for (std::size_t j = 0; j < table.cols(); ++j) {
          REQUIRE(view.marginal[i] * view.conditional[i][j] ==
                  Catch::Approx(table.at(i, j)).margin(1e-12));
          row_sum += view.conditional[i][j];
        }
        REQUIRE(row_sum == Catch::Approx(1.0).margin(1e-12));
        REQUIRE(view.marginal[i] > 0.0);
        total += view.marginal[i];
      }
      REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
    }
  }
}
