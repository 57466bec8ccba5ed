#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dci/inference.hpp"
#include "dci/synthetic.hpp"
#include "oracle.hpp"

using namespace dci;

namespace {

ObservationSet view_to_obs(const FactorizedView& view) {
  return ObservationSet{view.marginal, view.conditional};
}

// exact product joint over dyadic rationals, so conditional rows are
// bitwise identical across x
JointPmf dyadic_product_joint() {
  const std::vector<double> u{0.5, 0.25, 0.125, 0.125};
  const std::vector<double> v{0.25, 0.5, 0.125, 0.125};
  JointPmf joint;
  joint.x_support = {1, 2, 3, 4};
  joint.y_support = {1, 2, 3, 4};
  for (double ui : u)
    for (double vj : v) joint.p.push_back(ui * vj);
  return joint;
}

}  // namespace

TEST_CASE("product joint yields zero dependence in both directions") {
  const auto measures = dependence_measures(dyadic_product_joint());
  REQUIRE(measures.d_xy == 0.0);
  REQUIRE(measures.d_yx == 0.0);
}

TEST_CASE("symmetric joint yields equal measures") {
  JointPmf sym{{1, 2, 3},
               {1, 2, 3},
               {0.20, 0.05, 0.05, 0.05, 0.20, 0.05, 0.05, 0.05, 0.30}};
  const auto measures = dependence_measures(sym);
  REQUIRE(std::abs(measures.d_xy - measures.d_yx) < 1e-12);
}

TEST_CASE("fixed 3x3 joint matches the direct-transcription oracle") {
  JointPmf joint{{1, 2, 3},
                 {1, 2, 3},
                 {0.20, 0.05, 0.05, 0.05, 0.20, 0.05, 0.05, 0.05, 0.30}};
  const auto measures = dependence_measures(joint);
  const double oracle_xy = oracle::dcor(view_to_obs(factorize(joint, Direction::x_to_y)));
  const double oracle_yx = oracle::dcor(view_to_obs(factorize(joint, Direction::y_to_x)));
  REQUIRE(measures.d_xy == Catch::Approx(oracle_xy).margin(1e-12));
  REQUIRE(measures.d_yx == Catch::Approx(oracle_yx).margin(1e-12));
  // frozen at build time from the oracle
  REQUIRE(measures.d_xy == Catch::Approx(0.87183972023145007).margin(1e-12));
  REQUIRE(measures.d_yx == Catch::Approx(0.87183972023145007).margin(1e-12));
}

TEST_CASE("degenerate supports are an error") {
  JointPmf one_row{{1}, {1, 2}, {0.5, 0.5}};
  REQUIRE_THROWS_MATCHES(dependence_measures(one_row), data_error,
                         Catch::Matchers::Message("degenerate support"));
  PairedSample constant_y;
  for (int i = 0; i < 10; ++i) constant_y.push(i % 3, 5);
  REQUIRE_THROWS_AS(infer(constant_y, 0.0), data_error);
}

TEST_CASE("decide applies the strict threshold rule") {
  const auto a = decide(DependencePair{0.10, 0.40}, 0.05);
  REQUIRE(a.verdict == Verdict::x_causes_y);
  REQUIRE(a.delta == Catch::Approx(0.30));

  const auto b = decide(DependencePair{0.40, 0.10}, 0.05);
  REQUIRE(b.verdict == Verdict::y_causes_x);

  const auto c = decide(DependencePair{0.30, 0.32}, 0.05);
  REQUIRE(c.verdict == Verdict::undecided);

  REQUIRE_THROWS_AS(decide(DependencePair{0.1, 0.2}, -0.01), std::invalid_argument);
}

TEST_CASE("epsilon interval producing a directed verdict is [0, |delta|)") {
  Rng rng(44);
  for (int trial = 0; trial < 100; ++trial) {
    DependencePair m{rng.next_unit(), rng.next_unit()};
    const double gap = std::abs(m.d_yx - m.d_xy);
    if (gap == 0.0) continue;
    REQUIRE(decide(m, 0.0).verdict != Verdict::undecided);
    REQUIRE(decide(m, std::nextafter(gap, 0.0)).verdict != Verdict::undecided);
    REQUIRE(decide(m, gap).verdict == Verdict::undecided);  // tie stays undecided
    REQUIRE(decide(m, std::nextafter(gap, 1.0)).verdict == Verdict::undecided);
  }
}

TEST_CASE("copy mechanism is symmetric and stays undecided") {
  PairedSample copy;
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    const int x = rng.uniform_int(0, 5);
    copy.push(x, x);
  }
  const auto out = infer(copy, 0.01);
  REQUIRE(std::abs(out.decision.measures.d_xy - out.decision.measures.d_yx) < 1e-12);
  REQUIRE(out.decision.verdict == Verdict::undecided);
}

TEST_CASE("swapping the sample mirrors the measures and the verdict") {
  Rng rng(46);
  for (int trial = 0; trial < 10; ++trial) {
    Rng model_rng = rng.derive(trial);
    const auto model = gen_anm(model_rng, 12, 12, std::vector<int>{-1, 0, 1});
    Rng sample_rng = rng.derive(100 + trial);
    const auto sample = sample_model(model, 1500, sample_rng);
    const auto direct = infer(sample, 0.02);
    const auto mirrored = infer(sample.swapped(), 0.02);
    REQUIRE(direct.decision.measures.d_xy ==
            Catch::Approx(mirrored.decision.measures.d_yx).margin(1e-12));
    REQUIRE(direct.decision.measures.d_yx ==
            Catch::Approx(mirrored.decision.measures.d_xy).margin(1e-12));
    if (direct.decision.verdict == Verdict::x_causes_y)
      REQUIRE(mirrored.decision.verdict == Verdict::y_causes_x);
    if (direct.decision.verdict == Verdict::y_causes_x)
      REQUIRE(mirrored.decision.verdict == Verdict::x_causes_y);
    if (direct.decision.verdict == Verdict::undecided)
      REQUIRE(mirrored.decision.verdict == Verdict::undecided);
  }
}

TEST_CASE("injective recoding of the values leaves the measures unchanged") {
  Rng rng(48);
  const auto model = gen_anm(rng, 10, 10, std::vector<int>{0, 1});
  const auto sample = sample_model(model, 1200, rng);
  const auto base = infer(sample, 0.0);

  PairedSample recoded;
  for (std::size_t t = 0; t < sample.n(); ++t)
    recoded.push(-3 * sample.x[t], sample.y[t] + 100);  // order-reversing on x
  const auto out = infer(recoded, 0.0);
  REQUIRE(out.decision.measures.d_xy ==
          Catch::Approx(base.decision.measures.d_xy).margin(1e-12));
  REQUIRE(out.decision.measures.d_yx ==
          Catch::Approx(base.decision.measures.d_yx).margin(1e-12));
}

TEST_CASE("sampled product model stays undecided at the recommended epsilon") {
  DiscreteModel prod;
  prod.kind = ModelKind::reference_set;
  prod.x_support = contiguous_range(1, 8);
  prod.y_support = contiguous_range(1, 8);
  Rng gen(99);
  prod.px = gen_random_pmf(8, gen);
  prod.conditional.assign(8, gen_random_pmf(8, gen));  // identical rows
  Rng rng(21);
  const auto sample = sample_model(prod, 4000, rng);
  const auto out = infer(sample, 0.05);
  REQUIRE(out.decision.verdict == Verdict::undecided);
}

TEST_CASE("mean dependence is strictly lower in the causal direction") {
  double sum_dxy = 0.0, sum_dyx = 0.0;
  const int models = 200;
  for (int t = 0; t < models; ++t) {
    Rng model_rng = Rng(52).derive(t).derive(0);
    const auto model = gen_reference_set_model(model_rng, 15, 15, 0);
    Rng sample_rng = Rng(52).derive(t).derive(1);
    const auto sample = sample_model(model, 4000, sample_rng);
    const auto measures = dependence_measures(estimate_joint(sample));
    sum_dxy += measures.d_xy;
    sum_dyx += measures.d_yx;
  }
  REQUIRE(sum_dxy / models < sum_dyx / models);
}

TEST_CASE("inference output serializes with the documented schema") {
  PairedSample sample;
  Rng rng(54);
  for (int t = 0; t < 200; ++t) {
    const int x = rng.uniform_int(0, 3);
    sample.push(x, x % 2 + rng.uniform_int(0, 1));
  }
  const auto out = infer(sample, 0.05);
  const auto doc = to_json(out);
  REQUIRE(doc.at("n").get<std::size_t>() == 200);
  REQUIRE(doc.at("m").get<std::size_t>() == out.m);
  REQUIRE(doc.at("l").get<std::size_t>() == out.l);
  REQUIRE(doc.at("d_xy").get<double>() == out.decision.measures.d_xy);
  REQUIRE(doc.at("d_yx").get<double>() == out.decision.measures.d_yx);
  REQUIRE(doc.at("delta").get<double>() == out.decision.delta);
  REQUIRE(doc.at("epsilon").get<double>() == 0.05);
  const std::string verdict = doc.at("verdict").get<std::string>();
  REQUIRE((verdict == "x_causes_y" || verdict == "y_causes_x" || verdict == "undecided"));
}
