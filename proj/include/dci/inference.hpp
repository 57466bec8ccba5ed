#pragma once

#include <cstddef>
#include <string>

#include "dci/discrete_dist.hpp"
#include "dci/distance_correlation.hpp"
#include "dci/errors.hpp"

#include <json.hpp>

namespace dci {

enum class Verdict { x_causes_y, y_causes_x, undecided };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::x_causes_y: return "x_causes_y";
    case Verdict::y_causes_x: return "y_causes_x";
    default: return "undecided";
  }
}

struct DependencePair {
  double d_xy = 0.0;  // dcor between P(X) and the rows of P(Y|X)
  double d_yx = 0.0;  // dcor between P(Y) and the rows of P(X|Y)
};

struct DecisionResult {
  DependencePair measures;
  double epsilon = 0.0;
  Verdict verdict = Verdict::undecided;
  double delta = 0.0;  // d_yx - d_xy; positive favors "X causes Y"
};

namespace detail {

inline ObservationSet factorization_observations(const FactorizedView& view) {
  ObservationSet obs;
  obs.alpha = view.marginal;
  obs.beta = view.conditional;
  return obs;
}

}  // namespace detail

// One dcor per factorization direction. Each support point contributes one
// unweighted observation (marginal probability, conditional row).
inline DependencePair dependence_measures(const JointPmf& joint) {
  if (joint.rows() < 2 || joint.cols() < 2) throw data_error("degenerate support");
  DependencePair pair;
  pair.d_xy = dcor(detail::factorization_observations(factorize(joint, Direction::x_to_y)));
  pair.d_yx = dcor(detail::factorization_observations(factorize(joint, Direction::y_to_x)));
  return pair;
}

// Threshold rule: strict inequalities, ties at |delta| == epsilon stay
// undecided.
inline DecisionResult decide(const DependencePair& measures, double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("epsilon must be nonnegative");
  DecisionResult result;
  result.measures = measures;
  result.epsilon = epsilon;
  result.delta = measures.d_yx - measures.d_xy;
  if (result.delta > epsilon) {
    result.verdict = Verdict::x_causes_y;
  } else if (-result.delta > epsilon) {
    result.verdict = Verdict::y_causes_x;
  } else {
    result.verdict = Verdict::undecided;
  }
  return result;
}

struct InferenceOutput {
  DecisionResult decision;
  std::size_t n = 0;  // sample size
  std::size_t m = 0;  // |observed X support|
  std::size_t l = 0;  // |observed Y support|
};

inline InferenceOutput infer(const JointPmf& joint, std::size_t n, double epsilon) {
  InferenceOutput out;
  out.n = n;
  out.m = joint.rows();
  out.l = joint.cols();
  out.decision = decide(dependence_measures(joint), epsilon);
  return out;
}

inline InferenceOutput infer(const PairedSample& sample, double epsilon) {
  return infer(estimate_joint(sample), sample.n(), epsilon);
}

inline nlohmann::json to_json(const InferenceOutput& out) {
  return nlohmann::json{
      {"n", out.n},
      {"m", out.m},
      {"l", out.l},
      {"d_xy", out.decision.measures.d_xy},
      {"d_yx", out.decision.measures.d_yx},
      {"delta", out.decision.delta},
      {"epsilon", out.decision.epsilon},
      {"verdict", verdict_name(out.decision.verdict)},
  };
}

}  // namespace dci
