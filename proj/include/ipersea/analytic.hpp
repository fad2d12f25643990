#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ipersea {

// Inputs to the closed-form models. `inspected_depth` and
// `friends_per_level` are carried for completeness; they cancel out of the
// malicious-friend probability and never enter the arithmetic.
struct AnalyticInputs {
  double edges_per_node = 0.0;        // e_p
  double attack_per_node = 0.0;       // a_h = g/n
  int alpha = 5;
  int beta = 7;
  double failure_threshold = 0.001;   // l_c
  int inspected_depth = 1;            // l_h
  int friends_per_level = 1;          // c_nl
};

struct MaliceStep {
  double expected_malicious = 0.0;   // m_i in the alpha*beta candidate set
  double step_probability = 0.0;     // q_i = m_i / (alpha*beta), clamped
  double cumulative = 0.0;           // prod of q_1..q_i
};

namespace detail {

inline void check_inputs(const AnalyticInputs& in) {
  if (in.edges_per_node <= 0.0) throw std::domain_error("edges per node must be positive");
  if (in.attack_per_node < 0.0) throw std::domain_error("attack edges per node must be non-negative");
  if (in.alpha < 1 || in.beta < 1) throw std::domain_error("lookup fan-outs must be positive");
  if (in.attack_per_node / in.edges_per_node >= 1.0) {
    throw std::domain_error("degenerate inputs: attack edges per node reach edges per node");
  }
}

}  // namespace detail

// Iterated malicious-candidate counts. The first step mixes the malicious
// share of the initiator's alpha picks with the malicious share of honest
// replies; afterwards every selected attacker returns beta attackers while
// the remaining honest selections leak attackers at the background rate:
//   m_1    = alpha*r*beta + (1 - alpha*r) * beta * r,     r = a_h/e_p
//   m_{i+1} = m_i + (alpha - m_i/beta) * beta * r
// Per-step capture probability q_i = m_i/(alpha*beta) clamped to [0,1];
// cumulative capture after j steps is the product of the q_i.
inline std::vector<MaliceStep> malice_sequence(const AnalyticInputs& in, int max_iter) {
  detail::check_inputs(in);
  const double r = in.attack_per_node / in.edges_per_node;
  const double ab = static_cast<double>(in.alpha) * in.beta;

  std::vector<MaliceStep> steps;
  steps.reserve(static_cast<std::size_t>(std::max(max_iter, 0)));
  double m = in.alpha * r * in.beta + (1.0 - in.alpha * r) * in.beta * r;
  double cumulative = 1.0;
  for (int i = 0; i < max_iter; ++i) {
    MaliceStep step;
    step.expected_malicious = m;
    step.step_probability = std::clamp(m / ab, 0.0, 1.0);
    cumulative *= step.step_probability;
    step.cumulative = cumulative;
    steps.push_back(step);
    m = m + (in.alpha - m / in.beta) * in.beta * r;
  }
  return steps;
}

struct PathLengthResult {
  int hops = 0;
  bool overflowed = false;  // threshold never reached within max_iter
};

// Smallest iteration count whose cumulative capture probability drops to
// the failure threshold.
inline PathLengthResult analytic_path_length(const AnalyticInputs& in, int max_iter = 64) {
  const auto steps = malice_sequence(in, max_iter);
  for (int i = 0; i < max_iter; ++i) {
    if (steps[i].cumulative <= in.failure_threshold) {
      return {i + 1, false};
    }
  }
  return {max_iter, true};
}

// False-positive rate with trusted collaborative friends: the single-step
// capture probability (inspection lookups are about one hop long).
inline double analytic_fp_trusted(const AnalyticInputs& in) {
  return malice_sequence(in, 1)[0].step_probability;
}

// False-positive rate with randomly selected collaborative friends: union
// of "malicious friend inspects an honest child" with the trusted-mode
// term.
inline double analytic_fp_random(const AnalyticInputs& in) {
  detail::check_inputs(in);
  if (in.attack_per_node > in.edges_per_node) {
    throw std::domain_error("attack edges per node exceed edges per node");
  }
  const double r = in.attack_per_node / in.edges_per_node;
  const double u = r * ((in.edges_per_node - in.attack_per_node) / in.edges_per_node);
  const double q1 = analytic_fp_trusted(in);
  return u + q1 - u * q1;
}

}  // namespace ipersea
