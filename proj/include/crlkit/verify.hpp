#pragma once

#include <cstdint>
#include <string>

#include "crlkit/learner.hpp"

namespace crl {

struct GradcheckSummary {
  int configs = 0;
  int rejected = 0;  // draws discarded for sitting too close to a ReLU kink
  double max_reinforce = 0.0;
  double max_distill = 0.0;
  double max_joint = 0.0;
  double seconds = 0.0;
  bool passed = false;
};

/// Random small policies, batches and teachers; compares reinforce_grad,
/// distill_grad and joint_grad against central differences of their
/// objectives. Draws with any hidden pre-activation within `kink_margin`
/// of zero are redrawn, since the objective is not differentiable there.
GradcheckSummary gradcheck_suite(int configs, std::uint64_t seed, double tol = 1e-4, double kink_margin = 1e-3);

std::string describe(const GradcheckSummary& s);

}  // namespace crl
