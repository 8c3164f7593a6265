// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vesnav/nn/gradcheck.hpp"

namespace vesnav::eval {

struct GradCheckCase {
  std::string name;
  nn::GradCheckResult result;
};

// Finite-difference checks of every layer type and of the composed
// actor-critic loss (recurrent and dense cores) on small random instances.
std::vector<GradCheckCase> run_gradient_checks(int samples = 200, std::uint64_t seed = 7);

// The composed recurrent check with the recurrent-weight gradient doubled.
// A working checker must report a large error here.
nn::GradCheckResult run_mutated_gradient_check(int samples = 200, std::uint64_t seed = 7);

}  // namespace vesnav::eval
