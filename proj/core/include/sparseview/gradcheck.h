#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "sparseview/tape.h"
#include "sparseview/tensor.h"

namespace sparseview {

// Builds a scalar objective on `tape` from `params`. Must be deterministic:
// any randomness (dropout, noise, jitter) has to be frozen by the caller.
using Objective = std::function<Var(Tape& tape, const ParameterStore& params)>;

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central differences against reverse-mode gradients for every parameter
// element. Relative error uses max(|analytic|, |numeric|, 1e-8) as the
// denominator. Throws std::logic_error if the objective is not deterministic.
GradientCheckResult finite_difference_check(const Objective& objective,
                                            const ParameterStore& params, double h);

}  // namespace sparseview
