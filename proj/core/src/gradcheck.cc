#include "sparseview/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sparseview {
namespace {

double evaluate(const Objective& objective, const ParameterStore& params) {
  Tape tape;
  Var loss = objective(tape, params);
  const NumericArray& v = tape.value(loss);
  if (v.size() != 1) throw std::invalid_argument("finite_difference_check: objective not scalar");
  return v[0];
}

}  // namespace

GradientCheckResult finite_difference_check(const Objective& objective,
                                            const ParameterStore& params, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference_check: step must be positive");

  Tape tape;
  Var loss = objective(tape, params);
  const GradientSet analytic = tape.backward(loss, params);

  const double base = tape.value(loss)[0];
  if (evaluate(objective, params) != base) {
    throw std::logic_error(
        "finite_difference_check: objective is not deterministic; freeze its randomness");
  }

  GradientCheckResult result;
  ParameterStore probe = params;
  for (auto& [name, array] : probe) {
    const NumericArray& grad = analytic.at(name);
    for (std::size_t i = 0; i < array.size(); ++i) {
      const double original = array[i];
      array[i] = original + h;
      const double plus = evaluate(objective, probe);
      array[i] = original - h;
      const double minus = evaluate(objective, probe);
      array[i] = original;

      const double numeric = (plus - minus) / (2.0 * h);
      const double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-8});
      const double rel = std::abs(grad[i] - numeric) / denom;
      if (rel > result.max_relative_error) {
        result = {rel, name, i, grad[i], numeric};
      }
    }
  }
  return result;
}

}  // namespace sparseview
