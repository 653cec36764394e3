#pragma once

#include <cstdint>

#include "sparseview/tensor.h"

namespace sparseview {

struct AdamConfig {
  double learning_rate = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// Adaptive-moment optimizer with bias correction. Moments are laid out like
// the parameter store they were created for.
class Adam {
 public:
  Adam(AdamConfig config, const ParameterStore& params);

  // theta <- theta - lr * m_hat / (sqrt(v_hat) + eps), in store order.
  void step(ParameterStore& params, const GradientSet& grads);

  const AdamConfig& config() const noexcept { return config_; }
  void set_learning_rate(double lr);
  std::int64_t steps() const noexcept { return steps_; }
  const NamedArrays& first_moment() const noexcept { return m_; }
  const NamedArrays& second_moment() const noexcept { return v_; }

 private:
  AdamConfig config_;
  NamedArrays m_;
  NamedArrays v_;
  std::int64_t steps_ = 0;
};

}  // namespace sparseview
