#include "sparseview/adam.h"

#include <cmath>
#include <stdexcept>

namespace sparseview {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("AdamConfig: learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("AdamConfig: moment decays must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("AdamConfig: epsilon must be > 0");
}

Adam::Adam(AdamConfig config, const ParameterStore& params)
    : config_(config), m_(params.zeros_like()), v_(params.zeros_like()) {
  config_.validate();
}

void Adam::set_learning_rate(double lr) {
  AdamConfig next = config_;
  next.learning_rate = lr;
  next.validate();
  config_ = next;
}

void Adam::step(ParameterStore& params, const GradientSet& grads) {
  if (!params.same_layout(m_) || !grads.same_layout(m_)) {
    throw std::invalid_argument("Adam: parameter or gradient layout differs from the optimizer's");
  }
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  auto m = m_.begin();
  auto v = v_.begin();
  auto g = grads.begin();
  for (auto& [name, theta] : params) {
    auto tv = theta.values();
    auto mv = m->second.values();
    auto vv = v->second.values();
    auto gv = g->second.values();
    for (std::size_t i = 0; i < tv.size(); ++i) {
      mv[i] = config_.beta1 * mv[i] + (1.0 - config_.beta1) * gv[i];
      vv[i] = config_.beta2 * vv[i] + (1.0 - config_.beta2) * gv[i] * gv[i];
      const double m_hat = mv[i] / c1;
      const double v_hat = vv[i] / c2;
      tv[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
    ++m;
    ++v;
    ++g;
  }
}

}  // namespace sparseview
