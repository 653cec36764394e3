#include "sparseview/tau_noise.h"

#include <cmath>
#include <stdexcept>

namespace sparseview {
namespace {

double simpson(double (*f)(double), double lo, double hi, int intervals) {
  const double h = (hi - lo) / intervals;
  double total = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) total += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return total * h / 3.0;
}

}  // namespace

double tau_pdf(double x) {
  const double x2 = x * x;
  const double a = std::exp(x2) - std::exp(-x2);
  // Past a ~ 40 the +1 is below double resolution and e^a may overflow.
  if (a > 40.0) return std::exp(-a);
  return 1.0 / (std::exp(a) + 1.0);
}

double tau_pdf_direct(double x) {
  const double x2 = x * x;
  const double num = std::exp(std::exp(-x2));
  return num / (std::exp(std::exp(x2)) + num);
}

TauNoiseSampler::TauNoiseSampler(double bound) : bound_(bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("TauNoiseSampler: bound must be positive");
  normalization_ = simpson(tau_pdf, -bound, bound, 100000);
}

double TauNoiseSampler::density(double x) const {
  if (x < -bound_ || x > bound_) return 0.0;
  return tau_pdf(x) / normalization_;
}

double TauNoiseSampler::sample(Rng& rng) const {
  for (;;) {
    const double x = rng.uniform(-bound_, bound_);
    const double u = 0.5 * rng.uniform();
    if (u < tau_pdf(x)) return x;
  }
}

void TauNoiseStream::fill(std::uint64_t key, std::span<double> out) const {
  Rng rng(mix_seed({seed_, key}));
  for (double& v : out) v = sampler_.sample(rng);
}

}  // namespace sparseview
