#include "sparseview/color.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sparseview {

Hsv rgb_to_hsv(const Rgb& rgb) {
  for (double c : rgb) {
    if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("rgb_to_hsv: component outside [0, 1]");
  }
  const auto [r, g, b] = rgb;
  const double max = std::max({r, g, b});
  const double min = std::min({r, g, b});
  const double chroma = max - min;
  Hsv out;
  out.v = max;
  out.s = max > 0.0 ? chroma / max : 0.0;
  if (chroma == 0.0) return out;
  double h;
  if (max == r) {
    h = std::fmod((g - b) / chroma, 6.0);
  } else if (max == g) {
    h = (b - r) / chroma + 2.0;
  } else {
    h = (r - g) / chroma + 4.0;
  }
  h *= 60.0;
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

}  // namespace sparseview
