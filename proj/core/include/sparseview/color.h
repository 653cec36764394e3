#pragma once

#include "sparseview/image.h"

namespace sparseview {

struct Hsv {
  double h = 0.0;  // degrees in [0, 360)
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // [0, 1]
};

// Standard hexcone conversion; hue is 0 for achromatic colors.
// Throws if any component is outside [0, 1].
Hsv rgb_to_hsv(const Rgb& rgb);

}  // namespace sparseview
