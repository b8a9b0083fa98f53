#pragma once

#include "tvflow/grid.hpp"
#include "tvflow/image.hpp"

namespace tvflow {

// Chromaticity/brightness split: u = rgb/|rgb| on the unit 2-sphere plus a
// scalar brightness |rgb| in [0, sqrt(3)]. Zero pixels are lifted to one
// least-significant unit before normalizing.
struct ChromaticitySplit {
  Field chroma;      // sphere:3:1
  Field brightness;  // euclidean:1
};
ChromaticitySplit image_to_chromaticity(const Image& img, std::shared_ptr<const GridDomain> dom);
Image chromaticity_to_image(const ChromaticitySplit& split, const Image& reference);

// LCh cylinder: hue angle on the unit circle, (L, C) flat and scaled by 1/100
// so the three factors live on comparable scales. Target cylinder:2 with
// components (cos h, sin h, L/100, C/100).
Field image_to_lch(const Image& img, std::shared_ptr<const GridDomain> dom);
Image lch_to_image(const Field& u, const Image& reference);

}  // namespace tvflow
