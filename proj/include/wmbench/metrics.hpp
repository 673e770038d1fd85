#pragma once

#include "wmbench/image.hpp"

namespace wmb {

// Mean squared error over all samples of both images (same geometry required).
double mse(const Image& a, const Image& b);

// Peak signal-to-noise ratio with peak 1.0: 10*log10(1/mse). Identical
// images return +infinity.
double psnr(const Image& a, const Image& b);

// Mean structural similarity over all 8x8 windows at stride 1, averaged over
// channels. Constants C1 = 0.01^2, C2 = 0.03^2 (dynamic range 1.0).
// Images smaller than 8x8 raise a Geometry error.
double ssim(const Image& a, const Image& b);

}  // namespace wmb
