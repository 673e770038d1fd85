#pragma once

#include "wmbench/degrade.hpp"
#include "wmbench/image.hpp"

namespace wmb {

// Parameters for the regularized restorers solving
//   argmin_x ||y - x||^2 + beta * Phi(x).
struct RestorationParams {
    double beta = 0.1;      // regularization weight
    int max_iters = 500;    // iterative solvers only
    double tol = 1e-5;      // relative-change stopping threshold
    double wiener_nsr = 0;  // K, deconvolution only
};

// Phi = squared gradient norm (periodic forward differences). Exact minimizer
// via Fourier: x_hat(k,l) = y_hat(k,l) / (1 + beta * Lambda(k,l)) with
// Lambda = 4 sin^2(pi k / M) + 4 sin^2(pi l / N). Clamped after the inverse
// transform.
Image restore_tikhonov(const Image& y, const RestorationParams& p);

struct TvResult {
    Image image;
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;  // ||y - x||^2 + beta * TV(x) of the returned image
};

// Phi = isotropic total variation (forward differences, periodic boundary),
// minimized with Chambolle's dual projection scheme. The returned image is
// the best-objective iterate seen (x_0 = y included), so the objective never
// exceeds objective(y). Non-convergence within max_iters is reported via the
// flag, never silently.
TvResult restore_tv(const Image& y, const RestorationParams& p);

// Objective value ||y - x||^2 + beta * TV(x) used by restore_tv.
double tv_objective(const Image& y, const Image& x, double beta);

// Wiener deconvolution against the analytic transfer function of `blur`:
// X_hat = Y_hat * H / (H^2 + K); inverse transform; clamp. K = 0 with any
// |H| < 1e-12 is rejected (division blow-up).
Image wiener_deconvolve(const Image& y, const BlurParams& blur,
                        const RestorationParams& p);

}  // namespace wmb
