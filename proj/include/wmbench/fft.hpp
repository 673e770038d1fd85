#pragma once

#include <complex>
#include <vector>

#include "wmbench/errors.hpp"
#include "wmbench/image.hpp"

namespace wmb {

// 2-D discrete spectrum of a single plane, row-major width x height, with
// coefficient (l, k) at index l*width + k (k = horizontal frequency index).
//
// Convention: unnormalized forward transform
//   X[k,l] = sum_{x,y} x[x,y] * exp(-2*pi*i*(k*x/M + l*y/N)),
// inverse carries the 1/(M*N) factor. Under this convention Parseval reads
//   sum |X|^2 = M*N * sum |x|^2.
struct SpectralField {
    int width = 0;   // M
    int height = 0;  // N
    std::vector<std::complex<double>> coeffs;

    SpectralField() = default;
    SpectralField(int w, int h)
        : width(w), height(h), coeffs(static_cast<size_t>(w) * h) {}

    std::complex<double>& at(int k, int l) {
        return coeffs[static_cast<size_t>(l) * width + k];
    }
    std::complex<double> at(int k, int l) const {
        return coeffs[static_cast<size_t>(l) * width + k];
    }
};

// 1-D FFT of arbitrary length (radix-2 in place; Bluestein otherwise).
// sign = -1 forward, +1 inverse; no normalization in either direction.
void fft1d(std::vector<std::complex<double>>& a, int sign);

// Forward 2-D DFT of one plane (as row-major width x height real data).
SpectralField dft2(std::span<const double> plane, int width, int height);

// Inverse of dft2 (applies the 1/(M*N) factor), returning the real part.
// Imaginary residue beyond tolerance indicates a non-Hermitian field and
// raises a Numeric error.
std::vector<double> idft2(const SpectralField& field, double imag_tol = 1e-6);

// Fold index k of an M-point DFT to its signed frequency in cycles/sample:
// k <= (M-1)/2 keeps k, else k - M. Needed to evaluate analytic transfer
// functions on DFT grids.
inline int fold_freq_index(int k, int m) { return (k <= (m - 1) / 2) ? k : k - m; }

// Total spectral energy sum |X|^2.
double spectral_energy(const SpectralField& field);

// Mean spectral power |X|^2 over an inclusive radial band
// rho_lo <= sqrt((k/M)^2 + (l/N)^2) < rho_hi with folded frequencies in
// cycles/sample (rho ranges over [0, ~0.707]). Returns the pair
// (mean power, number of bins); zero bins yields mean 0.
std::pair<double, size_t> band_power(const SpectralField& field, double rho_lo,
                                     double rho_hi);

}  // namespace wmb
