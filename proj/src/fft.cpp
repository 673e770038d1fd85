#include "wmbench/fft.hpp"

#include <cmath>
#include <numbers>

namespace wmb {
namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place, n a power of two.
void fft_pow2(std::vector<cd>& a, int sign) {
    const size_t n = a.size();
    // Bit-reversal permutation.
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * kPi / static_cast<double>(len);
        const cd wl(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (size_t j = 0; j < len / 2; ++j) {
                cd u = a[i + j];
                cd v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Bluestein's algorithm: expresses an arbitrary-length DFT as a convolution,
// evaluated with a power-of-two FFT. Chirp exponents use k*k mod 2n to keep
// the trig argument small for large k.
void fft_bluestein(std::vector<cd>& a, int sign) {
    const size_t n = a.size();
    size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    std::vector<cd> chirp(n);
    for (size_t k = 0; k < n; ++k) {
        const size_t kk = (k * k) % (2 * n);
        const double ang = sign * kPi * static_cast<double>(kk) / static_cast<double>(n);
        chirp[k] = cd(std::cos(ang), std::sin(ang));
    }

    std::vector<cd> fa(m, cd(0, 0)), fb(m, cd(0, 0));
    for (size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
    fb[0] = std::conj(chirp[0]);
    for (size_t k = 1; k < n; ++k) fb[k] = fb[m - k] = std::conj(chirp[k]);

    fft_pow2(fa, -1);
    fft_pow2(fb, -1);
    for (size_t i = 0; i < m; ++i) fa[i] *= fb[i];
    fft_pow2(fa, +1);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (size_t k = 0; k < n; ++k) a[k] = fa[k] * inv_m * chirp[k];
}

}  // namespace

void fft1d(std::vector<cd>& a, int sign) {
    if (a.size() <= 1) return;
    if (sign != -1 && sign != 1)
        fail(ErrorCategory::Internal, "fft1d: sign must be -1 or +1");
    if (is_pow2(a.size()))
        fft_pow2(a, sign);
    else
        fft_bluestein(a, sign);
}

namespace {

// Transforms all rows then all columns of a width x height complex grid.
void fft2_inplace(std::vector<cd>& g, int w, int h, int sign) {
    std::vector<cd> line;
    line.resize(static_cast<size_t>(w));
    for (int y = 0; y < h; ++y) {
        auto* row = g.data() + static_cast<size_t>(y) * w;
        line.assign(row, row + w);
        fft1d(line, sign);
        std::copy(line.begin(), line.end(), row);
    }
    line.resize(static_cast<size_t>(h));
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) line[y] = g[static_cast<size_t>(y) * w + x];
        fft1d(line, sign);
        for (int y = 0; y < h; ++y) g[static_cast<size_t>(y) * w + x] = line[y];
    }
}

}  // namespace

SpectralField dft2(std::span<const double> plane, int width, int height) {
    if (width <= 0 || height <= 0 ||
        plane.size() != static_cast<size_t>(width) * height)
        fail(ErrorCategory::Geometry, "dft2: plane size mismatch");
    SpectralField f(width, height);
    for (size_t i = 0; i < plane.size(); ++i) f.coeffs[i] = cd(plane[i], 0.0);
    fft2_inplace(f.coeffs, width, height, -1);
    return f;
}

std::vector<double> idft2(const SpectralField& field, double imag_tol) {
    if (field.width <= 0 || field.height <= 0 ||
        field.coeffs.size() != static_cast<size_t>(field.width) * field.height)
        fail(ErrorCategory::Geometry, "idft2: field size mismatch");
    std::vector<cd> g = field.coeffs;
    fft2_inplace(g, field.width, field.height, +1);
    const double scale = 1.0 / (static_cast<double>(field.width) * field.height);
    std::vector<double> out(g.size());
    double max_imag = 0.0;
    for (size_t i = 0; i < g.size(); ++i) {
        out[i] = g[i].real() * scale;
        max_imag = std::max(max_imag, std::abs(g[i].imag() * scale));
    }
    if (max_imag > imag_tol)
        fail(ErrorCategory::Numeric,
             "idft2: non-Hermitian spectrum (max imaginary residue " +
                 std::to_string(max_imag) + ")");
    return out;
}

double spectral_energy(const SpectralField& field) {
    double e = 0.0;
    for (const cd& c : field.coeffs) e += std::norm(c);
    return e;
}

std::pair<double, size_t> band_power(const SpectralField& field, double rho_lo,
                                     double rho_hi) {
    double acc = 0.0;
    size_t n = 0;
    for (int l = 0; l < field.height; ++l) {
        const double fv =
            static_cast<double>(fold_freq_index(l, field.height)) / field.height;
        for (int k = 0; k < field.width; ++k) {
            const double fu =
                static_cast<double>(fold_freq_index(k, field.width)) / field.width;
            const double rho = std::sqrt(fu * fu + fv * fv);
            if (rho >= rho_lo && rho < rho_hi) {
                acc += std::norm(field.at(k, l));
                ++n;
            }
        }
    }
    return {n ? acc / static_cast<double>(n) : 0.0, n};
}

}  // namespace wmb
