#include "wmbench/metrics.hpp"

#include <cmath>
#include <limits>

namespace wmb {

double mse(const Image& a, const Image& b) {
    require_same_geometry(a, b, "mse");
    double acc = 0.0;
    for (size_t i = 0; i < a.samples.size(); ++i) {
        const double d = a.samples[i] - b.samples[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.samples.size());
}

double psnr(const Image& a, const Image& b) {
    const double m = mse(a, b);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / m);
}

namespace {

constexpr int kWin = 8;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

double ssim_plane(std::span<const double> a, std::span<const double> b, int w,
                  int h) {
    // Running column sums let each window slide in O(width).
    const int ww = w - kWin + 1;
    const int wh = h - kWin + 1;
    double total = 0.0;
    size_t count = 0;
    std::vector<double> ca(w), cb(w), caa(w), cbb(w), cab(w);
    for (int y0 = 0; y0 < wh; ++y0) {
        if (y0 == 0) {
            std::fill(ca.begin(), ca.end(), 0.0);
            std::fill(cb.begin(), cb.end(), 0.0);
            std::fill(caa.begin(), caa.end(), 0.0);
            std::fill(cbb.begin(), cbb.end(), 0.0);
            std::fill(cab.begin(), cab.end(), 0.0);
            for (int y = 0; y < kWin; ++y)
                for (int x = 0; x < w; ++x) {
                    const double va = a[static_cast<size_t>(y) * w + x];
                    const double vb = b[static_cast<size_t>(y) * w + x];
                    ca[x] += va;
                    cb[x] += vb;
                    caa[x] += va * va;
                    cbb[x] += vb * vb;
                    cab[x] += va * vb;
                }
        } else {
            const int yout = y0 - 1, yin = y0 + kWin - 1;
            for (int x = 0; x < w; ++x) {
                const double va0 = a[static_cast<size_t>(yout) * w + x];
                const double vb0 = b[static_cast<size_t>(yout) * w + x];
                const double va1 = a[static_cast<size_t>(yin) * w + x];
                const double vb1 = b[static_cast<size_t>(yin) * w + x];
                ca[x] += va1 - va0;
                cb[x] += vb1 - vb0;
                caa[x] += va1 * va1 - va0 * va0;
                cbb[x] += vb1 * vb1 - vb0 * vb0;
                cab[x] += va1 * vb1 - va0 * vb0;
            }
        }
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (int x = 0; x < kWin; ++x) {
            sa += ca[x];
            sb += cb[x];
            saa += caa[x];
            sbb += cbb[x];
            sab += cab[x];
        }
        for (int x0 = 0;; ++x0) {
            const double n = kWin * kWin;
            const double mu_a = sa / n, mu_b = sb / n;
            const double var_a = saa / n - mu_a * mu_a;
            const double var_b = sbb / n - mu_b * mu_b;
            const double cov = sab / n - mu_a * mu_b;
            const double num = (2 * mu_a * mu_b + kC1) * (2 * cov + kC2);
            const double den =
                (mu_a * mu_a + mu_b * mu_b + kC1) * (var_a + var_b + kC2);
            total += num / den;
            ++count;
            if (x0 + 1 >= ww) break;
            const int xout = x0, xin = x0 + kWin;
            sa += ca[xin] - ca[xout];
            sb += cb[xin] - cb[xout];
            saa += caa[xin] - caa[xout];
            sbb += cbb[xin] - cbb[xout];
            sab += cab[xin] - cab[xout];
        }
    }
    return total / static_cast<double>(count);
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    require_same_geometry(a, b, "ssim");
    if (a.width < kWin || a.height < kWin)
        fail(ErrorCategory::Geometry, "ssim: image smaller than 8x8 window");
    double acc = 0.0;
    for (int c = 0; c < a.channels; ++c)
        acc += ssim_plane(a.plane(c), b.plane(c), a.width, a.height);
    return acc / a.channels;
}

}  // namespace wmb
