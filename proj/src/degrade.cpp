#include "wmbench/degrade.hpp"

#include <cmath>

#include "wmbench/dct.hpp"
#include "wmbench/rng.hpp"

namespace wmb {

Image add_pixel_noise(const Image& img, const NoiseParams& p) {
    if (p.sigma < 0)
        fail(ErrorCategory::Config, "add_pixel_noise: sigma must be >= 0");
    Image out = img;
    if (p.sigma == 0.0) return out;
    Rng rng(p.seed);
    for (double& v : out.samples) v += p.sigma * rng.next_gaussian();
    clamp01(out);
    return out;
}

namespace {

std::vector<double> sampled_kernel(double sigma, int size) {
    std::vector<double> k(size);
    const int r = size / 2;
    if (sigma <= 0.0) {
        k.assign(size, 0.0);
        k[r] = 1.0;
        return k;
    }
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double x = i - r;
        k[i] = std::exp(-x * x / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

// 1-D mirror-padded convolution along rows of a w x h plane.
void convolve_rows(const std::vector<double>& in, std::vector<double>& out,
                   int w, int h, const std::vector<double>& k) {
    const int r = static_cast<int>(k.size()) / 2;
    for (int y = 0; y < h; ++y) {
        const double* row = in.data() + static_cast<size_t>(y) * w;
        double* orow = out.data() + static_cast<size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            double s = 0.0;
            for (int t = -r; t <= r; ++t) {
                int xx = x + t;
                if (xx < 0) xx = -xx - 1;          // mirror: -1 -> 0, -2 -> 1
                if (xx >= w) xx = 2 * w - 1 - xx;  // mirror: w -> w-1
                s += row[xx] * k[t + r];
            }
            orow[x] = s;
        }
    }
}

void transpose(const std::vector<double>& in, std::vector<double>& out, int w,
               int h) {
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out[static_cast<size_t>(x) * h + y] = in[static_cast<size_t>(y) * w + x];
}

}  // namespace

Image gaussian_blur(const Image& img, const BlurParams& p) {
    validate(img, "gaussian_blur");
    const int size = p.effective_kernel_size();
    if (size < 1 || size % 2 == 0)
        fail(ErrorCategory::Config,
             "gaussian_blur: kernel_size must be odd and >= 1, got " +
                 std::to_string(size));
    Image out = img;
    if (p.mode == BlurMode::Mirror) {
        if (size > 2 * std::min(img.width, img.height) + 1)
            fail(ErrorCategory::Geometry,
                 "gaussian_blur: kernel size " + std::to_string(size) +
                     " too large for " + std::to_string(img.width) + "x" +
                     std::to_string(img.height) + " image");
        if (size == 1 || p.sigma <= 0.0) return out;
        const auto k = sampled_kernel(p.sigma, size);
        std::vector<double> a(img.plane_size()), b(img.plane_size());
        for (int c = 0; c < img.channels; ++c) {
            auto pl = out.plane(c);
            a.assign(pl.begin(), pl.end());
            convolve_rows(a, b, img.width, img.height, k);
            transpose(b, a, img.width, img.height);
            convolve_rows(a, b, img.height, img.width, k);
            transpose(b, a, img.height, img.width);
            std::copy(a.begin(), a.end(), pl.begin());
        }
    } else {
        const SpectralField h = transfer_function(p, img.width, img.height);
        for (int c = 0; c < img.channels; ++c) {
            SpectralField f = dft2(out.plane(c), img.width, img.height);
            for (size_t i = 0; i < f.coeffs.size(); ++i)
                f.coeffs[i] *= h.coeffs[i].real();
            auto restored = idft2(f);
            auto pl = out.plane(c);
            std::copy(restored.begin(), restored.end(), pl.begin());
        }
    }
    clamp01(out);
    return out;
}

SpectralField transfer_function(const BlurParams& p, int M, int N) {
    if (M <= 0 || N <= 0)
        fail(ErrorCategory::Geometry, "transfer_function: bad dimensions");
    SpectralField h(M, N);
    const double c = 2.0 * std::numbers::pi * std::numbers::pi * p.sigma * p.sigma;
    for (int l = 0; l < N; ++l) {
        const double v = static_cast<double>(fold_freq_index(l, N)) / N;
        for (int k = 0; k < M; ++k) {
            const double u = static_cast<double>(fold_freq_index(k, M)) / M;
            h.at(k, l) = std::exp(-c * (u * u + v * v));
        }
    }
    return h;
}

std::array<int, 64> jpeg_quant_table(int quality) {
    if (quality < 1 || quality > 100)
        fail(ErrorCategory::Config,
             "jpeg quality must be in [1,100], got " + std::to_string(quality));
    // Standard luminance table (row v, column u).
    static constexpr int kStd[64] = {
        16, 11, 10, 16, 24,  40,  51,  61,   //
        12, 12, 14, 19, 26,  58,  60,  55,   //
        14, 13, 16, 24, 40,  57,  69,  56,   //
        14, 17, 22, 29, 51,  87,  80,  62,   //
        18, 22, 37, 56, 68,  109, 103, 77,   //
        24, 35, 55, 64, 81,  104, 113, 92,   //
        49, 64, 78, 87, 103, 121, 120, 101,  //
        72, 92, 95, 98, 112, 100, 103, 99};
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    std::array<int, 64> t;
    for (int i = 0; i < 64; ++i) {
        int q = (kStd[i] * scale + 50) / 100;
        t[i] = std::clamp(q, 1, 255);
    }
    return t;
}

Image jpeg_cycle(const Image& img, const JpegParams& p) {
    validate(img, "jpeg_cycle");
    const auto table = jpeg_quant_table(p.quality);
    auto y = luma_plane(img);
    BlockPlane bp = split_blocks(y, img.width, img.height);
    std::array<double, 64> coef, rec;
    for (auto& blk : bp.blocks) {
        dct8x8_forward(blk, coef);
        for (int i = 0; i < 64; ++i) {
            const double step = table[i] / 255.0;
            coef[i] = std::lround(coef[i] / step) * step;
        }
        dct8x8_inverse(coef, rec);
        blk = rec;
    }
    auto y2 = merge_blocks(bp);
    Image out = img;
    set_luma_plane(out, y2);
    clamp01(out);
    return out;
}

}  // namespace wmb
