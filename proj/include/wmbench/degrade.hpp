#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wmbench/fft.hpp"
#include "wmbench/image.hpp"

namespace wmb {

// --- pixel noise -------------------------------------------------------------

struct NoiseParams {
    double sigma = 0.05;  // intensity units on the [0,1] scale
    uint64_t seed = 0;
};

// Adds i.i.d. N(0, sigma^2) to every sample, then clamps once.
Image add_pixel_noise(const Image& img, const NoiseParams& p);

// --- Gaussian blur -----------------------------------------------------------

// Mirror: separable spatial convolution with a sampled G_sigma kernel
// (normalized to sum exactly 1) and mirror padding — the natural-image
// default. Periodic: multiplication of the DFT by the analytic transfer
// function H(u,v) = exp(-2*pi^2*sigma^2*(u^2+v^2)), which makes spectral
// comparisons against H exact (the sampled kernel deviates from H via
// aliasing). kernel_size only affects Mirror mode.
enum class BlurMode { Mirror, Periodic };

struct BlurParams {
    double sigma = 1.0;   // pixels
    int kernel_size = 0;  // odd; 0 means the default 6*ceil(sigma)+1
    BlurMode mode = BlurMode::Mirror;

    int effective_kernel_size() const {
        if (kernel_size != 0) return kernel_size;
        int k = 6 * static_cast<int>(std::ceil(sigma)) + 1;
        return k < 1 ? 1 : k;
    }
};

Image gaussian_blur(const Image& img, const BlurParams& p);

// Analytic H sampled at normalized frequencies u = fold(k)/M, v = fold(l)/N.
// Real, positive, H(0,0) = 1.
SpectralField transfer_function(const BlurParams& p, int M, int N);

// --- JPEG-style quantization cycle -------------------------------------------

struct JpegParams {
    int quality = 75;  // 1..100
};

// Standard luminance quantization table scaled to `quality` with the IJG
// rule: scale = quality < 50 ? 5000/quality : 200 - 2*quality;
// q' = clamp(floor((q*scale + 50)/100), 1, 255). Entries are on the 8-bit
// pixel scale; divide by 255 for [0,1] data.
std::array<int, 64> jpeg_quant_table(int quality);

// Luma -> 8x8 DCT -> quantize -> dequantize -> inverse DCT -> clamp.
// Chroma is passed through. Entropy coding is omitted (lossless stage).
Image jpeg_cycle(const Image& img, const JpegParams& p);

// --- latent-space noise through a linear autoencoder -------------------------

// PCA codec: encode(I) = V^T (vec(I) - mu), decode(z) = mu + V z, with V
// orthonormal (V^T V = I_d). Fit is deterministic: principal components
// ordered by decreasing eigenvalue, sign fixed so each column's
// largest-magnitude entry is positive, and zero-variance directions filled
// by a deterministic orthonormal completion.
struct LatentCodec {
    int width = 0;
    int height = 0;
    int channels = 1;
    int d = 0;
    std::vector<double> mu;     // length D = width*height*channels
    std::vector<double> basis;  // column-major D x d

    size_t dim() const { return static_cast<size_t>(width) * height * channels; }

    std::vector<double> encode(const Image& img) const;
    Image decode(std::span<const double> z) const;  // unclamped
};

LatentCodec fit_latent_codec(const std::vector<Image>& corpus, int d);

// I' = clamp(decode(encode(I) + eps)), eps ~ N(0, sigma^2 I_d).
Image add_latent_noise(const Image& img, const LatentCodec& codec,
                       const NoiseParams& p);

// Flat binary record (magic, dims, d, then mu and V as little-endian doubles)
// plus a small text sidecar of fit provenance at path + ".txt".
void save_latent_codec(const LatentCodec& codec, const std::string& path,
                       const std::string& provenance);
LatentCodec load_latent_codec(const std::string& path);

}  // namespace wmb
