#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wmbench/image.hpp"

namespace wmb {

// Payload helpers. Bits are 0/1 bytes; hex serialization is MSB-first per
// byte, zero-padded to whole bytes.
std::vector<uint8_t> random_payload(int nbits, uint64_t seed);
std::string payload_to_hex(const std::vector<uint8_t>& bits);
std::vector<uint8_t> payload_from_hex(const std::string& hex, int nbits);

// --- additive (spatial) codec ------------------------------------------------

// Multi-bit additive watermark: per-bit pseudorandom fields P_i (zero-mean,
// unit RMS, seed-derived), combined as W ~ sum_i (2 b_i - 1) P_i / sqrt(K)
// and exactly re-centered/normalized so |mean(W)| = 0 and RMS(W) = 1.
// Embedding adds alpha*W to the luma plane only.
struct AdditivePattern {
    int width = 0;
    int height = 0;
    uint64_t seed = 0;
    double alpha = 0.02;
    std::vector<uint8_t> payload;       // K bits
    std::vector<double> w;              // combined pattern, zero-mean, RMS 1
    std::vector<std::vector<double>> bit_fields;  // K per-bit fields
};

AdditivePattern make_additive_pattern(int width, int height, uint64_t seed,
                                      const std::vector<uint8_t>& payload,
                                      double alpha = 0.02);

// Unit-RMS plane whose DFT has constant magnitude sqrt(MN) at every bin
// (random Hermitian phases, positive DC). Not an AdditivePattern: its mean is
// 1/sqrt(MN), not 0. Used for spectral verification where every frequency bin
// must carry signal.
std::vector<double> flat_spectrum_plane(int width, int height, uint64_t seed);

struct EmbedResult {
    Image image;
    double clamped_fraction = 0.0;
};

struct DetectionResult {
    double bit_accuracy = 0.0;
    double correlation = 0.0;
    bool decision = false;
    double threshold = 0.0;
    std::vector<uint8_t> bits;  // recovered payload
};

// luma' = clamp(luma + alpha * W); chroma unchanged. alpha == 0 returns the
// input bit-identically.
EmbedResult embed_additive(const Image& img, const AdditivePattern& wm);

// Blind mode (original == nullptr): correlate highpass(luma) against W, where
// highpass subtracts a 3x3 box-blurred copy (mirror padding). Informed mode:
// correlate the mean-centered residual (luma - original_luma) against W.
// Per-bit decoding: bit_i = [<residual, P_i> >= 0].
DetectionResult detect_additive(const Image& img, const AdditivePattern& wm,
                                const Image* original = nullptr,
                                double tau = 0.1);

// --- spread-spectrum (8x8 DCT mid-band) codec ---------------------------------

// Each payload bit modulates chips_per_bit mid-band DCT coefficients chosen
// by a seeded shuffle over all (full block, band slot) pairs; chip signs are
// an independent seed-derived stream. chip_strength gamma is expressed on the
// 8-bit-equivalent DCT scale (the scale of JPEG quantization tables) and is
// divided by 255 internally for [0,1] pixels.
struct SpreadSpectrumKey {
    uint64_t seed = 0;
    std::vector<uint8_t> payload;  // default 64 bits
    double gamma = 4.0;
    int band_lo = 3;   // inclusive bounds on u+v (zero-based DCT indices)
    int band_hi = 6;
    int chips_per_bit = 16;
    double tau = 0.75;  // decision threshold on bit_accuracy
};

// Band slot count per 8x8 block for the key's band (22 for the default 3..6).
int ss_band_slots(const SpreadSpectrumKey& key);

EmbedResult embed_ss(const Image& img, const SpreadSpectrumKey& key);
DetectionResult extract_ss(const Image& img, const SpreadSpectrumKey& key);

// --- Eq.-style residual energy diagnostic -------------------------------------

// ||E(I')||^2 realized as the squared normalized detection correlation:
// evaluation-side score of how much recoverable watermark structure remains.
double residual_watermark_energy(const Image& candidate,
                                 const AdditivePattern& wm,
                                 const Image* original = nullptr);
double residual_watermark_energy(const Image& candidate,
                                 const SpreadSpectrumKey& key);

// --- key persistence -----------------------------------------------------------

// Text record (one "key value" pair per line) so experiments can be replayed.
struct AdditiveKeySpec {
    int width = 0, height = 0;
    uint64_t seed = 0;
    double alpha = 0.02;
    std::vector<uint8_t> payload;
};
using WatermarkKey = std::variant<AdditiveKeySpec, SpreadSpectrumKey>;

std::string serialize_key(const WatermarkKey& key);
WatermarkKey parse_key(const std::string& text);
void save_key(const WatermarkKey& key, const std::string& path);
WatermarkKey load_key(const std::string& path);

}  // namespace wmb
