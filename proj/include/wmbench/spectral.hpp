#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wmbench/degrade.hpp"
#include "wmbench/fft.hpp"
#include "wmbench/image.hpp"

namespace wmb {

// Per-band energy bookkeeping over radial frequency rho = sqrt(u^2 + v^2),
// u, v folded to [-1/2, 1/2). Bands partition [0, sqrt(1/2)]; DC lands in
// band 0. An empty band (no bins) is skipped with a note.
struct BandEnergyReport {
    std::vector<double> edges;            // n_bands + 1 breakpoints
    std::vector<size_t> bins;             // bins per band
    std::vector<double> energy_marked;    // sum |F(marked - clean)|^2
    std::vector<double> energy_attacked;  // sum |F(attacked - clean)|^2
    std::vector<double> measured;         // attacked/marked energy ratio
    std::vector<double> predicted;        // band-mean |H|^2; NaN when no blur given
    std::vector<std::string> notes;       // per-band annotations
    double total_marked = 0.0;            // Parseval total of the marked field
    double total_attacked = 0.0;
};

std::vector<double> default_band_edges(int n_bands = 8);

// DFT of (marked - clean) luma: alpha * W_hat for additive embedding when no
// clamping occurred.
SpectralField watermark_spectrum(const Image& clean, const Image& marked);

// Per-band measured attenuation E_band(attacked - clean)/E_band(marked -
// clean); when `blur` is given, also the predicted band-averaged |H|^2, which
// is monotone non-increasing across bands for any sigma > 0.
BandEnergyReport suppression_profile(const Image& clean, const Image& marked,
                                     const Image& attacked,
                                     const std::vector<double>& edges,
                                     const std::optional<BlurParams>& blur);

// Monte-Carlo check of the per-bin noise energy law E|n_hat|^2 = sigma^2*M*N.
// Passes iff the grand mean is within 2% of the target and no bin deviates by
// more than 6 standard errors (per-bin SE accounts for the chi-squared-1
// statistics of the self-conjugate bins).
struct NoiseCheckReport {
    double sigma = 0.0;
    int width = 0, height = 0, trials = 0;
    double target = 0.0;      // sigma^2 * M * N
    double grand_mean = 0.0;  // mean over bins of per-bin empirical means
    double rel_error = 0.0;   // |grand_mean - target| / target (0 when target 0)
    double worst_z = 0.0;     // max per-bin |mean - target| / SE
    bool pass = false;
};

NoiseCheckReport noise_energy_check(double sigma, int M, int N, int trials,
                                    uint64_t seed);

// CSV emission: "band,lo,hi,bins,energy_marked,energy_attacked,measured,
// predicted,note" rows.
std::string band_report_csv(const BandEnergyReport& report);

// SVG line plot of measured (and predicted, when present) radial profiles.
std::string band_report_svg(const BandEnergyReport& report,
                            const std::string& title);

}  // namespace wmb
