#include "wmbench/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "wmbench/rng.hpp"

namespace wmb {
namespace {

constexpr uint64_t kBasisStream = 0x636f7270757342ull;   // mode-bank parameters
constexpr uint64_t kCoeffStream = 0x636f7270757343ull;   // per-image coefficients
constexpr uint64_t kTextureStream = 0x636f7270757254ull; // per-image texture

struct Mode {
    int mx = 0, my = 0;
    double phase_x = 0.0, phase_y = 0.0;
    double amp = 0.0;                  // coefficient scale
    double channel_weight[3] = {1.0, 1.0, 1.0};
};

// Fixed bank: every (mx, my) with 1 <= mx+my <= 6. The low group (sum <= 3)
// carries most of the structure; the mid group adds mild detail.
std::vector<Mode> make_mode_bank(const CorpusParams& p) {
    Rng rng(derive_seed(p.seed, kBasisStream));
    std::vector<Mode> bank;
    for (int s = 1; s <= 6; ++s) {
        for (int mx = s; mx >= 0; --mx) {
            Mode m;
            m.mx = mx;
            m.my = s - mx;
            m.phase_x = 2.0 * std::numbers::pi * rng.next_double();
            m.phase_y = 2.0 * std::numbers::pi * rng.next_double();
            double base = (s <= 3) ? 0.05 : 0.012;
            m.amp = base * (0.5 + 0.5 * rng.next_double());
            for (int c = 0; c < 3; ++c)
                m.channel_weight[c] = 0.3 + 0.7 * rng.next_double();
            bank.push_back(m);
        }
    }
    return bank;
}

double clipped_gaussian(Rng& rng, double limit) {
    return std::clamp(rng.next_gaussian(), -limit, limit);
}

}  // namespace

Image make_corpus_image(const CorpusParams& p, int index) {
    if (p.width <= 0 || p.height <= 0)
        fail(ErrorCategory::Geometry, "corpus image size must be positive");
    if (p.channels != 1 && p.channels != 3)
        fail(ErrorCategory::Geometry, "corpus images support 1 or 3 channels");
    if (index < 0) fail(ErrorCategory::Config, "corpus image index must be non-negative");

    const std::vector<Mode> bank = make_mode_bank(p);
    Rng coeff(derive_seed(p.seed, kCoeffStream + 0x9e3779b97f4a7c15ull * static_cast<uint64_t>(index)));

    // Per-channel DC in [0.42, 0.58], then one scalar coefficient per mode.
    double dc[3];
    for (int c = 0; c < 3; ++c) dc[c] = 0.5 + 0.16 * (coeff.next_double() - 0.5);
    std::vector<double> cj(bank.size());
    for (double& v : cj) v = clipped_gaussian(coeff, 2.5);

    // Separable per-axis cosine tables for each mode.
    std::vector<std::vector<double>> cx(bank.size()), cy(bank.size());
    for (size_t j = 0; j < bank.size(); ++j) {
        const Mode& m = bank[j];
        cx[j].resize(p.width);
        cy[j].resize(p.height);
        for (int x = 0; x < p.width; ++x)
            cx[j][x] = m.mx == 0 ? 1.0
                                 : std::cos(2.0 * std::numbers::pi * m.mx * x / p.width + m.phase_x);
        for (int y = 0; y < p.height; ++y)
            cy[j][y] = m.my == 0 ? 1.0
                                 : std::cos(2.0 * std::numbers::pi * m.my * y / p.height + m.phase_y);
    }

    Image img;
    img.width = p.width;
    img.height = p.height;
    img.channels = p.channels;
    img.samples.assign(static_cast<size_t>(p.width) * p.height * p.channels, 0.0);
    for (int c = 0; c < p.channels; ++c) {
        for (int y = 0; y < p.height; ++y) {
            for (int x = 0; x < p.width; ++x) {
                double v = dc[c];
                for (size_t j = 0; j < bank.size(); ++j)
                    v += cj[j] * bank[j].amp * bank[j].channel_weight[c] * cx[j][x] * cy[j][y];
                img.at(c, y, x) = v;
            }
        }
    }

    if (p.texture_sigma > 0.0) {
        Rng tex(derive_seed(p.seed, kTextureStream + 0x9e3779b97f4a7c15ull * static_cast<uint64_t>(index)));
        for (double& v : img.samples)
            v += p.texture_sigma * clipped_gaussian(tex, 4.0);
    }
    clamp01(img);
    return img;
}

std::vector<Image> make_corpus(const CorpusParams& p) {
    if (p.count <= 0) fail(ErrorCategory::Config, "corpus count must be positive");
    std::vector<Image> out;
    out.reserve(p.count);
    for (int i = 0; i < p.count; ++i) out.push_back(make_corpus_image(p, i));
    return out;
}

Image make_textured_image(int width, int height, int channels, uint64_t seed,
                          double noise_sigma) {
    if (width <= 0 || height <= 0)
        fail(ErrorCategory::Geometry, "image size must be positive");
    if (channels != 1 && channels != 3)
        fail(ErrorCategory::Geometry, "supported channel counts are 1 and 3");
    Image img;
    img.width = width;
    img.height = height;
    img.channels = channels;
    img.samples.assign(static_cast<size_t>(width) * height * channels, 0.0);
    Rng rng(derive_seed(seed, 0x7465787475726564ull));
    for (int c = 0; c < channels; ++c)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                double ramp = width > 1 ? 0.2 + 0.6 * x / (width - 1.0) : 0.5;
                img.at(c, y, x) = ramp + noise_sigma * rng.next_gaussian();
            }
    clamp01(img);
    return img;
}

std::vector<std::string> write_corpus(const std::string& dir, const CorpusParams& p) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCategory::Io, "cannot create corpus directory '" + dir + "': " + ec.message());
    std::vector<std::string> paths;
    for (int i = 0; i < p.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%04d.png", i);
        std::string path = (std::filesystem::path(dir) / name).string();
        save_image(make_corpus_image(p, i), path);
        paths.push_back(path);
    }
    return paths;
}

}  // namespace wmb
