#include <catch2/catch.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "wmbench/errors.hpp"
#include "wmbench/fft.hpp"
#include "wmbench/rng.hpp"

using namespace wmb;

namespace {

std::vector<double> random_plane(int w, int h, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> p(static_cast<size_t>(w) * h);
    for (auto& v : p) v = rng.next_double();
    return p;
}

// O((MN)^2) reference DFT, straight from the definition.
SpectralField naive_dft2(const std::vector<double>& plane, int M, int N) {
    SpectralField out(M, N);
    for (int l = 0; l < N; ++l)
        for (int k = 0; k < M; ++k) {
            std::complex<double> acc(0.0, 0.0);
            for (int y = 0; y < N; ++y)
                for (int x = 0; x < M; ++x) {
                    double phase = -2.0 * M_PI *
                                   (static_cast<double>(k) * x / M +
                                    static_cast<double>(l) * y / N);
                    acc += plane[static_cast<size_t>(y) * M + x] *
                           std::complex<double>(std::cos(phase), std::sin(phase));
                }
            out.at(k, l) = acc;
        }
    return out;
}

double max_coeff_err(const SpectralField& a, const SpectralField& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.coeffs.size(); ++i)
        m = std::max(m, std::abs(a.coeffs[i] - b.coeffs[i]));
    return m;
}

}  // namespace

TEST_CASE("dft2 matches the quadratic-time definition", "[fft]") {
    for (auto [w, h, seed] : {std::tuple<int, int, uint64_t>{8, 8, 1},
                              {5, 7, 2},     // Bluestein both axes
                              {16, 9, 3},    // mixed radix-2 / Bluestein
                              {12, 12, 4}}) {
        auto plane = random_plane(w, h, seed);
        auto fast = dft2(plane, w, h);
        auto slow = naive_dft2(plane, w, h);
        INFO("size " << w << "x" << h);
        REQUIRE(max_coeff_err(fast, slow) < 1e-9 * w * h);
    }
}

TEST_CASE("Parseval: sum |X|^2 = MN * sum |x|^2", "[fft]") {
    for (auto [w, h] : {std::pair<int, int>{8, 8}, {17, 23}, {64, 64}}) {
        auto plane = random_plane(w, h, 77 + w);
        double spatial = 0.0;
        for (double v : plane) spatial += v * v;
        auto field = dft2(plane, w, h);
        INFO("size " << w << "x" << h);
        REQUIRE(spectral_energy(field) ==
                Approx(static_cast<double>(w) * h * spatial).epsilon(1e-10));
    }
}

TEST_CASE("idft2 inverts dft2", "[fft]") {
    for (auto [w, h] : {std::pair<int, int>{8, 8}, {13, 21}, {64, 32}}) {
        auto plane = random_plane(w, h, 5 + w);
        auto back = idft2(dft2(plane, w, h));
        double m = 0.0;
        for (size_t i = 0; i < plane.size(); ++i)
            m = std::max(m, std::abs(back[i] - plane[i]));
        INFO("size " << w << "x" << h);
        REQUIRE(m < 1e-11);
    }
}

TEST_CASE("DFT is linear", "[fft]") {
    const int w = 11, h = 6;
    auto x = random_plane(w, h, 31);
    auto y = random_plane(w, h, 32);
    std::vector<double> combo(x.size());
    for (size_t i = 0; i < x.size(); ++i) combo[i] = 2.5 * x[i] - 0.75 * y[i];
    auto fx = dft2(x, w, h);
    auto fy = dft2(y, w, h);
    auto fc = dft2(combo, w, h);
    double m = 0.0;
    for (size_t i = 0; i < fc.coeffs.size(); ++i)
        m = std::max(m, std::abs(fc.coeffs[i] -
                                 (2.5 * fx.coeffs[i] - 0.75 * fy.coeffs[i])));
    REQUIRE(m < 1e-10);
}

TEST_CASE("impulse has a flat spectrum; constants are pure DC", "[fft]") {
    const int w = 9, h = 4;
    std::vector<double> delta(static_cast<size_t>(w) * h, 0.0);
    delta[0] = 1.0;
    auto fd = dft2(delta, w, h);
    for (auto& c : fd.coeffs) REQUIRE(std::abs(c - 1.0) < 1e-12);

    std::vector<double> flat(static_cast<size_t>(w) * h, 0.3);
    auto ff = dft2(flat, w, h);
    REQUIRE(std::abs(ff.at(0, 0) - 0.3 * w * h) < 1e-10);
    for (int l = 0; l < h; ++l)
        for (int k = 0; k < w; ++k)
            if (k != 0 || l != 0) REQUIRE(std::abs(ff.at(k, l)) < 1e-10);
}

TEST_CASE("idft2 rejects non-Hermitian fields", "[fft]") {
    SpectralField field(4, 4);
    field.at(1, 0) = {3.0, 4.0};  // conjugate bin (3,0) left at zero
    REQUIRE_THROWS_AS(idft2(field), Error);
    try {
        idft2(field);
    } catch (const Error& e) {
        REQUIRE(e.category() == ErrorCategory::Numeric);
    }
}

TEST_CASE("fold_freq_index maps to signed frequencies", "[fft]") {
    REQUIRE(fold_freq_index(0, 8) == 0);
    REQUIRE(fold_freq_index(3, 8) == 3);
    REQUIRE(fold_freq_index(4, 8) == -4);
    REQUIRE(fold_freq_index(7, 8) == -1);
    REQUIRE(fold_freq_index(2, 5) == 2);
    REQUIRE(fold_freq_index(3, 5) == -2);
}

TEST_CASE("band_power partitions the spectrum", "[fft]") {
    const int w = 16, h = 16;
    auto plane = random_plane(w, h, 9);
    auto field = dft2(plane, w, h);
    double total = 0.0;
    size_t bins = 0;
    // [0, 0.25) then [0.25, 0.71); together they cover every folded bin.
    for (auto [lo, hi] : {std::pair<double, double>{0.0, 0.25}, {0.25, 0.71}}) {
        auto [mean_power, n] = band_power(field, lo, hi);
        total += mean_power * static_cast<double>(n);
        bins += n;
    }
    REQUIRE(bins == static_cast<size_t>(w) * h);
    REQUIRE(total == Approx(spectral_energy(field)).epsilon(1e-10));

    auto [empty_mean, empty_bins] = band_power(field, 0.9, 1.0);
    REQUIRE(empty_bins == 0);
    REQUIRE(empty_mean == 0.0);
}
