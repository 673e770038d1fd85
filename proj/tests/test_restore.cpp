#include <catch2/catch.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "wmbench/degrade.hpp"
#include "wmbench/errors.hpp"
#include "wmbench/metrics.hpp"
#include "wmbench/restore.hpp"
#include "wmbench/rng.hpp"
#include "wmbench/watermark.hpp"

using namespace wmb;

namespace {

Image interior_random_image(int w, int h, int c, uint64_t seed) {
    Image img(w, h, c);
    Rng rng(seed);
    for (auto& v : img.samples) v = 0.2 + 0.6 * rng.next_double();
    return img;
}

// Dense reference for the Tikhonov normal equations (I + beta*L) x = y with
// the periodic 5-point Laplacian (matches the Fourier symbol
// 4 sin^2(pi k/M) + 4 sin^2(pi l/N)).
Image dense_tikhonov(const Image& y, double beta) {
    const int w = y.width, h = y.height;
    const int n = w * h;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int yy = 0; yy < h; ++yy)
        for (int xx = 0; xx < w; ++xx) {
            int i = yy * w + xx;
            A(i, i) = 1.0 + 4.0 * beta;
            A(i, yy * w + (xx + 1) % w) -= beta;
            A(i, yy * w + (xx + w - 1) % w) -= beta;
            A(i, ((yy + 1) % h) * w + xx) -= beta;
            A(i, ((yy + h - 1) % h) * w + xx) -= beta;
        }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    Image out = y;
    for (int c = 0; c < y.channels; ++c) {
        Eigen::VectorXd rhs(n);
        for (int i = 0; i < n; ++i) rhs(i) = y.plane(c)[i];
        Eigen::VectorXd x = lu.solve(rhs);
        for (int i = 0; i < n; ++i)
            out.plane(c)[i] = std::min(1.0, std::max(0.0, x(i)));
    }
    return out;
}

}  // namespace

TEST_CASE("tikhonov beta = 0 is the identity", "[restore][tikhonov]") {
    Image y = wmbt::corpus_image(0, 32, 32);
    RestorationParams p;
    p.beta = 0.0;
    REQUIRE(wmbt::max_abs_diff(restore_tikhonov(y, p), y) < 1e-12);
}

TEST_CASE("tikhonov leaves constants unchanged", "[restore][tikhonov]") {
    Image flat(20, 14, 3, 0.42);
    RestorationParams p;
    p.beta = 3.0;
    REQUIRE(wmbt::max_abs_diff(restore_tikhonov(flat, p), flat) < 1e-12);
}

TEST_CASE("tikhonov matches the dense linear-system oracle",
          "[restore][tikhonov]") {
    for (auto [w, h, beta] : {std::tuple<int, int, double>{16, 16, 1.0},
                              {12, 9, 0.1},
                              {7, 5, 2.5}}) {
        Image y = interior_random_image(w, h, 1, 100 + w);
        RestorationParams p;
        p.beta = beta;
        Image fast = restore_tikhonov(y, p);
        Image slow = dense_tikhonov(y, beta);
        INFO("size " << w << "x" << h << " beta " << beta);
        REQUIRE(wmbt::max_abs_diff(fast, slow) < 1e-8);
    }
}

TEST_CASE("tikhonov smooths noise", "[restore][tikhonov]") {
    Image clean = wmbt::corpus_image(1, 48, 48);
    Image noisy = add_pixel_noise(clean, {0.05, 3});
    RestorationParams p;
    p.beta = 1.0;
    Image rest = restore_tikhonov(noisy, p);
    REQUIRE(mse(rest, clean) < mse(noisy, clean));
}

TEST_CASE("tv beta = 0 returns y exactly", "[restore][tv]") {
    Image y = wmbt::corpus_image(2, 32, 32);
    RestorationParams p;
    p.beta = 0.0;
    TvResult r = restore_tv(y, p);
    REQUIRE(wmbt::bit_identical(r.image, y));
    REQUIRE(r.converged);
}

TEST_CASE("tv objective never exceeds the trivial candidate", "[restore][tv]") {
    Image clean = wmbt::corpus_image(3, 32, 32);
    Image y = add_pixel_noise(clean, {0.05, 17});
    for (double beta : {0.01, 0.1, 0.5}) {
        RestorationParams p;
        p.beta = beta;
        TvResult r = restore_tv(y, p);
        INFO("beta " << beta);
        REQUIRE(r.objective <= tv_objective(y, y, beta) + 1e-12);
        REQUIRE(r.objective ==
                Approx(tv_objective(y, r.image, beta)).margin(1e-12));
    }
}

TEST_CASE("tv denoises a piecewise-constant image", "[restore][tv]") {
    // Two-region image + noise: the TV prior fits it well, so both the
    // objective and the distance to the clean image must strictly improve.
    Image clean(32, 32, 1, 0.25);
    for (int y = 0; y < 32; ++y)
        for (int x = 16; x < 32; ++x) clean.at(0, y, x) = 0.75;
    Image noisy = add_pixel_noise(clean, {0.05, 23});
    RestorationParams p;
    p.beta = 0.1;
    TvResult r = restore_tv(noisy, p);
    REQUIRE(r.objective < tv_objective(noisy, noisy, p.beta));
    REQUIRE(mse(r.image, clean) < mse(noisy, clean));
}

TEST_CASE("tv reports non-convergence instead of hiding it", "[restore][tv]") {
    Image y = add_pixel_noise(wmbt::corpus_image(4, 32, 32), {0.1, 5});
    RestorationParams starved;
    starved.beta = 0.2;
    starved.max_iters = 2;
    starved.tol = 1e-14;
    TvResult r = restore_tv(y, starved);
    REQUIRE_FALSE(r.converged);
    REQUIRE(r.iterations == 2);

    RestorationParams generous;
    generous.beta = 0.2;
    generous.max_iters = 2000;
    TvResult g = restore_tv(y, generous);
    REQUIRE(g.converged);
    REQUIRE(g.iterations < 2000);
}

TEST_CASE("tv objective sits within 1% of a 10x-budget self-oracle",
          "[restore][tv]") {
    CorpusParams cp;
    cp.width = 32;
    cp.height = 32;
    cp.count = 3;
    cp.seed = 31;
    auto corpus = make_corpus(cp);
    for (int i = 0; i < 3; ++i) {
        Image y = add_pixel_noise(corpus[i], {0.1, 9});
        RestorationParams p;
        p.beta = 0.1;
        TvResult fast = restore_tv(y, p);
        RestorationParams slow_p = p;
        slow_p.max_iters = p.max_iters * 10;
        slow_p.tol = p.tol / 100.0;
        TvResult slow = restore_tv(y, slow_p);
        INFO("instance " << i);
        REQUIRE(fast.objective <=
                slow.objective + 0.01 * std::abs(slow.objective));
    }
}

TEST_CASE("wiener with K = 0 inverts its own periodic blur",
          "[restore][wiener]") {
    Image x = interior_random_image(32, 24, 3, 55);
    BlurParams blur;
    blur.sigma = 1.0;  // H_min = exp(-2 pi^2 * 0.5) ~ 5e-5 > 1e-6
    blur.mode = BlurMode::Periodic;
    Image y = gaussian_blur(x, blur);
    RestorationParams p;
    p.wiener_nsr = 0.0;
    Image rec = wiener_deconvolve(y, blur, p);
    REQUIRE(wmbt::max_abs_diff(rec, x) < 1e-6);
}

TEST_CASE("wiener rejects K = 0 when H underflows", "[restore][wiener]") {
    Image y(64, 64, 1, 0.5);
    BlurParams blur;
    blur.sigma = 50.0;  // H at Nyquist underflows far below 1e-12
    RestorationParams p;
    p.wiener_nsr = 0.0;
    REQUIRE_THROWS_AS(wiener_deconvolve(y, blur, p), Error);
    try {
        wiener_deconvolve(y, blur, p);
    } catch (const Error& e) {
        REQUIRE(e.category() == ErrorCategory::Numeric);
    }
    // A positive K makes the same request well-posed.
    p.wiener_nsr = 1e-3;
    REQUIRE_NOTHROW(wiener_deconvolve(y, blur, p));
}

TEST_CASE("wiener leaves constants essentially unchanged", "[restore][wiener]") {
    Image flat(24, 24, 1, 0.5);
    BlurParams blur;
    blur.sigma = 2.0;
    RestorationParams p;
    p.wiener_nsr = 1e-3;
    Image out = wiener_deconvolve(flat, blur, p);
    // DC gain is 1/(1+K); for K = 1e-3 the constant moves by < 0.1%.
    REQUIRE(wmbt::max_abs_diff(out, flat) < 0.5 * 1e-3);
}

TEST_CASE("deblur restorer: watermark stays dead while fidelity improves",
          "[restore][wiener]") {
    // The deblur-attack property: blur kills the additive watermark; Wiener
    // deconvolution restores image quality without resurrecting the mark.
    Image clean = wmbt::corpus_image(6, 128, 128);
    auto payload = random_payload(64, 909);
    AdditivePattern wm = make_additive_pattern(128, 128, 42, payload, 0.02);
    EmbedResult emb = embed_additive(clean, wm);

    BlurParams blur;
    blur.sigma = 15.0;
    blur.kernel_size = 71;
    blur.mode = BlurMode::Periodic;
    Image blurred = gaussian_blur(emb.image, blur);
    RestorationParams p;
    p.wiener_nsr = 1e-3;
    Image restored = wiener_deconvolve(blurred, blur, p);

    DetectionResult det = detect_additive(restored, wm);
    REQUIRE(det.correlation < det.threshold);
    REQUIRE_FALSE(det.decision);
    REQUIRE(psnr(restored, clean) >= psnr(blurred, clean) + 3.0);
}

TEST_CASE("restorers preserve geometry and determinism", "[restore]") {
    Image y = add_pixel_noise(wmbt::corpus_image(7, 40, 24), {0.05, 2});
    RestorationParams p;
    p.beta = 0.1;
    Image a = restore_tikhonov(y, p);
    Image b = restore_tikhonov(y, p);
    REQUIRE(a.same_geometry(y));
    REQUIRE(wmbt::bit_identical(a, b));
    TvResult t1 = restore_tv(y, p);
    TvResult t2 = restore_tv(y, p);
    REQUIRE(t1.image.same_geometry(y));
    REQUIRE(wmbt::bit_identical(t1.image, t2.image));
}
