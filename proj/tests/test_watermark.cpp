#include <catch2/catch.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "wmbench/degrade.hpp"
#include "wmbench/errors.hpp"
#include "wmbench/fft.hpp"
#include "wmbench/metrics.hpp"
#include "wmbench/rng.hpp"
#include "wmbench/watermark.hpp"

using namespace wmb;

// --- payload helpers -------------------------------------------------------

TEST_CASE("payload hex round-trips MSB-first", "[watermark][payload]") {
    std::vector<uint8_t> bits = {1, 0, 1, 0, 0, 0, 0, 1,   // 0xa1
                                 0, 0, 0, 0, 1, 1, 1, 1};  // 0x0f
    REQUIRE(payload_to_hex(bits) == "a10f");
    REQUIRE(payload_from_hex("a10f", 16) == bits);
    REQUIRE(payload_from_hex("A10F", 16) == bits);

    auto r = random_payload(64, 5);
    REQUIRE(r.size() == 64);
    REQUIRE(payload_from_hex(payload_to_hex(r), 64) == r);
    REQUIRE(random_payload(64, 5) == r);       // deterministic
    REQUIRE(random_payload(64, 6) != r);       // seed-sensitive

    REQUIRE_THROWS_AS(payload_from_hex("zz", 8), Error);
    REQUIRE_THROWS_AS(payload_from_hex("a1", 16), Error);  // too short
}

// --- additive codec ---------------------------------------------------------

TEST_CASE("additive pattern is zero-mean unit-RMS", "[watermark][additive]") {
    auto payload = random_payload(64, 11);
    AdditivePattern wm = make_additive_pattern(96, 64, 3, payload, 0.02);
    REQUIRE(wm.w.size() == 96u * 64u);
    REQUIRE(std::abs(wmbt::mean(wm.w)) < 1e-9);
    REQUIRE(wmbt::rms(wm.w) == Approx(1.0).margin(1e-9));
    REQUIRE(wm.bit_fields.size() == 64);
}

TEST_CASE("alpha = 0 embeds bit-identically", "[watermark][additive]") {
    Image img = wmbt::corpus_image(0);
    auto payload = random_payload(64, 12);
    AdditivePattern wm = make_additive_pattern(128, 128, 4, payload, 0.0);
    EmbedResult r = embed_additive(img, wm);
    REQUIRE(wmbt::bit_identical(r.image, img));
    REQUIRE(r.clamped_fraction == 0.0);
}

TEST_CASE("additive embed PSNR equals -20 log10(alpha) without clamping",
          "[watermark][additive]") {
    // mse = alpha^2 * mean(W^2) = alpha^2 exactly (unit RMS, no clamping), so
    // alpha = 0.02 gives PSNR = 10*log10(1/4e-4) = 33.9794 dB.
    Image img(64, 64, 3, 0.5);
    auto payload = random_payload(64, 13);
    AdditivePattern wm = make_additive_pattern(64, 64, 5, payload, 0.02);
    EmbedResult r = embed_additive(img, wm);
    REQUIRE(r.clamped_fraction == 0.0);
    REQUIRE(psnr(img, r.image) == Approx(33.9794000867).margin(1e-6));
}

TEST_CASE("informed detection on an exact embed is perfect",
          "[watermark][additive]") {
    Image img = wmbt::corpus_image(1);
    auto payload = random_payload(64, 14);
    AdditivePattern wm = make_additive_pattern(128, 128, 6, payload, 0.02);
    EmbedResult r = embed_additive(img, wm);
    REQUIRE(r.clamped_fraction == 0.0);
    DetectionResult det = detect_additive(r.image, wm, &img);
    REQUIRE(det.correlation == Approx(1.0).margin(1e-9));
    REQUIRE(det.bit_accuracy == 1.0);
    REQUIRE(det.decision);
    REQUIRE(det.bits == payload);
}

TEST_CASE("informed detection ignores constant intensity shifts",
          "[watermark][additive]") {
    Image img = wmbt::corpus_image(2);
    auto payload = random_payload(64, 15);
    AdditivePattern wm = make_additive_pattern(128, 128, 7, payload, 0.02);
    Image marked = embed_additive(img, wm).image;
    Image shifted = marked;
    bool clamped = false;
    for (auto& v : shifted.samples) {
        v += 0.01;
        if (v > 1.0) clamped = true;
    }
    REQUIRE_FALSE(clamped);  // shift must stay in gamut for the invariant
    DetectionResult base = detect_additive(marked, wm, &img);
    DetectionResult moved = detect_additive(shifted, wm, &img);
    REQUIRE(moved.correlation == Approx(base.correlation).margin(1e-9));
    REQUIRE(moved.bit_accuracy == base.bit_accuracy);
}

TEST_CASE("blind detection finds the mark and decodes the payload",
          "[watermark][additive]") {
    Image img = wmbt::corpus_image(3);
    auto payload = random_payload(64, 16);
    AdditivePattern wm = make_additive_pattern(128, 128, 8, payload, 0.02);
    Image marked = embed_additive(img, wm).image;
    DetectionResult det = detect_additive(marked, wm);
    REQUIRE(det.threshold == 0.1);
    REQUIRE(det.correlation > det.threshold);
    REQUIRE(det.decision);
    REQUIRE(det.bit_accuracy >= 0.95);

    DetectionResult clean_det = detect_additive(img, wm);
    REQUIRE_FALSE(clean_det.decision);
}

TEST_CASE("blind null distribution stays inside 3/sqrt(MN)",
          "[watermark][additive][slow]") {
    // Unwatermarked noise image against 1000 independent patterns: the
    // normalized correlation must land inside +-3/sqrt(MN) at least 99% of
    // the time. Pinned seeds make the count reproducible.
    const int w = 64, h = 64;
    Image host(w, h, 1, 0.5);
    host = add_pixel_noise(host, {0.1, 424242});
    const double bound = 3.0 / std::sqrt(static_cast<double>(w) * h);
    int inside = 0;
    const int keys = 1000;
    for (int k = 0; k < keys; ++k) {
        auto payload = random_payload(64, derive_seed(888, k));
        AdditivePattern wm =
            make_additive_pattern(w, h, derive_seed(777, k), payload, 0.02);
        DetectionResult det = detect_additive(host, wm);
        if (std::abs(det.correlation) < bound) ++inside;
    }
    REQUIRE(inside >= 990);
}

TEST_CASE("embed rejects geometry mismatches", "[watermark][additive]") {
    Image img(64, 64, 3, 0.5);
    auto payload = random_payload(64, 17);
    AdditivePattern wm = make_additive_pattern(32, 32, 9, payload, 0.02);
    REQUIRE_THROWS_AS(embed_additive(img, wm), Error);
    REQUIRE_THROWS_AS(detect_additive(img, wm), Error);
}

// --- spread-spectrum codec ---------------------------------------------------

TEST_CASE("ss round-trip recovers every bit", "[watermark][ss]") {
    Image img = wmbt::corpus_image(4);
    SpreadSpectrumKey key;
    key.seed = 31337;
    key.payload = random_payload(64, 18);
    EmbedResult r = embed_ss(img, key);
    DetectionResult det = extract_ss(r.image, key);
    REQUIRE(det.bit_accuracy == 1.0);
    REQUIRE(det.decision);
    REQUIRE(det.bits == key.payload);
    REQUIRE(psnr(img, r.image) > 40.0);
}

TEST_CASE("gamma = 0 leaves the image untouched and extraction at chance",
          "[watermark][ss]") {
    Image img = wmbt::corpus_image(5);
    SpreadSpectrumKey key;
    key.seed = 99;
    key.payload = random_payload(64, 19);
    key.gamma = 0.0;
    EmbedResult r = embed_ss(img, key);
    REQUIRE(wmbt::bit_identical(r.image, img));
    DetectionResult det = extract_ss(r.image, key);
    REQUIRE(det.bit_accuracy > 0.2);
    REQUIRE(det.bit_accuracy < 0.8);
}

TEST_CASE("default band holds 22 slots per block", "[watermark][ss]") {
    SpreadSpectrumKey key;
    REQUIRE(ss_band_slots(key) == 22);
    key.band_lo = 1;
    key.band_hi = 14;
    REQUIRE(ss_band_slots(key) == 63);  // everything but DC
}

TEST_CASE("wrong-seed extraction sits at chance level", "[watermark][ss]") {
    Image img = wmbt::corpus_image(6);
    SpreadSpectrumKey key;
    key.seed = 1234;
    key.payload = random_payload(64, 20);
    Image marked = embed_ss(img, key).image;

    // 64-bit payloads put ~89.6% of wrong-key accuracies inside [0.4, 0.6]
    // (binomial n=64, p=1/2); the mean converges to 1/2 much faster. Both
    // bands below are > 4 sigma wide for the pinned seeds.
    const int keys = 200;
    int inside_wide = 0, inside_narrow = 0;
    double acc_sum = 0.0;
    for (int k = 0; k < keys; ++k) {
        SpreadSpectrumKey wrong = key;
        wrong.seed = derive_seed(5150, k);
        double acc = extract_ss(marked, wrong).bit_accuracy;
        acc_sum += acc;
        if (acc >= 0.25 && acc <= 0.75) ++inside_wide;
        if (acc >= 0.40 && acc <= 0.60) ++inside_narrow;
    }
    REQUIRE(inside_wide >= 199);
    REQUIRE(inside_narrow >= 160);
    REQUIRE(acc_sum / keys == Approx(0.5).margin(0.02));
}

TEST_CASE("keyed orthogonality over 100 pairs", "[watermark][ss]") {
    Image img = wmbt::corpus_image(5);
    double acc_sum = 0.0;
    const int pairs = 100;
    for (int k = 0; k < pairs; ++k) {
        SpreadSpectrumKey k1, k2;
        k1.seed = derive_seed(1000, 2 * k);
        k2.seed = derive_seed(1000, 2 * k + 1);
        k1.payload = random_payload(64, derive_seed(2000, 2 * k));
        k2.payload = random_payload(64, derive_seed(2000, 2 * k + 1));
        Image marked = embed_ss(img, k1).image;
        acc_sum += extract_ss(marked, k2).bit_accuracy;
    }
    double mean_acc = acc_sum / pairs;
    REQUIRE(mean_acc >= 0.45);
    REQUIRE(mean_acc <= 0.55);
}

TEST_CASE("strength monotonicity under fixed noise", "[watermark][ss][slow]") {
    // Accuracy after sigma = 0.05 noise must be non-decreasing in gamma over
    // {0.5, 1, 2, 4}, averaged over 24 images (pinned seeds).
    CorpusParams cp;
    cp.count = 24;
    cp.seed = 77;
    auto corpus = make_corpus(cp);
    const double gammas[] = {0.5, 1.0, 2.0, 4.0};
    double acc[4] = {0, 0, 0, 0};
    for (int i = 0; i < static_cast<int>(corpus.size()); ++i) {
        SpreadSpectrumKey key;
        key.seed = derive_seed(123, i);
        key.payload = random_payload(64, derive_seed(key.seed, 5));
        for (int g = 0; g < 4; ++g) {
            key.gamma = gammas[g];
            Image marked = embed_ss(corpus[i], key).image;
            Image noisy = add_pixel_noise(marked, {0.05, derive_seed(55, i)});
            acc[g] += extract_ss(noisy, key).bit_accuracy;
        }
    }
    for (auto& a : acc) a /= static_cast<double>(corpus.size());
    REQUIRE(acc[1] >= acc[0]);
    REQUIRE(acc[2] >= acc[1]);
    REQUIRE(acc[3] >= acc[2]);
    REQUIRE(acc[3] > 0.9);   // strong embedding survives
    REQUIRE(acc[0] < 0.75);  // weak embedding visibly suffers
}

TEST_CASE("jpeg-75 robustness at the default strength", "[watermark][ss]") {
    Image img = wmbt::corpus_image(7);
    SpreadSpectrumKey key;
    key.seed = 4242;
    key.payload = random_payload(64, 21);
    Image marked = embed_ss(img, key).image;
    Image compressed = jpeg_cycle(marked, {75});
    REQUIRE(extract_ss(compressed, key).bit_accuracy >= 0.95);
}

TEST_CASE("capacity errors name required and available chips",
          "[watermark][ss]") {
    Image small(32, 32, 1, 0.5);  // 16 blocks * 22 slots = 352 < 64*16 = 1024
    SpreadSpectrumKey key;
    key.seed = 1;
    key.payload = random_payload(64, 22);
    try {
        embed_ss(small, key);
        FAIL("embed_ss must refuse an over-capacity payload");
    } catch (const Error& e) {
        REQUIRE(e.category() == ErrorCategory::Capacity);
        std::string msg = e.what();
        REQUIRE(msg.find("1024") != std::string::npos);
        REQUIRE(msg.find("352") != std::string::npos);
    }
    REQUIRE_THROWS_AS(extract_ss(small, key), Error);
}

TEST_CASE("embedding preserves geometry and reports clamping",
          "[watermark][ss]") {
    Image img = wmbt::corpus_image(8, 96, 64);
    SpreadSpectrumKey key;
    key.seed = 7;
    key.payload = random_payload(16, 23);
    EmbedResult r = embed_ss(img, key);
    REQUIRE(r.image.same_geometry(img));
    REQUIRE(r.clamped_fraction >= 0.0);
    REQUIRE(r.clamped_fraction < 0.05);
}

// --- residual energy diagnostic ----------------------------------------------

TEST_CASE("residual energy orders clean < attacked < embedded",
          "[watermark][residual]") {
    Image img = wmbt::corpus_image(9);
    auto payload = random_payload(64, 24);
    AdditivePattern wm = make_additive_pattern(128, 128, 10, payload, 0.02);
    Image marked = embed_additive(img, wm).image;
    BlurParams blur;
    blur.sigma = 15.0;
    blur.kernel_size = 71;
    Image attacked = gaussian_blur(marked, blur);

    double e_clean = residual_watermark_energy(img, wm, &img);
    double e_marked = residual_watermark_energy(marked, wm, &img);
    double e_attacked = residual_watermark_energy(attacked, wm, &img);
    REQUIRE(e_clean < 1e-2);
    REQUIRE(e_marked == Approx(1.0).margin(1e-6));
    REQUIRE(e_attacked < e_marked);

    SpreadSpectrumKey key;
    key.seed = 4711;
    key.payload = random_payload(64, 25);
    Image ss_marked = embed_ss(img, key).image;
    REQUIRE(residual_watermark_energy(img, key) < 1e-2);
    REQUIRE(residual_watermark_energy(ss_marked, key) >
            residual_watermark_energy(img, key));
}

// --- flat-spectrum plane -------------------------------------------------------

TEST_CASE("flat_spectrum_plane has |F| = sqrt(MN) at every bin",
          "[watermark][spectral]") {
    const int w = 32, h = 24;
    auto plane = flat_spectrum_plane(w, h, 99);
    REQUIRE(wmbt::rms(plane) == Approx(1.0).margin(1e-9));
    auto field = dft2(plane, w, h);
    const double target = std::sqrt(static_cast<double>(w) * h);
    for (auto& c : field.coeffs)
        REQUIRE(std::abs(c) == Approx(target).margin(1e-6));
}

// --- key persistence ----------------------------------------------------------

TEST_CASE("key records round-trip through text", "[watermark][key]") {
    SpreadSpectrumKey ss;
    ss.seed = 0xdeadbeef;
    ss.payload = random_payload(64, 26);
    ss.gamma = 3.5;
    WatermarkKey k1 = ss;
    WatermarkKey back = parse_key(serialize_key(k1));
    REQUIRE(std::holds_alternative<SpreadSpectrumKey>(back));
    const auto& ss2 = std::get<SpreadSpectrumKey>(back);
    REQUIRE(ss2.seed == ss.seed);
    REQUIRE(ss2.payload == ss.payload);
    REQUIRE(ss2.gamma == ss.gamma);
    REQUIRE(ss2.band_lo == ss.band_lo);
    REQUIRE(ss2.band_hi == ss.band_hi);
    REQUIRE(ss2.chips_per_bit == ss.chips_per_bit);

    AdditiveKeySpec add;
    add.width = 128;
    add.height = 96;
    add.seed = 17;
    add.alpha = 0.03;
    add.payload = random_payload(32, 27);
    WatermarkKey k2 = add;
    WatermarkKey back2 = parse_key(serialize_key(k2));
    REQUIRE(std::holds_alternative<AdditiveKeySpec>(back2));
    const auto& add2 = std::get<AdditiveKeySpec>(back2);
    REQUIRE(add2.width == add.width);
    REQUIRE(add2.height == add.height);
    REQUIRE(add2.seed == add.seed);
    REQUIRE(add2.alpha == add.alpha);
    REQUIRE(add2.payload == add.payload);
}

TEST_CASE("key files round-trip and bad records are rejected",
          "[watermark][key]") {
    wmbt::TempDir tmp;
    SpreadSpectrumKey ss;
    ss.seed = 5;
    ss.payload = random_payload(64, 28);
    save_key(ss, tmp.file("k.wmkey"));
    WatermarkKey back = load_key(tmp.file("k.wmkey"));
    REQUIRE(std::get<SpreadSpectrumKey>(back).seed == 5);

    REQUIRE_THROWS_AS(load_key(tmp.file("nope.wmkey")), Error);
    REQUIRE_THROWS_AS(parse_key("type ss\nbogus_field 3\n"), Error);
    REQUIRE_THROWS_AS(parse_key("type warp\n"), Error);
    try {
        parse_key("type ss\nbogus_field 3\n");
    } catch (const Error& e) {
        REQUIRE(e.category() == ErrorCategory::Config);
    }
}
