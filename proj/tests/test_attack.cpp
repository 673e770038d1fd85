#include <catch2/catch.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "wmbench/attack.hpp"
#include "wmbench/errors.hpp"
#include "wmbench/metrics.hpp"
#include "wmbench/rng.hpp"
#include "wmbench/watermark.hpp"

using namespace wmb;

namespace {

LatentCodec test_codec(int d = 32) {
    CorpusParams p;
    p.count = 40;
    p.seed = 2026;
    return fit_latent_codec(make_corpus(p), d);
}

}  // namespace

TEST_CASE("builtin pipelines carry the documented stages", "[attack]") {
    auto pipes = builtin_pipelines();
    REQUIRE(pipes.size() == 4);
    REQUIRE(pipes[0].name == "denoise-attack");
    REQUIRE(pipes[1].name == "jpeg-ar-attack");
    REQUIRE(pipes[2].name == "deblur-attack");
    REQUIRE(pipes[3].name == "latent-attack");

    REQUIRE(pipes[0].stages.size() == 2);
    REQUIRE(stage_kind(pipes[0].stages[0]) == "noise");
    REQUIRE(stage_kind(pipes[0].stages[1]) == "tv");

    REQUIRE(stage_kind(pipes[1].stages[0]) == "jpeg");
    REQUIRE(std::get<JpegStage>(pipes[1].stages[0]).quality == 30);

    const auto& deblur = pipes[2];
    REQUIRE(stage_kind(deblur.stages[0]) == "blur");
    const auto& blur = std::get<BlurStage>(deblur.stages[0]).p;
    REQUIRE(blur.sigma == 15.0);
    REQUIRE(blur.kernel_size == 71);
    REQUIRE(blur.mode == BlurMode::Periodic);
    REQUIRE(stage_kind(deblur.stages[1]) == "wiener");

    REQUIRE(pipes[3].stages.size() == 1);
    REQUIRE(stage_kind(pipes[3].stages[0]) == "latent");
    REQUIRE(needs_latent_codec(pipes[3]));
    REQUIRE_FALSE(needs_latent_codec(pipes[0]));

    auto cells = distortion_pipelines();
    REQUIRE(cells.size() == 3);
    REQUIRE(cells[0].name == "noise-0.02");
    REQUIRE(cells[1].name == "blur-1");
    REQUIRE(cells[2].name == "jpeg-75");
}

TEST_CASE("named_pipeline resolves builtins and rejects unknowns", "[attack]") {
    REQUIRE(named_pipeline("deblur-attack").name == "deblur-attack");
    REQUIRE(named_pipeline("jpeg-75").name == "jpeg-75");
    REQUIRE(named_pipeline("identity").stages.size() == 1);
    REQUIRE_THROWS_AS(named_pipeline("warp-attack"), Error);
    try {
        named_pipeline("warp-attack");
    } catch (const Error& e) {
        REQUIRE(e.category() == ErrorCategory::Config);
        REQUIRE(std::string(e.what()).find("warp-attack") != std::string::npos);
    }
}

TEST_CASE("identity pipeline passes images through bit-identically",
          "[attack]") {
    Image img = wmbt::corpus_image(0);
    Image out = run_attack(img, named_pipeline("identity"));
    REQUIRE(wmbt::bit_identical(out, img));
}

TEST_CASE("run_attack is deterministic in the pipeline seed", "[attack]") {
    Image img = wmbt::corpus_image(1);
    AttackPipeline pipe = named_pipeline("denoise-attack");
    pipe.seed = 99;
    Image a = run_attack(img, pipe);
    Image b = run_attack(img, pipe);
    REQUIRE(wmbt::bit_identical(a, b));
    pipe.seed = 100;
    Image c = run_attack(img, pipe);
    REQUIRE_FALSE(wmbt::bit_identical(a, c));
}

TEST_CASE("chaining run_stage reproduces run_attack exactly", "[attack]") {
    // Stage i draws derive_seed(pipe.seed, i), so stage-by-stage execution is
    // the same computation as the full pipeline run.
    Image img = wmbt::corpus_image(2);
    AttackPipeline pipe;
    pipe.name = "composite";
    pipe.seed = 555;
    pipe.stages = {NoiseStage{0.03}, BlurStage{{1.0, 0, BlurMode::Mirror}},
                   TvStage{0.05, 200, 1e-5}};
    Image whole = run_attack(img, pipe);
    Image step = img;
    for (size_t i = 0; i < pipe.stages.size(); ++i)
        step = run_stage(step, pipe.stages[i], derive_seed(pipe.seed, i));
    REQUIRE(wmbt::bit_identical(step, whole));
}

TEST_CASE("appending a stage never perturbs earlier randomness", "[attack]") {
    Image img = wmbt::corpus_image(3);
    AttackPipeline short_pipe;
    short_pipe.seed = 77;
    short_pipe.stages = {NoiseStage{0.05}};
    AttackPipeline long_pipe = short_pipe;
    long_pipe.stages.push_back(TikhonovStage{0.2});

    Image after_noise = run_attack(img, short_pipe);
    // Running the long pipeline stage-by-stage, the first hop must equal the
    // short pipeline's output.
    Image first_hop =
        run_stage(img, long_pipe.stages[0], derive_seed(long_pipe.seed, 0));
    REQUIRE(wmbt::bit_identical(first_hop, after_noise));
}

TEST_CASE("empty pipelines are rejected", "[attack]") {
    AttackPipeline pipe;
    pipe.name = "empty";
    REQUIRE_THROWS_AS(run_attack(wmbt::corpus_image(4), pipe), Error);
}

TEST_CASE("latent stages demand a codec and matching geometry", "[attack]") {
    Image img = wmbt::corpus_image(5);
    AttackPipeline pipe = named_pipeline("latent-attack");
    try {
        run_attack(img, pipe);
        FAIL("latent stage without a codec must be a config error");
    } catch (const Error& e) {
        REQUIRE(e.category() == ErrorCategory::Config);
        REQUIRE(std::string(e.what()).find("latent") != std::string::npos);
    }
    LatentCodec codec = test_codec();
    REQUIRE_NOTHROW(run_attack(img, pipe, &codec));

    Image wrong = wmbt::corpus_image(0, 64, 64);
    REQUIRE_THROWS_AS(run_attack(wrong, pipe, &codec), Error);
}

TEST_CASE("stage errors carry the pipeline context", "[attack]") {
    AttackPipeline pipe;
    pipe.name = "broken";
    pipe.stages = {JpegStage{0}};
    try {
        run_attack(wmbt::corpus_image(6), pipe);
        FAIL("invalid stage parameters must propagate");
    } catch (const Error& e) {
        std::string msg = e.what();
        REQUIRE(msg.find("broken") != std::string::npos);
        REQUIRE(msg.find("stage") != std::string::npos);
    }
}

TEST_CASE("every builtin keeps clean-image fidelity above 25 dB",
          "[attack][slow]") {
    Image img = wmbt::corpus_image(7);
    LatentCodec codec = test_codec();
    for (const auto& pipe : builtin_pipelines()) {
        AttackPipeline seeded = pipe;
        seeded.seed = 11;
        Image out = run_attack(img, seeded, &codec);
        INFO(pipe.name);
        REQUIRE(psnr(img, out) >= 25.0);
    }
}

TEST_CASE("denoise attack degrades but does not erase the ss mark",
          "[attack][slow]") {
    // A denoiser-style attack must leave a redundant mid-band codec readable:
    // degraded accuracy, but still far from chance.
    const int images = 8;
    double acc = 0.0;
    AttackPipeline pipe = named_pipeline("denoise-attack");
    for (int i = 0; i < images; ++i) {
        Image img = wmbt::corpus_image(i);
        SpreadSpectrumKey key;
        key.seed = derive_seed(31, i);
        key.payload = random_payload(64, derive_seed(32, i));
        Image marked = embed_ss(img, key).image;
        AttackPipeline seeded = pipe;
        seeded.seed = derive_seed(33, i);
        Image attacked = run_attack(marked, seeded);
        acc += extract_ss(attacked, key).bit_accuracy;
    }
    acc /= images;
    REQUIRE(acc > 0.75);   // far above chance
    REQUIRE(acc < 1.0);    // but strictly damaged
}

TEST_CASE("deblur attack dominates plain blur on quality at equal removal",
          "[attack][slow]") {
    // Degrade-then-restore vs. degrade-only: both leave the additive mark
    // undetectable, the restored copy at strictly better fidelity.
    Image clean = wmbt::corpus_image(8);
    auto payload = random_payload(64, 34);
    AdditivePattern wm = make_additive_pattern(128, 128, 35, payload, 0.02);
    Image marked = embed_additive(clean, wm).image;

    AttackPipeline full = named_pipeline("deblur-attack");
    full.seed = 3;
    Image restored = run_attack(marked, full);

    AttackPipeline blur_only = full;
    blur_only.stages.resize(1);
    Image blurred = run_attack(marked, blur_only);

    DetectionResult det_restored = detect_additive(restored, wm);
    DetectionResult det_blurred = detect_additive(blurred, wm);
    REQUIRE_FALSE(det_restored.decision);
    REQUIRE_FALSE(det_blurred.decision);
    REQUIRE(psnr(restored, clean) > psnr(blurred, clean));
}
