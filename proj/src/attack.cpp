#include "wmbench/attack.hpp"

#include "wmbench/rng.hpp"

namespace wmb {

std::string stage_kind(const Stage& s) {
    struct Visitor {
        std::string operator()(const NoiseStage&) const { return "noise"; }
        std::string operator()(const BlurStage&) const { return "blur"; }
        std::string operator()(const JpegStage&) const { return "jpeg"; }
        std::string operator()(const LatentStage&) const { return "latent"; }
        std::string operator()(const TikhonovStage&) const { return "tikhonov"; }
        std::string operator()(const TvStage&) const { return "tv"; }
        std::string operator()(const WienerStage&) const { return "wiener"; }
    };
    return std::visit(Visitor{}, s);
}

Image run_stage(const Image& img, const Stage& stage, uint64_t stage_seed,
                const LatentCodec* codec) {
    struct Visitor {
        const Image& img;
        uint64_t seed;
        const LatentCodec* codec;

        Image operator()(const NoiseStage& s) const {
            return add_pixel_noise(img, NoiseParams{s.sigma, seed});
        }
        Image operator()(const BlurStage& s) const {
            return gaussian_blur(img, s.p);
        }
        Image operator()(const JpegStage& s) const {
            return jpeg_cycle(img, JpegParams{s.quality});
        }
        Image operator()(const LatentStage& s) const {
            if (!codec)
                fail(ErrorCategory::Config,
                     "latent stage requires a fitted latent codec");
            if (codec->d != s.d)
                fail(ErrorCategory::Config,
                     "latent stage wants d=" + std::to_string(s.d) +
                         " but the supplied codec has d=" +
                         std::to_string(codec->d));
            return add_latent_noise(img, *codec, NoiseParams{s.sigma, seed});
        }
        Image operator()(const TikhonovStage& s) const {
            RestorationParams p;
            p.beta = s.beta;
            return restore_tikhonov(img, p);
        }
        Image operator()(const TvStage& s) const {
            RestorationParams p;
            p.beta = s.beta;
            p.max_iters = s.max_iters;
            p.tol = s.tol;
            return restore_tv(img, p).image;
        }
        Image operator()(const WienerStage& s) const {
            RestorationParams p;
            p.wiener_nsr = s.nsr;
            return wiener_deconvolve(img, s.blur, p);
        }
    };
    return std::visit(Visitor{img, stage_seed, codec}, stage);
}

Image run_attack(const Image& img, const AttackPipeline& pipe,
                 const LatentCodec* codec) {
    if (pipe.stages.empty())
        fail(ErrorCategory::Config,
             "attack pipeline '" + pipe.name + "' has no stages");
    Image cur = img;
    for (size_t i = 0; i < pipe.stages.size(); ++i) {
        try {
            cur = run_stage(cur, pipe.stages[i], derive_seed(pipe.seed, i), codec);
        } catch (const Error& e) {
            fail(e.category(), "pipeline '" + pipe.name + "' stage " +
                                   std::to_string(i) + " (" +
                                   stage_kind(pipe.stages[i]) + "): " + e.what());
        }
    }
    return cur;
}

std::vector<AttackPipeline> builtin_pipelines() {
    std::vector<AttackPipeline> out;
    {
        AttackPipeline p;
        p.name = "denoise-attack";
        p.stages.push_back(NoiseStage{0.05});
        p.stages.push_back(TvStage{0.1, 500, 1e-5});
        out.push_back(std::move(p));
    }
    {
        AttackPipeline p;
        p.name = "jpeg-ar-attack";
        p.stages.push_back(JpegStage{30});
        p.stages.push_back(TvStage{0.05, 500, 1e-5});
        out.push_back(std::move(p));
    }
    {
        AttackPipeline p;
        p.name = "deblur-attack";
        BlurParams b;
        b.sigma = 15.0;
        b.kernel_size = 71;
        b.mode = BlurMode::Periodic;
        p.stages.push_back(BlurStage{b});
        p.stages.push_back(WienerStage{b, 1e-3});
        out.push_back(std::move(p));
    }
    {
        AttackPipeline p;
        p.name = "latent-attack";
        p.stages.push_back(LatentStage{0.1, 32});
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<AttackPipeline> distortion_pipelines() {
    std::vector<AttackPipeline> out;
    {
        AttackPipeline p;
        p.name = "noise-0.02";
        p.stages.push_back(NoiseStage{0.02});
        out.push_back(std::move(p));
    }
    {
        AttackPipeline p;
        p.name = "blur-1";
        BlurParams b;
        b.sigma = 1.0;
        p.stages.push_back(BlurStage{b});
        out.push_back(std::move(p));
    }
    {
        AttackPipeline p;
        p.name = "jpeg-75";
        p.stages.push_back(JpegStage{75});
        out.push_back(std::move(p));
    }
    return out;
}

AttackPipeline named_pipeline(const std::string& name) {
    if (name == "identity") {
        AttackPipeline p;
        p.name = "identity";
        p.stages.push_back(TvStage{0.0, 1, 1e-5});
        return p;
    }
    for (auto& p : builtin_pipelines())
        if (p.name == name) return p;
    for (auto& p : distortion_pipelines())
        if (p.name == name) return p;
    fail(ErrorCategory::Config, "unknown attack pipeline name '" + name + "'");
}

bool needs_latent_codec(const AttackPipeline& pipe) {
    for (const auto& s : pipe.stages)
        if (std::holds_alternative<LatentStage>(s)) return true;
    return false;
}

}  // namespace wmb
