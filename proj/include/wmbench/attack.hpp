#pragma once

#include <string>
#include <variant>
#include <vector>

#include "wmbench/degrade.hpp"
#include "wmbench/restore.hpp"

namespace wmb {

// One pipeline stage: a degradation or restoration operator with bound
// parameters. Seeds inside stage params are ignored at run time; each stage
// draws its seed from the pipeline seed mixed with the stage index, so adding
// a stage never perturbs the randomness of earlier stages.
struct NoiseStage {
    double sigma = 0.05;
};
struct BlurStage {
    BlurParams p;
};
struct JpegStage {
    int quality = 75;
};
struct LatentStage {
    double sigma = 0.1;
    int d = 32;
};
struct TikhonovStage {
    double beta = 0.1;
};
struct TvStage {
    double beta = 0.1;
    int max_iters = 500;
    double tol = 1e-5;
};
struct WienerStage {
    BlurParams blur;
    double nsr = 1e-3;
};
using Stage = std::variant<NoiseStage, BlurStage, JpegStage, LatentStage,
                           TikhonovStage, TvStage, WienerStage>;

std::string stage_kind(const Stage& s);

struct AttackPipeline {
    std::string name;
    std::vector<Stage> stages;
    uint64_t seed = 0;
};

// Applies the stages in order; deterministic given (image, pipe.seed). Stage
// errors propagate with the stage index attached. Latent stages need a fitted
// codec (the harness fits one on the clean dataset; the CLI loads one from a
// file); running a latent stage with codec == nullptr is a Config error.
Image run_attack(const Image& img, const AttackPipeline& pipe,
                 const LatentCodec* codec = nullptr);

// Single-stage executor underneath run_attack; stage i of a pipeline runs
// with stage_seed = derive_seed(pipe.seed, i), so chaining run_stage calls
// reproduces run_attack bit-identically.
Image run_stage(const Image& img, const Stage& stage, uint64_t stage_seed,
                const LatentCodec* codec = nullptr);

// The named degrade-then-restore analogs, plus the latent-noise attack:
//   denoise-attack = [noise sigma=0.05 -> tv beta=0.1]
//   jpeg-ar-attack = [jpeg quality=30 -> tv beta=0.05]
//   deblur-attack  = [blur sigma=15 k=71 periodic -> wiener K=1e-3]
//   latent-attack  = [latent noise sigma=0.1, d=32]
// The deblur pair runs the blur in periodic mode so the Wiener restorer's
// analytic transfer function matches the degradation exactly.
std::vector<AttackPipeline> builtin_pipelines();

// Single-stage distortion cells of the default robustness grid:
//   noise-0.02, blur-1 (mirror), jpeg-75.
std::vector<AttackPipeline> distortion_pipelines();

// Resolves a reserved pipeline name (builtins, distortions, or "identity", a
// tv beta=0 stage that passes images through bit-identically).
AttackPipeline named_pipeline(const std::string& name);

// True when any stage requires a latent codec.
bool needs_latent_codec(const AttackPipeline& pipe);

}  // namespace wmb
