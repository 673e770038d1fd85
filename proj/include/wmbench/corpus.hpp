#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wmbench/image.hpp"

namespace wmb {

// Synthetic photographic-stand-in corpus: smooth per-channel offsets plus a
// fixed bank of low-frequency cosine modes with per-image random coefficients
// and a faint white-texture floor. The mode bank is a deterministic function
// of (seed, geometry), so any image index can be generated independently and
// the corpus occupies a low-dimensional smooth subspace by construction.
struct CorpusParams {
    int width = 128;
    int height = 128;
    int channels = 3;
    int count = 100;
    uint64_t seed = 2026;
    double texture_sigma = 0.006;
};

Image make_corpus_image(const CorpusParams& params, int index);
std::vector<Image> make_corpus(const CorpusParams& params);

// Busier test image (smooth ramp + strong white texture); exercises codepaths
// that need real high-frequency content, e.g. aggressive JPEG quality levels.
Image make_textured_image(int width, int height, int channels, uint64_t seed,
                          double noise_sigma = 0.08);

// Writes the corpus as PNG files (img_0000.png, ...) into dir; returns paths.
std::vector<std::string> write_corpus(const std::string& dir, const CorpusParams& params);

}  // namespace wmb
