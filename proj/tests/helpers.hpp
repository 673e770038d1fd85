#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "wmbench/corpus.hpp"
#include "wmbench/image.hpp"

namespace wmbt {

inline double max_abs_diff(const wmb::Image& a, const wmb::Image& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.samples.size(); ++i)
        m = std::max(m, std::abs(a.samples[i] - b.samples[i]));
    return m;
}

inline bool bit_identical(const wmb::Image& a, const wmb::Image& b) {
    return a.same_geometry(b) && a.samples == b.samples;
}

inline double rms(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Deterministic in-memory test image: the shared synthetic corpus generator.
inline wmb::Image corpus_image(int index, int w = 128, int h = 128,
                               uint64_t seed = 2026, int channels = 3) {
    wmb::CorpusParams p;
    p.width = w;
    p.height = h;
    p.channels = channels;
    p.seed = seed;
    return wmb::make_corpus_image(p, index);
}

// Unique scratch directory, removed by the destructor.
struct TempDir {
    std::filesystem::path path;

    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        std::random_device rd;
        for (int attempt = 0; attempt < 64; ++attempt) {
            auto candidate =
                base / ("wmbench_test_" + std::to_string(rd()) + "_" +
                        std::to_string(attempt));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path = candidate;
                return;
            }
        }
        throw std::runtime_error("could not create temp dir");
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const {
        return (path / name).string();
    }
};

}  // namespace wmbt
