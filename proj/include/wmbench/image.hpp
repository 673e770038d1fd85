#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wmbench/errors.hpp"

namespace wmb {

// Planar raster of real-valued samples, nominal range [0,1].
// One or three channels; each channel is a row-major width x height plane.
// 8-bit quantization happens only at file boundaries (see image_io).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<double> samples;

    Image() = default;
    Image(int w, int h, int c, double fill = 0.0)
        : width(w), height(h), channels(c),
          samples(static_cast<size_t>(w) * h * c, fill) {}

    size_t plane_size() const { return static_cast<size_t>(width) * height; }
    size_t size() const { return plane_size() * channels; }

    double& at(int c, int y, int x) {
        return samples[plane_size() * c + static_cast<size_t>(y) * width + x];
    }
    double at(int c, int y, int x) const {
        return samples[plane_size() * c + static_cast<size_t>(y) * width + x];
    }

    std::span<double> plane(int c) {
        return {samples.data() + plane_size() * c, plane_size()};
    }
    std::span<const double> plane(int c) const {
        return {samples.data() + plane_size() * c, plane_size()};
    }

    bool same_geometry(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
};

// Throws Error(Geometry/Io) when the container is inconsistent or holds
// non-finite samples.
void validate(const Image& img, const std::string& context);

inline void require_same_geometry(const Image& a, const Image& b,
                                  const std::string& context) {
    if (!a.same_geometry(b))
        fail(ErrorCategory::Geometry,
             context + ": geometry mismatch (" + std::to_string(a.width) + "x" +
                 std::to_string(a.height) + "x" + std::to_string(a.channels) +
                 " vs " + std::to_string(b.width) + "x" +
                 std::to_string(b.height) + "x" + std::to_string(b.channels) +
                 ")");
}

// Clamps every sample into [0,1] in place; returns the fraction of samples
// that moved. Codecs and degradations clamp exactly once, at the end.
double clamp01(Image& img);

// BT.601 luma of a 1- or 3-channel image, as a standalone plane.
std::vector<double> luma_plane(const Image& img);

// Replaces luma, leaving Cb/Cr untouched for 3-channel images. `new_luma`
// must have plane_size() entries. Out-of-gamut values are NOT clamped here.
void set_luma_plane(Image& img, std::span<const double> new_luma);

// Center-crop to the target aspect ratio, then bilinear-resize.
Image center_crop_resize(const Image& img, int out_w, int out_h);

// --- file I/O (PNG, PGM, PPM; 8-bit) ---------------------------------------
// Quantization on write: round(sample*255); dequantization on read: v/255.

Image load_image(const std::string& path);
void save_image(const Image& img, const std::string& path);

}  // namespace wmb
