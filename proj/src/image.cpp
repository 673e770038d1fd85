#include "wmbench/image.hpp"

#include <algorithm>
#include <cmath>

namespace wmb {

void validate(const Image& img, const std::string& context) {
    if (img.width <= 0 || img.height <= 0)
        fail(ErrorCategory::Geometry,
             context + ": non-positive dimensions " +
                 std::to_string(img.width) + "x" + std::to_string(img.height));
    if (img.channels != 1 && img.channels != 3)
        fail(ErrorCategory::Geometry,
             context + ": unsupported channel count " +
                 std::to_string(img.channels));
    if (img.samples.size() != img.size())
        fail(ErrorCategory::Geometry,
             context + ": sample buffer size " +
                 std::to_string(img.samples.size()) + " != expected " +
                 std::to_string(img.size()));
    for (double v : img.samples)
        if (!std::isfinite(v))
            fail(ErrorCategory::Numeric, context + ": non-finite sample");
}

double clamp01(Image& img) {
    size_t clamped = 0;
    for (double& v : img.samples) {
        if (v < 0.0) {
            v = 0.0;
            ++clamped;
        } else if (v > 1.0) {
            v = 1.0;
            ++clamped;
        }
    }
    return img.samples.empty()
               ? 0.0
               : static_cast<double>(clamped) / static_cast<double>(img.samples.size());
}

std::vector<double> luma_plane(const Image& img) {
    std::vector<double> y(img.plane_size());
    if (img.channels == 1) {
        auto p = img.plane(0);
        std::copy(p.begin(), p.end(), y.begin());
        return y;
    }
    auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
    for (size_t i = 0; i < y.size(); ++i)
        y[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    return y;
}

void set_luma_plane(Image& img, std::span<const double> new_luma) {
    if (new_luma.size() != img.plane_size())
        fail(ErrorCategory::Geometry, "set_luma_plane: plane size mismatch");
    if (img.channels == 1) {
        auto p = img.plane(0);
        std::copy(new_luma.begin(), new_luma.end(), p.begin());
        return;
    }
    // Exact YCbCr round trip: convert, swap Y, convert back. The pair of
    // transforms below is algebraically inverse, so untouched chroma means
    // untouched color differences.
    auto r = img.plane(0), g = img.plane(1), b = img.plane(2);
    for (size_t i = 0; i < img.plane_size(); ++i) {
        const double y0 = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
        const double cb = (b[i] - y0) / 1.772;
        const double cr = (r[i] - y0) / 1.402;
        const double y1 = new_luma[i];
        r[i] = y1 + 1.402 * cr;
        b[i] = y1 + 1.772 * cb;
        g[i] = (y1 - 0.299 * r[i] - 0.114 * b[i]) / 0.587;
    }
}

Image center_crop_resize(const Image& img, int out_w, int out_h) {
    if (out_w <= 0 || out_h <= 0)
        fail(ErrorCategory::Geometry, "center_crop_resize: bad target size");
    // Crop to the target aspect ratio.
    const double want = static_cast<double>(out_w) / out_h;
    const double have = static_cast<double>(img.width) / img.height;
    int cw = img.width, ch = img.height;
    if (have > want)
        cw = std::max(1, static_cast<int>(std::lround(img.height * want)));
    else if (have < want)
        ch = std::max(1, static_cast<int>(std::lround(img.width / want)));
    const int x0 = (img.width - cw) / 2;
    const int y0 = (img.height - ch) / 2;

    Image out(out_w, out_h, img.channels);
    for (int c = 0; c < img.channels; ++c) {
        for (int y = 0; y < out_h; ++y) {
            // Map output pixel centers into the crop rectangle.
            const double sy =
                (out_h == 1) ? (ch - 1) / 2.0
                             : (y + 0.5) * ch / out_h - 0.5;
            const double syc = std::clamp(sy, 0.0, static_cast<double>(ch - 1));
            const int iy = std::min(static_cast<int>(syc), ch - 2 < 0 ? 0 : ch - 2);
            const double fy = (ch == 1) ? 0.0 : syc - iy;
            for (int x = 0; x < out_w; ++x) {
                const double sx =
                    (out_w == 1) ? (cw - 1) / 2.0
                                 : (x + 0.5) * cw / out_w - 0.5;
                const double sxc =
                    std::clamp(sx, 0.0, static_cast<double>(cw - 1));
                const int ix =
                    std::min(static_cast<int>(sxc), cw - 2 < 0 ? 0 : cw - 2);
                const double fx = (cw == 1) ? 0.0 : sxc - ix;
                const double v00 = img.at(c, y0 + iy, x0 + ix);
                const double v01 =
                    img.at(c, y0 + iy, x0 + std::min(ix + 1, cw - 1));
                const double v10 =
                    img.at(c, y0 + std::min(iy + 1, ch - 1), x0 + ix);
                const double v11 = img.at(c, y0 + std::min(iy + 1, ch - 1),
                                          x0 + std::min(ix + 1, cw - 1));
                out.at(c, y, x) = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                                  fy * ((1 - fx) * v10 + fx * v11);
            }
        }
    }
    return out;
}

}  // namespace wmb
