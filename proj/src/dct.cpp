#include "wmbench/dct.hpp"

#include <cmath>
#include <numbers>

namespace wmb {
namespace {

// Precomputed orthonormal 1-D DCT-II basis: B[u][x] = a(u)/2 * cos((2x+1)u*pi/16).
struct Basis {
    double b[8][8];
    Basis() {
        for (int u = 0; u < 8; ++u) {
            const double a = (u == 0) ? 1.0 / std::sqrt(2.0) : 1.0;
            for (int x = 0; x < 8; ++x)
                b[u][x] = 0.5 * a *
                          std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
        }
    }
};
const Basis kBasis;

// out = B * in * B^T when forward, B^T * in * B when inverse.
void apply(const std::array<double, 64>& in, std::array<double, 64>& out,
           bool forward) {
    double tmp[8][8];
    // rows: tmp[y][u] = sum_x in[y][x] * B[u][x]  (or B[x][u] for inverse)
    for (int y = 0; y < 8; ++y)
        for (int u = 0; u < 8; ++u) {
            double s = 0.0;
            for (int x = 0; x < 8; ++x)
                s += in[y * 8 + x] * (forward ? kBasis.b[u][x] : kBasis.b[x][u]);
            tmp[y][u] = s;
        }
    // columns
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) {
            double s = 0.0;
            for (int y = 0; y < 8; ++y)
                s += tmp[y][u] * (forward ? kBasis.b[v][y] : kBasis.b[y][v]);
            out[v * 8 + u] = s;
        }
}

}  // namespace

void dct8x8_forward(const std::array<double, 64>& block,
                    std::array<double, 64>& out) {
    apply(block, out, true);
}

void dct8x8_inverse(const std::array<double, 64>& block,
                    std::array<double, 64>& out) {
    apply(block, out, false);
}

BlockPlane split_blocks(std::span<const double> plane, int width, int height) {
    if (width <= 0 || height <= 0 ||
        plane.size() != static_cast<size_t>(width) * height)
        fail(ErrorCategory::Geometry, "split_blocks: plane size mismatch");
    BlockPlane bp;
    bp.width = width;
    bp.height = height;
    bp.blocks_x = (width + 7) / 8;
    bp.blocks_y = (height + 7) / 8;
    bp.blocks.resize(static_cast<size_t>(bp.blocks_x) * bp.blocks_y);
    // Mirror padding: index w + t reflects to w - 1 - t.
    auto sample = [&](int y, int x) {
        if (x >= width) x = 2 * width - 1 - x;
        if (y >= height) y = 2 * height - 1 - y;
        return plane[static_cast<size_t>(y) * width + x];
    };
    for (int by = 0; by < bp.blocks_y; ++by)
        for (int bx = 0; bx < bp.blocks_x; ++bx) {
            auto& blk = bp.block(bx, by);
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    blk[y * 8 + x] = sample(by * 8 + y, bx * 8 + x);
        }
    return bp;
}

std::vector<double> merge_blocks(const BlockPlane& bp) {
    std::vector<double> plane(static_cast<size_t>(bp.width) * bp.height);
    for (int by = 0; by < bp.blocks_y; ++by)
        for (int bx = 0; bx < bp.blocks_x; ++bx) {
            const auto& blk = bp.block(bx, by);
            const int ylim = std::min(8, bp.height - by * 8);
            const int xlim = std::min(8, bp.width - bx * 8);
            for (int y = 0; y < ylim; ++y)
                for (int x = 0; x < xlim; ++x)
                    plane[static_cast<size_t>(by * 8 + y) * bp.width + bx * 8 + x] =
                        blk[y * 8 + x];
        }
    return plane;
}

}  // namespace wmb
