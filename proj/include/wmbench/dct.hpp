#pragma once

#include <array>
#include <span>
#include <vector>

#include "wmbench/errors.hpp"

namespace wmb {

// Orthonormal 2-D DCT-II on 8x8 blocks:
//   C[u,v] = a(u)a(v)/4 * sum_{x,y} p[x,y] cos((2x+1)u*pi/16) cos((2y+1)v*pi/16),
// a(0)=1/sqrt(2), a(u>0)=1. Forward and inverse are exact transposes, so the
// transform preserves energy per block.
void dct8x8_forward(const std::array<double, 64>& block,
                    std::array<double, 64>& out);
void dct8x8_inverse(const std::array<double, 64>& block,
                    std::array<double, 64>& out);

// Plane tiled into 8x8 blocks after mirror-padding the right/bottom edges to
// multiples of 8. Blocks are stored in raster order of their top-left corner.
struct BlockPlane {
    int width = 0;         // original plane width
    int height = 0;        // original plane height
    int blocks_x = 0;      // ceil(width / 8)
    int blocks_y = 0;      // ceil(height / 8)
    std::vector<std::array<double, 64>> blocks;

    std::array<double, 64>& block(int bx, int by) {
        return blocks[static_cast<size_t>(by) * blocks_x + bx];
    }
    const std::array<double, 64>& block(int bx, int by) const {
        return blocks[static_cast<size_t>(by) * blocks_x + bx];
    }
};

BlockPlane split_blocks(std::span<const double> plane, int width, int height);
std::vector<double> merge_blocks(const BlockPlane& bp);

// True when the (bx, by) block lies entirely inside the unpadded plane.
inline bool block_is_full(const BlockPlane& bp, int bx, int by) {
    return (bx + 1) * 8 <= bp.width && (by + 1) * 8 <= bp.height;
}

}  // namespace wmb
