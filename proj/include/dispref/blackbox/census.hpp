#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "dispref/core/grid.hpp"

namespace dispref {

/// Per-pixel census signatures. Bit k corresponds to the k-th window
/// neighbor in row-major order with the center skipped, and is set when that
/// neighbor is strictly darker than the center. Pixels whose window leaves the
/// image are flagged invalid and carry a zero code.
class CensusGrid {
public:
    CensusGrid(int width, int height, int window);

    int width() const { return width_; }
    int height() const { return height_; }
    int window() const { return window_; }
    int bit_count() const { return window_ * window_ - 1; }

    std::uint64_t code(int x, int y) const { return codes_[index(x, y)]; }
    bool valid(int x, int y) const { return valid_[index(x, y)] != 0; }

    void set(int x, int y, std::uint64_t code, bool valid) {
        codes_[index(x, y)] = code;
        valid_[index(x, y)] = valid ? 1 : 0;
    }

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_;
    int height_;
    int window_;
    std::vector<std::uint64_t> codes_;
    std::vector<std::uint8_t> valid_;
};

/// window must be odd and in [3, 7] (codes are stored in 64 bits).
CensusGrid census_transform(const PixelGrid& image, int window);

inline int hamming_distance(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

}  // namespace dispref
