#pragma once

#include <filesystem>
#include <stdexcept>

#include "dispref/core/grid.hpp"

namespace dispref {

/// Raised for unreadable, unwritable or malformed files.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Intensity images are held in [0, 1]; readers divide by the format's maxval
// and writers clamp and rescale.

/// Binary PGM (P5), 8 or 16 bit.
PixelGrid read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const PixelGrid& image, int bit_depth = 8);

/// 8-bit PNG, grayscale or RGB. Alpha is dropped on read.
PixelGrid read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const PixelGrid& image);

/// Dispatches on extension (.pgm, .png, .pfm).
PixelGrid read_image(const std::filesystem::path& path);

// PFM follows the Middlebury convention: scale < 0 means little-endian data,
// rows are stored bottom to top. Values are raw floats (no normalization).
PixelGrid read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const PixelGrid& grid, bool little_endian = true);

/// Non-finite or negative entries become kInvalidDisparity.
DisparityMap read_disparity_pfm(const std::filesystem::path& path);
/// Invalid pixels are written as +inf.
void write_disparity_pfm(const std::filesystem::path& path, const DisparityMap& map);

}  // namespace dispref
