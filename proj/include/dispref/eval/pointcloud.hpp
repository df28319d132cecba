#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "dispref/core/grid.hpp"

namespace dispref {

/// Pinhole camera of the reference view plus stereo baseline.
struct CameraModel {
    double focal = 1.0;     // px
    double baseline = 1.0;  // m
    double cx = 0.0;        // px
    double cy = 0.0;        // px

    void validate() const;
};

struct ColoredPoint {
    double x, y, z;
    unsigned char r, g, b;
};

/// Disparities at or below this are skipped (would map to infinite depth).
inline constexpr double kMinExportDisparity = 1e-3;

/// z = focal * baseline / d, x = (u - cx) z / focal, y = (v - cy) z / focal.
/// rgb may have 1 or 3 channels in [0, 1] and must match d's size.
std::vector<ColoredPoint> disparity_to_points(const DisparityMap& d, const PixelGrid& rgb, const CameraModel& cam);

enum class PlyFormat { ascii, binary_little_endian };

void write_ply(const std::filesystem::path& path, const std::vector<ColoredPoint>& points, PlyFormat format);

/// Returns the number of vertices written.
std::size_t export_pointcloud(const DisparityMap& d, const PixelGrid& rgb, const CameraModel& cam,
                              const std::filesystem::path& path, PlyFormat format = PlyFormat::binary_little_endian);

}  // namespace dispref
