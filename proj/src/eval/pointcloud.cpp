#include "dispref/eval/pointcloud.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "dispref/core/image_io.hpp"

namespace dispref {
namespace {

unsigned char to_byte(double v) { return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

void put_f32(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    out.write(reinterpret_cast<const char*>(&bits), 4);
}

}  // namespace

void CameraModel::validate() const {
    if (!(focal > 0.0) || !(baseline > 0.0)) throw std::domain_error("CameraModel: focal and baseline must be positive");
}

std::vector<ColoredPoint> disparity_to_points(const DisparityMap& d, const PixelGrid& rgb, const CameraModel& cam) {
    cam.validate();
    if (rgb.width() != d.width() || rgb.height() != d.height())
        throw std::domain_error("disparity_to_points: color image and disparity sizes differ");
    if (rgb.channels() != 1 && rgb.channels() != 3)
        throw std::domain_error("disparity_to_points: color image needs 1 or 3 channels");
    std::vector<ColoredPoint> pts;
    for (int v = 0; v < d.height(); ++v)
        for (int u = 0; u < d.width(); ++u) {
            if (!d.valid(u, v) || d.at(u, v) <= kMinExportDisparity) continue;
            const double z = cam.focal * cam.baseline / d.at(u, v);
            const int c1 = rgb.channels() == 3 ? 1 : 0, c2 = rgb.channels() == 3 ? 2 : 0;
            pts.push_back({(u - cam.cx) * z / cam.focal, (v - cam.cy) * z / cam.focal, z, to_byte(rgb.at(u, v, 0)),
                           to_byte(rgb.at(u, v, c1)), to_byte(rgb.at(u, v, c2))});
        }
    return pts;
}

void write_ply(const std::filesystem::path& path, const std::vector<ColoredPoint>& points, PlyFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "ply\nformat " << (format == PlyFormat::ascii ? "ascii" : "binary_little_endian") << " 1.0\n"
        << "element vertex " << points.size() << '\n'
        << "property float x\nproperty float y\nproperty float z\n"
        << "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
    for (const auto& p : points) {
        if (format == PlyFormat::ascii) {
            out << static_cast<float>(p.x) << ' ' << static_cast<float>(p.y) << ' ' << static_cast<float>(p.z) << ' '
                << int(p.r) << ' ' << int(p.g) << ' ' << int(p.b) << '\n';
        } else {
            put_f32(out, p.x);
            put_f32(out, p.y);
            put_f32(out, p.z);
            const unsigned char rgb[3] = {p.r, p.g, p.b};
            out.write(reinterpret_cast<const char*>(rgb), 3);
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::size_t export_pointcloud(const DisparityMap& d, const PixelGrid& rgb, const CameraModel& cam,
                              const std::filesystem::path& path, PlyFormat format) {
    const auto pts = disparity_to_points(d, rgb, cam);
    write_ply(path, pts, format);
    return pts.size();
}

}  // namespace dispref
