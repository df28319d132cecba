#include "dispref/blackbox/census.hpp"

#include <stdexcept>

namespace dispref {

CensusGrid::CensusGrid(int width, int height, int window)
    : width_(width), height_(height), window_(window),
      codes_(static_cast<std::size_t>(width) * height, 0),
      valid_(static_cast<std::size_t>(width) * height, 0) {}

CensusGrid census_transform(const PixelGrid& image, int window) {
    if (image.channels() != 1) throw std::domain_error("census_transform: grayscale image required");
    if (window < 3 || window % 2 == 0) throw std::domain_error("census_transform: window must be odd and >= 3");
    if (window > 7) throw std::domain_error("census_transform: window larger than 7 does not fit 64-bit codes");

    const int r = window / 2;
    CensusGrid out(image.width(), image.height(), window);
    for (int y = r; y < image.height() - r; ++y) {
        for (int x = r; x < image.width() - r; ++x) {
            const double center = image.at(x, y);
            std::uint64_t code = 0;
            int bit = 0;
            for (int dy = -r; dy <= r; ++dy) {
                for (int dx = -r; dx <= r; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    if (image.at(x + dx, y + dy) < center) code |= std::uint64_t{1} << bit;
                    ++bit;
                }
            }
            out.set(x, y, code, true);
        }
    }
    return out;
}

}  // namespace dispref
