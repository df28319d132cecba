#include "dispref/core/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace dispref {
namespace {

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {}
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    if (tok.empty()) throw IoError("truncated header");
    return tok;
}

int header_int(std::istream& in) {
    const std::string tok = header_token(in);
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw IoError("malformed header field '" + tok + "'");
    }
}

std::uint8_t to_byte(double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

PixelGrid read_pgm(const std::filesystem::path& path) {
    auto in = open_in(path);
    if (header_token(in) != "P5") throw IoError(path.string() + ": not a binary PGM");
    const int w = header_int(in);
    const int h = header_int(in);
    const int maxval = header_int(in);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw IoError(path.string() + ": bad PGM header");
    const std::size_t n = static_cast<std::size_t>(w) * h;
    const int bytes = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> raw(n * bytes);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
        throw IoError(path.string() + ": truncated PGM data");
    PixelGrid out(w, h, 1);
    auto data = out.data();
    for (std::size_t i = 0; i < n; ++i) {
        const int v = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
        data[i] = static_cast<double>(v) / maxval;
    }
    return out;
}

void write_pgm(const std::filesystem::path& path, const PixelGrid& image, int bit_depth) {
    if (image.channels() != 1) throw std::domain_error("write_pgm: single-channel image required");
    if (bit_depth != 8 && bit_depth != 16) throw std::domain_error("write_pgm: bit depth must be 8 or 16");
    const int maxval = bit_depth == 8 ? 255 : 65535;
    auto out = open_out(path);
    out << "P5\n" << image.width() << ' ' << image.height() << '\n' << maxval << '\n';
    std::vector<unsigned char> raw;
    raw.reserve(image.size() * (bit_depth / 8));
    for (double v : image.data()) {
        const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
        if (bit_depth == 16) raw.push_back(static_cast<unsigned char>(q >> 8));
        raw.push_back(static_cast<unsigned char>(q & 0xff));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

PixelGrid read_png(const std::filesystem::path& path) {
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.string().c_str()))
        throw IoError(path.string() + ": " + img.message);
    const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
    img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    const int channels = color ? 3 : 1;
    std::vector<png_byte> buf(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw IoError(path.string() + ": " + msg);
    }
    PixelGrid out(static_cast<int>(img.width), static_cast<int>(img.height), channels);
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = buf[i] / 255.0;
    return out;
}

void write_png(const std::filesystem::path& path, const PixelGrid& image) {
    if (image.channels() != 1 && image.channels() != 3)
        throw std::domain_error("write_png: 1 or 3 channels required");
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(image.width());
    img.height = static_cast<png_uint_32>(image.height());
    img.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    std::vector<png_byte> buf(image.size());
    std::transform(image.data().begin(), image.data().end(), buf.begin(), to_byte);
    if (!png_image_write_to_file(&img, path.string().c_str(), 0, buf.data(), 0, nullptr))
        throw IoError(path.string() + ": " + img.message);
}

PixelGrid read_image(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") return read_pgm(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".pfm") return read_pfm(path);
    throw IoError(path.string() + ": unsupported image extension '" + ext + "'");
}

PixelGrid read_pfm(const std::filesystem::path& path) {
    auto in = open_in(path);
    const std::string magic = header_token(in);
    int channels;
    if (magic == "Pf") channels = 1;
    else if (magic == "PF") channels = 3;
    else throw IoError(path.string() + ": not a PFM file");
    const int w = header_int(in);
    const int h = header_int(in);
    double scale;
    try {
        scale = std::stod(header_token(in));
    } catch (const std::exception&) {
        throw IoError(path.string() + ": malformed PFM scale");
    }
    if (w <= 0 || h <= 0 || scale == 0.0) throw IoError(path.string() + ": bad PFM header");
    const bool file_le = scale < 0.0;
    const bool swap = file_le != (std::endian::native == std::endian::little);

    const std::size_t row_len = static_cast<std::size_t>(w) * channels;
    std::vector<std::uint32_t> raw(row_len * h);
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4)))
        throw IoError(path.string() + ": truncated PFM data");
    PixelGrid out(w, h, channels);
    auto data = out.data();
    for (int row = 0; row < h; ++row) {
        const int y = h - 1 - row;
        for (std::size_t k = 0; k < row_len; ++k) {
            std::uint32_t bits = raw[row * row_len + k];
            if (swap) bits = __builtin_bswap32(bits);
            data[static_cast<std::size_t>(y) * row_len + k] = std::bit_cast<float>(bits);
        }
    }
    return out;
}

void write_pfm(const std::filesystem::path& path, const PixelGrid& grid, bool little_endian) {
    if (grid.channels() != 1 && grid.channels() != 3)
        throw std::domain_error("write_pfm: 1 or 3 channels required");
    auto out = open_out(path);
    out << (grid.channels() == 1 ? "Pf" : "PF") << '\n'
        << grid.width() << ' ' << grid.height() << '\n'
        << (little_endian ? "-1.0" : "1.0") << '\n';
    const bool swap = little_endian != (std::endian::native == std::endian::little);
    const std::size_t row_len = static_cast<std::size_t>(grid.width()) * grid.channels();
    std::vector<std::uint32_t> raw(grid.size());
    auto data = grid.data();
    for (int row = 0; row < grid.height(); ++row) {
        const int y = grid.height() - 1 - row;
        for (std::size_t k = 0; k < row_len; ++k) {
            std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(data[y * row_len + k]));
            raw[row * row_len + k] = swap ? __builtin_bswap32(bits) : bits;
        }
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
    if (!out) throw IoError("write failed: " + path.string());
}

DisparityMap read_disparity_pfm(const std::filesystem::path& path) {
    PixelGrid grid = read_pfm(path);
    if (grid.channels() != 1) throw IoError(path.string() + ": disparity PFM must be single channel");
    for (double& v : grid.data())
        if (!std::isfinite(v) || v < 0.0) v = kInvalidDisparity;
    return DisparityMap(std::move(grid));
}

void write_disparity_pfm(const std::filesystem::path& path, const DisparityMap& map) {
    PixelGrid grid = map.grid();
    for (double& v : grid.data())
        if (v < 0.0) v = std::numeric_limits<double>::infinity();
    write_pfm(path, grid);
}

}  // namespace dispref
