#pragma once

// PNG (via libpng) and binary PGM/PPM (P5/P6) loading and saving, 8 bits per channel.

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "pothole/error.hpp"
#include "pothole/raster.hpp"

namespace pothole::io {

namespace detail {

inline std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class PnmHeaderReader {
public:
    explicit PnmHeaderReader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

    int next_int() {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
            throw IoError("malformed PNM header");
        }
        long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_++] - '0');
            if (value > 1'000'000) throw IoError("PNM header value too large");
        }
        return static_cast<int>(value);
    }

    /// Offset of the raster after the single whitespace byte ending the header.
    std::size_t raster_offset() const { return pos_ + 1; }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<unsigned char>& bytes_;
    std::size_t pos_ = 2;
};

inline RgbImage read_pnm(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw IoError(path.string() + ": not a binary PGM/PPM (P5/P6) file");
    }
    const bool color = bytes[1] == '6';
    PnmHeaderReader header(bytes);
    const int width = header.next_int();
    const int height = header.next_int();
    const int maxval = header.next_int();
    if (maxval < 1 || maxval > 255) {
        throw IoError(path.string() + ": only 8-bit PNM files are supported");
    }
    const std::size_t channels = color ? 3 : 1;
    const std::size_t offset = header.raster_offset();
    const std::size_t need = static_cast<std::size_t>(width) * height * channels;
    if (width < 1 || height < 1 || bytes.size() < offset + need) {
        throw IoError(path.string() + ": truncated PNM raster");
    }
    RgbImage img(width, height);
    auto px = img.values();
    const auto scale = [maxval](unsigned char v) {
        return static_cast<std::uint8_t>(maxval == 255 ? v : std::lround(v * 255.0 / maxval));
    };
    for (std::size_t i = 0; i < px.size(); ++i) {
        const unsigned char* src = bytes.data() + offset + i * channels;
        px[i] = color ? Rgb{scale(src[0]), scale(src[1]), scale(src[2])}
                      : Rgb{scale(src[0]), scale(src[0]), scale(src[0])};
    }
    return img;
}

inline RgbImage read_png(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw IoError(path.string() + ": " + image.message);
    }
    image.format = PNG_FORMAT_RGB;
    std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw IoError(path.string() + ": " + msg);
    }
    RgbImage img(static_cast<int>(image.width), static_cast<int>(image.height));
    auto px = img.values();
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] = Rgb{buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]};
    }
    return img;
}

inline void write_png_buffer(const std::filesystem::path& path, int width, int height,
                             bool color, const std::vector<unsigned char>& buffer) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
        throw IoError(path.string() + ": " + image.message);
    }
}

inline void write_pnm_buffer(const std::filesystem::path& path, int width, int height,
                             bool color, const std::vector<unsigned char>& buffer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << (color ? "P6\n" : "P5\n") << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(buffer.data()),
              static_cast<std::streamsize>(buffer.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline void write_buffer(const std::filesystem::path& path, int width, int height, bool color,
                         const std::vector<unsigned char>& buffer) {
    const auto ext = lower_extension(path);
    if (ext == ".png") {
        write_png_buffer(path, width, height, color, buffer);
    } else if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
        write_pnm_buffer(path, width, height, color, buffer);
    } else {
        throw IoError(path.string() + ": unsupported output format (use .png, .pgm or .ppm)");
    }
}

}  // namespace detail

/// Loads PNG or P5/P6 PNM into an 8-bit RGB raster. Format is sniffed from
/// the file signature, not the extension.
[[nodiscard]] inline RgbImage read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    unsigned char magic[8] = {};
    in.read(reinterpret_cast<char*>(magic), sizeof magic);
    in.close();
    static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (std::memcmp(magic, kPngSig, 8) == 0) return detail::read_png(path);
    if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) return detail::read_pnm(path);
    throw IoError(path.string() + ": unrecognized image format (expected PNG, PGM or PPM)");
}

inline void write_image(const std::filesystem::path& path, const RgbImage& img) {
    std::vector<unsigned char> buffer;
    buffer.reserve(img.size() * 3);
    for (Rgb p : img.values()) {
        buffer.push_back(p.r);
        buffer.push_back(p.g);
        buffer.push_back(p.b);
    }
    // A .pgm target gets the luminance of the color image.
    if (detail::lower_extension(path) == ".pgm") {
        std::vector<unsigned char> gray;
        gray.reserve(img.size());
        for (Rgb p : img.values()) gray.push_back(static_cast<unsigned char>(std::lround(luminance(p) * 255.0)));
        detail::write_buffer(path, img.width(), img.height(), false, gray);
        return;
    }
    detail::write_buffer(path, img.width(), img.height(), true, buffer);
}

inline void write_image(const std::filesystem::path& path, const GrayImage& img) {
    std::vector<unsigned char> buffer;
    buffer.reserve(img.size());
    for (double v : img.values()) buffer.push_back(static_cast<unsigned char>(std::lround(v * 255.0)));
    detail::write_buffer(path, img.width(), img.height(), false, buffer);
}

/// Foreground is written as 255, background as 0.
inline void write_image(const std::filesystem::path& path, const BinaryImage& img) {
    std::vector<unsigned char> buffer;
    buffer.reserve(img.size());
    for (auto b : img.values()) buffer.push_back(b ? 255 : 0);
    detail::write_buffer(path, img.width(), img.height(), false, buffer);
}

}  // namespace pothole::io
