#pragma once

// EXIF GPS position reader. Accepts JPEG (APP1 "Exif"), PNG (eXIf chunk) and
// bare TIFF streams, in either byte order.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pothole/error.hpp"
#include "pothole/geodata.hpp"

namespace pothole::exif {

inline constexpr std::uint16_t kTagGpsIfd = 0x8825;
inline constexpr std::uint16_t kTagGpsLatRef = 1;
inline constexpr std::uint16_t kTagGpsLat = 2;
inline constexpr std::uint16_t kTagGpsLonRef = 3;
inline constexpr std::uint16_t kTagGpsLon = 4;

inline constexpr std::uint16_t kTypeAscii = 2;
inline constexpr std::uint16_t kTypeLong = 4;
inline constexpr std::uint16_t kTypeRational = 5;

/// Decimal degrees from degrees/minutes/seconds, negated for S or W.
[[nodiscard]] inline double dms_to_degrees(double deg, double min, double sec, char ref) noexcept {
    const double v = deg + min / 60.0 + sec / 3600.0;
    return (ref == 'S' || ref == 'W') ? -v : v;
}

namespace detail {

class TiffReader {
public:
    explicit TiffReader(std::span<const unsigned char> tiff) : d_(tiff) {
        if (d_.size() < 8) throw NoGeotagError("TIFF header truncated");
        if (d_[0] == 'I' && d_[1] == 'I') {
            little_ = true;
        } else if (d_[0] == 'M' && d_[1] == 'M') {
            little_ = false;
        } else {
            throw NoGeotagError("bad TIFF byte-order mark");
        }
        if (u16(2) != 42) throw NoGeotagError("bad TIFF magic");
    }

    [[nodiscard]] std::uint32_t first_ifd() const { return u32(4); }

    struct Entry {
        std::uint16_t tag;
        std::uint16_t type;
        std::uint32_t count;
        std::uint32_t value_offset;  // offset of the 4-byte value field
    };

    [[nodiscard]] std::optional<Entry> find(std::uint32_t ifd, std::uint16_t tag) const {
        const std::uint16_t n = u16(ifd);
        for (std::uint32_t i = 0; i < n; ++i) {
            const std::uint32_t at = ifd + 2 + 12 * i;
            if (u16(at) == tag) return Entry{tag, u16(at + 2), u32(at + 4), at + 8};
        }
        return std::nullopt;
    }

    [[nodiscard]] std::uint32_t long_value(const Entry& e) const {
        if (e.type == kTypeLong) return u32(e.value_offset);
        if (e.type == 3) return u16(e.value_offset);  // SHORT
        throw NoGeotagError("unexpected IFD pointer type");
    }

    [[nodiscard]] char ascii_char(const Entry& e) const {
        if (e.type != kTypeAscii || e.count < 1) throw NoGeotagError("GPS reference is not ASCII");
        const std::uint32_t at = e.count <= 4 ? e.value_offset : u32(e.value_offset);
        check(at, 1);
        return static_cast<char>(d_[at]);
    }

    [[nodiscard]] double rational(const Entry& e, std::uint32_t index) const {
        if (e.type != kTypeRational || e.count <= index) throw NoGeotagError("GPS coordinate is not RATIONAL[3]");
        const std::uint32_t base = u32(e.value_offset) + 8 * index;
        const std::uint32_t num = u32(base);
        const std::uint32_t den = u32(base + 4);
        if (den == 0) throw NoGeotagError("zero denominator in GPS rational");
        return static_cast<double>(num) / static_cast<double>(den);
    }

private:
    void check(std::uint32_t at, std::uint32_t len) const {
        if (static_cast<std::uint64_t>(at) + len > d_.size()) throw NoGeotagError("EXIF offset out of range");
    }
    [[nodiscard]] std::uint16_t u16(std::uint32_t at) const {
        check(at, 2);
        return little_ ? static_cast<std::uint16_t>(d_[at] | (d_[at + 1] << 8))
                       : static_cast<std::uint16_t>((d_[at] << 8) | d_[at + 1]);
    }
    [[nodiscard]] std::uint32_t u32(std::uint32_t at) const {
        check(at, 4);
        const std::uint32_t b0 = d_[at], b1 = d_[at + 1], b2 = d_[at + 2], b3 = d_[at + 3];
        return little_ ? (b0 | (b1 << 8) | (b2 << 16) | (b3 << 24)) : ((b0 << 24) | (b1 << 16) | (b2 << 8) | b3);
    }

    std::span<const unsigned char> d_;
    bool little_ = true;
};

inline std::uint32_t be32(const unsigned char* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

/// Locates the TIFF-structured EXIF payload inside a JPEG, PNG or TIFF stream.
inline std::span<const unsigned char> find_tiff(std::span<const unsigned char> bytes) {
    static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (bytes.size() >= 4 && ((bytes[0] == 'I' && bytes[1] == 'I') || (bytes[0] == 'M' && bytes[1] == 'M'))) {
        return bytes;
    }
    if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8) {
        std::size_t pos = 2;
        while (pos + 4 <= bytes.size()) {
            if (bytes[pos] != 0xFF) break;
            const unsigned char marker = bytes[pos + 1];
            if (marker == 0xD9 || marker == 0xDA) break;  // EOI / start of scan
            const std::size_t len = (std::size_t{bytes[pos + 2]} << 8) | bytes[pos + 3];
            if (len < 2 || pos + 2 + len > bytes.size()) break;
            if (marker == 0xE1 && len >= 8 && std::memcmp(bytes.data() + pos + 4, "Exif\0\0", 6) == 0) {
                return bytes.subspan(pos + 10, len - 8);
            }
            pos += 2 + len;
        }
        throw NoGeotagError("JPEG has no EXIF segment");
    }
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSig, 8) == 0) {
        std::size_t pos = 8;
        while (pos + 12 <= bytes.size()) {
            const std::uint32_t len = be32(bytes.data() + pos);
            if (pos + 12 + static_cast<std::size_t>(len) > bytes.size()) break;
            if (std::memcmp(bytes.data() + pos + 4, "eXIf", 4) == 0) return bytes.subspan(pos + 8, len);
            if (std::memcmp(bytes.data() + pos + 4, "IEND", 4) == 0) break;
            pos += 12 + len;
        }
        throw NoGeotagError("PNG has no eXIf chunk");
    }
    throw NoGeotagError("unsupported container (expected JPEG, PNG or TIFF)");
}

}  // namespace detail

/// GPS position from an in-memory JPEG/PNG/TIFF file image.
[[nodiscard]] inline GeoPoint parse_exif_gps(std::span<const unsigned char> file_bytes) {
    const detail::TiffReader tiff(detail::find_tiff(file_bytes));
    const auto gps_ptr = tiff.find(tiff.first_ifd(), kTagGpsIfd);
    if (!gps_ptr) throw NoGeotagError("EXIF block has no GPS IFD");
    const std::uint32_t gps = tiff.long_value(*gps_ptr);

    const auto lat_ref = tiff.find(gps, kTagGpsLatRef);
    const auto lat = tiff.find(gps, kTagGpsLat);
    const auto lon_ref = tiff.find(gps, kTagGpsLonRef);
    const auto lon = tiff.find(gps, kTagGpsLon);
    if (!lat_ref || !lat || !lon_ref || !lon) throw NoGeotagError("GPS IFD lacks latitude/longitude tags");

    const char lat_c = tiff.ascii_char(*lat_ref);
    const char lon_c = tiff.ascii_char(*lon_ref);
    if ((lat_c != 'N' && lat_c != 'S') || (lon_c != 'E' && lon_c != 'W')) {
        throw NoGeotagError("invalid GPS hemisphere reference");
    }
    const double lat_deg = dms_to_degrees(tiff.rational(*lat, 0), tiff.rational(*lat, 1), tiff.rational(*lat, 2), lat_c);
    const double lon_deg = dms_to_degrees(tiff.rational(*lon, 0), tiff.rational(*lon, 1), tiff.rational(*lon, 2), lon_c);
    try {
        return GeoPoint(lat_deg, lon_deg);
    } catch (const ValidationError& e) {
        throw NoGeotagError(e.what());
    }
}

[[nodiscard]] inline GeoPoint parse_exif_gps(const std::filesystem::path& image_file) {
    std::ifstream in(image_file, std::ios::binary);
    if (!in) throw IoError("cannot open " + image_file.string());
    const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_exif_gps(std::span<const unsigned char>(bytes));
}

}  // namespace pothole::exif
