#pragma once

// Geographic points, ward/sector polygons and sector assignment.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pothole/error.hpp"

namespace pothole {

class GeoPoint {
public:
    GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
        if (!(lat >= -90.0 && lat <= 90.0)) throw ValidationError("latitude outside [-90,90]");
        if (!(lon >= -180.0 && lon <= 180.0)) throw ValidationError("longitude outside [-180,180]");
    }
    [[nodiscard]] double lat() const noexcept { return lat_; }
    [[nodiscard]] double lon() const noexcept { return lon_; }
    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
    double lat_;
    double lon_;
};

/// Explicitly closed ring: at least 3 distinct vertices and first == last.
class Polygon {
public:
    explicit Polygon(std::vector<GeoPoint> ring) : ring_(std::move(ring)) {
        if (ring_.size() < 4) throw ValidationError("polygon needs at least 3 vertices plus closure");
        if (!(ring_.front() == ring_.back())) throw ValidationError("polygon ring is not closed");
    }
    [[nodiscard]] const std::vector<GeoPoint>& ring() const noexcept { return ring_; }

    struct Box {
        double min_lat, min_lon, max_lat, max_lon;
    };
    [[nodiscard]] Box bounds() const noexcept {
        Box b{ring_[0].lat(), ring_[0].lon(), ring_[0].lat(), ring_[0].lon()};
        for (const auto& p : ring_) {
            b.min_lat = std::min(b.min_lat, p.lat());
            b.max_lat = std::max(b.max_lat, p.lat());
            b.min_lon = std::min(b.min_lon, p.lon());
            b.max_lon = std::max(b.max_lon, p.lon());
        }
        return b;
    }

private:
    std::vector<GeoPoint> ring_;
};

struct Sector {
    std::string name;
    Polygon polygon;
};

class SectorMap {
public:
    SectorMap(std::string ward_name, Polygon ward_boundary, std::vector<Sector> sectors)
        : ward_name_(std::move(ward_name)), ward_(std::move(ward_boundary)), sectors_(std::move(sectors)) {
        const auto wb = ward_.bounds();
        for (const auto& s : sectors_) {
            const auto sb = s.polygon.bounds();
            if (sb.min_lat < wb.min_lat || sb.max_lat > wb.max_lat || sb.min_lon < wb.min_lon ||
                sb.max_lon > wb.max_lon) {
                throw ValidationError("sector '" + s.name + "' extends outside the ward bounding box");
            }
        }
    }

    [[nodiscard]] const std::string& ward_name() const noexcept { return ward_name_; }
    [[nodiscard]] const Polygon& ward_boundary() const noexcept { return ward_; }
    [[nodiscard]] const std::vector<Sector>& sectors() const noexcept { return sectors_; }

private:
    std::string ward_name_;
    Polygon ward_;
    std::vector<Sector> sectors_;
};

namespace geo_detail {

inline bool on_segment(double px, double py, double ax, double ay, double bx, double by) noexcept {
    constexpr double kEps = 1e-12;
    const double cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
    const double scale = std::max({1.0, std::abs(bx - ax), std::abs(by - ay)});
    if (std::abs(cross) > kEps * scale * scale) return false;
    return px >= std::min(ax, bx) - kEps && px <= std::max(ax, bx) + kEps &&
           py >= std::min(ay, by) - kEps && py <= std::max(ay, by) + kEps;
}

}  // namespace geo_detail

/// Even-odd ray casting in the (lon, lat) plane. Points on an edge or vertex
/// are inside.
[[nodiscard]] inline bool point_in_polygon(const GeoPoint& pt, const Polygon& poly) noexcept {
    const double px = pt.lon();
    const double py = pt.lat();
    const auto& ring = poly.ring();
    bool inside = false;
    for (std::size_t i = 0, j = ring.size() - 2; i + 1 < ring.size(); j = i++) {
        const double ax = ring[i].lon(), ay = ring[i].lat();
        const double bx = ring[j].lon(), by = ring[j].lat();
        if (geo_detail::on_segment(px, py, ax, ay, bx, by)) return true;
        if ((ay > py) != (by > py)) {
            const double x_cross = ax + (py - ay) * (bx - ax) / (by - ay);
            if (px < x_cross) inside = !inside;
        }
    }
    return inside;
}

/// First sector, in declaration order, containing the point.
[[nodiscard]] inline std::optional<std::string> assign_sector(const GeoPoint& pt, const SectorMap& map) {
    for (const auto& s : map.sectors()) {
        if (point_in_polygon(pt, s.polygon)) return s.name;
    }
    return std::nullopt;
}

namespace geo_detail {

inline Polygon polygon_from_geojson(const nlohmann::json& geometry, const std::string& what) {
    if (!geometry.is_object() || geometry.value("type", "") != "Polygon") {
        throw ValidationError(what + ": geometry must be a GeoJSON Polygon");
    }
    const auto& rings = geometry.at("coordinates");
    if (!rings.is_array() || rings.empty()) throw ValidationError(what + ": polygon has no rings");
    std::vector<GeoPoint> pts;
    for (const auto& pair : rings.at(0)) {
        if (!pair.is_array() || pair.size() < 2) throw ValidationError(what + ": bad coordinate pair");
        pts.emplace_back(pair[1].get<double>(), pair[0].get<double>());
    }
    return Polygon(std::move(pts));
}

}  // namespace geo_detail

/// Parses a GeoJSON FeatureCollection. Exactly one feature must carry
/// `properties.role == "ward"`; features with role "sector" (or no role)
/// become sectors in document order. Names come from `properties.name`.
[[nodiscard]] inline SectorMap parse_sector_map(const nlohmann::json& doc) {
    try {
        if (doc.value("type", "") != "FeatureCollection") {
            throw ValidationError("sector map must be a GeoJSON FeatureCollection");
        }
        std::optional<std::string> ward_name;
        std::optional<Polygon> ward;
        std::vector<Sector> sectors;
        for (const auto& f : doc.at("features")) {
            const auto props = f.value("properties", nlohmann::json::object());
            const std::string name = props.value("name", "");
            const std::string role = props.value("role", "sector");
            if (name.empty()) throw ValidationError("every feature needs properties.name");
            Polygon poly = geo_detail::polygon_from_geojson(f.at("geometry"), name);
            if (role == "ward") {
                if (ward) throw ValidationError("sector map declares more than one ward");
                ward_name = name;
                ward.emplace(std::move(poly));
            } else if (role == "sector") {
                sectors.push_back(Sector{name, std::move(poly)});
            } else {
                throw ValidationError("unknown feature role '" + role + "'");
            }
        }
        if (!ward) throw ValidationError("sector map has no ward feature");
        return SectorMap(*ward_name, std::move(*ward), std::move(sectors));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed sector map: ") + e.what());
    }
}

[[nodiscard]] inline SectorMap load_sector_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sector map " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    return parse_sector_map(doc);
}

}  // namespace pothole
