#pragma once

// KML document emission: one Placemark per sector polygon and per geotagged
// pothole record.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "pothole/catalog.hpp"
#include "pothole/geodata.hpp"

namespace pothole {

struct KmlDocument {
    std::string text;
    std::size_t placemarks = 0;
    /// Ids of records left out because they carry no coordinates.
    std::vector<std::string> rejects;
};

[[nodiscard]] inline std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

/// "lon,lat,0" with six decimals.
[[nodiscard]] inline std::string kml_coordinate(const GeoPoint& p) {
    return fmt::format("{:.6f},{:.6f},0", p.lon(), p.lat());
}

namespace kml_detail {

inline std::string number_or_unknown(const std::optional<double>& v) {
    return v ? fmt::format("{}", *v) : std::string("unknown");
}

}  // namespace kml_detail

/// Pothole placemark. The sector is taken from the map when the point falls in
/// one, else from the record, else "none".
[[nodiscard]] inline std::string pothole_placemark(const PotholeRecord& r, const GeoPoint& at,
                                                   const std::optional<std::string>& sector) {
    const std::string description = fmt::format(
        "{} sq.m, {} mm, sector {}, reported {}", kml_detail::number_or_unknown(r.area_m2),
        kml_detail::number_or_unknown(r.depth_mm), sector.value_or("none"),
        r.reported ? r.reported->iso() : std::string("unknown"));
    return fmt::format(
        "<Placemark><name>{}</name><description>{}</description><Point><coordinates>{}</coordinates>"
        "</Point></Placemark>",
        xml_escape(r.id), xml_escape(description), kml_coordinate(at));
}

[[nodiscard]] inline std::string sector_placemark(const Sector& s) {
    std::string coords;
    for (const auto& p : s.polygon.ring()) {
        if (!coords.empty()) coords += ' ';
        coords += kml_coordinate(p);
    }
    return fmt::format(
        "<Placemark><name>{}</name><Polygon><outerBoundaryIs><LinearRing><coordinates>{}</coordinates>"
        "</LinearRing></outerBoundaryIs></Polygon></Placemark>",
        xml_escape(s.name), coords);
}

[[nodiscard]] inline KmlDocument write_kml(const std::vector<PotholeRecord>& records, const SectorMap& map) {
    KmlDocument doc;
    std::string body;
    for (const auto& s : map.sectors()) {
        body += sector_placemark(s);
        ++doc.placemarks;
    }
    for (const auto& r : records) {
        if (!r.location) {
            doc.rejects.push_back(r.id);
            continue;
        }
        auto sector = assign_sector(*r.location, map);
        if (!sector) sector = r.sector;
        body += pothole_placemark(r, *r.location, sector);
        ++doc.placemarks;
    }
    doc.text = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?><kml xmlns=\"http://www.opengis.net/kml/2.2\">"
        "<Document><name>{}</name>{}</Document></kml>",
        xml_escape(map.ward_name()), body);
    return doc;
}

}  // namespace pothole
