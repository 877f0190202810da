#pragma once

// Survey catalog of pothole records: CSV ingestion and JSON-lines persistence.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "pothole/error.hpp"
#include "pothole/geodata.hpp"

namespace pothole {

/// Calendar date, serialized as ISO-8601 YYYY-MM-DD.
class Date {
public:
    explicit Date(std::chrono::year_month_day ymd) : ymd_(ymd) {
        if (!ymd_.ok()) throw ValidationError("invalid calendar date");
    }

    [[nodiscard]] static Date parse(std::string_view s) {
        int y = 0;
        unsigned m = 0;
        unsigned d = 0;
        const auto field = [&](std::size_t pos, std::size_t len, auto& out) {
            const char* first = s.data() + pos;
            const auto [ptr, ec] = std::from_chars(first, first + len, out);
            return ec == std::errc{} && ptr == first + len;
        };
        if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !field(0, 4, y) || !field(5, 2, m) ||
            !field(8, 2, d)) {
            throw ValidationError("date '" + std::string(s) + "' is not YYYY-MM-DD");
        }
        const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
        if (!ymd.ok()) throw ValidationError("date '" + std::string(s) + "' does not exist");
        return Date(ymd);
    }

    [[nodiscard]] std::string iso() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd_.year()),
                      static_cast<unsigned>(ymd_.month()), static_cast<unsigned>(ymd_.day()));
        return buf;
    }

    /// Whole days from `earlier` to this date.
    [[nodiscard]] int days_since(const Date& earlier) const {
        return static_cast<int>((std::chrono::sys_days{ymd_} - std::chrono::sys_days{earlier.ymd_}).count());
    }

    friend auto operator<=>(const Date& a, const Date& b) { return a.ymd_ <=> b.ymd_; }
    friend bool operator==(const Date&, const Date&) = default;

private:
    std::chrono::year_month_day ymd_;
};

struct PotholeRecord {
    std::string id;
    std::optional<GeoPoint> location;
    std::optional<std::string> image_path;
    std::optional<double> area_m2;
    std::optional<double> depth_mm;
    std::optional<Date> reported;
    std::optional<Date> repaired;
    std::optional<std::string> sector;

    /// Throws ValidationError describing the first broken invariant.
    void validate() const {
        if (id.empty()) throw ValidationError("record id is empty");
        if (area_m2 && !(*area_m2 >= 0.0)) throw ValidationError("area_m2 must be >= 0");
        if (depth_mm && !(*depth_mm >= 0.0)) throw ValidationError("depth_mm must be >= 0");
        if (repaired && !reported) throw ValidationError("repaired date given without a reported date");
        if (repaired && reported && *repaired < *reported) {
            throw ValidationError("repaired date " + repaired->iso() + " precedes reported date " + reported->iso());
        }
    }

    friend bool operator==(const PotholeRecord&, const PotholeRecord&) = default;
};

class SurveyCatalog {
public:
    SurveyCatalog() = default;
    explicit SurveyCatalog(std::string source_note) : source_note_(std::move(source_note)) {}

    /// Appends a validated record; duplicate ids are rejected.
    void add(PotholeRecord record) {
        record.validate();
        if (!ids_.insert(record.id).second) throw ValidationError("duplicate record id '" + record.id + "'");
        records_.push_back(std::move(record));
    }

    [[nodiscard]] const std::vector<PotholeRecord>& records() const noexcept { return records_; }
    [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
    [[nodiscard]] bool empty() const noexcept { return records_.empty(); }

    /// Mutable access for fields that do not affect identity (sector, area, ...).
    template <typename Fn>
    void update(std::size_t index, Fn&& fn) {
        PotholeRecord copy = records_.at(index);
        fn(copy);
        copy.validate();
        if (copy.id != records_[index].id) throw ValidationError("record ids are immutable");
        records_[index] = std::move(copy);
    }

    [[nodiscard]] const std::string& source_note() const noexcept { return source_note_; }
    void set_source_note(std::string note) { source_note_ = std::move(note); }

    /// Catalogs compare by their records; the source note is provenance only.
    friend bool operator==(const SurveyCatalog& a, const SurveyCatalog& b) { return a.records_ == b.records_; }

private:
    std::vector<PotholeRecord> records_;
    std::unordered_set<std::string> ids_;
    std::string source_note_;
};

struct RowReject {
    std::size_t line = 0;
    std::string reason;
    std::string text;
};

struct IngestResult {
    SurveyCatalog catalog;
    std::vector<RowReject> rejects;
    std::size_t rows = 0;
};

inline constexpr std::string_view kCsvHeader = "id,lat,lon,area_m2,depth_mm,reported,repaired,image";

namespace catalog_detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

/// Splits one CSV line; double quotes may wrap fields containing commas.
inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    if (quoted) throw ValidationError("unterminated quoted field");
    for (auto& f : out) f = trim(f);
    return out;
}

inline std::optional<double> parse_number(const std::string& s, const char* name) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ValidationError(std::string(name) + " '" + s + "' is not a number");
    }
    return v;
}

inline PotholeRecord parse_row(const std::vector<std::string>& f) {
    if (f.size() != 8) {
        throw ValidationError("expected 8 fields, found " + std::to_string(f.size()));
    }
    PotholeRecord r;
    r.id = f[0];
    if (r.id.empty()) throw ValidationError("id is empty");
    const auto lat = parse_number(f[1], "lat");
    const auto lon = parse_number(f[2], "lon");
    if (lat.has_value() != lon.has_value()) throw ValidationError("lat and lon must be given together");
    if (lat) r.location.emplace(*lat, *lon);
    r.area_m2 = parse_number(f[3], "area_m2");
    r.depth_mm = parse_number(f[4], "depth_mm");
    if (!f[5].empty()) r.reported = Date::parse(f[5]);
    if (!f[6].empty()) r.repaired = Date::parse(f[6]);
    if (!f[7].empty()) r.image_path = f[7];
    r.validate();
    return r;
}

}  // namespace catalog_detail

/// Parses CSV text with the fixed header. Malformed rows are returned as
/// rejects; a duplicated id throws ValidationError naming it.
[[nodiscard]] inline IngestResult ingest_csv_text(std::string_view text, std::string source_note = "csv") {
    IngestResult result{SurveyCatalog(std::move(source_note)), {}, 0};
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string trimmed = catalog_detail::trim(line);
        if (trimmed.empty()) continue;
        if (!header_seen) {
            std::string header;
            for (const auto& f : catalog_detail::split_csv(trimmed)) header += (header.empty() ? "" : ",") + f;
            if (header != kCsvHeader) {
                throw ValidationError("CSV header must be '" + std::string(kCsvHeader) + "'");
            }
            header_seen = true;
            continue;
        }
        ++result.rows;
        PotholeRecord record;
        try {
            record = catalog_detail::parse_row(catalog_detail::split_csv(trimmed));
        } catch (const ValidationError& e) {
            result.rejects.push_back(RowReject{line_no, e.what(), trimmed});
            continue;
        }
        result.catalog.add(std::move(record));
    }
    if (!header_seen) throw ValidationError("CSV file has no header line");
    return result;
}

[[nodiscard]] inline IngestResult ingest_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return ingest_csv_text(buf.str(), path.string());
}

namespace catalog_detail {

template <typename T, typename Fn>
nlohmann::ordered_json opt(const std::optional<T>& v, Fn&& fn) {
    return v ? nlohmann::ordered_json(fn(*v)) : nlohmann::ordered_json(nullptr);
}

}  // namespace catalog_detail

/// One JSON object per record with the fixed field order
/// id, lat, lon, area_m2, depth_mm, reported, repaired, image, sector.
[[nodiscard]] inline std::string record_to_json_line(const PotholeRecord& r) {
    using catalog_detail::opt;
    const auto same = [](const auto& v) { return v; };
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["lat"] = opt(r.location, [](const GeoPoint& p) { return p.lat(); });
    j["lon"] = opt(r.location, [](const GeoPoint& p) { return p.lon(); });
    j["area_m2"] = opt(r.area_m2, same);
    j["depth_mm"] = opt(r.depth_mm, same);
    j["reported"] = opt(r.reported, [](const Date& d) { return d.iso(); });
    j["repaired"] = opt(r.repaired, [](const Date& d) { return d.iso(); });
    j["image"] = opt(r.image_path, same);
    j["sector"] = opt(r.sector, same);
    return j.dump();
}

[[nodiscard]] inline PotholeRecord record_from_json(const nlohmann::json& j) {
    const auto num = [&](const char* k) -> std::optional<double> {
        if (!j.contains(k) || j[k].is_null()) return std::nullopt;
        return j[k].get<double>();
    };
    const auto str = [&](const char* k) -> std::optional<std::string> {
        if (!j.contains(k) || j[k].is_null()) return std::nullopt;
        return j[k].get<std::string>();
    };
    PotholeRecord r;
    r.id = j.at("id").get<std::string>();
    const auto lat = num("lat");
    const auto lon = num("lon");
    if (lat.has_value() != lon.has_value()) throw ValidationError("lat and lon must be given together");
    if (lat) r.location.emplace(*lat, *lon);
    r.area_m2 = num("area_m2");
    r.depth_mm = num("depth_mm");
    if (auto s = str("reported")) r.reported = Date::parse(*s);
    if (auto s = str("repaired")) r.repaired = Date::parse(*s);
    r.image_path = str("image");
    r.sector = str("sector");
    r.validate();
    return r;
}

inline void save_catalog(const SurveyCatalog& cat, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& r : cat.records()) out << record_to_json_line(r) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

/// Loads a JSON-lines catalog. Any malformed line raises IoError citing its
/// line number.
[[nodiscard]] inline SurveyCatalog load_catalog(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    SurveyCatalog cat(path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (catalog_detail::trim(line).empty()) continue;
        try {
            cat.add(record_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw IoError(path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cat;
}

}  // namespace pothole
