#pragma once

// Size bins, category matrix, repair-time statistics and priority ranking.

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"

#include "pothole/catalog.hpp"
#include "pothole/error.hpp"

namespace pothole {

enum class SizeBin { Small = 0, Medium = 1, Large = 2 };

inline constexpr std::array<SizeBin, 3> kAllBins = {SizeBin::Small, SizeBin::Medium, SizeBin::Large};

[[nodiscard]] inline std::string_view to_string(SizeBin b) noexcept {
    switch (b) {
        case SizeBin::Small: return "Small";
        case SizeBin::Medium: return "Medium";
        case SizeBin::Large: return "Large";
    }
    return "Small";
}

[[nodiscard]] inline int rank(SizeBin b) noexcept { return static_cast<int>(b); }

/// [0,8) Small, [8,14) Medium, [14,inf) Large, in square meters.
[[nodiscard]] inline SizeBin area_bin(double area_m2) {
    if (!(area_m2 >= 0.0)) throw ValidationError("area must be >= 0");
    if (area_m2 < 8.0) return SizeBin::Small;
    if (area_m2 < 14.0) return SizeBin::Medium;
    return SizeBin::Large;
}

/// [0,50] Small, (50,100) Medium, [100,inf) Large, in millimeters.
[[nodiscard]] inline SizeBin depth_bin(double depth_mm) {
    if (!(depth_mm >= 0.0)) throw ValidationError("depth must be >= 0");
    if (depth_mm <= 50.0) return SizeBin::Small;
    if (depth_mm < 100.0) return SizeBin::Medium;
    return SizeBin::Large;
}

[[nodiscard]] inline std::optional<int> days_to_repair(const PotholeRecord& r) {
    if (!r.reported || !r.repaired) return std::nullopt;
    return r.repaired->days_since(*r.reported);
}

/// 3 * rank(area bin) + rank(depth bin); empty when area or depth is missing.
[[nodiscard]] inline std::optional<int> priority_score(const PotholeRecord& r) {
    if (!r.area_m2 || !r.depth_mm) return std::nullopt;
    return 3 * rank(area_bin(*r.area_m2)) + rank(depth_bin(*r.depth_mm));
}

inline constexpr int kDefaultSlaDays = 23;

struct PriorityEntry {
    std::string id;
    std::optional<int> score;
    std::optional<SizeBin> area;
    std::optional<SizeBin> depth;
    std::optional<Date> reported;
    friend bool operator==(const PriorityEntry&, const PriorityEntry&) = default;
};

/// Strict order: scored before unscorable, score descending, reported date
/// ascending (undated last), id ascending.
[[nodiscard]] inline bool priority_before(const PriorityEntry& a, const PriorityEntry& b) {
    if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
    if (a.score && *a.score != *b.score) return *a.score > *b.score;
    if (a.reported.has_value() != b.reported.has_value()) return a.reported.has_value();
    if (a.reported && *a.reported != *b.reported) return *a.reported < *b.reported;
    return a.id < b.id;
}

struct ReportBundle {
    std::map<SizeBin, int> area_histogram;
    std::map<SizeBin, int> depth_histogram;
    std::map<int, int> days_histogram;
    /// category_matrix[area][depth]
    std::array<std::array<int, 3>, 3> category_matrix{};
    int sla_days = kDefaultSlaDays;
    int repaired_count = 0;
    int within_sla = 0;
    double sla_fraction = 1.0;
    std::vector<PriorityEntry> priority_queue;

    [[nodiscard]] int matrix_total() const {
        int t = 0;
        for (const auto& row : category_matrix) for (int v : row) t += v;
        return t;
    }
};

[[nodiscard]] inline ReportBundle aggregate_report(const SurveyCatalog& cat, int sla_days = kDefaultSlaDays) {
    if (sla_days < 0) throw ValidationError("sla_days must be >= 0");
    ReportBundle b;
    b.sla_days = sla_days;
    for (SizeBin bin : kAllBins) {
        b.area_histogram[bin] = 0;
        b.depth_histogram[bin] = 0;
    }
    for (const auto& r : cat.records()) {
        std::optional<SizeBin> a;
        std::optional<SizeBin> d;
        if (r.area_m2) ++b.area_histogram[*(a = area_bin(*r.area_m2))];
        if (r.depth_mm) ++b.depth_histogram[*(d = depth_bin(*r.depth_mm))];
        if (a && d) ++b.category_matrix[rank(*a)][rank(*d)];
        if (const auto days = days_to_repair(r)) {
            ++b.days_histogram[*days];
            ++b.repaired_count;
            if (*days <= sla_days) ++b.within_sla;
        }
        b.priority_queue.push_back(PriorityEntry{r.id, priority_score(r), a, d, r.reported});
    }
    b.sla_fraction = b.repaired_count == 0 ? 1.0 : static_cast<double>(b.within_sla) / b.repaired_count;
    std::sort(b.priority_queue.begin(), b.priority_queue.end(), priority_before);
    return b;
}

[[nodiscard]] inline nlohmann::ordered_json report_to_json(const ReportBundle& b) {
    using json = nlohmann::ordered_json;
    const auto hist = [](const std::map<SizeBin, int>& h) {
        json j = json::object();
        for (const auto& [bin, n] : h) j[std::string(to_string(bin))] = n;
        return j;
    };
    json days = json::object();
    for (const auto& [d, n] : b.days_histogram) days[std::to_string(d)] = n;
    json matrix = json::array();
    for (const auto& row : b.category_matrix) matrix.push_back(row);
    json queue = json::array();
    for (std::size_t i = 0; i < b.priority_queue.size(); ++i) {
        const auto& e = b.priority_queue[i];
        queue.push_back(json{{"rank", i + 1},
                             {"id", e.id},
                             {"score", e.score ? json(*e.score) : json(nullptr)},
                             {"area_bin", e.area ? json(std::string(to_string(*e.area))) : json(nullptr)},
                             {"depth_bin", e.depth ? json(std::string(to_string(*e.depth))) : json(nullptr)},
                             {"reported", e.reported ? json(e.reported->iso()) : json(nullptr)}});
    }
    return json{{"area_histogram", hist(b.area_histogram)},
                {"depth_histogram", hist(b.depth_histogram)},
                {"days_histogram", days},
                {"category_matrix", {{"rows", "area_bin"}, {"cols", "depth_bin"}, {"bins", {"Small", "Medium", "Large"}}, {"counts", matrix}}},
                {"sla_days", b.sla_days},
                {"repaired_count", b.repaired_count},
                {"within_sla", b.within_sla},
                {"sla_fraction", b.sla_fraction},
                {"priority_queue", queue}};
}

namespace report_detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::string csv_field(std::string_view v) {
    if (v.find_first_of(",\"\n") == std::string_view::npos) return std::string(v);
    std::string out = "\"";
    for (char c : v) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

}  // namespace report_detail

/// Writes area_hist.csv, depth_hist.csv, days_hist.csv, matrix.csv,
/// priority.csv and report.json into `dir`.
inline void write_report_files(const ReportBundle& b, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const auto hist_csv = [](const std::map<SizeBin, int>& h) {
        std::string s = "bin,count\n";
        for (const auto& [bin, n] : h) s += fmt::format("{},{}\n", to_string(bin), n);
        return s;
    };
    report_detail::write_text(dir / "area_hist.csv", hist_csv(b.area_histogram));
    report_detail::write_text(dir / "depth_hist.csv", hist_csv(b.depth_histogram));

    std::string days = "day,count\n";
    for (const auto& [d, n] : b.days_histogram) days += fmt::format("{},{}\n", d, n);
    report_detail::write_text(dir / "days_hist.csv", days);

    std::string matrix = "area_bin/depth_bin,Small,Medium,Large\n";
    for (SizeBin a : kAllBins) {
        const auto& row = b.category_matrix[rank(a)];
        matrix += fmt::format("{},{},{},{}\n", to_string(a), row[0], row[1], row[2]);
    }
    report_detail::write_text(dir / "matrix.csv", matrix);

    std::string prio = "rank,id,score,area_bin,depth_bin,reported\n";
    for (std::size_t i = 0; i < b.priority_queue.size(); ++i) {
        const auto& e = b.priority_queue[i];
        prio += fmt::format("{},{},{},{},{},{}\n", i + 1, report_detail::csv_field(e.id),
                            e.score ? std::to_string(*e.score) : "unscorable",
                            e.area ? to_string(*e.area) : "", e.depth ? to_string(*e.depth) : "",
                            e.reported ? e.reported->iso() : "");
    }
    report_detail::write_text(dir / "priority.csv", prio);
    report_detail::write_text(dir / "report.json", report_to_json(b).dump(2) + "\n");
}

}  // namespace pothole
