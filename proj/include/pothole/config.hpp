#pragma once

// JSON configuration. Keys mirror the PipelineConfig field names; unknown keys
// are rejected so that typos do not silently fall back to defaults.

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "json.hpp"

#include "pothole/error.hpp"
#include "pothole/report.hpp"
#include "pothole/segment.hpp"

namespace pothole {

struct RunSettings {
    PipelineConfig pipeline;
    int sla_days = kDefaultSlaDays;
    double density_t_per_m3 = kDefaultDensityTPerM3;
    double compaction = kDefaultCompaction;
    unsigned jobs = 1;
    bool dump_stages = false;
};

namespace config_detail {

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw ValidationError("unknown config key '" + where + key + "'");
    }
}

}  // namespace config_detail

[[nodiscard]] inline nlohmann::ordered_json to_json(const RunSettings& s) {
    using json = nlohmann::ordered_json;
    const auto& p = s.pipeline;
    return json{
        {"level", p.level ? json(*p.level) : json("auto")},
        {"detector_policy", std::string(to_string(p.detector_policy))},
        {"canny", {{"sigma", p.canny.sigma}, {"low_frac", p.canny.low_frac}, {"high_frac", p.canny.high_frac}}},
        {"zerocross",
         {{"sigma", p.zerocross.sigma},
          {"threshold", p.zerocross.threshold ? json(*p.zerocross.threshold) : json("auto")}}},
        {"se_radius", p.se_radius},
        {"min_area_frac", p.min_area_frac},
        {"max_area_frac", p.max_area_frac},
        {"gsd_m_per_px", p.gsd_m_per_px ? json(*p.gsd_m_per_px) : json(nullptr)},
        {"overlay_color", {p.overlay_color.r, p.overlay_color.g, p.overlay_color.b}},
        {"overlay_alpha", p.overlay_alpha},
        {"sla_days", s.sla_days},
        {"density_t_per_m3", s.density_t_per_m3},
        {"compaction", s.compaction},
    };
}

/// Overlays the keys present in `j` onto `s`.
inline void apply_json(const nlohmann::json& j, RunSettings& s) {
    using config_detail::reject_unknown;
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    reject_unknown(j,
                   {"level", "detector_policy", "canny", "zerocross", "se_radius", "min_area_frac",
                    "max_area_frac", "gsd_m_per_px", "overlay_color", "overlay_alpha", "sla_days",
                    "density_t_per_m3", "compaction"},
                   "");
    try {
        auto& p = s.pipeline;
        if (j.contains("level")) {
            const auto& v = j["level"];
            if (v.is_string() && v.get<std::string>() == "auto") {
                p.level.reset();
            } else {
                p.level = v.get<double>();
            }
        }
        if (j.contains("detector_policy")) p.detector_policy = parse_detector_policy(j["detector_policy"].get<std::string>());
        if (j.contains("canny")) {
            const auto& c = j["canny"];
            reject_unknown(c, {"sigma", "low_frac", "high_frac"}, "canny.");
            p.canny.sigma = c.value("sigma", p.canny.sigma);
            p.canny.low_frac = c.value("low_frac", p.canny.low_frac);
            p.canny.high_frac = c.value("high_frac", p.canny.high_frac);
        }
        if (j.contains("zerocross")) {
            const auto& z = j["zerocross"];
            reject_unknown(z, {"sigma", "threshold"}, "zerocross.");
            p.zerocross.sigma = z.value("sigma", p.zerocross.sigma);
            if (z.contains("threshold")) {
                const auto& t = z["threshold"];
                if (t.is_string() && t.get<std::string>() == "auto") {
                    p.zerocross.threshold.reset();
                } else {
                    p.zerocross.threshold = t.get<double>();
                }
            }
        }
        if (j.contains("se_radius")) p.se_radius = j["se_radius"].get<int>();
        if (j.contains("min_area_frac")) p.min_area_frac = j["min_area_frac"].get<double>();
        if (j.contains("max_area_frac")) p.max_area_frac = j["max_area_frac"].get<double>();
        if (j.contains("gsd_m_per_px")) {
            if (j["gsd_m_per_px"].is_null()) {
                p.gsd_m_per_px.reset();
            } else {
                p.gsd_m_per_px = j["gsd_m_per_px"].get<double>();
            }
        }
        if (j.contains("overlay_color")) {
            const auto& c = j["overlay_color"];
            if (!c.is_array() || c.size() != 3) throw ValidationError("overlay_color must be [r,g,b]");
            for (const auto& v : c) {
                const int x = v.get<int>();
                if (x < 0 || x > 255) throw ValidationError("overlay_color channels must lie in 0..255");
            }
            p.overlay_color = Rgb{static_cast<std::uint8_t>(c[0].get<int>()), static_cast<std::uint8_t>(c[1].get<int>()),
                                  static_cast<std::uint8_t>(c[2].get<int>())};
        }
        if (j.contains("overlay_alpha")) p.overlay_alpha = j["overlay_alpha"].get<double>();
        if (j.contains("sla_days")) s.sla_days = j["sla_days"].get<int>();
        if (j.contains("density_t_per_m3")) s.density_t_per_m3 = j["density_t_per_m3"].get<double>();
        if (j.contains("compaction")) s.compaction = j["compaction"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
}

inline void validate(const RunSettings& s) {
    s.pipeline.validate();
    if (s.sla_days < 0) throw ValidationError("sla_days must be >= 0");
    if (!(s.density_t_per_m3 >= 0.0) || !(s.compaction >= 0.0)) {
        throw ValidationError("density and compaction must be >= 0");
    }
}

[[nodiscard]] inline RunSettings load_settings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    RunSettings s;
    try {
        apply_json(nlohmann::json::parse(in), s);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
    validate(s);
    return s;
}

}  // namespace pothole
