#pragma once

// Batch commands behind the command-line tool: ingest, process, geotag,
// report and the combined pipeline. Each returns a summary plus an exit code
// (0 success, 1 partial with rejects or failed images, 2 hard error).

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "pothole/catalog.hpp"
#include "pothole/config.hpp"
#include "pothole/error.hpp"
#include "pothole/exif.hpp"
#include "pothole/geodata.hpp"
#include "pothole/image_io.hpp"
#include "pothole/kml.hpp"
#include "pothole/parallel.hpp"
#include "pothole/report.hpp"
#include "pothole/segment.hpp"

namespace pothole {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitHard = 2;

namespace fs = std::filesystem;

[[nodiscard]] inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

inline void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------- process --

struct ImageJob {
    std::string id;
    fs::path image;
};

struct ProcessEntry {
    std::string id;
    std::string image;
    bool ok = false;
    std::string error;
    std::size_t pixel_count = 0;
    double area_fraction = 0.0;
    BoundingBox bounding_box;
    SegmentTrace trace;
    std::optional<double> area_m2;
    std::optional<MaterialEstimate> material;
    std::string overlay;
};

struct ProcessOutcome {
    std::vector<ProcessEntry> entries;
    std::string started_at;
    std::string finished_at;
    int exit_code = kExitOk;

    [[nodiscard]] std::size_t succeeded() const {
        return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.ok; }));
    }
};

/// Ids default to file stems, suffixed when two inputs share a stem.
[[nodiscard]] inline std::vector<ImageJob> jobs_from_paths(const std::vector<fs::path>& images) {
    std::vector<ImageJob> jobs;
    std::map<std::string, int> seen;
    for (const auto& p : images) {
        std::string id = p.stem().string();
        const int n = ++seen[id];
        if (n > 1) id += "_" + std::to_string(n);
        jobs.push_back({id, p});
    }
    return jobs;
}

inline void dump_stages(const SegmentStages& s, const fs::path& dir) {
    ensure_directory(dir);
    io::write_image(dir / "01_gray.png", s.gray);
    io::write_image(dir / "02_binary.png", s.binary);
    io::write_image(dir / "03_edges.png", s.edges);
    io::write_image(dir / "04_closed.png", s.closed);
    io::write_image(dir / "05_inverted.png", s.inverted);
    io::write_image(dir / "06_filled.png", s.filled);
    io::write_image(dir / "07_overlay.png", s.overlay);
}

[[nodiscard]] inline ProcessEntry process_one(const ImageJob& job, const RunSettings& settings, const fs::path& out_dir) {
    ProcessEntry e;
    e.id = job.id;
    e.image = job.image.string();
    try {
        const RgbImage img = io::read_image(job.image);
        const SegmentResult r = segment_pothole_with_stages(img, settings.pipeline);
        const auto& m = r.pothole;
        e.pixel_count = m.pixel_count;
        e.area_fraction = static_cast<double>(m.pixel_count) / static_cast<double>(m.mask.size());
        e.bounding_box = m.bounding_box;
        e.trace = m.trace;
        if (settings.pipeline.gsd_m_per_px) e.area_m2 = area_m2(m, settings.pipeline.gsd_m_per_px);
        e.overlay = (fs::path("overlays") / (job.id + "_overlay.png")).generic_string();
        io::write_image(out_dir / e.overlay, r.stages.overlay);
        if (settings.dump_stages) dump_stages(r.stages, out_dir / "stages" / job.id);
        e.ok = true;
    } catch (const std::exception& ex) {
        e.ok = false;
        e.error = ex.what();
    }
    return e;
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const SegmentTrace& t) {
    using json = nlohmann::ordered_json;
    json attempts = json::array();
    for (const auto& a : t.attempts) {
        attempts.push_back(json{{"detector", std::string(to_string(a.detector))},
                                {"found", a.found},
                                {"area_fraction", a.area_fraction},
                                {"plausible", a.plausible}});
    }
    return json{{"level", t.level},
                {"level_auto", t.level_auto},
                {"detector", std::string(to_string(t.detector))},
                {"inverted", t.inverted},
                {"se_radius", t.se_radius},
                {"plausibility", t.plausibility},
                {"warning", t.warning},
                {"attempts", attempts}};
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const ProcessEntry& e) {
    using json = nlohmann::ordered_json;
    json j{{"id", e.id}, {"image", e.image}, {"status", e.ok ? "ok" : "error"}};
    if (!e.ok) {
        j["error"] = e.error;
        return j;
    }
    j["pixel_count"] = e.pixel_count;
    j["area_fraction"] = e.area_fraction;
    j["bounding_box"] = json{{"x", e.bounding_box.x}, {"y", e.bounding_box.y}, {"w", e.bounding_box.w}, {"h", e.bounding_box.h}};
    j["area_m2"] = e.area_m2 ? json(*e.area_m2) : json(nullptr);
    if (e.material) {
        j["material"] = json{{"area_m2", e.material->area_m2},
                             {"volume_m3", e.material->volume_m3},
                             {"mass_tonnes", e.material->mass_tonnes},
                             {"density_t_per_m3", e.material->density_t_per_m3},
                             {"compaction_factor", e.material->compaction_factor}};
    }
    j["overlay"] = e.overlay;
    j["trace"] = to_json(e.trace);
    return j;
}

[[nodiscard]] inline nlohmann::ordered_json manifest_json(const ProcessOutcome& o, const RunSettings& settings) {
    using json = nlohmann::ordered_json;
    json entries = json::array();
    for (const auto& e : o.entries) entries.push_back(to_json(e));
    return json{{"config", to_json(settings)},
                {"started_at", o.started_at},
                {"finished_at", o.finished_at},
                {"summary", {{"images", o.entries.size()}, {"succeeded", o.succeeded()}, {"failed", o.entries.size() - o.succeeded()}}},
                {"entries", entries}};
}

inline void write_manifest(const ProcessOutcome& o, const RunSettings& settings, const fs::path& out_dir) {
    write_text_file(out_dir / "manifest.json", manifest_json(o, settings).dump(2) + "\n");
}

/// Segments each image (up to settings.jobs concurrently), writes overlays
/// and optional stage dumps. Entries keep input order.
[[nodiscard]] inline ProcessOutcome run_images(const std::vector<ImageJob>& jobs, const RunSettings& settings,
                                               const fs::path& out_dir) {
    validate(settings);
    ensure_directory(out_dir / "overlays");
    ProcessOutcome o;
    o.started_at = utc_timestamp();
    o.entries.resize(jobs.size());
    parallel_for(jobs.size(), settings.jobs, [&](std::size_t i) { o.entries[i] = process_one(jobs[i], settings, out_dir); });
    o.finished_at = utc_timestamp();
    o.exit_code = o.succeeded() == o.entries.size() ? kExitOk : kExitPartial;
    return o;
}

/// `process` subcommand: run_images plus manifest.json in out_dir.
[[nodiscard]] inline ProcessOutcome cmd_process(const std::vector<fs::path>& images, const RunSettings& settings,
                                                const fs::path& out_dir) {
    ProcessOutcome o = run_images(jobs_from_paths(images), settings, out_dir);
    write_manifest(o, settings, out_dir);
    return o;
}

// ----------------------------------------------------------------- ingest --

struct IngestOutcome {
    IngestResult result;
    std::size_t geotagged_from_exif = 0;
    /// Records that kept no coordinates: id -> reason.
    std::map<std::string, std::string> untagged;
    int exit_code = kExitOk;
};

/// Loads the CSV; records lacking coordinates but naming an image get them
/// from the image's EXIF GPS block (paths resolve relative to the CSV).
[[nodiscard]] inline IngestOutcome cmd_ingest(const fs::path& csv, const std::optional<fs::path>& out_catalog) {
    IngestOutcome o{ingest_csv(csv), 0, {}, kExitOk};
    auto& cat = o.result.catalog;
    const fs::path base = csv.parent_path();
    for (std::size_t i = 0; i < cat.size(); ++i) {
        const auto& r = cat.records()[i];
        if (r.location) continue;
        if (!r.image_path) {
            o.untagged[r.id] = "no coordinates and no image";
            continue;
        }
        try {
            const GeoPoint p = exif::parse_exif_gps(base / *r.image_path);
            cat.update(i, [&](PotholeRecord& rec) { rec.location = p; });
            ++o.geotagged_from_exif;
        } catch (const Error& e) {
            o.untagged[r.id] = e.what();
        }
    }
    if (out_catalog) save_catalog(cat, *out_catalog);
    o.exit_code = o.result.rejects.empty() ? kExitOk : kExitPartial;
    return o;
}

// ----------------------------------------------------------------- geotag --

struct GeotagSummary {
    std::size_t tagged = 0;
    std::vector<std::string> no_coordinates;
    std::map<std::string, std::size_t> per_sector;
    std::size_t outside_sectors = 0;
    int exit_code = kExitOk;
};

/// Assigns map sectors to located records (in place) and builds the KML.
[[nodiscard]] inline GeotagSummary geotag_catalog(SurveyCatalog& cat, const SectorMap& map, const fs::path& out_kml) {
    GeotagSummary s;
    for (std::size_t i = 0; i < cat.size(); ++i) {
        const auto& r = cat.records()[i];
        if (!r.location) continue;
        const auto sector = assign_sector(*r.location, map);
        if (sector) {
            ++s.per_sector[*sector];
            cat.update(i, [&](PotholeRecord& rec) { rec.sector = sector; });
        } else {
            ++s.outside_sectors;
        }
    }
    const KmlDocument kml = write_kml(cat.records(), map);
    write_text_file(out_kml, kml.text);
    s.no_coordinates = kml.rejects;
    s.tagged = cat.size() - kml.rejects.size();
    s.exit_code = s.no_coordinates.empty() ? kExitOk : kExitPartial;
    return s;
}

[[nodiscard]] inline GeotagSummary cmd_geotag(const fs::path& catalog_file, const fs::path& sector_file,
                                              const fs::path& out_kml,
                                              const std::optional<fs::path>& out_catalog = std::nullopt) {
    SurveyCatalog cat = load_catalog(catalog_file);
    const SectorMap map = load_sector_map(sector_file);
    GeotagSummary s = geotag_catalog(cat, map, out_kml);
    if (out_catalog) save_catalog(cat, *out_catalog);
    return s;
}

// ----------------------------------------------------------------- report --

[[nodiscard]] inline ReportBundle cmd_report(const fs::path& catalog_file, int sla_days, const fs::path& out_dir) {
    const ReportBundle b = aggregate_report(load_catalog(catalog_file), sla_days);
    write_report_files(b, out_dir);
    return b;
}

// --------------------------------------------------------------- pipeline --

struct PipelineOutcome {
    IngestOutcome ingest;
    ProcessOutcome process;
    GeotagSummary geotag;
    ReportBundle report;
    int exit_code = kExitOk;
};

/// ingest -> process (images named by records) -> geotag -> report.
/// Outputs in out_dir: catalog.jsonl, manifest.json, overlays/, map.kml, report/.
/// Mask-derived areas fill records lacking an area when a GSD is configured.
[[nodiscard]] inline PipelineOutcome cmd_pipeline(const fs::path& csv, const fs::path& sector_file,
                                                  const RunSettings& settings, const fs::path& out_dir) {
    validate(settings);
    ensure_directory(out_dir);
    const SectorMap map = load_sector_map(sector_file);

    PipelineOutcome p;
    p.ingest = cmd_ingest(csv, std::nullopt);
    SurveyCatalog& cat = p.ingest.result.catalog;

    std::vector<ImageJob> jobs;
    std::vector<std::size_t> record_of_job;
    for (std::size_t i = 0; i < cat.size(); ++i) {
        const auto& r = cat.records()[i];
        if (!r.image_path) continue;
        jobs.push_back({r.id, csv.parent_path() / *r.image_path});
        record_of_job.push_back(i);
    }
    p.process = run_images(jobs, settings, out_dir);
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        auto& e = p.process.entries[j];
        if (!e.ok) continue;
        const std::size_t idx = record_of_job[j];
        if (e.area_m2 && !cat.records()[idx].area_m2) {
            cat.update(idx, [&](PotholeRecord& rec) { rec.area_m2 = e.area_m2; });
        }
        const auto& rec = cat.records()[idx];
        if (rec.area_m2 && rec.depth_mm) {
            e.material = material_estimate(*rec.area_m2, *rec.depth_mm, settings.density_t_per_m3, settings.compaction);
        }
    }
    write_manifest(p.process, settings, out_dir);

    p.geotag = geotag_catalog(cat, map, out_dir / "map.kml");
    save_catalog(cat, out_dir / "catalog.jsonl");
    p.report = aggregate_report(cat, settings.sla_days);
    write_report_files(p.report, out_dir / "report");

    p.exit_code = std::max({p.ingest.exit_code, p.process.exit_code, p.geotag.exit_code});
    return p;
}

}  // namespace pothole
