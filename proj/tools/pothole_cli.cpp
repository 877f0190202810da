// pothole: segment potholes in road photos, geotag survey records into KML
// sector maps, and produce repair-priority reports.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "pothole/workflow.hpp"

namespace fs = std::filesystem;
using namespace pothole;

namespace {

struct Overrides {
    std::string config;
    std::string level;
    std::string detector;
    std::optional<int> se_radius;
    std::optional<double> gsd;
    std::optional<int> sla_days;
    std::optional<unsigned> jobs;
    bool dump_stages = false;
};

void add_pipeline_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON config file (keys mirror the pipeline settings)");
    cmd->add_option("--level", o.level, "binarization level in [0,1], or 'auto' for Otsu");
    cmd->add_option("--detector", o.detector, "canny-first | zerocross-first | canny | zerocross");
    cmd->add_option("--se-radius", o.se_radius, "disk radius for the closing step");
    cmd->add_option("--gsd", o.gsd, "ground sample distance in meters per pixel");
    cmd->add_option("--jobs,-j", o.jobs, "images processed concurrently");
    cmd->add_flag("--dump-stages", o.dump_stages, "write every intermediate stage image");
}

RunSettings resolve_settings(const Overrides& o) {
    RunSettings s = o.config.empty() ? RunSettings{} : load_settings(o.config);
    if (!o.level.empty()) {
        if (o.level == "auto") {
            s.pipeline.level.reset();
        } else {
            try {
                s.pipeline.level = std::stod(o.level);
            } catch (const std::exception&) {
                throw ValidationError("--level must be a number in [0,1] or 'auto'");
            }
        }
    }
    if (!o.detector.empty()) s.pipeline.detector_policy = parse_detector_policy(o.detector);
    if (o.se_radius) s.pipeline.se_radius = *o.se_radius;
    if (o.gsd) s.pipeline.gsd_m_per_px = *o.gsd;
    if (o.sla_days) s.sla_days = *o.sla_days;
    if (o.jobs) s.jobs = *o.jobs;
    s.dump_stages = s.dump_stages || o.dump_stages;
    validate(s);
    return s;
}

void print_ingest(const IngestOutcome& o) {
    fmt::print("ingested {} of {} rows ({} rejected), {} geotagged from EXIF\n", o.result.catalog.size(),
               o.result.rows, o.result.rejects.size(), o.geotagged_from_exif);
    for (const auto& r : o.result.rejects) fmt::print("  reject line {}: {}\n", r.line, r.reason);
    for (const auto& [id, why] : o.untagged) fmt::print("  no coordinates for {}: {}\n", id, why);
}

void print_process(const ProcessOutcome& o) {
    fmt::print("processed {} images: {} succeeded, {} failed\n", o.entries.size(), o.succeeded(),
               o.entries.size() - o.succeeded());
    for (const auto& e : o.entries) {
        if (e.ok) {
            fmt::print("  {}: {} px, detector {}{}\n", e.id, e.pixel_count, to_string(e.trace.detector),
                       e.trace.warning ? " (implausible area, check manually)" : "");
        } else {
            fmt::print("  {}: FAILED: {}\n", e.id, e.error);
        }
    }
}

void print_geotag(const GeotagSummary& s) {
    fmt::print("tagged {} records, {} without coordinates, {} outside every sector\n", s.tagged,
               s.no_coordinates.size(), s.outside_sectors);
    for (const auto& [name, n] : s.per_sector) fmt::print("  sector {}: {}\n", name, n);
    for (const auto& id : s.no_coordinates) fmt::print("  no coordinates: {}\n", id);
}

void print_report(const ReportBundle& b) {
    fmt::print("report: {} records, {} in category matrix, {} repaired, SLA {} days met by {:.1f}%\n",
               b.priority_queue.size(), b.matrix_total(), b.repaired_count, b.sla_days, 100.0 * b.sla_fraction);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pothole segmentation, geotagging and repair-priority reporting"};
    app.require_subcommand(1);

    // ingest
    std::string ingest_csv_path;
    std::string ingest_out = "catalog.jsonl";
    auto* ingest = app.add_subcommand("ingest", "import a survey CSV into a JSON-lines catalog");
    ingest->add_option("csv", ingest_csv_path, "CSV with header " + std::string(kCsvHeader))->required();
    ingest->add_option("--out", ingest_out, "catalog file to write");

    // process
    std::vector<std::string> images;
    std::string process_out = "out";
    Overrides process_flags;
    auto* process = app.add_subcommand("process", "segment potholes in images");
    process->add_option("images", images, "PNG/PGM/PPM images")->required();
    process->add_option("--out", process_out, "output directory");
    add_pipeline_flags(process, process_flags);

    // geotag
    std::string geotag_catalog_path;
    std::string geotag_sectors;
    std::string geotag_out = "map.kml";
    std::string geotag_catalog_out;
    auto* geotag = app.add_subcommand("geotag", "assign sectors and write a KML placemark map");
    geotag->add_option("catalog", geotag_catalog_path, "JSON-lines catalog")->required();
    geotag->add_option("sectors", geotag_sectors, "GeoJSON ward/sector map")->required();
    geotag->add_option("--out", geotag_out, "KML file to write");
    geotag->add_option("--catalog-out", geotag_catalog_out, "also save the catalog with sectors assigned");

    // report
    std::string report_catalog_path;
    std::string report_out = "report";
    int report_sla = kDefaultSlaDays;
    auto* report = app.add_subcommand("report", "write histograms, category matrix and priority list");
    report->add_option("catalog", report_catalog_path, "JSON-lines catalog")->required();
    report->add_option("--out", report_out, "output directory");
    report->add_option("--sla-days", report_sla, "repair time target in days");

    // pipeline
    std::string pipe_csv;
    std::string pipe_sectors;
    std::string pipe_out = "out";
    Overrides pipe_flags;
    auto* pipeline = app.add_subcommand("pipeline", "ingest, process, geotag and report in one run");
    pipeline->add_option("--csv", pipe_csv, "survey CSV")->required();
    pipeline->add_option("--sectors", pipe_sectors, "GeoJSON ward/sector map")->required();
    pipeline->add_option("--out", pipe_out, "output directory");
    pipeline->add_option("--sla-days", pipe_flags.sla_days, "repair time target in days");
    add_pipeline_flags(pipeline, pipe_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitHard;
    }

    try {
        if (*ingest) {
            const auto o = cmd_ingest(ingest_csv_path, fs::path(ingest_out));
            print_ingest(o);
            return o.exit_code;
        }
        if (*process) {
            const RunSettings s = resolve_settings(process_flags);
            std::vector<fs::path> paths(images.begin(), images.end());
            const auto o = cmd_process(paths, s, process_out);
            print_process(o);
            return o.exit_code;
        }
        if (*geotag) {
            const auto s = cmd_geotag(geotag_catalog_path, geotag_sectors, geotag_out,
                                      geotag_catalog_out.empty() ? std::nullopt : std::optional<fs::path>(geotag_catalog_out));
            print_geotag(s);
            return s.exit_code;
        }
        if (*report) {
            print_report(cmd_report(report_catalog_path, report_sla, report_out));
            return kExitOk;
        }
        if (*pipeline) {
            const RunSettings s = resolve_settings(pipe_flags);
            const auto p = cmd_pipeline(pipe_csv, pipe_sectors, s, pipe_out);
            print_ingest(p.ingest);
            print_process(p.process);
            print_geotag(p.geotag);
            print_report(p.report);
            return p.exit_code;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitHard;
    }
    return kExitHard;
}
