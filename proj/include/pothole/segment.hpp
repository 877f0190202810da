#pragma once

// End-to-end pothole segmentation: luminance -> binarize -> edge detector ->
// closing -> conditional inversion -> hole filling -> largest component,
// with plausibility-driven detector fallback. Also area and filling-material
// estimates.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pothole/edges.hpp"
#include "pothole/error.hpp"
#include "pothole/morph.hpp"
#include "pothole/raster.hpp"

namespace pothole {

enum class Detector { Canny, Zerocross };

enum class DetectorPolicy { CannyFirst, ZerocrossFirst, FixedCanny, FixedZerocross };

[[nodiscard]] inline std::string_view to_string(Detector d) noexcept {
    return d == Detector::Canny ? "canny" : "zerocross";
}

[[nodiscard]] inline std::string_view to_string(DetectorPolicy p) noexcept {
    switch (p) {
        case DetectorPolicy::CannyFirst: return "canny-first";
        case DetectorPolicy::ZerocrossFirst: return "zerocross-first";
        case DetectorPolicy::FixedCanny: return "canny";
        case DetectorPolicy::FixedZerocross: return "zerocross";
    }
    return "canny-first";
}

[[nodiscard]] inline DetectorPolicy parse_detector_policy(std::string_view s) {
    if (s == "canny-first") return DetectorPolicy::CannyFirst;
    if (s == "zerocross-first") return DetectorPolicy::ZerocrossFirst;
    if (s == "canny" || s == "fixed-canny") return DetectorPolicy::FixedCanny;
    if (s == "zerocross" || s == "fixed-zerocross") return DetectorPolicy::FixedZerocross;
    throw ValidationError("unknown detector policy '" + std::string(s) +
                          "' (expected canny-first, zerocross-first, canny or zerocross)");
}

struct PipelineConfig {
    /// Unset selects the Otsu level per image.
    std::optional<double> level;
    DetectorPolicy detector_policy = DetectorPolicy::CannyFirst;
    CannyParams canny;
    ZerocrossParams zerocross;
    int se_radius = 5;
    double min_area_frac = 0.005;
    double max_area_frac = 0.6;
    std::optional<double> gsd_m_per_px;
    Rgb overlay_color{0, 0, 255};
    double overlay_alpha = 0.5;

    void validate() const {
        if (level) (void)Level{*level};
        canny.validate();
        zerocross.validate();
        if (se_radius < 0) throw ValidationError("se_radius must be >= 0");
        if (!(min_area_frac > 0.0 && min_area_frac < max_area_frac && max_area_frac < 1.0)) {
            throw ValidationError("area fractions must satisfy 0 < min_area_frac < max_area_frac < 1");
        }
        if (gsd_m_per_px && !(*gsd_m_per_px > 0.0)) throw ValidationError("gsd_m_per_px must be > 0");
        if (!(overlay_alpha >= 0.0 && overlay_alpha <= 1.0)) {
            throw ValidationError("overlay alpha must lie in [0,1]");
        }
    }
};

struct BoundingBox {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Outcome of running the post-binarization chain with one detector.
struct DetectorAttempt {
    Detector detector = Detector::Canny;
    /// Largest-component pixels over image pixels; 0 when nothing was found.
    double area_fraction = 0.0;
    bool found = false;
    bool plausible = false;
    friend bool operator==(const DetectorAttempt&, const DetectorAttempt&) = default;
};

struct SegmentTrace {
    double level = 0.0;
    bool level_auto = false;
    Detector detector = Detector::Canny;
    bool inverted = false;
    int se_radius = 0;
    /// Area fraction of the returned mask.
    double plausibility = 0.0;
    /// Set when no detector produced an area fraction inside the bounds.
    bool warning = false;
    std::vector<DetectorAttempt> attempts;
    friend bool operator==(const SegmentTrace&, const SegmentTrace&) = default;
};

struct PotholeMask {
    BinaryImage mask;
    std::size_t pixel_count = 0;
    BoundingBox bounding_box;
    SegmentTrace trace;
};

/// Intermediate rasters of the selected detector's run, in pipeline order.
struct SegmentStages {
    GrayImage gray;
    BinaryImage binary;
    BinaryImage edges;
    BinaryImage closed;
    BinaryImage inverted;
    BinaryImage filled;
    RgbImage overlay;
};

struct SegmentResult {
    PotholeMask pothole;
    SegmentStages stages;
};

inline constexpr int kMinSegmentSide = 16;

[[nodiscard]] inline BoundingBox bounding_box(const BinaryImage& mask) {
    int x0 = mask.width();
    int y0 = mask.height();
    int x1 = -1;
    int y1 = -1;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask(x, y)) continue;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) return {};
    return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

/// Intersection over union of two equally sized masks; two empty masks give 1.
[[nodiscard]] inline double mask_iou(const BinaryImage& a, const BinaryImage& b) {
    if (!a.same_shape(b)) throw DimensionError("IoU masks differ in size");
    std::size_t inter = 0;
    std::size_t uni = 0;
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) {
        inter += (va[i] && vb[i]) ? 1 : 0;
        uni += (va[i] || vb[i]) ? 1 : 0;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

namespace segment_detail {

struct ChainRun {
    DetectorAttempt attempt;
    BinaryImage edges;
    BinaryImage closed;
    InvertResult inverted;
    BinaryImage filled;
    std::optional<Component> component;
};

inline ChainRun run_chain(const BinaryImage& binary, Detector detector, const PipelineConfig& cfg) {
    const GrayImage input = to_gray(binary);
    BinaryImage edges = detector == Detector::Canny ? canny(input, cfg.canny)
                                                    : zerocross(input, cfg.zerocross);
    BinaryImage closed = close(edges, disk_se(cfg.se_radius));
    InvertResult inverted = auto_invert(closed);
    BinaryImage filled = fill_holes(inverted.image);
    const LabelImage labels = label_components(filled, Connectivity::Eight);

    ChainRun run{DetectorAttempt{detector}, std::move(edges), std::move(closed), std::move(inverted),
                 std::move(filled), std::nullopt};
    if (labels.component_count > 0) {
        run.component = largest_component(labels);
        run.attempt.found = true;
        run.attempt.area_fraction =
            static_cast<double>(run.component->pixel_count) / static_cast<double>(binary.size());
        run.attempt.plausible = run.attempt.area_fraction >= cfg.min_area_frac &&
                                run.attempt.area_fraction <= cfg.max_area_frac;
    }
    return run;
}

inline double bound_distance(const DetectorAttempt& a, const PipelineConfig& cfg) {
    if (!a.found) return std::numeric_limits<double>::infinity();
    if (a.area_fraction < cfg.min_area_frac) return cfg.min_area_frac - a.area_fraction;
    if (a.area_fraction > cfg.max_area_frac) return a.area_fraction - cfg.max_area_frac;
    return 0.0;
}

inline std::vector<Detector> detector_order(DetectorPolicy policy) {
    switch (policy) {
        case DetectorPolicy::CannyFirst: return {Detector::Canny, Detector::Zerocross};
        case DetectorPolicy::ZerocrossFirst: return {Detector::Zerocross, Detector::Canny};
        case DetectorPolicy::FixedCanny: return {Detector::Canny};
        case DetectorPolicy::FixedZerocross: return {Detector::Zerocross};
    }
    return {Detector::Canny};
}

}  // namespace segment_detail

/// Runs the full pipeline and keeps every intermediate raster of the chosen run.
///
/// The primary detector's result is accepted when its largest component covers
/// a fraction of the image inside [min_area_frac, max_area_frac]. Otherwise the
/// secondary detector (if the policy has one) is tried, and the first plausible
/// result wins. When none is plausible, the result nearest the bounds is
/// returned with `trace.warning` set.
[[nodiscard]] inline SegmentResult segment_pothole_with_stages(const RgbImage& img,
                                                               const PipelineConfig& cfg = {}) {
    cfg.validate();
    if (img.width() < kMinSegmentSide || img.height() < kMinSegmentSide) {
        throw DimensionError("segmentation requires at least 16x16 pixels");
    }
    GrayImage gray = luminance(img);
    std::optional<Level> level;
    if (cfg.level) {
        level.emplace(*cfg.level);
    } else {
        try {
            level.emplace(otsu_level(gray));
        } catch (const NoThresholdError&) {
            throw NoPotholeFound();
        }
    }
    BinaryImage binary = binarize(gray, *level);

    std::vector<segment_detail::ChainRun> runs;
    for (Detector d : segment_detail::detector_order(cfg.detector_policy)) {
        runs.push_back(segment_detail::run_chain(binary, d, cfg));
        if (runs.back().attempt.plausible) break;
    }

    std::size_t chosen = runs.size() - 1;
    if (!runs.back().attempt.plausible) {
        chosen = 0;
        for (std::size_t i = 1; i < runs.size(); ++i) {
            if (segment_detail::bound_distance(runs[i].attempt, cfg) <
                segment_detail::bound_distance(runs[chosen].attempt, cfg)) {
                chosen = i;
            }
        }
    }
    auto& run = runs[chosen];
    if (!run.component) throw NoPotholeFound();

    SegmentTrace trace;
    trace.level = level->value();
    trace.level_auto = !cfg.level.has_value();
    trace.detector = run.attempt.detector;
    trace.inverted = run.inverted.inverted;
    trace.se_radius = cfg.se_radius;
    trace.plausibility = run.attempt.area_fraction;
    trace.warning = !run.attempt.plausible;
    for (const auto& r : runs) trace.attempts.push_back(r.attempt);

    RgbImage overlay = overlay_component(img, run.component->mask, cfg.overlay_color, cfg.overlay_alpha);
    const BoundingBox box = bounding_box(run.component->mask);
    const std::size_t count = run.component->pixel_count;
    return SegmentResult{
        PotholeMask{std::move(run.component->mask), count, box, std::move(trace)},
        SegmentStages{std::move(gray), std::move(binary), std::move(run.edges), std::move(run.closed),
                      std::move(run.inverted.image), std::move(run.filled), std::move(overlay)}};
}

[[nodiscard]] inline PotholeMask segment_pothole(const RgbImage& img, const PipelineConfig& cfg = {}) {
    return segment_pothole_with_stages(img, cfg).pothole;
}

/// Ground area of the mask in square meters: pixel_count * gsd^2.
[[nodiscard]] inline double area_m2(std::size_t pixel_count, std::optional<double> gsd_m_per_px) {
    if (!gsd_m_per_px) throw UncalibratedError();
    if (!(*gsd_m_per_px > 0.0)) throw ValidationError("gsd_m_per_px must be > 0");
    return static_cast<double>(pixel_count) * (*gsd_m_per_px * *gsd_m_per_px);
}

[[nodiscard]] inline double area_m2(const PotholeMask& mask, std::optional<double> gsd_m_per_px) {
    return area_m2(mask.pixel_count, gsd_m_per_px);
}

inline constexpr double kDefaultDensityTPerM3 = 2.4;
inline constexpr double kDefaultCompaction = 1.25;

struct MaterialEstimate {
    double area_m2 = 0.0;
    double volume_m3 = 0.0;
    double mass_tonnes = 0.0;
    double density_t_per_m3 = kDefaultDensityTPerM3;
    double compaction_factor = kDefaultCompaction;
};

/// Fill volume is area x depth; mass adds density and a compaction allowance.
[[nodiscard]] inline MaterialEstimate material_estimate(double area, double depth_mm,
                                                        double density_t_per_m3 = kDefaultDensityTPerM3,
                                                        double compaction = kDefaultCompaction) {
    if (!(area >= 0.0) || !(depth_mm >= 0.0) || !(density_t_per_m3 >= 0.0) || !(compaction >= 0.0)) {
        throw ValidationError("material estimate inputs must be non-negative");
    }
    MaterialEstimate m;
    m.area_m2 = area;
    m.volume_m3 = area * depth_mm / 1000.0;
    m.mass_tonnes = m.volume_m3 * density_t_per_m3 * compaction;
    m.density_t_per_m3 = density_t_per_m3;
    m.compaction_factor = compaction;
    return m;
}

}  // namespace pothole
