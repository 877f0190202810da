#pragma once

// Binary morphology with disk structuring elements, hole filling,
// connected-component labeling and colored overlays.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pothole/error.hpp"
#include "pothole/raster.hpp"

namespace pothole {

struct Offset {
    int dx = 0;
    int dy = 0;
    friend auto operator<=>(const Offset&, const Offset&) = default;
};

/// Set of neighborhood offsets. Always contains the origin, is symmetric under
/// negation, and fits inside the Euclidean disk of `radius()`.
class StructuringElement {
public:
    StructuringElement(std::vector<Offset> offsets, int radius) : radius_(radius) {
        if (radius < 0) throw ValidationError("structuring element radius must be >= 0");
        std::set<Offset> unique(offsets.begin(), offsets.end());
        offsets_.assign(unique.begin(), unique.end());
        if (!unique.contains(Offset{0, 0})) {
            throw ValidationError("structuring element must contain the origin");
        }
        for (const Offset& o : offsets_) {
            if (!unique.contains(Offset{-o.dx, -o.dy})) {
                throw ValidationError("structuring element must be symmetric");
            }
            if (o.dx * o.dx + o.dy * o.dy > radius * radius) {
                throw ValidationError("structuring element offset outside its radius");
            }
        }
        build_runs();
    }

    /// Offsets sorted by (dx, dy).
    [[nodiscard]] const std::vector<Offset>& offsets() const noexcept { return offsets_; }
    [[nodiscard]] int radius() const noexcept { return radius_; }
    [[nodiscard]] std::size_t size() const noexcept { return offsets_.size(); }

    /// Horizontal run [x0, x1] at row offset dy.
    struct Run {
        int dy;
        int x0;
        int x1;
    };
    [[nodiscard]] const std::vector<Run>& runs() const noexcept { return runs_; }

private:
    void build_runs() {
        std::vector<Offset> by_row = offsets_;
        std::sort(by_row.begin(), by_row.end(), [](const Offset& a, const Offset& b) {
            return a.dy != b.dy ? a.dy < b.dy : a.dx < b.dx;
        });
        for (const Offset& o : by_row) {
            if (!runs_.empty() && runs_.back().dy == o.dy && runs_.back().x1 + 1 == o.dx) {
                runs_.back().x1 = o.dx;
            } else {
                runs_.push_back(Run{o.dy, o.dx, o.dx});
            }
        }
    }

    std::vector<Offset> offsets_;
    std::vector<Run> runs_;
    int radius_;
};

/// Exact Euclidean disk: every (dx, dy) with dx^2 + dy^2 <= radius^2.
[[nodiscard]] inline StructuringElement disk_se(int radius) {
    if (radius < 0) throw ValidationError("disk radius must be >= 0");
    std::vector<Offset> offsets;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            if (dx * dx + dy * dy <= radius * radius) offsets.push_back({dx, dy});
        }
    }
    return StructuringElement(std::move(offsets), radius);
}

enum class MorphMode { Dilate, Erode };

/// Dilation sets a pixel when any SE neighbor is foreground; erosion when all
/// are. Neighbors outside the image count as background in both modes.
[[nodiscard]] inline BinaryImage binary_morph(const BinaryImage& img, const StructuringElement& se,
                                              MorphMode mode) {
    const int w = img.width();
    const int h = img.height();
    // prefix(y, x) = foreground count of row y over columns [0, x).
    std::vector<int> prefix(static_cast<std::size_t>(w + 1) * h, 0);
    for (int y = 0; y < h; ++y) {
        int* p = prefix.data() + static_cast<std::size_t>(y) * (w + 1);
        auto row = img.row(y);
        for (int x = 0; x < w; ++x) p[x + 1] = p[x] + row[x];
    }
    const auto count = [&](int y, int a, int b) {
        const int* p = prefix.data() + static_cast<std::size_t>(y) * (w + 1);
        return p[b + 1] - p[a];
    };

    BinaryImage out(w, h);
    for (int y = 0; y < h; ++y) {
        auto dst = out.row(y);
        for (int x = 0; x < w; ++x) {
            bool result = mode == MorphMode::Erode;
            for (const auto& run : se.runs()) {
                const int ny = y + run.dy;
                const int a = x + run.x0;
                const int b = x + run.x1;
                if (mode == MorphMode::Dilate) {
                    if (ny < 0 || ny >= h || b < 0 || a >= w) continue;
                    if (count(ny, std::max(a, 0), std::min(b, w - 1)) > 0) {
                        result = true;
                        break;
                    }
                } else {
                    if (ny < 0 || ny >= h || a < 0 || b >= w || count(ny, a, b) != b - a + 1) {
                        result = false;
                        break;
                    }
                }
            }
            dst[x] = result ? 1 : 0;
        }
    }
    return out;
}

[[nodiscard]] inline BinaryImage dilate(const BinaryImage& img, const StructuringElement& se) {
    return binary_morph(img, se, MorphMode::Dilate);
}

[[nodiscard]] inline BinaryImage erode(const BinaryImage& img, const StructuringElement& se) {
    return binary_morph(img, se, MorphMode::Erode);
}

/// Morphological closing, evaluated on a canvas padded with `radius` pixels of
/// background and cropped back. Equals erode(dilate(img)) away from the
/// borders, and stays extensive and idempotent next to them.
[[nodiscard]] inline BinaryImage close(const BinaryImage& img, const StructuringElement& se) {
    const int pad = se.radius();
    if (pad == 0) return img;
    const int w = img.width();
    const int h = img.height();
    BinaryImage canvas(w + 2 * pad, h + 2 * pad);
    for (int y = 0; y < h; ++y) {
        std::copy(img.row(y).begin(), img.row(y).end(), canvas.row(y + pad).begin() + pad);
    }
    const BinaryImage closed = erode(dilate(canvas, se), se);
    BinaryImage out(w, h);
    for (int y = 0; y < h; ++y) {
        auto src = closed.row(y + pad).subspan(pad, w);
        std::copy(src.begin(), src.end(), out.row(y).begin());
    }
    return out;
}

struct InvertResult {
    BinaryImage image;
    bool inverted = false;
};

/// Complements the image when foreground is the strict majority.
[[nodiscard]] inline InvertResult auto_invert(const BinaryImage& img) {
    if (2 * foreground_count(img) > img.size()) return {complement(img), true};
    return {img, false};
}

/// Background pixels not 4-connected to the image border become foreground.
[[nodiscard]] inline BinaryImage fill_holes(const BinaryImage& img) {
    const int w = img.width();
    const int h = img.height();
    BinaryImage reached(w, h);
    std::vector<std::pair<int, int>> stack;
    const auto seed = [&](int x, int y) {
        if (!img(x, y) && !reached(x, y)) {
            reached(x, y) = 1;
            stack.emplace_back(x, y);
        }
    };
    for (int x = 0; x < w; ++x) {
        seed(x, 0);
        seed(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        seed(0, y);
        seed(w - 1, y);
    }
    constexpr int kDx[4] = {1, -1, 0, 0};
    constexpr int kDy[4] = {0, 0, 1, -1};
    while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        for (int k = 0; k < 4; ++k) {
            const int nx = x + kDx[k];
            const int ny = y + kDy[k];
            if (img.contains(nx, ny)) seed(nx, ny);
        }
    }
    return complement(reached);
}

enum class Connectivity { Four = 4, Eight = 8 };

struct LabelImage {
    Grid<std::int32_t> labels;
    int component_count = 0;

    [[nodiscard]] int width() const noexcept { return labels.width(); }
    [[nodiscard]] int height() const noexcept { return labels.height(); }
};

/// Labels are assigned 1, 2, ... in raster order of each component's first pixel.
[[nodiscard]] inline LabelImage label_components(const BinaryImage& img,
                                                 Connectivity connectivity = Connectivity::Eight) {
    const int w = img.width();
    const int h = img.height();
    LabelImage result{Grid<std::int32_t>(w, h, 0), 0};
    auto& labels = result.labels;
    const bool eight = connectivity == Connectivity::Eight;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!img(x, y) || labels(x, y) != 0) continue;
            const int id = ++result.component_count;
            labels(x, y) = id;
            stack.emplace_back(x, y);
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if ((dx == 0 && dy == 0) || (!eight && dx != 0 && dy != 0)) continue;
                        const int nx = cx + dx;
                        const int ny = cy + dy;
                        if (img.contains(nx, ny) && img(nx, ny) && labels(nx, ny) == 0) {
                            labels(nx, ny) = id;
                            stack.emplace_back(nx, ny);
                        }
                    }
                }
            }
        }
    }
    return result;
}

struct Component {
    BinaryImage mask;
    std::size_t pixel_count = 0;
    int label = 0;
};

/// Mask of the component with the most pixels; ties go to the smaller label.
[[nodiscard]] inline Component largest_component(const LabelImage& labels) {
    if (labels.component_count < 1) throw NoPotholeFound();
    std::vector<std::size_t> counts(static_cast<std::size_t>(labels.component_count) + 1, 0);
    for (auto id : labels.labels.values()) ++counts[static_cast<std::size_t>(id)];
    int best = 1;
    for (int id = 2; id <= labels.component_count; ++id) {
        if (counts[id] > counts[best]) best = id;
    }
    Component c{BinaryImage(labels.width(), labels.height()), counts[best], best};
    auto src = labels.labels.values();
    auto dst = c.mask.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] == best ? 1 : 0;
    return c;
}

/// Blends `color` over masked pixels: round-half-up(alpha*color + (1-alpha)*pixel).
[[nodiscard]] inline RgbImage overlay_component(const RgbImage& img, const BinaryImage& mask,
                                                Rgb color, double alpha) {
    if (!img.same_shape(mask)) throw DimensionError("overlay mask and image sizes differ");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("overlay alpha must lie in [0,1]");
    const auto blend = [alpha](std::uint8_t over, std::uint8_t base) {
        const double v = alpha * over + (1.0 - alpha) * base;
        return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    };
    RgbImage out = img;
    auto px = out.values();
    auto m = mask.values();
    for (std::size_t i = 0; i < px.size(); ++i) {
        if (!m[i]) continue;
        px[i] = Rgb{blend(color.r, px[i].r), blend(color.g, px[i].g), blend(color.b, px[i].b)};
    }
    return out;
}

}  // namespace pothole
