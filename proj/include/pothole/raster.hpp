#pragma once

// Row-major raster containers, luminance conversion and level thresholding.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pothole/error.hpp"

namespace pothole {

/// Dense row-major 2-D array. Width and height are always at least 1.
template <typename T>
class Grid {
public:
    using value_type = T;

    Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
        check_dims(width, height);
        data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
    }

    Grid(int width, int height, std::vector<T> data)
        : width_(width), height_(height), data_(std::move(data)) {
        check_dims(width, height);
        if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw DimensionError("pixel count " + std::to_string(data_.size()) + " does not match " +
                                 std::to_string(width) + "x" + std::to_string(height));
        }
    }

    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] bool contains(int x, int y) const noexcept {
        return x >= 0 && y >= 0 && x < width_ && y < height_;
    }

    T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
    const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

    T& at(int x, int y) {
        if (!contains(x, y)) throw DimensionError("pixel index out of range");
        return data_[index(x, y)];
    }
    const T& at(int x, int y) const {
        if (!contains(x, y)) throw DimensionError("pixel index out of range");
        return data_[index(x, y)];
    }

    [[nodiscard]] std::span<T> values() noexcept { return data_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return data_; }

    [[nodiscard]] std::span<T> row(int y) noexcept {
        return std::span<T>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }
    [[nodiscard]] std::span<const T> row(int y) const noexcept {
        return std::span<const T>(data_).subspan(static_cast<std::size_t>(y) * width_, width_);
    }

    template <typename U>
    [[nodiscard]] bool same_shape(const Grid<U>& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    static void check_dims(int width, int height) {
        if (width < 1 || height < 1) {
            throw DimensionError("raster dimensions must be at least 1x1, got " +
                                 std::to_string(width) + "x" + std::to_string(height));
        }
    }

    [[nodiscard]] std::size_t index(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    std::vector<T> data_;
};

/// Unbounded real-valued field (filter responses, gradients).
using Field = Grid<double>;

/// Unit-interval intensity image.
class GrayImage : public Grid<double> {
public:
    GrayImage(int width, int height, double fill = 0.0) : Grid<double>(width, height, fill) {
        validate();
    }
    GrayImage(int width, int height, std::vector<double> data)
        : Grid<double>(width, height, std::move(data)) {
        validate();
    }

private:
    void validate() const {
        for (double v : values()) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw ValidationError("gray intensity outside [0,1]: " + std::to_string(v));
            }
        }
    }
};

/// One bit per pixel, stored as 0/1 bytes.
using BinaryImage = Grid<std::uint8_t>;

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

using RgbImage = Grid<Rgb>;

/// Threshold in [0,1]; pixels strictly brighter than it become foreground.
class Level {
public:
    explicit Level(double value) : value_(value) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw ValidationError("level must lie in [0,1], got " + std::to_string(value));
        }
    }
    [[nodiscard]] double value() const noexcept { return value_; }
    friend bool operator==(const Level&, const Level&) = default;

private:
    double value_;
};

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

[[nodiscard]] inline double luminance(Rgb p) noexcept {
    const double y = (kLumaR * p.r + kLumaG * p.g + kLumaB * p.b) / 255.0;
    return std::clamp(y, 0.0, 1.0);
}

[[nodiscard]] inline GrayImage luminance(const RgbImage& img) {
    std::vector<double> out(img.size());
    std::transform(img.values().begin(), img.values().end(), out.begin(),
                   [](Rgb p) { return luminance(p); });
    return GrayImage(img.width(), img.height(), std::move(out));
}

[[nodiscard]] inline BinaryImage binarize(const GrayImage& img, Level level) {
    BinaryImage out(img.width(), img.height());
    const double t = level.value();
    auto src = img.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > t ? 1 : 0;
    return out;
}

namespace detail {
inline int histogram_bin(double v) noexcept {
    return std::clamp(static_cast<int>(v * 255.0 + 0.5), 0, 255);
}
}  // namespace detail

/// Otsu's method on a 256-bin histogram. When several cut points share the
/// maximal between-class variance, the level sits in the middle of that
/// plateau. Throws NoThresholdError when all pixels fall in a single bin.
[[nodiscard]] inline Level otsu_level(const GrayImage& img) {
    std::array<double, 256> hist{};
    for (double v : img.values()) hist[detail::histogram_bin(v)] += 1.0;

    const double total = static_cast<double>(img.size());
    double sum_all = 0.0;
    for (int k = 0; k < 256; ++k) sum_all += k * hist[k];

    double w0 = 0.0;
    double sum0 = 0.0;
    double best = -1.0;
    int first_best = -1;
    int last_best = -1;
    for (int t = 0; t < 255; ++t) {
        w0 += hist[t];
        sum0 += t * hist[t];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (between > best) {
            best = between;
            first_best = last_best = t;
        } else if (between == best) {
            last_best = t;
        }
    }
    if (first_best < 0) throw NoThresholdError();
    const double cut = 0.5 * (first_best + last_best);
    return Level((cut + 0.5) / 255.0);
}

[[nodiscard]] inline std::size_t foreground_count(const BinaryImage& img) noexcept {
    return static_cast<std::size_t>(std::count(img.values().begin(), img.values().end(), 1));
}

[[nodiscard]] inline BinaryImage complement(const BinaryImage& img) {
    BinaryImage out(img.width(), img.height());
    auto src = img.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 0 : 1;
    return out;
}

/// 0/1 bits as a 0.0/1.0 gray image.
[[nodiscard]] inline GrayImage to_gray(const BinaryImage& img) {
    std::vector<double> out(img.size());
    std::transform(img.values().begin(), img.values().end(), out.begin(),
                   [](std::uint8_t b) { return b ? 1.0 : 0.0; });
    return GrayImage(img.width(), img.height(), std::move(out));
}

[[nodiscard]] inline RgbImage to_rgb(const GrayImage& img) {
    RgbImage out(img.width(), img.height());
    auto src = img.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto v = static_cast<std::uint8_t>(std::lround(src[i] * 255.0));
        dst[i] = Rgb{v, v, v};
    }
    return out;
}

}  // namespace pothole
