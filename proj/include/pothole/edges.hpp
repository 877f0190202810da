#pragma once

// Canny and Laplacian-of-Gaussian zero-crossing edge detectors.
//
// All convolutions use replicate-edge padding.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pothole/error.hpp"
#include "pothole/raster.hpp"

namespace pothole {

struct CannyParams {
    double sigma = 1.4;
    double low_frac = 0.10;
    double high_frac = 0.20;

    void validate() const {
        if (!(sigma > 0.0)) throw ValidationError("canny sigma must be > 0");
        if (!(low_frac > 0.0 && low_frac < high_frac && high_frac <= 1.0)) {
            throw ValidationError("canny fractions must satisfy 0 < low_frac < high_frac <= 1");
        }
    }
};

struct ZerocrossParams {
    double sigma = 2.0;
    /// Minimum absolute response difference across a crossing. Unset selects
    /// the automatic threshold (0.75 x RMS of the response); an explicit 0
    /// keeps every sign change.
    std::optional<double> threshold;

    void validate() const {
        if (!(sigma > 0.0)) throw ValidationError("zerocross sigma must be > 0");
        if (threshold && !(*threshold >= 0.0)) {
            throw ValidationError("zerocross threshold must be >= 0");
        }
    }
};

inline constexpr double kAutoZerocrossFactor = 0.75;

namespace edges_detail {

inline int kernel_radius(double sigma) { return static_cast<int>(std::ceil(3.0 * sigma)); }

inline int clamp_index(int i, int n) noexcept { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

}  // namespace edges_detail

/// Sampled Gaussian truncated at ceil(3 sigma) and renormalized to unit sum.
[[nodiscard]] inline std::vector<double> gaussian_kernel(double sigma) {
    const int r = edges_detail::kernel_radius(sigma);
    std::vector<double> k(2 * r + 1);
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        k[i + r] = std::exp(-(i * i) / (2.0 * sigma * sigma));
        sum += k[i + r];
    }
    for (double& v : k) v /= sum;
    return k;
}

/// Second derivative of the normalized Gaussian, shifted to zero sum so that
/// constant signals give exactly zero response.
[[nodiscard]] inline std::vector<double> gaussian_second_derivative_kernel(double sigma) {
    const auto g = gaussian_kernel(sigma);
    const int r = static_cast<int>(g.size() / 2);
    const double s2 = sigma * sigma;
    std::vector<double> k(g.size());
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        k[i + r] = (static_cast<double>(i * i) / (s2 * s2) - 1.0 / s2) * g[i + r];
        sum += k[i + r];
    }
    const double mean = sum / static_cast<double>(k.size());
    for (double& v : k) v -= mean;
    return k;
}

/// Convolves every row with a symmetric odd-length kernel.
[[nodiscard]] inline Field convolve_rows(const Field& src, const std::vector<double>& kernel) {
    const int r = static_cast<int>(kernel.size() / 2);
    const int w = src.width();
    Field out(w, src.height());
    std::vector<double> padded(static_cast<std::size_t>(w + 2 * r));
    for (int y = 0; y < src.height(); ++y) {
        auto in = src.row(y);
        for (int i = 0; i < w + 2 * r; ++i) padded[i] = in[edges_detail::clamp_index(i - r, w)];
        auto dst = out.row(y);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * padded[x + k];
            dst[x] = acc;
        }
    }
    return out;
}

/// Convolves every column with a symmetric odd-length kernel.
[[nodiscard]] inline Field convolve_cols(const Field& src, const std::vector<double>& kernel) {
    const int r = static_cast<int>(kernel.size() / 2);
    const int w = src.width();
    const int h = src.height();
    Field out(w, h);
    for (int y = 0; y < h; ++y) {
        auto dst = out.row(y);
        for (std::size_t k = 0; k < kernel.size(); ++k) {
            const double c = kernel[k];
            auto in = src.row(edges_detail::clamp_index(y + static_cast<int>(k) - r, h));
            for (int x = 0; x < w; ++x) dst[x] += c * in[x];
        }
    }
    return out;
}

[[nodiscard]] inline Field gaussian_blur(const Field& src, double sigma) {
    const auto k = gaussian_kernel(sigma);
    return convolve_cols(convolve_rows(src, k), k);
}

/// Laplacian-of-Gaussian response, computed as the sum of two separable passes
/// (d2/dx2 G) * (G) + (G) * (d2/dy2 G).
[[nodiscard]] inline Field log_response(const GrayImage& img, double sigma) {
    const auto g = gaussian_kernel(sigma);
    const auto g2 = gaussian_second_derivative_kernel(sigma);
    const Field& src = img;
    Field xx = convolve_cols(convolve_rows(src, g2), g);
    const Field yy = convolve_cols(convolve_rows(src, g), g2);
    auto a = xx.values();
    auto b = yy.values();
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return xx;
}

struct Gradient {
    Field gx;
    Field gy;
    Field magnitude;
};

/// 3x3 Sobel gradient with replicate padding; x grows rightwards, y downwards.
[[nodiscard]] inline Gradient sobel(const Field& src) {
    const int w = src.width();
    const int h = src.height();
    Gradient g{Field(w, h), Field(w, h), Field(w, h)};
    using edges_detail::clamp_index;
    for (int y = 0; y < h; ++y) {
        auto up = src.row(clamp_index(y - 1, h));
        auto mid = src.row(y);
        auto down = src.row(clamp_index(y + 1, h));
        for (int x = 0; x < w; ++x) {
            const int xl = clamp_index(x - 1, w);
            const int xr = clamp_index(x + 1, w);
            const double gx = (up[xr] + 2.0 * mid[xr] + down[xr]) - (up[xl] + 2.0 * mid[xl] + down[xl]);
            const double gy = (down[xl] + 2.0 * down[x] + down[xr]) - (up[xl] + 2.0 * up[x] + up[xr]);
            g.gx(x, y) = gx;
            g.gy(x, y) = gy;
            g.magnitude(x, y) = std::hypot(gx, gy);
        }
    }
    return g;
}

/// Quantized gradient direction: 0 = 0 deg, 1 = 45 deg, 2 = 90 deg, 3 = 135 deg.
[[nodiscard]] inline int quantize_direction(double gx, double gy) noexcept {
    constexpr double kPi = 3.14159265358979323846;
    double deg = std::atan2(gy, gx) * 180.0 / kPi;
    if (deg < 0.0) deg += 180.0;
    if (deg < 22.5 || deg >= 157.5) return 0;
    if (deg < 67.5) return 1;
    if (deg < 112.5) return 2;
    return 3;
}

/// Neighbor step (dx, dy) along a quantized direction.
[[nodiscard]] inline std::pair<int, int> direction_step(int dir) noexcept {
    switch (dir) {
        case 0: return {1, 0};
        case 1: return {1, 1};
        case 2: return {0, 1};
        default: return {-1, 1};
    }
}

/// Non-maximum suppression. A pixel survives when its magnitude is positive,
/// strictly greater than the neighbor behind it along the gradient and no less
/// than the neighbor ahead; the asymmetry keeps plateaus one pixel wide.
[[nodiscard]] inline BinaryImage non_maximum_suppression(const Gradient& g) {
    const int w = g.magnitude.width();
    const int h = g.magnitude.height();
    BinaryImage keep(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double m = g.magnitude(x, y);
            if (m <= 0.0) continue;
            const auto [dx, dy] = direction_step(quantize_direction(g.gx(x, y), g.gy(x, y)));
            const double ahead = g.magnitude.contains(x + dx, y + dy) ? g.magnitude(x + dx, y + dy) : 0.0;
            const double behind = g.magnitude.contains(x - dx, y - dy) ? g.magnitude(x - dx, y - dy) : 0.0;
            if (m > behind && m >= ahead) keep(x, y) = 1;
        }
    }
    return keep;
}

/// Contrast-normalizes to [0,1] and snaps to a 2^-20 grid. Thresholds in the
/// detector are relative to the maximum gradient, so this makes the result
/// identical for any positive affine rescaling of the input.
[[nodiscard]] inline std::optional<Field> normalize_contrast(const GrayImage& img) {
    const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
    const double min = *lo;
    const double range = *hi - *lo;
    if (!(range > 0.0)) return std::nullopt;
    constexpr double kGrid = 1048576.0;
    Field out(img.width(), img.height());
    auto src = img.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = std::nearbyint((src[i] - min) / range * kGrid) / kGrid;
    }
    return out;
}

[[nodiscard]] inline BinaryImage canny(const GrayImage& img, const CannyParams& params = {}) {
    params.validate();
    if (img.width() < 3 || img.height() < 3) {
        throw DimensionError("canny requires an image of at least 3x3");
    }
    const int w = img.width();
    const int h = img.height();
    BinaryImage edges(w, h);

    const auto normalized = normalize_contrast(img);
    if (!normalized) return edges;

    const Gradient grad = sobel(gaussian_blur(*normalized, params.sigma));
    const double gmax = *std::max_element(grad.magnitude.values().begin(), grad.magnitude.values().end());
    if (!(gmax > 0.0)) return edges;

    const BinaryImage thin = non_maximum_suppression(grad);
    const double high = params.high_frac * gmax;
    const double low = params.low_frac * gmax;

    // Hysteresis: grow from strong pixels through 8-connected weak ones.
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (thin(x, y) && grad.magnitude(x, y) >= high && !edges(x, y)) {
                edges(x, y) = 1;
                stack.emplace_back(x, y);
                while (!stack.empty()) {
                    const auto [cx, cy] = stack.back();
                    stack.pop_back();
                    for (int dy = -1; dy <= 1; ++dy) {
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int nx = cx + dx;
                            const int ny = cy + dy;
                            if (!edges.contains(nx, ny) || edges(nx, ny)) continue;
                            if (thin(nx, ny) && grad.magnitude(nx, ny) >= low) {
                                edges(nx, ny) = 1;
                                stack.emplace_back(nx, ny);
                            }
                        }
                    }
                }
            }
        }
    }
    return edges;
}

/// Effective crossing threshold for a LoG response.
[[nodiscard]] inline double zerocross_threshold(const Field& response, const ZerocrossParams& params) {
    if (params.threshold) return *params.threshold;
    double sum_sq = 0.0;
    for (double v : response.values()) sum_sq += v * v;
    return kAutoZerocrossFactor * std::sqrt(sum_sq / static_cast<double>(response.size()));
}

/// Marks every pixel whose response has strictly opposite sign to one of its
/// 8 neighbors with an absolute difference above `threshold`.
[[nodiscard]] inline BinaryImage mark_sign_changes(const Field& response, double threshold) {
    const int w = response.width();
    const int h = response.height();
    BinaryImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v = response(x, y);
            if (v == 0.0) continue;
            bool edge = false;
            for (int dy = -1; dy <= 1 && !edge; ++dy) {
                for (int dx = -1; dx <= 1 && !edge; ++dx) {
                    if ((dx == 0 && dy == 0) || !response.contains(x + dx, y + dy)) continue;
                    const double n = response(x + dx, y + dy);
                    edge = ((v > 0.0 && n < 0.0) || (v < 0.0 && n > 0.0)) && std::abs(v - n) > threshold;
                }
            }
            out(x, y) = edge ? 1 : 0;
        }
    }
    return out;
}

[[nodiscard]] inline BinaryImage zerocross(const GrayImage& img, const ZerocrossParams& params = {}) {
    params.validate();
    const int side = 2 * edges_detail::kernel_radius(params.sigma) + 1;
    if (img.width() < side || img.height() < side) {
        throw DimensionError("zerocross requires at least " + std::to_string(side) + "x" +
                             std::to_string(side) + " pixels for sigma " + std::to_string(params.sigma));
    }
    const Field response = log_response(img, params.sigma);
    return mark_sign_changes(response, zerocross_threshold(response, params));
}

}  // namespace pothole
