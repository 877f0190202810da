#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "pothole/morph.hpp"

using namespace pothole;

namespace {

BinaryImage square(int w, int h, int x0, int y0, int side) {
    BinaryImage img(w, h);
    for (int y = y0; y < y0 + side; ++y)
        for (int x = x0; x < x0 + side; ++x) img(x, y) = 1;
    return img;
}

}  // namespace

TEST(DiskSe, Cardinalities) {
    EXPECT_EQ(disk_se(0).size(), 1u);
    EXPECT_EQ(disk_se(1).size(), 5u);
    EXPECT_EQ(disk_se(2).size(), 13u);
    EXPECT_EQ(disk_se(3).size(), 29u);
    for (int r = 0; r <= 6; ++r) EXPECT_EQ(disk_se(r).size(), oracle::disk(r).size()) << r;
}

TEST(DiskSe, RadiusOneIsPlus) {
    const StructuringElement se = disk_se(1);
    const std::set<Offset> got(se.offsets().begin(), se.offsets().end());
    const std::set<Offset> want{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    EXPECT_EQ(got, want);
}

TEST(StructuringElement, Invariants) {
    EXPECT_THROW(StructuringElement({{1, 0}, {-1, 0}}, 1), ValidationError);
    EXPECT_THROW(StructuringElement({{0, 0}, {1, 0}}, 1), ValidationError);
    EXPECT_THROW(StructuringElement({{0, 0}, {2, 0}, {-2, 0}}, 1), ValidationError);
    EXPECT_THROW((void)disk_se(-1), ValidationError);
}

TEST(Dilate, SinglePixelBecomesPlus) {
    BinaryImage img(5, 5);
    img(2, 2) = 1;
    const BinaryImage d = dilate(img, disk_se(1));
    EXPECT_EQ(foreground_count(d), 5u);
    EXPECT_TRUE(d(1, 2) && d(3, 2) && d(2, 1) && d(2, 3));
}

TEST(Erode, SquareShrinksToInterior) {
    const BinaryImage e = erode(square(9, 9, 2, 2, 5), disk_se(1));
    EXPECT_EQ(e, square(9, 9, 3, 3, 3));
}

TEST(Morph, RadiusZeroIsIdentity) {
    std::mt19937_64 rng(2);
    const auto img = oracle::random_binary(rng, 16, 11, 0.5);
    EXPECT_EQ(erode(dilate(img, disk_se(0)), disk_se(0)), img);
}

TEST(Morph, MatchesBruteForceOracle) {
    std::mt19937_64 rng(77);
    for (int r = 0; r <= 3; ++r) {
        const auto se = oracle::disk(r);
        for (int i = 0; i < 15; ++i) {
            const auto img = oracle::random_binary(rng, 32, 32, 0.15 + 0.05 * i);
            EXPECT_EQ(dilate(img, disk_se(r)), oracle::morph(img, se, true)) << "r=" << r;
            EXPECT_EQ(erode(img, disk_se(r)), oracle::morph(img, se, false)) << "r=" << r;
        }
    }
}

TEST(Morph, NonRectangularImages) {
    std::mt19937_64 rng(78);
    const auto img = oracle::random_binary(rng, 3, 40, 0.4);
    EXPECT_EQ(dilate(img, disk_se(3)), oracle::morph(img, oracle::disk(3), true));
    EXPECT_EQ(erode(img, disk_se(3)), oracle::morph(img, oracle::disk(3), false));
}

TEST(Morph, DualityOnInterior) {
    std::mt19937_64 rng(13);
    for (int r = 1; r <= 3; ++r) {
        const auto img = oracle::random_binary(rng, 32, 32, 0.5);
        const auto lhs = complement(erode(img, disk_se(r)));
        const auto rhs = dilate(complement(img), disk_se(r));
        for (int y = r; y < 32 - r; ++y)
            for (int x = r; x < 32 - r; ++x) EXPECT_EQ(lhs(x, y), rhs(x, y));
    }
}

TEST(Close, BridgesSmallGap) {
    // Two vertical strokes three columns apart: the gap between them closes.
    BinaryImage img(15, 15);
    for (int y = 4; y <= 10; ++y) img(4, y) = img(7, y) = 1;
    const BinaryImage c = close(img, disk_se(2));
    for (int x = 4; x <= 7; ++x) EXPECT_EQ(c(x, 7), 1) << x;
    EXPECT_EQ(c, oracle::close_unbounded(img, 2));
}

TEST(Close, IsolatedPointsStayIsolated) {
    // A disk can always pass beside a lone pixel pair, so closing keeps them apart.
    BinaryImage img(11, 5);
    img(4, 2) = 1;
    img(7, 2) = 1;
    EXPECT_EQ(close(img, disk_se(2)), img);
    EXPECT_EQ(oracle::close_unbounded(img, 2), img);
}

TEST(Close, SolidBlobUnchangedAndEmptyStaysEmpty) {
    const auto blob = square(20, 20, 5, 5, 8);
    EXPECT_EQ(close(blob, disk_se(2)), blob);
    EXPECT_EQ(foreground_count(close(BinaryImage(10, 10), disk_se(3))), 0u);
}

TEST(Close, ExtensiveIdempotentAndMatchesUnboundedOracle) {
    std::mt19937_64 rng(31);
    for (int r = 0; r <= 3; ++r) {
        for (int i = 0; i < 10; ++i) {
            const auto img = oracle::random_binary(rng, 32, 32, 0.1 + 0.08 * i);
            const auto c = close(img, disk_se(r));
            for (std::size_t k = 0; k < img.size(); ++k) EXPECT_LE(img.values()[k], c.values()[k]);
            EXPECT_EQ(close(c, disk_se(r)), c);
            EXPECT_EQ(c, oracle::close_unbounded(img, r));
        }
    }
}

TEST(AutoInvert, MajorityRule) {
    BinaryImage img(10, 10);
    for (int i = 0; i < 90; ++i) img.values()[i] = 1;
    auto r = auto_invert(img);
    EXPECT_TRUE(r.inverted);
    EXPECT_EQ(foreground_count(r.image), 10u);

    BinaryImage few(10, 10);
    for (int i = 0; i < 10; ++i) few.values()[i] = 1;
    r = auto_invert(few);
    EXPECT_FALSE(r.inverted);
    EXPECT_EQ(r.image, few);

    BinaryImage half(10, 10);
    for (int i = 0; i < 50; ++i) half.values()[i] = 1;
    r = auto_invert(half);
    EXPECT_FALSE(r.inverted);
    EXPECT_EQ(r.image, half);
}

TEST(FillHoles, SolidSquareUnchanged) {
    const auto sq = square(12, 12, 3, 3, 6);
    EXPECT_EQ(fill_holes(sq), sq);
}

TEST(FillHoles, RingBecomesDisk) {
    BinaryImage ring(41, 41), disk(41, 41);
    for (int y = 0; y < 41; ++y) {
        for (int x = 0; x < 41; ++x) {
            const double d = std::hypot(x - 20, y - 20);
            if (std::abs(d - 12.0) <= 0.5) ring(x, y) = 1;
        }
    }
    // Disk = ring plus everything strictly inside it.
    for (int y = 0; y < 41; ++y)
        for (int x = 0; x < 41; ++x) disk(x, y) = ring(x, y) || std::hypot(x - 20, y - 20) < 12.0;
    EXPECT_EQ(fill_holes(ring), disk);
}

TEST(FillHoles, CavityOpenToBorderStaysOpen) {
    BinaryImage u(10, 10);
    for (int y = 2; y < 8; ++y) {
        u(2, y) = 1;
        u(7, y) = 1;
    }
    for (int x = 2; x < 8; ++x) u(x, 7) = 1;
    EXPECT_EQ(fill_holes(u), u);
}

TEST(FillHoles, DiagonalLeakDoesNotCount) {
    // Background connected to the outside only diagonally is still a hole.
    BinaryImage img(5, 5);
    for (int k = 0; k < 5; ++k) {
        img(k, 0) = img(k, 4) = img(0, k) = img(4, k) = 1;
    }
    img(4, 4) = 0;
    img(3, 3) = 1;
    img(3, 4) = 1;
    img(4, 3) = 1;
    const auto filled = fill_holes(img);
    EXPECT_EQ(filled(2, 2), 1);
    EXPECT_EQ(filled(4, 4), 0);
}

TEST(FillHoles, MatchesRelaxationOracle) {
    std::mt19937_64 rng(90);
    for (int i = 0; i < 100; ++i) {
        const auto img = oracle::random_binary(rng, 24, 19, 0.3 + 0.004 * i);
        EXPECT_EQ(fill_holes(img), oracle::fill_holes(img));
    }
}

TEST(Label, Examples) {
    EXPECT_EQ(label_components(BinaryImage(5, 5)).component_count, 0);

    BinaryImage two(10, 10);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) two(x, y) = two(x + 6, y + 6) = 1;
    EXPECT_EQ(label_components(two).component_count, 2);

    BinaryImage diag(3, 3);
    diag(0, 0) = diag(1, 1) = 1;
    EXPECT_EQ(label_components(diag, Connectivity::Eight).component_count, 1);
    EXPECT_EQ(label_components(diag, Connectivity::Four).component_count, 2);
}

TEST(Label, RasterOrderIds) {
    BinaryImage img(6, 3);
    img(5, 0) = 1;
    img(0, 2) = 1;
    const auto l = label_components(img);
    EXPECT_EQ(l.labels(5, 0), 1);
    EXPECT_EQ(l.labels(0, 2), 2);
}

TEST(Label, MatchesUnionFindPartition) {
    std::mt19937_64 rng(55);
    for (const bool eight : {false, true}) {
        for (int i = 0; i < 60; ++i) {
            const auto img = oracle::random_binary(rng, 21, 17, 0.2 + 0.01 * i);
            const auto l = label_components(img, eight ? Connectivity::Eight : Connectivity::Four);
            const auto p = oracle::union_find_components(img, eight);
            ASSERT_EQ(l.component_count, p.count);
            std::map<int, int> root_to_label;
            std::map<int, int> label_to_root;
            for (std::size_t k = 0; k < img.size(); ++k) {
                const int lab = l.labels.values()[k];
                ASSERT_EQ(lab == 0, p.root[k] < 0);
                if (lab == 0) continue;
                auto [a, fresh_a] = root_to_label.emplace(p.root[k], lab);
                auto [b, fresh_b] = label_to_root.emplace(lab, p.root[k]);
                EXPECT_EQ(a->second, lab);
                EXPECT_EQ(b->second, p.root[k]);
            }
        }
    }
}

TEST(Largest, PicksBiggestThenSmallestLabel) {
    BinaryImage img(20, 20);
    for (int i = 0; i < 10; ++i) img(i, 0) = 1;
    for (int y = 5; y < 10; ++y)
        for (int x = 0; x < 10; ++x) img(x, y) = 1;
    auto c = largest_component(label_components(img));
    EXPECT_EQ(c.pixel_count, 50u);
    EXPECT_EQ(c.label, 2);

    BinaryImage tie(10, 3);
    tie(0, 0) = tie(1, 0) = 1;
    tie(5, 2) = tie(6, 2) = 1;
    c = largest_component(label_components(tie));
    EXPECT_EQ(c.label, 1);
    EXPECT_EQ(c.mask(0, 0), 1);
    EXPECT_EQ(c.mask(5, 2), 0);

    EXPECT_THROW((void)largest_component(label_components(BinaryImage(4, 4))), NoPotholeFound);
}

TEST(Overlay, Blending) {
    RgbImage img(2, 1, Rgb{100, 100, 100});
    BinaryImage mask(2, 1);
    mask(0, 0) = 1;
    auto o = overlay_component(img, mask, Rgb{0, 0, 255}, 0.5);
    EXPECT_EQ(o(0, 0), (Rgb{50, 50, 178}));
    EXPECT_EQ(o(1, 0), (Rgb{100, 100, 100}));
    EXPECT_EQ(overlay_component(img, mask, Rgb{1, 2, 3}, 1.0)(0, 0), (Rgb{1, 2, 3}));
    EXPECT_EQ(overlay_component(img, mask, Rgb{1, 2, 3}, 0.0), img);
    EXPECT_THROW((void)overlay_component(img, BinaryImage(1, 1), Rgb{}, 0.5), DimensionError);
}
