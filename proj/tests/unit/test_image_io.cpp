#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "pothole/image_io.hpp"

using namespace pothole;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "pothole_io_test";
    fs::create_directories(dir);
    return dir / name;
}

RgbImage random_rgb(int w, int h, unsigned seed) {
    std::mt19937 rng(seed);
    RgbImage img(w, h);
    for (auto& p : img.values()) {
        p = Rgb{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng())};
    }
    return img;
}

}  // namespace

TEST(ImageIo, PngRoundTrip) {
    const RgbImage img = random_rgb(13, 7, 3);
    const fs::path p = scratch("rt.png");
    io::write_image(p, img);
    EXPECT_EQ(io::read_image(p), img);
}

TEST(ImageIo, PpmRoundTrip) {
    const RgbImage img = random_rgb(5, 9, 4);
    const fs::path p = scratch("rt.ppm");
    io::write_image(p, img);
    EXPECT_EQ(io::read_image(p), img);
}

TEST(ImageIo, GrayPgmReadsBackAsEqualChannels) {
    GrayImage g(4, 2, std::vector<double>{0, 0.5, 1, 0.25, 0.75, 0.1, 0.9, 0.3});
    const fs::path p = scratch("g.pgm");
    io::write_image(p, g);
    const RgbImage back = io::read_image(p);
    ASSERT_EQ(back.width(), 4);
    for (int x = 0; x < 4; ++x) {
        EXPECT_EQ(back(x, 0).r, back(x, 0).g);
        EXPECT_EQ(back(x, 0).r, back(x, 0).b);
    }
    EXPECT_EQ(back(2, 0).r, 255);
    EXPECT_EQ(back(0, 0).r, 0);
}

TEST(ImageIo, BinaryWritesBlackAndWhite) {
    BinaryImage b(3, 1, std::vector<std::uint8_t>{0, 1, 0});
    const fs::path p = scratch("b.png");
    io::write_image(p, b);
    const RgbImage back = io::read_image(p);
    EXPECT_EQ(back(0, 0), (Rgb{0, 0, 0}));
    EXPECT_EQ(back(1, 0), (Rgb{255, 255, 255}));
}

TEST(ImageIo, MissingFileIsIoError) {
    EXPECT_THROW((void)io::read_image(scratch("does_not_exist.png")), IoError);
}

TEST(ImageIo, GarbageIsIoError) {
    const fs::path p = scratch("garbage.png");
    std::ofstream(p) << "definitely not an image";
    EXPECT_THROW((void)io::read_image(p), IoError);
}
