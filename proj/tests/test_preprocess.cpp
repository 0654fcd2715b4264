#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "facehop/errors.hpp"
#include "facehop/image.hpp"
#include "facehop/image_io.hpp"
#include "facehop/preprocess.hpp"
#include "facehop/rng.hpp"

using namespace facehop;

namespace {

Image random_image(int w, int h, std::uint64_t seed) {
    Image img(w, h);
    Rng rng(seed);
    for (double& v : img.data) v = rng.uniform(0.0, 255.0);
    return img;
}

Landmarks eyes(double lx, double ly, double rx, double ry) {
    Landmarks lm;
    lm.left_x = lx;
    lm.left_y = ly;
    lm.right_x = rx;
    lm.right_y = ry;
    return lm;
}

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("landmark validation rejects swapped, coincident and out-of-frame eyes") {
    Image img = random_image(32, 32, 1);
    CHECK_NOTHROW(validate_landmarks(img, eyes(10, 16, 22, 16)));
    CHECK_THROWS_AS(validate_landmarks(img, eyes(22, 16, 10, 16)), ValidationError);
    CHECK_THROWS_AS(validate_landmarks(img, eyes(16, 16, 16, 16)), ValidationError);
    CHECK_THROWS_AS(validate_landmarks(img, eyes(-1, 16, 22, 16)), ValidationError);
    CHECK_THROWS_AS(validate_landmarks(img, eyes(10, 16, 22, 40)), ValidationError);
}

TEST_CASE("histogram equalization maps the worked 16-pixel example to 0/128/255") {
    // 8 pixels of 0, 4 of 100, 4 of 200. cdf = 8, 12, 16; cdf_min = 8,
    // so the mapped levels are round(255 * {0, 4, 8} / 8) = 0, 128, 255.
    Image img(4, 4);
    for (int i = 0; i < 8; ++i) img.data[static_cast<std::size_t>(i)] = 0.0;
    for (int i = 8; i < 12; ++i) img.data[static_cast<std::size_t>(i)] = 100.0;
    for (int i = 12; i < 16; ++i) img.data[static_cast<std::size_t>(i)] = 200.0;
    Image eq = equalize_hist(img);
    for (int i = 0; i < 8; ++i) CHECK(eq.data[static_cast<std::size_t>(i)] == 0.0);
    for (int i = 8; i < 12; ++i) CHECK(eq.data[static_cast<std::size_t>(i)] == 128.0);
    for (int i = 12; i < 16; ++i) CHECK(eq.data[static_cast<std::size_t>(i)] == 255.0);
}

TEST_CASE("histogram equalization sends a constant image to zero") {
    Image img(5, 5);
    for (double& v : img.data) v = 77.0;
    Image eq = equalize_hist(img);
    for (double v : eq.data) CHECK(v == 0.0);
}

TEST_CASE("equalization is monotone: pixel order never inverts") {
    Image img = random_image(16, 16, 2);
    Image eq = equalize_hist(img);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        for (std::size_t j = 0; j < img.data.size(); ++j) {
            if (std::lround(img.data[i]) < std::lround(img.data[j])) {
                CHECK(eq.data[i] <= eq.data[j]);
            }
        }
    }
}

TEST_CASE("alignment leaves an already-horizontal pair untouched") {
    Image img = random_image(32, 32, 3);
    Image out = align(img, eyes(10, 16, 22, 16));
    for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(out.data[i] == img.data[i]);
}

TEST_CASE("a 45-degree eye line becomes horizontal with midpoint and distance preserved") {
    Image img = random_image(32, 32, 4);
    Landmarks lm = eyes(10, 10, 22, 22);
    Landmarks out = aligned_landmarks(img, lm);
    CHECK(out.left_y == doctest::Approx(out.right_y).epsilon(1e-12));
    CHECK(0.5 * (out.left_x + out.right_x) == doctest::Approx(16.0));
    CHECK(0.5 * (out.left_y + out.right_y) == doctest::Approx(16.0));
    const double d = std::hypot(out.right_x - out.left_x, out.right_y - out.left_y);
    CHECK(d == doctest::Approx(12.0 * std::sqrt(2.0)));
    CHECK(out.left_x == doctest::Approx(16.0 - 6.0 * std::sqrt(2.0)));
    CHECK(out.right_x == doctest::Approx(16.0 + 6.0 * std::sqrt(2.0)));
}

TEST_CASE("crop takes the expected window: side round(2.2 d), eyes at 40% height") {
    // Coordinate-encoded image so each crop pixel reveals its source.
    Image img(100, 100);
    for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 100; ++x) img.at(x, y) = x + 1000.0 * y;

    Image out = crop(img, eyes(40, 50, 60, 50));
    REQUIRE(out.width == 44);  // round(2.2 * 20)
    REQUIRE(out.height == 44);
    // left = lround(50 - 43/2) = 29, top = lround(50 - 0.4*44) = 32.
    CHECK(out.at(0, 0) == 29 + 1000.0 * 32);
    CHECK(out.at(43, 43) == 72 + 1000.0 * 75);
}

TEST_CASE("crop translates to stay inside the frame near borders") {
    Image img = random_image(100, 100, 5);
    Image out = crop(img, eyes(5, 5, 25, 5));  // would extend above the top
    CHECK(out.width == 44);
    CHECK(out.at(0, 0) == img.at(0, 0));  // clamped to the corner
}

TEST_CASE("crop caps the window at the image side") {
    Image img = random_image(40, 40, 6);
    Image out = crop(img, eyes(5, 20, 35, 20));  // round(2.2 * 30) = 66 > 40
    CHECK(out.width == 40);
    CHECK(out.height == 40);
}

TEST_CASE("tiny inter-eye distances are rejected") {
    Image img = random_image(32, 32, 7);
    CHECK_THROWS_AS(crop(img, eyes(15, 16, 16, 16)), ValidationError);
}

TEST_CASE("the full chain always lands on 32x32") {
    for (int side : {40, 64, 100}) {
        Image img = random_image(side, side, static_cast<std::uint64_t>(side));
        Image out = preprocess_image(
            img, eyes(0.3 * side, 0.4 * side, 0.7 * side, 0.4 * side));
        CHECK(out.width == 32);
        CHECK(out.height == 32);
    }
}

TEST_CASE("canonical landmarks describe a 32x32 crop exactly") {
    // Cropping a 32x32 image at its canonical eye positions is the identity,
    // so synthesized 32x32 images can re-enter the pipeline unchanged.
    Landmarks lm = canonical_aligned_landmarks();
    CHECK(lm.left_y == doctest::Approx(0.40 * 32));
    CHECK(lm.left_y == lm.right_y);
    CHECK(0.5 * (lm.left_x + lm.right_x) == doctest::Approx(15.5));

    Image img = random_image(32, 32, 8);
    Image out = crop(img, lm);
    REQUIRE(out.width == 32);
    for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(out.data[i] == img.data[i]);
}

TEST_CASE("bilinear resize agrees with direct sampling and keeps constants") {
    Image img = random_image(8, 8, 9);
    Image up = bilinear_resize(img, 16, 16);
    CHECK(up.width == 16);

    Image flat(6, 6);
    for (double& v : flat.data) v = 42.0;
    Image rs = bilinear_resize(flat, 13, 13);
    for (double v : rs.data) CHECK(v == doctest::Approx(42.0).epsilon(1e-12));

    CHECK(resize_to_32(random_image(32, 32, 10)).width == 32);
    CHECK_THROWS_AS(resize_to_32(random_image(16, 8, 11)), ValidationError);
}

TEST_CASE("PGM round trip restores every integer pixel") {
    Image img(9, 5);
    Rng rng(12);
    for (double& v : img.data) v = static_cast<double>(rng.below(256));
    const auto path = std::filesystem::temp_directory_path() / "facehop_pgm_roundtrip.pgm";
    save_pgm(path, img);
    Image back = load_image(path);
    std::filesystem::remove(path);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) CHECK(back.data[i] == img.data[i]);
}

TEST_CASE("loading a missing image reports an I/O error") {
    CHECK_THROWS_AS(load_image("/nonexistent/facehop_missing.pgm"), IoError);
}

}  // TEST_SUITE
