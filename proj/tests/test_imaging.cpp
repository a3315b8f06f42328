#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fabtag/errors.hpp"
#include "fabtag/image.hpp"

using namespace fabtag;
using img::GrayImage;
using img::Image8;

namespace {

// independent flood-fill component counter for the contour oracle
int count_components_8(const Image8& bin) {
    std::vector<int> label(bin.v.size(), 0);
    int next = 0;
    std::vector<std::pair<int, int>> stack;
    for (int y = 0; y < bin.height; ++y)
        for (int x = 0; x < bin.width; ++x) {
            const size_t i = static_cast<size_t>(y) * bin.width + x;
            if (bin.v[i] == 0 || label[i]) continue;
            ++next;
            stack.emplace_back(x, y);
            label[i] = next;
            while (!stack.empty()) {
                auto [px, py] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = px + dx, ny = py + dy;
                        if (nx < 0 || ny < 0 || nx >= bin.width || ny >= bin.height) continue;
                        const size_t j = static_cast<size_t>(ny) * bin.width + nx;
                        if (bin.v[j] != 0 && !label[j]) {
                            label[j] = next;
                            stack.emplace_back(nx, ny);
                        }
                    }
            }
        }
    return next;
}

// brute-force Otsu oracle: evaluate between-class variance at every t
int otsu_bruteforce(const Image8& in) {
    int best_t = -1;
    double best = -1.0;
    const auto n = static_cast<double>(in.v.size());
    for (int t = 0; t <= 254; ++t) {
        double w0 = 0, w1 = 0, s0 = 0, s1 = 0;
        for (uint8_t p : in.v) {
            if (p <= t) {
                w0 += 1;
                s0 += p;
            } else {
                w1 += 1;
                s1 += p;
            }
        }
        if (w0 == 0 || w1 == 0) continue;
        const double mu0 = s0 / w0, mu1 = s1 / w1;
        const double var = (w0 / n) * (w1 / n) * (mu0 - mu1) * (mu0 - mu1);
        if (var > best + 1e-12) {
            best = var;
            best_t = t;
        }
    }
    return best_t;
}

} // namespace

TEST_CASE("blur: constant image unchanged") {
    GrayImage im(9, 7, 3.25);
    const GrayImage out = img::gaussian_blur5(im);
    for (double v : out.v) CHECK(v == doctest::Approx(3.25).epsilon(1e-12));
}

TEST_CASE("blur: impulse response is the separable kernel") {
    GrayImage im(11, 11, 0.0);
    im.at(5, 5) = 1.0;
    const GrayImage out = img::gaussian_blur5(im);

    // expected weights straight from the definition
    const double sigma = 1.1;
    double w[5], sum = 0.0;
    for (int k = -2; k <= 2; ++k) {
        w[k + 2] = std::exp(-0.5 * k * k / (sigma * sigma));
        sum += w[k + 2];
    }
    for (double& x : w) x /= sum;

    for (int dy = -3; dy <= 3; ++dy)
        for (int dx = -3; dx <= 3; ++dx) {
            const double expect =
                (std::abs(dx) <= 2 && std::abs(dy) <= 2) ? w[dx + 2] * w[dy + 2] : 0.0;
            CHECK(out.at(5 + dx, 5 + dy) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("blur: too-small image") {
    GrayImage im(4, 4, 1.0);
    CHECK_THROWS_AS(img::gaussian_blur5(im), ImageTooSmall);
}

TEST_CASE("blur: mean preserved with mirrored borders") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(0.0, 100.0);
    for (int trial = 0; trial < 20; ++trial) {
        GrayImage im(5 + static_cast<int>(rng() % 20), 5 + static_cast<int>(rng() % 20));
        double mean_in = 0.0;
        for (double& v : im.v) {
            v = dist(rng);
            mean_in += v;
        }
        mean_in /= static_cast<double>(im.v.size());
        const GrayImage out = img::gaussian_blur5(im);
        double mean_out = 0.0;
        for (double v : out.v) mean_out += v;
        mean_out /= static_cast<double>(out.v.size());
        CHECK(mean_out == doctest::Approx(mean_in).epsilon(1e-6));
    }
}

TEST_CASE("normalize_u8: affine endpoints and rounding") {
    GrayImage im(3, 1);
    im.v = {10.0, 20.0, 30.0};
    const Image8 out = img::normalize_u8(im);
    CHECK(out.v[0] == 0);
    CHECK(out.v[1] == 128); // midpoint 127.5 rounds half-up
    CHECK(out.v[2] == 255);
}

TEST_CASE("normalize_u8: constant maps to zeros") {
    GrayImage im(4, 4, 27.0);
    const Image8 out = img::normalize_u8(im);
    for (uint8_t v : out.v) CHECK(v == 0);
}

TEST_CASE("normalize_u8: 0..255 input unchanged") {
    GrayImage im(16, 16);
    for (size_t i = 0; i < im.v.size(); ++i) im.v[i] = static_cast<double>(i % 256);
    im.v[0] = 0.0;
    im.v[1] = 255.0;
    const Image8 out = img::normalize_u8(im);
    for (size_t i = 0; i < im.v.size(); ++i) CHECK(out.v[i] == static_cast<uint8_t>(im.v[i]));
}

TEST_CASE("otsu: two-point histogram ties break to the smallest t") {
    Image8 im(10, 2);
    for (int x = 0; x < 10; ++x) {
        im.at(x, 0) = 0;
        im.at(x, 1) = 255;
    }
    CHECK(img::otsu_threshold(im) == 0);
}

TEST_CASE("otsu: matches exhaustive search on random images") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        Image8 im(16, 16);
        if (trial % 3 == 0) {
            // bimodal
            std::normal_distribution<double> a(70, 12), b(190, 9);
            for (auto& p : im.v) {
                const double v = (rng() & 1) ? a(rng) : b(rng);
                p = static_cast<uint8_t>(std::clamp(v, 0.0, 255.0));
            }
        } else if (trial % 3 == 1) {
            std::uniform_int_distribution<int> u(0, 255);
            for (auto& p : im.v) p = static_cast<uint8_t>(u(rng));
        } else {
            std::normal_distribution<double> a(128, 40);
            for (auto& p : im.v) p = static_cast<uint8_t>(std::clamp(a(rng), 0.0, 255.0));
        }
        bool distinct = false;
        for (auto& p : im.v) distinct = distinct || p != im.v[0];
        if (!distinct) im.v[0] ^= 1;
        CHECK(img::otsu_threshold(im) == otsu_bruteforce(im));
    }
}

TEST_CASE("otsu: constant image is degenerate") {
    Image8 im(8, 8, 55);
    CHECK_THROWS_AS(img::otsu_threshold(im), DegenerateHistogram);
}

TEST_CASE("contours: one filled square") {
    Image8 im(20, 20, 0);
    for (int y = 5; y < 15; ++y)
        for (int x = 5; x < 15; ++x) im.at(x, y) = 1;
    const auto cs = img::find_contours(im);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].area >= 81.0);
    CHECK(cs[0].area <= 100.0);
    CHECK(std::fabs(cs[0].centroid_x - 9.5) <= 0.5);
    CHECK(std::fabs(cs[0].centroid_y - 9.5) <= 0.5);
    CHECK(cs[0].x0 == 5);
    CHECK(cs[0].y0 == 5);
    CHECK(cs[0].x1 == 14);
    CHECK(cs[0].y1 == 14);
}

TEST_CASE("contours: scan order and blank image") {
    Image8 im(20, 10, 0);
    for (int y = 6; y < 9; ++y)
        for (int x = 12; x < 17; ++x) im.at(x, y) = 1; // larger, later
    for (int y = 1; y < 3; ++y)
        for (int x = 2; x < 4; ++x) im.at(x, y) = 1; // smaller, first in scan order
    const auto cs = img::find_contours(im);
    REQUIRE(cs.size() == 2);
    CHECK(cs[0].y0 == 1);
    CHECK(cs[1].y0 == 6);

    CHECK(img::find_contours(Image8(5, 5, 0)).empty());
}

TEST_CASE("contours: count equals flood-fill component count") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 1000; ++trial) {
        Image8 im(12 + static_cast<int>(rng() % 8), 12 + static_cast<int>(rng() % 8));
        for (auto& p : im.v) p = (rng() % 100) < 30 ? 1 : 0;
        CHECK(static_cast<int>(img::find_contours(im).size()) == count_components_8(im));
    }
}

TEST_CASE("crop_largest: bbox crop and tie handling") {
    Image8 im(20, 20, 0);
    for (int y = 2; y <= 12; ++y)
        for (int x = 2; x <= 12; ++x) im.at(x, y) = 1;
    const auto cs = img::find_contours(im);
    const Image8 crop = img::crop_largest(im, cs);
    CHECK(crop.width == 11);
    CHECK(crop.height == 11);

    Image8 two(30, 10, 0);
    for (int x = 0; x < 10; ++x)
        for (int y = 0; y < 5; ++y) two.at(x, y) = 1; // area 50
    for (int x = 14; x < 24; ++x)
        for (int y = 1; y < 9; ++y) two.at(x, y) = 1; // area 80
    const auto cs2 = img::find_contours(two);
    REQUIRE(cs2.size() == 2);
    const Image8 crop2 = img::crop_largest(two, cs2);
    CHECK(crop2.width == 10);
    CHECK(crop2.height == 8);

    CHECK_THROWS_AS(img::crop_largest(im, {}), NoContours);
}

TEST_CASE("upsample4: dimensions and constants") {
    GrayImage im(24, 24, 8.5);
    const GrayImage out = img::upsample4(im);
    CHECK(out.width == 96);
    CHECK(out.height == 96);
    for (double v : out.v) CHECK(v == doctest::Approx(8.5).epsilon(1e-12));
}

TEST_CASE("upsample4: reproduces linear ramps") {
    GrayImage im(12, 9);
    for (int y = 0; y < im.height; ++y)
        for (int x = 0; x < im.width; ++x) im.at(x, y) = 3.0 * x - 2.0 * y + 5.0;
    const GrayImage out = img::upsample4(im);
    // corner-aligned mapping: output index i sits at input coordinate
    // i*(n-1)/(4n-1)
    const double sx = (im.width - 1) / static_cast<double>(out.width - 1);
    const double sy = (im.height - 1) / static_cast<double>(out.height - 1);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            const double expect = 3.0 * (x * sx) - 2.0 * (y * sy) + 5.0;
            CHECK(out.at(x, y) == doctest::Approx(expect).epsilon(1e-6));
        }
}

TEST_CASE("upsample4: output clamped to input range") {
    std::mt19937_64 rng(5);
    GrayImage im(10, 10);
    std::uniform_real_distribution<double> dist(-4.0, 9.0);
    for (double& v : im.v) v = dist(rng);
    double mn = im.v[0], mx = im.v[0];
    for (double v : im.v) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    const GrayImage out = img::upsample4(im);
    for (double v : out.v) {
        CHECK(v >= mn - 1e-12);
        CHECK(v <= mx + 1e-12);
    }
}

TEST_CASE("fixed_threshold: cut at frac*max") {
    GrayImage im(4, 1);
    im.v = {10.0, 79.9, 80.1, 200.0};
    const Image8 out = img::fixed_threshold(im, 0.4); // cut at 80
    CHECK(out.v[0] == 0);
    CHECK(out.v[1] == 0);
    CHECK(out.v[2] == 1);
    CHECK(out.v[3] == 1);

    GrayImage low(3, 1);
    low.v = {-5.0, -2.0, 0.0}; // all at or below 0.4*max = 0
    const Image8 none = img::fixed_threshold(low, 0.4);
    for (uint8_t v : none.v) CHECK(v == 0);
}
