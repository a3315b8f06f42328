#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fabtag/errors.hpp"
#include "fabtag/payload.hpp"
#include "fabtag/voxel.hpp"

using namespace fabtag;
using payload::BitMatrix;

TEST_CASE("random_matrix: paper sampling parameters") {
    const BitMatrix m = payload::random_matrix(4, 4, 8, 42);
    CHECK(m.popcount() == 8);
    CHECK(m.at(0, 0) == 1);
    CHECK_NOTHROW(m.validate_payload());
}

TEST_CASE("random_matrix: all-ones is rejected") {
    CHECK_THROWS_AS(payload::random_matrix(2, 2, 4, 1), OnesOutOfRange);
    CHECK_THROWS_AS(payload::random_matrix(4, 4, 0, 1), OnesOutOfRange);
    CHECK_THROWS_AS(payload::random_matrix(4, 4, 17, 1), OnesOutOfRange);
}

TEST_CASE("random_matrix: deterministic per seed") {
    const BitMatrix a = payload::random_matrix(4, 4, 8, 777);
    const BitMatrix b = payload::random_matrix(4, 4, 8, 777);
    CHECK(a == b);
    const BitMatrix c = payload::random_matrix(4, 4, 8, 778);
    bool same = a == c;
    CHECK_FALSE(same);
}

TEST_CASE("random_matrix: invariants hold across parameters") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const int rows = 1 + static_cast<int>(rng() % 6);
        const int cols = 1 + static_cast<int>(rng() % 6);
        if (rows * cols < 2) continue;
        const int ones = 1 + static_cast<int>(rng() % (rows * cols - 1));
        const BitMatrix m = payload::random_matrix(rows, cols, ones, rng());
        CHECK(m.popcount() == ones);
        CHECK(m.at(0, 0) == 1);
        CHECK_NOTHROW(m.validate_payload());
    }
}

TEST_CASE("matrix text roundtrip") {
    const BitMatrix m = payload::random_matrix(4, 4, 8, 5);
    CHECK(payload::parse_matrix_text(payload::matrix_to_text(m)) == m);
    CHECK_THROWS_AS(payload::parse_matrix_text("10\n1"), FormatError);
    CHECK_THROWS_AS(payload::parse_matrix_text("1x\n10"), FormatError);
    CHECK_THROWS_AS(payload::parse_matrix_text(""), FormatError);
}

TEST_CASE("matrix_to_mesh: single bit cuboid") {
    BitMatrix m(1, 1);
    m.at(0, 0) = 1;
    geom::EmbedSpec spec;
    spec.density_mm_per_px = 5.0;
    spec.info_height_mm = 1.0;
    const geom::TriMesh mesh = payload::matrix_to_mesh(m, spec);
    CHECK(mesh.triangles.size() == 12);
    const geom::Box3 b = mesh.bbox();
    CHECK(b.extent().x == doctest::Approx(5.0));
    CHECK(b.extent().y == doctest::Approx(5.0));
    CHECK(b.extent().z == doctest::Approx(1.0));
}

TEST_CASE("matrix_to_mesh: 4x4 payload footprint") {
    const BitMatrix m = payload::random_matrix(4, 4, 8, 42);
    geom::EmbedSpec spec; // X = 5, h = 1
    const geom::TriMesh mesh = payload::matrix_to_mesh(m, spec);
    const geom::Box3 b = mesh.bbox();
    CHECK(b.extent().x == doctest::Approx(20.0));
    CHECK(b.extent().y == doctest::Approx(20.0));
    CHECK(b.extent().z == doctest::Approx(1.0));
}

TEST_CASE("matrix_to_mesh: checkerboard voxel count") {
    BitMatrix m(2, 2);
    m.at(0, 0) = 1;
    m.at(1, 1) = 1;
    geom::EmbedSpec spec;
    spec.density_mm_per_px = 3.0;
    spec.info_height_mm = 1.0;
    spec.object_dims_mm = {30, 30, 15};
    const geom::TriMesh mesh = payload::matrix_to_mesh(m, spec);
    const geom::VoxelGrid g = geom::voxelize(mesh, 0.5, geom::Cell::Info);
    CHECK(g.count(geom::Cell::Info) == 2 * (6 * 6 * 2));
}

TEST_CASE("matrix_to_mesh: voxel volume tracks popcount") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        const int ones = 2 + static_cast<int>(rng() % 10);
        const BitMatrix m = payload::random_matrix(4, 4, ones, rng());
        geom::EmbedSpec spec;
        spec.density_mm_per_px = 4.0;
        const geom::TriMesh mesh = payload::matrix_to_mesh(m, spec);
        const double pitch = 0.25;
        const geom::VoxelGrid g = geom::voxelize(mesh, pitch, geom::Cell::Info);
        const double vol = static_cast<double>(g.count(geom::Cell::Info)) * pitch * pitch * pitch;
        const double expect = ones * 4.0 * 4.0 * 1.0;
        CHECK(vol == doctest::Approx(expect).epsilon(0.02));
    }
}

TEST_CASE("load_pbm: P1 basics") {
    const std::string p1 = "P1\n# comment\n2 2\n1 0\n0 1\n";
    const payload::GlyphBitmap g = payload::load_pbm({p1.begin(), p1.end()});
    CHECK(g.width == 2);
    CHECK(g.height == 2);
    CHECK(g.at(0, 0) == 1);
    CHECK(g.at(1, 0) == 0);
    CHECK(g.at(0, 1) == 0);
    CHECK(g.at(1, 1) == 1);
}

TEST_CASE("load_pbm: magic and truncation") {
    const std::string bad = "P6\n2 2\n";
    CHECK_THROWS_AS(payload::load_pbm({bad.begin(), bad.end()}), BadMagic);
    std::vector<uint8_t> p4 = {'P', '4', '\n', '9', ' ', '2', '\n', 0xff};
    CHECK_THROWS_AS(payload::load_pbm(p4), DimensionMismatch);
}

TEST_CASE("load_pbm: P1 and P4 encodings agree") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int w = 1 + static_cast<int>(rng() % 13);
        const int h = 1 + static_cast<int>(rng() % 9);
        std::vector<uint8_t> pix(static_cast<size_t>(w) * h);
        bool any = false;
        for (auto& p : pix) {
            p = rng() & 1;
            any = any || p;
        }
        if (!any) pix[0] = 1;

        std::string p1 = "P1\n" + std::to_string(w) + " " + std::to_string(h) + "\n";
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) p1 += pix[static_cast<size_t>(y) * w + x] ? "1 " : "0 ";
            p1 += "\n";
        }
        std::vector<uint8_t> p4 = {'P', '4', '\n'};
        const std::string dims = std::to_string(w) + " " + std::to_string(h) + "\n";
        p4.insert(p4.end(), dims.begin(), dims.end());
        const int row_bytes = (w + 7) / 8;
        for (int y = 0; y < h; ++y) {
            std::vector<uint8_t> row(static_cast<size_t>(row_bytes), 0);
            for (int x = 0; x < w; ++x)
                if (pix[static_cast<size_t>(y) * w + x]) row[x / 8] |= 1 << (7 - x % 8);
            p4.insert(p4.end(), row.begin(), row.end());
        }

        const payload::GlyphBitmap a = payload::load_pbm({p1.begin(), p1.end()});
        const payload::GlyphBitmap b = payload::load_pbm(p4);
        CHECK(a.pixels == b.pixels);
        CHECK(a.pixels == pix);
    }
}

TEST_CASE("bitmap_to_mesh: extrusion basics") {
    payload::GlyphBitmap full;
    full.width = 2;
    full.height = 2;
    full.pixels = {1, 1, 1, 1};
    full.scale_mm = 1.0;
    const geom::TriMesh mesh = payload::bitmap_to_mesh(full, 1.0);
    const geom::Box3 b = mesh.bbox();
    CHECK(b.extent().x == doctest::Approx(2.0));
    CHECK(b.extent().y == doctest::Approx(2.0));
    CHECK(b.extent().z == doctest::Approx(1.0));

    payload::GlyphBitmap one;
    one.width = 1;
    one.height = 1;
    one.pixels = {1};
    CHECK(payload::bitmap_to_mesh(one, 1.0).triangles.size() == 12);
}

TEST_CASE("bitmap_to_mesh: glyph voxel volume equals pixel count") {
    // blocky letter A on a 16x16 canvas
    payload::GlyphBitmap g;
    g.width = 16;
    g.height = 16;
    g.scale_mm = 1.0;
    g.pixels.assign(256, 0);
    auto set = [&](int x, int y) { g.pixels[static_cast<size_t>(y) * 16 + x] = 1; };
    for (int y = 2; y < 14; ++y) {
        set(4, y);
        set(11, y);
    }
    for (int x = 4; x <= 11; ++x) {
        set(x, 2);
        set(x, 8);
    }
    int count = 0;
    for (uint8_t p : g.pixels) count += p;

    const geom::TriMesh mesh = payload::bitmap_to_mesh(g, 1.0);
    const double pitch = 0.25;
    const geom::VoxelGrid grid = geom::voxelize(mesh, pitch, geom::Cell::Info);
    const double vol = static_cast<double>(grid.count(geom::Cell::Info)) * pitch * pitch * pitch;
    CHECK(vol == doctest::Approx(static_cast<double>(count)).epsilon(0.02));
}

TEST_CASE("matrix_accuracy: exact and flipped") {
    const BitMatrix m = payload::random_matrix(4, 4, 8, 9);
    CHECK(payload::matrix_accuracy(m, m) == doctest::Approx(1.0));
    BitMatrix flipped = m;
    flipped.at(2, 3) ^= 1;
    CHECK(payload::matrix_accuracy(flipped, m) == doctest::Approx(15.0 / 16.0));
}

TEST_CASE("matrix_accuracy: equals XNOR popcount oracle, symmetric") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        BitMatrix a(4, 4), b(4, 4);
        for (auto& v : a.bits) v = rng() & 1;
        for (auto& v : b.bits) v = rng() & 1;
        int same = 0;
        for (size_t i = 0; i < 16; ++i) same += a.bits[i] == b.bits[i];
        CHECK(payload::matrix_accuracy(a, b) == doctest::Approx(same / 16.0));
        CHECK(payload::matrix_accuracy(a, b) == doctest::Approx(payload::matrix_accuracy(b, a)));
        if (a == b) CHECK(payload::matrix_accuracy(a, b) == doctest::Approx(1.0));
    }
}

TEST_CASE("matrix_accuracy: dimension mismatch") {
    CHECK_THROWS_AS(
        payload::matrix_accuracy(payload::random_matrix(4, 4, 8, 1), payload::random_matrix(4, 3, 8, 1)),
        DimensionMismatch);
}
