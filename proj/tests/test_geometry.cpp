#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "fabtag/errors.hpp"
#include "fabtag/mesh.hpp"
#include "fabtag/payload.hpp"
#include "fabtag/voxel.hpp"

using namespace fabtag;
using geom::TriMesh;
using geom::Vec3;

namespace {

std::vector<uint8_t> binary_stl_bytes(const TriMesh& m) {
    return geom::write_stl(m, geom::StlFormat::Binary);
}

TriMesh sphere_mesh(double radius, int stacks, int slices) {
    TriMesh m;
    auto pt = [&](int i, int j) {
        const double theta = 3.14159265358979323846 * i / stacks;
        const double phi = 2.0 * 3.14159265358979323846 * j / slices;
        return Vec3{radius * std::sin(theta) * std::cos(phi),
                    radius * std::sin(theta) * std::sin(phi), radius * std::cos(theta)};
    };
    for (int i = 0; i < stacks; ++i)
        for (int j = 0; j < slices; ++j) {
            const Vec3 a = pt(i, j), b = pt(i + 1, j), c = pt(i + 1, j + 1), d = pt(i, j + 1);
            if (i > 0) m.triangles.push_back({a, b, d, std::nullopt});
            if (i + 1 < stacks) m.triangles.push_back({b, c, d, std::nullopt});
        }
    return m;
}

} // namespace

TEST_CASE("parse_stl: binary unit cube") {
    const TriMesh cube = geom::make_cuboid({0, 0, 0}, {1, 1, 1});
    const TriMesh parsed = geom::parse_stl(binary_stl_bytes(cube));
    CHECK(parsed.triangles.size() == 12);
    const geom::Box3 b = parsed.bbox();
    CHECK(b.min.x == doctest::Approx(0.0));
    CHECK(b.max.z == doctest::Approx(1.0));
}

TEST_CASE("parse_stl: ascii grammar violation") {
    const std::string bad =
        "solid x\n facet normal 0 0 1\n outer loop\n vertex 0 0 0\n vertex 1 0 0\n "
        "vertex 0 1 0\n endloop\nfacet normal 0 0 1\n";
    CHECK_THROWS_AS(geom::parse_stl({bad.begin(), bad.end()}), MalformedSyntax);
}

TEST_CASE("parse_stl: truncated binary") {
    const TriMesh cube = geom::make_cuboid({0, 0, 0}, {1, 1, 1});
    std::vector<uint8_t> bytes = binary_stl_bytes(cube);
    uint32_t hundred = 100;
    std::memcpy(bytes.data() + 80, &hundred, 4); // declares 100, carries 12
    CHECK_THROWS_AS(geom::parse_stl(bytes), TruncatedFile);

    std::vector<uint8_t> stub(40, 0);
    CHECK_THROWS_AS(geom::parse_stl(stub), TruncatedFile);
}

TEST_CASE("parse_stl: non-finite vertex") {
    const std::string nan_ascii =
        "solid x\n facet normal 0 0 1\n outer loop\n vertex 0 0 nan\n vertex 1 0 0\n "
        "vertex 0 1 0\n endloop\n endfacet\nendsolid x\n";
    CHECK_THROWS_AS(geom::parse_stl({nan_ascii.begin(), nan_ascii.end()}), NonFiniteVertex);
}

TEST_CASE("write_stl: binary size formula") {
    const TriMesh cube = geom::make_cuboid({0, 0, 0}, {1, 1, 1});
    CHECK(binary_stl_bytes(cube).size() == 84 + 12 * 50);
    CHECK_THROWS_AS(geom::write_stl(TriMesh{}), EmptyMesh);
}

TEST_CASE("write_stl: fuzzed binary roundtrip is exact") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<float> coord(-50.0f, 50.0f);
    for (int trial = 0; trial < 30; ++trial) {
        TriMesh m;
        const int n = 1 + static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            geom::Triangle t;
            for (Vec3* v : {&t.v0, &t.v1, &t.v2})
                *v = {coord(rng), coord(rng), coord(rng)}; // f32 values, exact in double
            m.triangles.push_back(t);
        }
        const std::vector<uint8_t> bytes = binary_stl_bytes(m);
        const TriMesh back = geom::parse_stl(bytes);
        REQUIRE(back.triangles.size() == m.triangles.size());
        for (size_t i = 0; i < m.triangles.size(); ++i) {
            CHECK(back.triangles[i].v0 == m.triangles[i].v0);
            CHECK(back.triangles[i].v1 == m.triangles[i].v1);
            CHECK(back.triangles[i].v2 == m.triangles[i].v2);
        }
        // writing the parse output reproduces the byte stream
        CHECK(binary_stl_bytes(back) == bytes);
    }
}

TEST_CASE("write_stl: ascii roundtrip within 1e-6") {
    std::mt19937_64 rng(18);
    std::uniform_real_distribution<double> coord(-30.0, 30.0);
    TriMesh m;
    for (int i = 0; i < 10; ++i) {
        geom::Triangle t;
        for (Vec3* v : {&t.v0, &t.v1, &t.v2}) *v = {coord(rng), coord(rng), coord(rng)};
        m.triangles.push_back(t);
    }
    const auto bytes = geom::write_stl(m, geom::StlFormat::Ascii);
    const TriMesh back = geom::parse_stl(bytes);
    REQUIRE(back.triangles.size() == m.triangles.size());
    for (size_t i = 0; i < m.triangles.size(); ++i) {
        CHECK(back.triangles[i].v0.x == doctest::Approx(m.triangles[i].v0.x).epsilon(1e-6));
        CHECK(back.triangles[i].v1.y == doctest::Approx(m.triangles[i].v1.y).epsilon(1e-6));
        CHECK(back.triangles[i].v2.z == doctest::Approx(m.triangles[i].v2.z).epsilon(1e-6));
    }
}

TEST_CASE("voxelize: grid-aligned cube count is exact") {
    const TriMesh cube = geom::make_cuboid({0, 0, 0}, {30, 30, 15});
    const geom::VoxelGrid g = geom::voxelize(cube, 0.5);
    CHECK(g.count(geom::Cell::Object) == 60u * 60u * 30u);
}

TEST_CASE("voxelize: sphere volume within 2%") {
    const TriMesh sph = sphere_mesh(5.0, 48, 96);
    const geom::VoxelGrid g = geom::voxelize(sph, 0.25);
    const double vol = static_cast<double>(g.count(geom::Cell::Object)) * 0.25 * 0.25 * 0.25;
    const double analytic = 4.0 / 3.0 * 3.14159265358979323846 * 125.0;
    CHECK(vol == doctest::Approx(analytic).epsilon(0.02));
}

TEST_CASE("voxelize: open mesh is rejected") {
    TriMesh cube = geom::make_cuboid({0, 0, 0}, {10, 10, 10});
    // drop the two top-face triangles
    TriMesh open;
    for (const auto& t : cube.triangles) {
        const bool top = t.v0.z == 10.0 && t.v1.z == 10.0 && t.v2.z == 10.0;
        if (!top) open.triangles.push_back(t);
    }
    REQUIRE(open.triangles.size() == 10);
    CHECK_THROWS_AS(geom::voxelize(open, 1.0), OpenMesh);
}

TEST_CASE("voxelize: pitch coarser than the mesh") {
    const TriMesh thin = geom::make_cuboid({0, 0, 0}, {10, 10, 0.8});
    CHECK_THROWS_AS(geom::voxelize(thin, 1.0), PitchTooCoarse);
}

TEST_CASE("voxelize: centers agree with point membership for convex solids") {
    const TriMesh cube = geom::make_cuboid({2, 3, 4}, {7, 5, 6});
    const geom::VoxelGrid g = geom::voxelize(cube, 0.4);
    const geom::Box3 b = cube.bbox();
    size_t checked = 0;
    for (int z = 0; z < g.nz; ++z)
        for (int y = 0; y < g.ny; ++y)
            for (int x = 0; x < g.nx; ++x) {
                const Vec3 c = g.center(x, y, z);
                // skip centers within one pitch of the surface
                const bool deep_inside = c.x > b.min.x + 0.4 && c.x < b.max.x - 0.4 &&
                                         c.y > b.min.y + 0.4 && c.y < b.max.y - 0.4 &&
                                         c.z > b.min.z + 0.4 && c.z < b.max.z - 0.4;
                const bool far_outside = c.x < b.min.x - 0.4 || c.x > b.max.x + 0.4 ||
                                         c.y < b.min.y - 0.4 || c.y > b.max.y + 0.4 ||
                                         c.z < b.min.z - 0.4 || c.z > b.max.z + 0.4;
                if (deep_inside) {
                    CHECK(g.at(x, y, z) == geom::Cell::Object);
                    ++checked;
                } else if (far_outside) {
                    CHECK(g.at(x, y, z) == geom::Cell::Empty);
                    ++checked;
                }
            }
    CHECK(checked > 1000);
}

TEST_CASE("embed: carved slab counts at pitch 0.5") {
    const TriMesh object = geom::make_cuboid({0, 0, 0}, {30, 30, 15});
    const TriMesh slab = geom::make_cuboid({0, 0, 0}, {20, 20, 1});
    geom::EmbedSpec spec;
    spec.depth_mm = 1.0;
    auto [grid, bodies] = geom::embed(object, slab, spec, 0.5);
    CHECK(grid.count(geom::Cell::Info) == 3200);
    CHECK(grid.count(geom::Cell::Object) == 108000 - 3200);
}

TEST_CASE("embed: placement contradiction raises InfoProtrudes") {
    const TriMesh object = geom::make_cuboid({0, 0, 0}, {30, 30, 15});
    TriMesh slab = geom::make_cuboid({0, 0, 0}, {20, 20, 1});
    geom::EmbedSpec spec;
    spec.depth_mm = 1.0;
    // caller pre-places the slab with its top touching the object top (d = 0)
    slab.translate({5.0, 5.0, 14.0});
    CHECK_THROWS_AS(geom::embed(object, slab, spec, 0.5, /*place=*/false), InfoProtrudes);

    // d = 0 placement computed from spec also protrudes
    geom::EmbedSpec flush = spec;
    flush.depth_mm = 0.0;
    const TriMesh slab2 = geom::make_cuboid({0, 0, 0}, {20, 20, 1});
    CHECK_THROWS_AS(geom::embed(object, slab2, flush, 0.5), InfoProtrudes);
}

TEST_CASE("embed: spec invariant violations") {
    const TriMesh object = geom::make_cuboid({0, 0, 0}, {30, 30, 15});
    const TriMesh slab = geom::make_cuboid({0, 0, 0}, {20, 20, 1});
    geom::EmbedSpec spec;
    spec.depth_mm = 14.5; // depth + height >= H
    CHECK_THROWS_AS(geom::embed(object, slab, spec, 0.5), SpecViolation);
}

TEST_CASE("embed: disjointness and volume conservation on random payloads") {
    std::mt19937_64 rng(23);
    const TriMesh object = geom::make_cuboid({0, 0, 0}, {30, 30, 15});
    const geom::VoxelGrid object_only = geom::voxelize(object, 0.5);
    const size_t object_count = object_only.count(geom::Cell::Object);
    for (int trial = 0; trial < 10; ++trial) {
        const payload::BitMatrix m =
            payload::random_matrix(4, 4, 2 + static_cast<int>(rng() % 13), rng());
        geom::EmbedSpec spec;
        spec.depth_mm = 0.5 + 0.5 * static_cast<double>(rng() % 5);
        const TriMesh info = payload::matrix_to_mesh(m, spec);
        auto [grid, bodies] = geom::embed(object, info, spec, 0.5);
        // disjoint by construction: every voxel has exactly one label
        const size_t info_n = grid.count(geom::Cell::Info);
        const size_t obj_n = grid.count(geom::Cell::Object);
        CHECK(info_n > 0);
        CHECK(obj_n + info_n == object_count);
    }
}

TEST_CASE("apply_mode: surface-fill fills the window, surface-join the columns") {
    const TriMesh object = geom::make_cuboid({0, 0, 0}, {30, 30, 15});
    const payload::BitMatrix m = payload::random_matrix(4, 4, 8, 42);
    geom::EmbedSpec spec;
    spec.depth_mm = 2.0;
    const TriMesh info = payload::matrix_to_mesh(m, spec);

    spec.mode = geom::FabMode::SurfaceFill;
    auto [grid, bodies] = geom::embed(object, info, spec, 0.5);
    const geom::VoxelGrid filled = geom::apply_mode(grid, spec);
    // top 4 voxel layers of the object are solid across the footprint
    int top = -1;
    for (int z = filled.nz - 1; z >= 0 && top < 0; --z)
        if (filled.at(filled.nx / 2, filled.ny / 2, z) != geom::Cell::Empty) top = z;
    for (int y = 0; y < filled.ny; ++y)
        for (int x = 0; x < filled.nx; ++x) {
            bool in_footprint = false;
            for (int z = 0; z <= top; ++z)
                in_footprint = in_footprint || filled.at(x, y, z) != geom::Cell::Empty;
            if (!in_footprint) continue;
            for (int z = top - 3; z <= top; ++z)
                CHECK(filled.at(x, y, z) != geom::Cell::Empty);
        }

    spec.mode = geom::FabMode::SurfaceJoin;
    const geom::VoxelGrid joined = geom::apply_mode(grid, spec);
    CHECK(joined.applied_mode == static_cast<int>(geom::FabMode::SurfaceJoin));

    // idempotence
    const geom::VoxelGrid joined2 = geom::apply_mode(joined, spec);
    CHECK(joined2.cells == joined.cells);
    spec.mode = geom::FabMode::SurfaceFill;
    const geom::VoxelGrid filled2 = geom::apply_mode(filled, spec);
    CHECK(filled2.cells == filled.cells);

    // no info voxels -> inapplicable
    const geom::VoxelGrid plain = geom::voxelize(object, 0.5);
    CHECK_THROWS_AS(geom::apply_mode(plain, spec), ModeInapplicable);
}

TEST_CASE("export_bodies: deterministic files, reimport stays disjoint") {
    namespace fs = std::filesystem;
    const TriMesh object = geom::make_cuboid({0, 0, 0}, {30, 30, 15});
    const payload::BitMatrix m = payload::random_matrix(4, 4, 8, 7);
    geom::EmbedSpec spec;
    const TriMesh info = payload::matrix_to_mesh(m, spec);
    auto [grid, bodies] = geom::embed(object, info, spec, 0.5);

    const fs::path dir = fs::temp_directory_path() / "fabtag_export_test";
    fs::remove_all(dir);
    geom::export_bodies(bodies, dir.string());
    CHECK(fs::exists(dir / "object.stl"));
    CHECK(fs::exists(dir / "info.stl"));
    CHECK(fs::exists(dir / "manifest.json"));

    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    };
    const std::string obj1 = slurp(dir / "object.stl");
    const std::string man1 = slurp(dir / "manifest.json");
    geom::export_bodies(bodies, dir.string());
    CHECK(slurp(dir / "object.stl") == obj1);
    CHECK(slurp(dir / "manifest.json") == man1);

    const geom::BodySet back = geom::import_bodies(dir.string());
    const geom::VoxelGrid obj_grid = geom::voxelize(back.object_body, 0.5);
    const geom::VoxelGrid info_grid = geom::voxelize(back.info_body, 0.5);
    // overlay the info grid onto the object grid: no voxel center may be
    // inside both bodies
    size_t overlap = 0;
    for (int z = 0; z < obj_grid.nz; ++z)
        for (int y = 0; y < obj_grid.ny; ++y)
            for (int x = 0; x < obj_grid.nx; ++x) {
                if (obj_grid.at(x, y, z) == geom::Cell::Empty) continue;
                const Vec3 c = obj_grid.center(x, y, z);
                const int ix = static_cast<int>((c.x - info_grid.origin.x) / info_grid.pitch);
                const int iy = static_cast<int>((c.y - info_grid.origin.y) / info_grid.pitch);
                const int iz = static_cast<int>((c.z - info_grid.origin.z) / info_grid.pitch);
                if (ix < 0 || iy < 0 || iz < 0 || ix >= info_grid.nx || iy >= info_grid.ny ||
                    iz >= info_grid.nz)
                    continue;
                if (info_grid.at(ix, iy, iz) != geom::Cell::Empty) ++overlap;
            }
    CHECK(overlap == 0);

    // a regular file blocks directory creation
    const fs::path blocker = fs::temp_directory_path() / "fabtag_export_blocker";
    std::ofstream(blocker).put('x');
    CHECK_THROWS_AS(geom::export_bodies(bodies, (blocker / "sub").string()), IoFailure);
    fs::remove(blocker);
    fs::remove_all(dir);
}
