#include "fabtag/voxel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "fabtag/errors.hpp"

namespace fabtag::geom {

std::string to_string(FabMode m) {
    return m == FabMode::SurfaceJoin ? "surface-join" : "surface-fill";
}

FabMode fab_mode_from_string(const std::string& s) {
    if (s == "surface-join") return FabMode::SurfaceJoin;
    if (s == "surface-fill") return FabMode::SurfaceFill;
    throw FormatError("unknown fabrication mode '" + s + "'");
}

void EmbedSpec::validate(int payload_rows, int payload_cols) const {
    if (depth_mm < 0.0) throw SpecViolation("depth_d must be >= 0");
    if (density_mm_per_px <= 0.0) throw SpecViolation("density_X must be > 0");
    if (info_height_mm <= 0.0) throw SpecViolation("info_height must be > 0");
    if (infill_fraction <= 0.0 || infill_fraction > 1.0)
        throw SpecViolation("infill_fraction must be in (0, 1]");
    for (double d : object_dims_mm)
        if (d <= 0.0) throw SpecViolation("object dimensions must be positive");
    if (depth_mm + info_height_mm >= object_dims_mm[2])
        throw SpecViolation("depth_d + info_height must be below the object height");
    if (payload_cols > 0 && density_mm_per_px * payload_cols > object_dims_mm[0])
        throw SpecViolation("density_X * payload_cols exceeds object width");
    if (payload_rows > 0 && density_mm_per_px * payload_rows > object_dims_mm[1])
        throw SpecViolation("density_X * payload_rows exceeds object depth");
}

size_t VoxelGrid::count(Cell c) const {
    return static_cast<size_t>(std::count(cells.begin(), cells.end(), c));
}

namespace {

// Ray offsets, fractions of a pitch. Distinct irrational-ish values keep
// rays off grid-aligned vertices and edges in all three scan axes.
constexpr double kJitterA = 1.3782356479e-4;
constexpr double kJitterB = 2.5972214571e-4;

struct ScanHit {
    double along; // coordinate of the crossing on the scan axis
};

// Parity scan along one axis. axis: 0=x, 1=y, 2=z. Returns per-voxel
// inside flags for rays cast toward +axis through voxel centers.
std::vector<uint8_t> parity_scan(const TriMesh& mesh, const VoxelGrid& g, int axis) {
    const int a = axis;            // scan axis
    const int u = (axis + 1) % 3;  // row axes
    const int v = (axis + 2) % 3;

    auto comp = [](const Vec3& p, int i) { return i == 0 ? p.x : (i == 1 ? p.y : p.z); };
    const double ou = comp(g.origin, u), ov = comp(g.origin, v), oa = comp(g.origin, a);
    const int nu = u == 0 ? g.nx : (u == 1 ? g.ny : g.nz);
    const int nv = v == 0 ? g.nx : (v == 1 ? g.ny : g.nz);
    const int na = a == 0 ? g.nx : (a == 1 ? g.ny : g.nz);

    const double du = kJitterA * g.pitch;
    const double dv = kJitterB * g.pitch;

    // bucket triangles into the (u, v) rows their projection covers
    std::vector<std::vector<int>> rows(static_cast<size_t>(nu) * nv);
    for (size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const Triangle& t = mesh.triangles[ti];
        double umin = 1e300, umax = -1e300, vmin = 1e300, vmax = -1e300;
        for (const Vec3* p : {&t.v0, &t.v1, &t.v2}) {
            umin = std::min(umin, comp(*p, u));
            umax = std::max(umax, comp(*p, u));
            vmin = std::min(vmin, comp(*p, v));
            vmax = std::max(vmax, comp(*p, v));
        }
        const int iu0 = std::max(0, static_cast<int>(std::floor((umin - ou - du) / g.pitch - 0.5)));
        const int iu1 = std::min(nu - 1, static_cast<int>(std::ceil((umax - ou - du) / g.pitch - 0.5)));
        const int iv0 = std::max(0, static_cast<int>(std::floor((vmin - ov - dv) / g.pitch - 0.5)));
        const int iv1 = std::min(nv - 1, static_cast<int>(std::ceil((vmax - ov - dv) / g.pitch - 0.5)));
        for (int iv = iv0; iv <= iv1; ++iv)
            for (int iu = iu0; iu <= iu1; ++iu)
                rows[static_cast<size_t>(iv) * nu + iu].push_back(static_cast<int>(ti));
    }

    std::vector<uint8_t> inside(g.cells.size(), 0);
    std::vector<double> hits;
    for (int iv = 0; iv < nv; ++iv) {
        for (int iu = 0; iu < nu; ++iu) {
            const auto& bucket = rows[static_cast<size_t>(iv) * nu + iu];
            if (bucket.empty()) continue;
            const double ru = ou + (iu + 0.5) * g.pitch + du;
            const double rv = ov + (iv + 0.5) * g.pitch + dv;
            hits.clear();
            for (int ti : bucket) {
                const Triangle& t = mesh.triangles[static_cast<size_t>(ti)];
                const double u0 = comp(t.v0, u), v0 = comp(t.v0, v), a0 = comp(t.v0, a);
                const double u1 = comp(t.v1, u), v1 = comp(t.v1, v), a1 = comp(t.v1, a);
                const double u2 = comp(t.v2, u), v2 = comp(t.v2, v), a2 = comp(t.v2, a);
                const double det = (u1 - u0) * (v2 - v0) - (v1 - v0) * (u2 - u0);
                if (det == 0.0) continue; // projection degenerate: ray lies in plane
                const double inv = 1.0 / det;
                const double l1 = ((ru - u0) * (v2 - v0) - (rv - v0) * (u2 - u0)) * inv;
                const double l2 = ((u1 - u0) * (rv - v0) - (v1 - v0) * (ru - u0)) * inv;
                if (l1 < 0.0 || l2 < 0.0 || l1 + l2 > 1.0) continue;
                hits.push_back(a0 + l1 * (a1 - a0) + l2 * (a2 - a0));
            }
            if (hits.empty()) continue;
            std::sort(hits.begin(), hits.end());
            // walk voxel centers along the scan axis; inside = odd number of
            // crossings beyond the center
            size_t hi = 0;
            int parity = static_cast<int>(hits.size()) % 2; // crossings remaining ahead of -inf
            (void)parity;
            for (int ia = 0; ia < na; ++ia) {
                const double ca = oa + (ia + 0.5) * g.pitch;
                while (hi < hits.size() && hits[hi] <= ca) ++hi;
                const size_t remaining = hits.size() - hi;
                if (remaining % 2 == 1) {
                    int ix = 0, iy = 0, iz = 0;
                    (a == 0 ? ix : (a == 1 ? iy : iz)) = ia;
                    (u == 0 ? ix : (u == 1 ? iy : iz)) = iu;
                    (v == 0 ? ix : (v == 1 ? iy : iz)) = iv;
                    inside[g.index(ix, iy, iz)] = 1;
                }
            }
        }
    }
    return inside;
}

VoxelGrid make_grid(const Box3& box, double pitch) {
    VoxelGrid g;
    g.pitch = pitch;
    g.origin = {box.min.x - pitch, box.min.y - pitch, box.min.z - pitch};
    const Vec3 e = box.extent();
    g.nx = static_cast<int>(std::ceil(e.x / pitch - 1e-9)) + 2;
    g.ny = static_cast<int>(std::ceil(e.y / pitch - 1e-9)) + 2;
    g.nz = static_cast<int>(std::ceil(e.z / pitch - 1e-9)) + 2;
    g.cells.assign(static_cast<size_t>(g.nx) * g.ny * g.nz, Cell::Empty);
    return g;
}

// inside flags on an existing grid, majority vote across the three axes;
// throws OpenMesh when more than 0.1% of voxels disagree
std::vector<uint8_t> scan_mesh_on_grid(const TriMesh& mesh, const VoxelGrid& g) {
    const std::vector<uint8_t> sx = parity_scan(mesh, g, 0);
    const std::vector<uint8_t> sy = parity_scan(mesh, g, 1);
    const std::vector<uint8_t> sz = parity_scan(mesh, g, 2);
    std::vector<uint8_t> out(sx.size(), 0);
    size_t disagree = 0;
    for (size_t i = 0; i < out.size(); ++i) {
        const int votes = sx[i] + sy[i] + sz[i];
        if (votes == 1 || votes == 2) ++disagree;
        out[i] = votes >= 2 ? 1 : 0;
    }
    if (disagree * 1000 > out.size())
        throw OpenMesh("parity inconsistent for " + std::to_string(disagree) + " of " +
                       std::to_string(out.size()) + " voxels; mesh is not watertight");
    return out;
}

} // namespace

VoxelGrid voxelize(const TriMesh& mesh, double pitch, Cell label) {
    if (pitch <= 0.0) throw SpecViolation("pitch must be positive");
    if (mesh.empty()) throw EmptyMesh("cannot voxelize an empty mesh");
    const Box3 box = mesh.bbox();
    const Vec3 e = box.extent();
    for (double ext : {e.x, e.y, e.z})
        if (ext / pitch < 2.0)
            throw PitchTooCoarse("fewer than 2 voxels along a mesh axis at pitch " +
                                 std::to_string(pitch));
    VoxelGrid g = make_grid(box, pitch);
    const std::vector<uint8_t> inside = scan_mesh_on_grid(mesh, g);
    for (size_t i = 0; i < inside.size(); ++i)
        if (inside[i]) g.cells[i] = label;
    return g;
}

TriMesh place_info(const TriMesh& info, const TriMesh& object, const EmbedSpec& spec) {
    const Box3 ob = object.bbox();
    const Box3 ib = info.bbox();
    const Vec3 oc = ob.center();
    const Vec3 ic = ib.center();
    TriMesh placed = info;
    placed.translate({oc.x - ic.x, oc.y - ic.y, (ob.max.z - spec.depth_mm) - ib.max.z});
    return placed;
}

std::pair<VoxelGrid, BodySet> embed(const TriMesh& object, const TriMesh& info,
                                    const EmbedSpec& spec, double pitch, bool place) {
    spec.validate();
    if (object.empty() || info.empty()) throw EmptyMesh("embed needs two non-empty meshes");

    const TriMesh placed = place ? place_info(info, object, spec) : info;
    const Box3 ob = object.bbox();
    const Box3 ib = placed.bbox();

    const double tol = 1e-6;
    const bool strictly_inside = ib.min.x > ob.min.x + tol && ib.max.x < ob.max.x - tol &&
                                 ib.min.y > ob.min.y + tol && ib.max.y < ob.max.y - tol &&
                                 ib.min.z > ob.min.z + tol && ib.max.z < ob.max.z - tol;
    if (!strictly_inside)
        throw InfoProtrudes("info body is not strictly inside the object");
    if (std::fabs((ob.max.z - ib.max.z) - spec.depth_mm) > tol)
        throw InfoProtrudes("info top sits " + std::to_string(ob.max.z - ib.max.z) +
                            " mm below the surface, spec says " + std::to_string(spec.depth_mm));

    VoxelGrid g = make_grid(ob, pitch);
    const std::vector<uint8_t> in_obj = scan_mesh_on_grid(object, g);
    const std::vector<uint8_t> in_info = scan_mesh_on_grid(placed, g);
    for (size_t i = 0; i < g.cells.size(); ++i) {
        if (in_info[i])
            g.cells[i] = Cell::Info;
        else if (in_obj[i])
            g.cells[i] = Cell::Object;
    }

    BodySet bodies;
    bodies.object_body = subtract_contained(object, placed);
    bodies.info_body = placed;
    bodies.spec = spec;
    bodies.pitch = pitch;
    return {std::move(g), std::move(bodies)};
}

VoxelGrid apply_mode(const VoxelGrid& grid, const EmbedSpec& spec) {
    if (grid.count(Cell::Info) == 0)
        throw ModeInapplicable("grid has no info voxels");

    VoxelGrid g = grid;
    int info_top_plane = -1; // topmost z layer containing info anywhere
    for (int z = g.nz - 1; z >= 0 && info_top_plane < 0; --z)
        for (int y = 0; y < g.ny && info_top_plane < 0; ++y)
            for (int x = 0; x < g.nx; ++x)
                if (g.at(x, y, z) == Cell::Info) {
                    info_top_plane = z;
                    break;
                }

    for (int y = 0; y < g.ny; ++y) {
        for (int x = 0; x < g.nx; ++x) {
            int top = -1, info_top = -1;
            for (int z = g.nz - 1; z >= 0; --z) {
                const Cell c = g.at(x, y, z);
                if (top < 0 && c != Cell::Empty) top = z;
                if (c == Cell::Info) {
                    info_top = z;
                    break;
                }
            }
            if (top < 0) continue; // outside the footprint
            const int fill_from = spec.mode == FabMode::SurfaceJoin
                                      ? info_top          // only columns with info
                                      : info_top_plane;   // whole footprint
            if (fill_from < 0) continue;
            for (int z = fill_from + 1; z <= top; ++z)
                if (g.at(x, y, z) == Cell::Empty) g.at(x, y, z) = Cell::Object;
        }
    }
    g.applied_mode = static_cast<int>(spec.mode);
    return g;
}

std::vector<uint8_t> solid_mask(const VoxelGrid& g, const EmbedSpec& spec, double shell_mm) {
    const int shell_vox = std::max(1, static_cast<int>(std::ceil(shell_mm / g.pitch - 1e-9)));
    std::vector<uint8_t> solid(g.cells.size(), 0);

    // BFS (face adjacency) from every body voxel exposed to air or the grid
    // boundary; anything within shell_vox layers is printed solid.
    std::vector<int16_t> dist(g.cells.size(), -1);
    std::deque<size_t> queue;
    auto empty_at = [&](int x, int y, int z) {
        if (x < 0 || y < 0 || z < 0 || x >= g.nx || y >= g.ny || z >= g.nz) return true;
        return g.at(x, y, z) == Cell::Empty;
    };
    for (int z = 0; z < g.nz; ++z)
        for (int y = 0; y < g.ny; ++y)
            for (int x = 0; x < g.nx; ++x) {
                const size_t i = g.index(x, y, z);
                if (g.cells[i] == Cell::Empty) continue;
                if (empty_at(x - 1, y, z) || empty_at(x + 1, y, z) || empty_at(x, y - 1, z) ||
                    empty_at(x, y + 1, z) || empty_at(x, y, z - 1) || empty_at(x, y, z + 1)) {
                    dist[i] = 0;
                    queue.push_back(i);
                }
            }
    const int dxs[6] = {1, -1, 0, 0, 0, 0};
    const int dys[6] = {0, 0, 1, -1, 0, 0};
    const int dzs[6] = {0, 0, 0, 0, 1, -1};
    while (!queue.empty()) {
        const size_t i = queue.front();
        queue.pop_front();
        if (dist[i] + 1 >= shell_vox) continue;
        const int z = static_cast<int>(i / (static_cast<size_t>(g.nx) * g.ny));
        const int y = static_cast<int>((i / g.nx) % g.ny);
        const int x = static_cast<int>(i % g.nx);
        for (int d = 0; d < 6; ++d) {
            const int nx2 = x + dxs[d], ny2 = y + dys[d], nz2 = z + dzs[d];
            if (nx2 < 0 || ny2 < 0 || nz2 < 0 || nx2 >= g.nx || ny2 >= g.ny || nz2 >= g.nz)
                continue;
            const size_t j = g.index(nx2, ny2, nz2);
            if (g.cells[j] == Cell::Empty || dist[j] >= 0) continue;
            dist[j] = static_cast<int16_t>(dist[i] + 1);
            queue.push_back(j);
        }
    }
    for (size_t i = 0; i < solid.size(); ++i)
        if (dist[i] >= 0 && dist[i] < shell_vox) solid[i] = 1;

    // info body always prints solid
    for (size_t i = 0; i < solid.size(); ++i)
        if (g.cells[i] == Cell::Info) solid[i] = 1;

    // surface-fill: solid window from the top surface down to the info top
    // plane across the whole footprint
    if (spec.mode == FabMode::SurfaceFill) {
        int info_top_plane = -1;
        for (int z = g.nz - 1; z >= 0 && info_top_plane < 0; --z)
            for (int y = 0; y < g.ny && info_top_plane < 0; ++y)
                for (int x = 0; x < g.nx; ++x)
                    if (g.at(x, y, z) == Cell::Info) {
                        info_top_plane = z;
                        break;
                    }
        if (info_top_plane >= 0) {
            for (int y = 0; y < g.ny; ++y)
                for (int x = 0; x < g.nx; ++x) {
                    int top = -1;
                    for (int z = g.nz - 1; z >= 0 && top < 0; --z)
                        if (g.at(x, y, z) != Cell::Empty) top = z;
                    for (int z = info_top_plane + 1; z <= top; ++z)
                        if (g.at(x, y, z) != Cell::Empty) solid[g.index(x, y, z)] = 1;
                }
        }
    }
    return solid;
}

void export_bodies(const BodySet& bodies, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoFailure("cannot create directory " + dir + ": " + ec.message());

    write_stl_file(bodies.object_body, (fs::path(dir) / "object.stl").string());
    write_stl_file(bodies.info_body, (fs::path(dir) / "info.stl").string());

    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["object_file"] = "object.stl";
    j["info_file"] = "info.stl";
    j["depth_d_mm"] = bodies.spec.depth_mm;
    j["density_X_mm_per_px"] = bodies.spec.density_mm_per_px;
    j["info_height_mm"] = bodies.spec.info_height_mm;
    j["mode"] = to_string(bodies.spec.mode);
    j["infill_fraction"] = bodies.spec.infill_fraction;
    j["object_dims_mm"] = bodies.spec.object_dims_mm;
    j["object_color"] = bodies.spec.object_color;
    j["info_color"] = bodies.spec.info_color;
    j["pitch_mm"] = bodies.pitch;

    std::ofstream f(fs::path(dir) / "manifest.json", std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open manifest.json in " + dir);
    f << j.dump(2) << "\n";
    if (!f) throw IoFailure("short write to manifest.json in " + dir);
}

BodySet import_bodies(const std::string& dir) {
    namespace fs = std::filesystem;
    std::ifstream f(fs::path(dir) / "manifest.json");
    if (!f) throw IoFailure("cannot open manifest.json in " + dir);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest.json: ") + e.what());
    }
    try {
        BodySet b;
        b.spec.depth_mm = j.at("depth_d_mm").get<double>();
        b.spec.density_mm_per_px = j.at("density_X_mm_per_px").get<double>();
        b.spec.info_height_mm = j.at("info_height_mm").get<double>();
        b.spec.mode = fab_mode_from_string(j.at("mode").get<std::string>());
        b.spec.infill_fraction = j.at("infill_fraction").get<double>();
        const auto dims = j.at("object_dims_mm").get<std::vector<double>>();
        if (dims.size() != 3) throw FormatError("object_dims_mm must have 3 entries");
        std::copy(dims.begin(), dims.end(), b.spec.object_dims_mm.begin());
        b.spec.object_color = j.at("object_color").get<std::string>();
        b.spec.info_color = j.at("info_color").get<std::string>();
        b.pitch = j.at("pitch_mm").get<double>();
        b.object_body = read_stl_file((fs::path(dir) / j.at("object_file").get<std::string>()).string());
        b.info_body = read_stl_file((fs::path(dir) / j.at("info_file").get<std::string>()).string());
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest.json: ") + e.what());
    }
}

} // namespace fabtag::geom
