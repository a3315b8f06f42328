#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fabtag/mesh.hpp"

namespace fabtag::geom {

enum class Cell : uint8_t { Empty = 0, Object = 1, Info = 2 };

enum class FabMode { SurfaceJoin, SurfaceFill };

std::string to_string(FabMode m);
FabMode fab_mode_from_string(const std::string& s);

/// Fabrication parameters shared by the design stage and both simulators.
struct EmbedSpec {
    double depth_mm = 1.0;          // d: surface to information top
    double density_mm_per_px = 5.0; // X: block size of one payload bit
    double info_height_mm = 1.0;
    FabMode mode = FabMode::SurfaceJoin;
    double infill_fraction = 0.10;
    std::array<double, 3> object_dims_mm = {30.0, 30.0, 15.0}; // W, D, H
    std::string object_color = "black";
    std::string info_color = "white";

    // Throws SpecViolation on a broken invariant. Payload dims are checked
    // when known (pass 0 to skip the footprint bound).
    void validate(int payload_rows = 0, int payload_cols = 0) const;
};

struct VoxelGrid {
    Vec3 origin;          // grid corner, mm
    double pitch = 0.0;   // mm per voxel
    int nx = 0, ny = 0, nz = 0;
    std::vector<Cell> cells; // x-fastest, then y, then z
    int applied_mode = -1;   // -1 none, else static_cast<int>(FabMode)

    size_t index(int x, int y, int z) const {
        return (static_cast<size_t>(z) * ny + y) * nx + x;
    }
    Cell at(int x, int y, int z) const { return cells[index(x, y, z)]; }
    Cell& at(int x, int y, int z) { return cells[index(x, y, z)]; }
    size_t count(Cell c) const;
    Vec3 center(int x, int y, int z) const {
        return {origin.x + (x + 0.5) * pitch, origin.y + (y + 0.5) * pitch,
                origin.z + (z + 0.5) * pitch};
    }
};

struct BodySet {
    TriMesh object_body; // object with the information cavity carved out
    TriMesh info_body;   // information body, placed
    EmbedSpec spec;
    double pitch = 0.0;
};

// Voxel centers inside the mesh (parity ray casting along +x, consistency
// checked along +y and +z with majority vote) get `label`; grid covers the
// mesh bbox padded by one voxel.
VoxelGrid voxelize(const TriMesh& mesh, double pitch, Cell label = Cell::Object);

// Translate `info` so it is centered in X/Y under the object's top face with
// its top depth_mm below it.
TriMesh place_info(const TriMesh& info, const TriMesh& object, const EmbedSpec& spec);

// Boolean embedding on a shared grid. With place=true the info mesh is
// positioned from the spec first; with place=false the caller's placement is
// validated against the spec (InfoProtrudes on contradiction).
std::pair<VoxelGrid, BodySet> embed(const TriMesh& object, const TriMesh& info,
                                    const EmbedSpec& spec, double pitch,
                                    bool place = true);

// Record the fabrication mode on the grid and make the mode's solid slabs
// explicit: SurfaceJoin fills columns above info voxels up to the top
// surface; SurfaceFill fills the whole footprint down to the info top plane.
VoxelGrid apply_mode(const VoxelGrid& grid, const EmbedSpec& spec);

// Solid-filament mask used by the thermal material model: surface shell,
// mode-specific slabs, and the info body. Everything else inside the object
// is infill. shell_mm is the printed top/wall thickness.
std::vector<uint8_t> solid_mask(const VoxelGrid& grid, const EmbedSpec& spec,
                                double shell_mm);

// Writes object.stl, info.stl and manifest.json; byte-deterministic.
void export_bodies(const BodySet& bodies, const std::string& dir);
BodySet import_bodies(const std::string& dir);

} // namespace fabtag::geom
