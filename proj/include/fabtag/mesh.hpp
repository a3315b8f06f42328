#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fabtag::geom {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }
};

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

struct Triangle {
    Vec3 v0, v1, v2;
    std::optional<Vec3> normal;
};

struct Box3 {
    Vec3 min, max;
    Vec3 extent() const { return max - min; }
    Vec3 center() const { return (min + max) * 0.5; }
};

/// Triangle soup in mm. Coordinates are required to be finite on ingest.
struct TriMesh {
    std::vector<Triangle> triangles;

    bool empty() const { return triangles.empty(); }
    Box3 bbox() const;
    void translate(const Vec3& d);
};

enum class StlFormat { Ascii, Binary };

// Auto-detects ASCII ("solid" prefix + "facet" keyword) vs binary layout.
TriMesh parse_stl(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> write_stl(const TriMesh& mesh, StlFormat format = StlFormat::Binary);

TriMesh read_stl_file(const std::string& path);
void write_stl_file(const TriMesh& mesh, const std::string& path,
                    StlFormat format = StlFormat::Binary);

// Axis-aligned cuboid [origin, origin+size], 12 triangles, outward normals.
TriMesh make_cuboid(const Vec3& origin, const Vec3& size);

// Carve a strictly-contained cavity: the hull keeps its triangles, the
// cavity surface is the info mesh with reversed winding.
TriMesh subtract_contained(const TriMesh& object, const TriMesh& cavity);

} // namespace fabtag::geom
