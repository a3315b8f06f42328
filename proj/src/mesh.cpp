#include "fabtag/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "fabtag/errors.hpp"

namespace fabtag::geom {

Box3 TriMesh::bbox() const {
    Box3 b;
    constexpr double inf = std::numeric_limits<double>::infinity();
    b.min = {inf, inf, inf};
    b.max = {-inf, -inf, -inf};
    for (const Triangle& t : triangles) {
        for (const Vec3* v : {&t.v0, &t.v1, &t.v2}) {
            b.min.x = std::min(b.min.x, v->x);
            b.min.y = std::min(b.min.y, v->y);
            b.min.z = std::min(b.min.z, v->z);
            b.max.x = std::max(b.max.x, v->x);
            b.max.y = std::max(b.max.y, v->y);
            b.max.z = std::max(b.max.z, v->z);
        }
    }
    return b;
}

void TriMesh::translate(const Vec3& d) {
    for (Triangle& t : triangles) {
        t.v0 = t.v0 + d;
        t.v1 = t.v1 + d;
        t.v2 = t.v2 + d;
    }
}

namespace {

inline float read_f32(const uint8_t* p) {
    float f;
    std::memcpy(&f, p, 4);
    return f;
}

inline uint32_t read_u32(const uint8_t* p) {
    uint32_t u;
    std::memcpy(&u, p, 4);
    return u;
}

void check_finite(const Vec3& v) {
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
        throw NonFiniteVertex("vertex with non-finite coordinate");
}

bool looks_ascii(const std::vector<uint8_t>& bytes) {
    size_t i = 0;
    while (i < bytes.size() && std::isspace(bytes[i])) ++i;
    static const char kSolid[] = "solid";
    if (i + 5 > bytes.size() || std::memcmp(bytes.data() + i, kSolid, 5) != 0) return false;
    const std::string head(reinterpret_cast<const char*>(bytes.data()),
                           std::min<size_t>(bytes.size(), 4096));
    return head.find("facet") != std::string::npos;
}

TriMesh parse_binary(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 84)
        throw TruncatedFile("binary STL shorter than 84-byte preamble (" +
                            std::to_string(bytes.size()) + " bytes)");
    const uint32_t n = read_u32(bytes.data() + 80);
    const size_t expected = 84 + static_cast<size_t>(n) * 50;
    if (bytes.size() != expected)
        throw TruncatedFile("binary STL declares " + std::to_string(n) + " triangles (" +
                            std::to_string(expected) + " bytes) but has " +
                            std::to_string(bytes.size()));
    TriMesh mesh;
    mesh.triangles.reserve(n);
    const uint8_t* p = bytes.data() + 84;
    for (uint32_t i = 0; i < n; ++i, p += 50) {
        Triangle t;
        t.normal = Vec3{read_f32(p), read_f32(p + 4), read_f32(p + 8)};
        t.v0 = {read_f32(p + 12), read_f32(p + 16), read_f32(p + 20)};
        t.v1 = {read_f32(p + 24), read_f32(p + 28), read_f32(p + 32)};
        t.v2 = {read_f32(p + 36), read_f32(p + 40), read_f32(p + 44)};
        check_finite(t.v0);
        check_finite(t.v1);
        check_finite(t.v2);
        mesh.triangles.push_back(t);
    }
    return mesh;
}

Vec3 parse_vec3(const std::string& line, const char* ctx) {
    // strtod accepts nan/inf, which stream extraction does not; non-finite
    // values must surface as NonFiniteVertex rather than a syntax error
    Vec3 v;
    const char* p = line.c_str();
    for (double* coord : {&v.x, &v.y, &v.z}) {
        char* end = nullptr;
        *coord = std::strtod(p, &end);
        if (end == p)
            throw MalformedSyntax(std::string("expected three coordinates after ") + ctx);
        p = end;
    }
    return v;
}

TriMesh parse_ascii(const std::vector<uint8_t>& bytes) {
    std::istringstream in(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    std::string tok;
    if (!(in >> tok) || tok != "solid") throw MalformedSyntax("missing 'solid' header");
    std::string rest_of_line;
    std::getline(in, rest_of_line); // optional name

    TriMesh mesh;
    while (in >> tok) {
        if (tok == "endsolid") {
            std::getline(in, rest_of_line);
            return mesh;
        }
        if (tok != "facet") throw MalformedSyntax("expected 'facet' or 'endsolid', got '" + tok + "'");
        if (!(in >> tok) || tok != "normal") throw MalformedSyntax("expected 'normal' after 'facet'");
        Triangle t;
        {
            std::getline(in, rest_of_line);
            t.normal = parse_vec3(rest_of_line, "normal");
        }
        if (!(in >> tok) || tok != "outer") throw MalformedSyntax("expected 'outer loop'");
        if (!(in >> tok) || tok != "loop") throw MalformedSyntax("expected 'loop' after 'outer'");
        for (Vec3* v : {&t.v0, &t.v1, &t.v2}) {
            if (!(in >> tok) || tok != "vertex") throw MalformedSyntax("expected 'vertex'");
            std::getline(in, rest_of_line);
            *v = parse_vec3(rest_of_line, "vertex");
            check_finite(*v);
        }
        if (!(in >> tok) || tok != "endloop") throw MalformedSyntax("expected 'endloop'");
        if (!(in >> tok) || tok != "endfacet") throw MalformedSyntax("expected 'endfacet'");
        mesh.triangles.push_back(t);
    }
    throw MalformedSyntax("missing 'endsolid'");
}

} // namespace

TriMesh parse_stl(const std::vector<uint8_t>& bytes) {
    if (looks_ascii(bytes)) return parse_ascii(bytes);
    return parse_binary(bytes);
}

namespace {

inline void put_f32(std::vector<uint8_t>& out, float f) {
    uint8_t b[4];
    std::memcpy(b, &f, 4);
    out.insert(out.end(), b, b + 4);
}

Vec3 facet_normal(const Triangle& t) {
    if (t.normal) return *t.normal;
    Vec3 n = cross(t.v1 - t.v0, t.v2 - t.v0);
    const double len = std::sqrt(n.x * n.x + n.y * n.y + n.z * n.z);
    if (len > 0.0) n = n * (1.0 / len);
    return n;
}

} // namespace

std::vector<uint8_t> write_stl(const TriMesh& mesh, StlFormat format) {
    if (mesh.empty()) throw EmptyMesh("refusing to write a mesh with no triangles");

    if (format == StlFormat::Binary) {
        std::vector<uint8_t> out;
        out.reserve(84 + mesh.triangles.size() * 50);
        out.resize(80, 0);
        static const char kHeader[] = "fabtag binary stl";
        std::memcpy(out.data(), kHeader, sizeof(kHeader) - 1);
        const auto n = static_cast<uint32_t>(mesh.triangles.size());
        uint8_t nb[4];
        std::memcpy(nb, &n, 4);
        out.insert(out.end(), nb, nb + 4);
        for (const Triangle& t : mesh.triangles) {
            const Vec3 nrm = facet_normal(t);
            put_f32(out, static_cast<float>(nrm.x));
            put_f32(out, static_cast<float>(nrm.y));
            put_f32(out, static_cast<float>(nrm.z));
            for (const Vec3* v : {&t.v0, &t.v1, &t.v2}) {
                put_f32(out, static_cast<float>(v->x));
                put_f32(out, static_cast<float>(v->y));
                put_f32(out, static_cast<float>(v->z));
            }
            out.push_back(0);
            out.push_back(0);
        }
        return out;
    }

    std::ostringstream os;
    os.setf(std::ios::scientific);
    os.precision(9);
    os << "solid fabtag\n";
    for (const Triangle& t : mesh.triangles) {
        const Vec3 nrm = facet_normal(t);
        os << "  facet normal " << nrm.x << " " << nrm.y << " " << nrm.z << "\n";
        os << "    outer loop\n";
        for (const Vec3* v : {&t.v0, &t.v1, &t.v2})
            os << "      vertex " << v->x << " " << v->y << " " << v->z << "\n";
        os << "    endloop\n";
        os << "  endfacet\n";
    }
    os << "endsolid fabtag\n";
    const std::string s = os.str();
    return {s.begin(), s.end()};
}

TriMesh read_stl_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_stl(bytes);
}

void write_stl_file(const TriMesh& mesh, const std::string& path, StlFormat format) {
    const std::vector<uint8_t> bytes = write_stl(mesh, format);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoFailure("short write to " + path);
}

TriMesh make_cuboid(const Vec3& o, const Vec3& s) {
    const Vec3 p0 = o;
    const Vec3 p1 = o + s;
    auto v = [&](int cx, int cy, int cz) {
        return Vec3{cx ? p1.x : p0.x, cy ? p1.y : p0.y, cz ? p1.z : p0.z};
    };
    TriMesh m;
    auto quad = [&](Vec3 a, Vec3 b, Vec3 c, Vec3 d) {
        m.triangles.push_back({a, b, c, std::nullopt});
        m.triangles.push_back({a, c, d, std::nullopt});
    };
    quad(v(0, 0, 0), v(0, 1, 0), v(1, 1, 0), v(1, 0, 0)); // bottom (-z)
    quad(v(0, 0, 1), v(1, 0, 1), v(1, 1, 1), v(0, 1, 1)); // top (+z)
    quad(v(0, 0, 0), v(1, 0, 0), v(1, 0, 1), v(0, 0, 1)); // -y
    quad(v(0, 1, 0), v(0, 1, 1), v(1, 1, 1), v(1, 1, 0)); // +y
    quad(v(0, 0, 0), v(0, 0, 1), v(0, 1, 1), v(0, 1, 0)); // -x
    quad(v(1, 0, 0), v(1, 1, 0), v(1, 1, 1), v(1, 0, 1)); // +x
    return m;
}

TriMesh subtract_contained(const TriMesh& object, const TriMesh& cavity) {
    TriMesh out = object;
    out.triangles.reserve(object.triangles.size() + cavity.triangles.size());
    for (const Triangle& t : cavity.triangles) {
        Triangle r = t;
        std::swap(r.v1, r.v2); // reversed winding: surface now faces the cavity
        if (r.normal) r.normal = *r.normal * -1.0;
        out.triangles.push_back(r);
    }
    return out;
}

} // namespace fabtag::geom
