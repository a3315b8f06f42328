#include "fabtag/payload.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fabtag/errors.hpp"
#include "fabtag/rng.hpp"

namespace fabtag::payload {

int BitMatrix::popcount() const {
    return static_cast<int>(std::count(bits.begin(), bits.end(), uint8_t{1}));
}

void BitMatrix::validate_payload() const {
    if (rows <= 0 || cols <= 0) throw SpecViolation("payload matrix must be non-empty");
    if (bits.empty() || bits[0] != 1) throw SpecViolation("anchor bit (0,0) must be 1");
    if (popcount() == rows * cols)
        throw SpecViolation("all-ones payload is undecodable (no contrast reference)");
}

BitMatrix random_matrix(int rows, int cols, int ones, uint64_t seed) {
    if (rows <= 0 || cols <= 0) throw OnesOutOfRange("matrix dimensions must be positive");
    const int total = rows * cols;
    if (ones < 1 || ones > total - 1)
        throw OnesOutOfRange("ones must be in [1, rows*cols-1], got " + std::to_string(ones));

    // anchor is fixed; draw the rest without replacement (Fisher-Yates prefix)
    BitMatrix m(rows, cols);
    m.bits[0] = 1;
    std::vector<int> pool(static_cast<size_t>(total) - 1);
    std::iota(pool.begin(), pool.end(), 1);
    Rng rng(seed);
    const int remaining = ones - 1;
    for (int i = 0; i < remaining; ++i) {
        const auto j = i + static_cast<int>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
        m.bits[static_cast<size_t>(pool[i])] = 1;
    }
    return m;
}

BitMatrix parse_matrix_text(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw FormatError("matrix file has no rows");
    const size_t cols = lines[0].size();
    BitMatrix m(static_cast<int>(lines.size()), static_cast<int>(cols));
    for (size_t r = 0; r < lines.size(); ++r) {
        if (lines[r].size() != cols)
            throw FormatError("matrix row " + std::to_string(r + 1) + " has " +
                              std::to_string(lines[r].size()) + " columns, expected " +
                              std::to_string(cols));
        for (size_t c = 0; c < cols; ++c) {
            const char ch = lines[r][c];
            if (ch != '0' && ch != '1')
                throw FormatError("matrix row " + std::to_string(r + 1) +
                                  " has invalid character '" + std::string(1, ch) + "'");
            m.at(static_cast<int>(r), static_cast<int>(c)) = ch == '1' ? 1 : 0;
        }
    }
    return m;
}

std::string matrix_to_text(const BitMatrix& m) {
    std::string out;
    out.reserve(static_cast<size_t>(m.rows) * (m.cols + 1));
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) out.push_back(m.at(r, c) ? '1' : '0');
        out.push_back('\n');
    }
    return out;
}

BitMatrix read_matrix_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoFailure("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_matrix_text(ss.str());
}

geom::TriMesh matrix_to_mesh(const BitMatrix& m, const geom::EmbedSpec& spec) {
    spec.validate(m.rows, m.cols);
    if (m.popcount() == 0) throw SpecViolation("matrix has no set bits to extrude");
    const double X = spec.density_mm_per_px;
    geom::TriMesh mesh;
    mesh.triangles.reserve(static_cast<size_t>(m.popcount()) * 12);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c)
            if (m.at(r, c)) {
                const geom::TriMesh cell = geom::make_cuboid(
                    {c * X, r * X, 0.0}, {X, X, spec.info_height_mm});
                mesh.triangles.insert(mesh.triangles.end(), cell.triangles.begin(),
                                      cell.triangles.end());
            }
    return mesh;
}

double matrix_accuracy(const BitMatrix& decoded, const BitMatrix& truth) {
    if (decoded.rows != truth.rows || decoded.cols != truth.cols)
        throw DimensionMismatch("accuracy needs equally sized matrices, got " +
                                std::to_string(decoded.rows) + "x" + std::to_string(decoded.cols) +
                                " vs " + std::to_string(truth.rows) + "x" +
                                std::to_string(truth.cols));
    int equal = 0;
    for (size_t i = 0; i < decoded.bits.size(); ++i)
        if ((decoded.bits[i] != 0) == (truth.bits[i] != 0)) ++equal;
    return static_cast<double>(equal) / static_cast<double>(decoded.bits.size());
}

namespace {

// PBM token reader: skips whitespace and '#' comments.
struct PbmReader {
    const std::vector<uint8_t>& b;
    size_t i = 0;

    void skip_space() {
        while (i < b.size()) {
            if (b[i] == '#') {
                while (i < b.size() && b[i] != '\n') ++i;
            } else if (std::isspace(b[i])) {
                ++i;
            } else {
                break;
            }
        }
    }

    int read_int() {
        skip_space();
        if (i >= b.size() || !std::isdigit(b[i]))
            throw DimensionMismatch("expected integer in PBM header");
        int v = 0;
        while (i < b.size() && std::isdigit(b[i])) v = v * 10 + (b[i++] - '0');
        return v;
    }
};

} // namespace

GlyphBitmap load_pbm(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '1' && bytes[1] != '4'))
        throw BadMagic("not a P1/P4 portable bitmap");
    const bool binary = bytes[1] == '4';
    PbmReader rd{bytes, 2};
    GlyphBitmap g;
    g.width = rd.read_int();
    g.height = rd.read_int();
    if (g.width <= 0 || g.height <= 0) throw DimensionMismatch("PBM dimensions must be positive");
    g.pixels.assign(static_cast<size_t>(g.width) * g.height, 0);

    if (binary) {
        ++rd.i; // single whitespace after the header
        const size_t row_bytes = (static_cast<size_t>(g.width) + 7) / 8;
        if (rd.i + row_bytes * g.height > bytes.size())
            throw DimensionMismatch("P4 data shorter than width*height bits");
        for (int y = 0; y < g.height; ++y) {
            const uint8_t* row = bytes.data() + rd.i + static_cast<size_t>(y) * row_bytes;
            for (int x = 0; x < g.width; ++x)
                g.pixels[static_cast<size_t>(y) * g.width + x] =
                    (row[x / 8] >> (7 - x % 8)) & 1;
        }
    } else {
        for (size_t p = 0; p < g.pixels.size(); ++p) {
            rd.skip_space();
            if (rd.i >= bytes.size())
                throw DimensionMismatch("P1 data shorter than width*height bits");
            const uint8_t ch = bytes[rd.i++];
            if (ch != '0' && ch != '1')
                throw DimensionMismatch("P1 pixel must be 0 or 1");
            g.pixels[p] = ch == '1' ? 1 : 0;
        }
    }
    bool any = std::any_of(g.pixels.begin(), g.pixels.end(), [](uint8_t p) { return p != 0; });
    if (!any) throw SpecViolation("bitmap has no set pixels");
    return g;
}

GlyphBitmap read_pbm_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return load_pbm(bytes);
}

geom::TriMesh bitmap_to_mesh(const GlyphBitmap& g, double info_height_mm) {
    if (info_height_mm <= 0.0) throw SpecViolation("info_height must be > 0");
    geom::TriMesh mesh;
    for (int y = 0; y < g.height; ++y)
        for (int x = 0; x < g.width; ++x)
            if (g.at(x, y)) {
                const geom::TriMesh cell = geom::make_cuboid(
                    {x * g.scale_mm, y * g.scale_mm, 0.0},
                    {g.scale_mm, g.scale_mm, info_height_mm});
                mesh.triangles.insert(mesh.triangles.end(), cell.triangles.begin(),
                                      cell.triangles.end());
            }
    if (mesh.empty()) throw SpecViolation("bitmap has no set pixels");
    return mesh;
}

} // namespace fabtag::payload
