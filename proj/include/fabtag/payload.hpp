#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fabtag/mesh.hpp"
#include "fabtag/voxel.hpp"

namespace fabtag::payload {

/// Binary payload. Payload matrices carry the anchor bit at (0, 0); decoded
/// matrices are plain containers and may violate the payload invariants.
struct BitMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<uint8_t> bits; // row-major, 0/1

    BitMatrix() = default;
    BitMatrix(int r, int c) : rows(r), cols(c), bits(static_cast<size_t>(r) * c, 0) {}

    uint8_t& at(int r, int c) { return bits[static_cast<size_t>(r) * cols + c]; }
    uint8_t at(int r, int c) const { return bits[static_cast<size_t>(r) * cols + c]; }
    int popcount() const;
    bool operator==(const BitMatrix& o) const = default;

    // anchor set, at least one 0 bit
    void validate_payload() const;
};

// Exactly `ones` set bits with (0,0) forced among them; uniform over the
// remaining positions, reproducible for a given seed.
BitMatrix random_matrix(int rows, int cols, int ones, uint64_t seed);

// One line per row, characters 0/1, no separators.
BitMatrix parse_matrix_text(const std::string& text);
std::string matrix_to_text(const BitMatrix& m);
BitMatrix read_matrix_file(const std::string& path);

// Each 1-bit extruded to an X*X*info_height cuboid; row 0 is the -y edge of
// the footprint so the anchor images top-left.
geom::TriMesh matrix_to_mesh(const BitMatrix& m, const geom::EmbedSpec& spec);

// Fraction of equal bits.
double matrix_accuracy(const BitMatrix& decoded, const BitMatrix& truth);

struct GlyphBitmap {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels; // row-major, 1 = set (PBM black)
    double scale_mm = 1.0;

    uint8_t at(int x, int y) const { return pixels[static_cast<size_t>(y) * width + x]; }
};

// P1 (ASCII) and P4 (packed binary) portable bitmaps.
GlyphBitmap load_pbm(const std::vector<uint8_t>& bytes);
GlyphBitmap read_pbm_file(const std::string& path);

geom::TriMesh bitmap_to_mesh(const GlyphBitmap& g, double info_height_mm);

} // namespace fabtag::payload
