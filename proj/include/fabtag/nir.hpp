#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fabtag/voxel.hpp"

namespace fabtag::nir {

/// Per-color absorption/reflection over the instrument wavelength grid.
struct ColorOptics {
    std::string color;
    std::vector<double> absorption_per_mm; // mu(lambda), 1/mm
    std::vector<double> base_reflectance;  // r(lambda), fraction
};

/// Scalar knobs the spectra are generated from; calibrated once so the
/// decode boundaries land where the guideline table expects them.
struct OpticsConfig {
    // mu at the grid center per object color; a mild spectral slope is
    // applied across the band
    std::map<std::string, double> mu_center = {
        {"blue", 0.20}, {"red", 0.22}, {"orange", 0.24}, {"gray", 0.26}, {"black", 6.0},
    };
    double mu_slope = 0.08;            // relative tilt across the band
    double reflector_reflectance = 0.9; // white info body
    double background_floor = 0.15;    // no-reflector scattering return
    double noise_sigma = 0.01;
    double blur_mm_per_mm_depth = 0.5; // lateral spread per mm of depth
    int bands = 228;
    double lambda_min_nm = 900.0;
    double lambda_max_nm = 1700.0;
};

std::vector<double> wavelength_grid(const OpticsConfig& cfg);
ColorOptics make_color_optics(const std::string& color, const OpticsConfig& cfg);

struct SpectraCube {
    int width = 0;   // pixels per scan row
    int height = 0;  // scan rows
    double step_mm = 1.0;
    std::vector<double> wavelengths;
    std::vector<float> data; // (row, col, band) order

    size_t index(int row, int col, int band) const {
        return (static_cast<size_t>(row) * width + col) * wavelengths.size() + band;
    }
    float at(int row, int col, int band) const { return data[index(row, col, band)]; }
};

struct ScanSpec {
    int width = 24;
    int height = 24;
    double step_mm = 1.0;
    uint64_t seed = 0;
    double noise_sigma = -1.0; // <0: take the optics config default
};

// Raster scan: per pixel the down-and-back Beer-Lambert return off the first
// info voxel, or the scattering floor where no reflector exists; a
// depth-scaled Gaussian point-spread and seeded noise are applied on top.
SpectraCube simulate_scan(const geom::VoxelGrid& grid, const geom::EmbedSpec& spec,
                          const OpticsConfig& optics, const ScanSpec& scan);

void write_cube(const SpectraCube& cube, const std::string& path);
SpectraCube read_cube(const std::string& path);

std::vector<uint8_t> cube_bytes(const SpectraCube& cube);
SpectraCube parse_cube(const std::vector<uint8_t>& bytes);

} // namespace fabtag::nir
