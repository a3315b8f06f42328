#include "fabtag/nir.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>

#include "fabtag/errors.hpp"
#include "fabtag/rng.hpp"

namespace fabtag::nir {

std::vector<double> wavelength_grid(const OpticsConfig& cfg) {
    std::vector<double> w(cfg.bands);
    for (int i = 0; i < cfg.bands; ++i)
        w[i] = cfg.lambda_min_nm +
               (cfg.lambda_max_nm - cfg.lambda_min_nm) * i / (cfg.bands - 1);
    return w;
}

ColorOptics make_color_optics(const std::string& color, const OpticsConfig& cfg) {
    const auto it = cfg.mu_center.find(color);
    if (it == cfg.mu_center.end())
        throw SpecViolation("no optics calibrated for color '" + color + "'");
    ColorOptics o;
    o.color = color;
    const std::vector<double> grid = wavelength_grid(cfg);
    o.absorption_per_mm.resize(grid.size());
    o.base_reflectance.resize(grid.size());
    const double mid = 0.5 * (cfg.lambda_min_nm + cfg.lambda_max_nm);
    const double halfspan = 0.5 * (cfg.lambda_max_nm - cfg.lambda_min_nm);
    for (size_t i = 0; i < grid.size(); ++i) {
        const double tilt = 1.0 + cfg.mu_slope * (grid[i] - mid) / halfspan;
        o.absorption_per_mm[i] = std::max(0.0, it->second * tilt);
        o.base_reflectance[i] = cfg.reflector_reflectance;
    }
    return o;
}

namespace {

void blur_slice(std::vector<double>& v, int w, int h, double sigma_px) {
    if (sigma_px < 0.2) return;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_px)));
    std::vector<double> kern(static_cast<size_t>(radius) * 2 + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kern[i + radius] = std::exp(-0.5 * i * i / (sigma_px * sigma_px));
        sum += kern[i + radius];
    }
    for (double& x : kern) x /= sum;
    auto mirror = [](int i, int n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
        return i;
    };
    std::vector<double> tmp(v.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kern[i + radius] * v[static_cast<size_t>(y) * w + mirror(x + i, w)];
            tmp[static_cast<size_t>(y) * w + x] = acc;
        }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += kern[i + radius] * tmp[static_cast<size_t>(mirror(y + i, h)) * w + x];
            v[static_cast<size_t>(y) * w + x] = acc;
        }
}

} // namespace

SpectraCube simulate_scan(const geom::VoxelGrid& grid, const geom::EmbedSpec& spec,
                          const OpticsConfig& optics, const ScanSpec& scan) {
    if (grid.applied_mode < 0)
        throw SpecViolation("simulate_scan requires a grid with a fabrication mode applied");
    if (grid.applied_mode == static_cast<int>(geom::FabMode::SurfaceJoin))
        std::cerr << "warning: near-infrared scan simulated on a surface-join design\n";

    const ColorOptics obj = make_color_optics(spec.object_color, optics);
    const double noise = scan.noise_sigma >= 0.0 ? scan.noise_sigma : optics.noise_sigma;

    // object footprint and top surface from the grid
    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    int top_z = -1;
    for (int z = 0; z < grid.nz; ++z)
        for (int y = 0; y < grid.ny; ++y)
            for (int x = 0; x < grid.nx; ++x)
                if (grid.at(x, y, z) != geom::Cell::Empty) {
                    const geom::Vec3 c = grid.center(x, y, z);
                    min_x = std::min(min_x, c.x - 0.5 * grid.pitch);
                    max_x = std::max(max_x, c.x + 0.5 * grid.pitch);
                    min_y = std::min(min_y, c.y - 0.5 * grid.pitch);
                    max_y = std::max(max_y, c.y + 0.5 * grid.pitch);
                    top_z = std::max(top_z, z);
                }
    if (top_z < 0) throw SpecViolation("grid is empty");
    const double surface_z =
        grid.origin.z + (top_z + 1) * grid.pitch; // top face of the highest voxel

    // scan window centered on the footprint
    const double span_x = scan.width * scan.step_mm;
    const double span_y = scan.height * scan.step_mm;
    const double cx = 0.5 * (min_x + max_x);
    const double cy = 0.5 * (min_y + max_y);
    const double x0 = cx - 0.5 * span_x;
    const double y0 = cy - 0.5 * span_y;
    if (x0 + 0.5 * scan.step_mm < min_x || y0 + 0.5 * scan.step_mm < min_y ||
        x0 + span_x - 0.5 * scan.step_mm > max_x || y0 + span_y - 0.5 * scan.step_mm > max_y)
        throw WindowOutOfBounds("scan window " + std::to_string(span_x) + "x" +
                                std::to_string(span_y) +
                                " mm does not fit inside the object footprint");

    SpectraCube cube;
    cube.width = scan.width;
    cube.height = scan.height;
    cube.step_mm = scan.step_mm;
    cube.wavelengths = wavelength_grid(optics);
    const size_t nb = cube.wavelengths.size();
    cube.data.assign(static_cast<size_t>(scan.width) * scan.height * nb, 0.0f);

    // reflector depth per scan pixel (negative: no info in the column)
    std::vector<double> depth(static_cast<size_t>(scan.width) * scan.height, -1.0);
    double mean_depth = 0.0;
    size_t depth_count = 0;
    for (int row = 0; row < scan.height; ++row)
        for (int col = 0; col < scan.width; ++col) {
            const double px = x0 + (col + 0.5) * scan.step_mm;
            const double py = y0 + (row + 0.5) * scan.step_mm;
            const int gx = static_cast<int>((px - grid.origin.x) / grid.pitch);
            const int gy = static_cast<int>((py - grid.origin.y) / grid.pitch);
            if (gx < 0 || gy < 0 || gx >= grid.nx || gy >= grid.ny) continue;
            for (int z = grid.nz - 1; z >= 0; --z) {
                if (grid.at(gx, gy, z) == geom::Cell::Info) {
                    const double info_top = grid.origin.z + (z + 1) * grid.pitch;
                    depth[static_cast<size_t>(row) * scan.width + col] =
                        std::max(0.0, surface_z - info_top);
                    mean_depth += depth[static_cast<size_t>(row) * scan.width + col];
                    ++depth_count;
                    break;
                }
            }
        }
    if (depth_count > 0) mean_depth /= static_cast<double>(depth_count);

    // ideal per-band reflectance, then lateral spread and noise
    std::vector<double> slice(static_cast<size_t>(scan.width) * scan.height);
    const double sigma_px =
        optics.blur_mm_per_mm_depth * (depth_count > 0 ? mean_depth : spec.depth_mm) /
        scan.step_mm;
    for (size_t b = 0; b < nb; ++b) {
        for (int row = 0; row < scan.height; ++row)
            for (int col = 0; col < scan.width; ++col) {
                const double d = depth[static_cast<size_t>(row) * scan.width + col];
                double r;
                if (d >= 0.0)
                    r = obj.base_reflectance[b] *
                        std::exp(-2.0 * obj.absorption_per_mm[b] * d);
                else
                    r = optics.background_floor;
                slice[static_cast<size_t>(row) * scan.width + col] = r;
            }
        blur_slice(slice, scan.width, scan.height, sigma_px);
        for (int row = 0; row < scan.height; ++row)
            for (int col = 0; col < scan.width; ++col) {
                const size_t pix = static_cast<size_t>(row) * scan.width + col;
                double v = slice[pix];
                if (noise > 0.0)
                    v += noise * counter_gauss(scan.seed, pix, b);
                cube.data[cube.index(row, col, static_cast<int>(b))] =
                    static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
    }
    return cube;
}

namespace {

template <typename T>
void put_raw(std::vector<uint8_t>& out, T v) {
    uint8_t b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out.insert(out.end(), b, b + sizeof(T));
}

template <typename T>
T get_raw(const std::vector<uint8_t>& in, size_t& off) {
    T v;
    std::memcpy(&v, in.data() + off, sizeof(T));
    off += sizeof(T);
    return v;
}

} // namespace

std::vector<uint8_t> cube_bytes(const SpectraCube& cube) {
    std::vector<uint8_t> out;
    const size_t nb = cube.wavelengths.size();
    out.reserve(20 + nb * 4 + cube.data.size() * 4);
    out.push_back('N');
    out.push_back('I');
    out.push_back('R');
    out.push_back('C');
    put_raw<uint32_t>(out, static_cast<uint32_t>(cube.width));
    put_raw<uint32_t>(out, static_cast<uint32_t>(cube.height));
    put_raw<uint32_t>(out, static_cast<uint32_t>(nb));
    put_raw<float>(out, static_cast<float>(cube.step_mm));
    for (double w : cube.wavelengths) put_raw<float>(out, static_cast<float>(w));
    for (float v : cube.data) put_raw<float>(out, v);
    return out;
}

SpectraCube parse_cube(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "NIRC", 4) != 0)
        throw BadMagic("missing NIRC magic");
    if (bytes.size() < 20) throw LengthMismatch("NIRC header truncated");
    size_t off = 4;
    SpectraCube cube;
    cube.width = static_cast<int>(get_raw<uint32_t>(bytes, off));
    cube.height = static_cast<int>(get_raw<uint32_t>(bytes, off));
    const auto nb = get_raw<uint32_t>(bytes, off);
    cube.step_mm = get_raw<float>(bytes, off);
    if (cube.width <= 0 || cube.height <= 0 || nb == 0)
        throw LengthMismatch("NIRC header has zero dimension");
    const size_t expected =
        20 + static_cast<size_t>(nb) * 4 +
        static_cast<size_t>(cube.width) * cube.height * nb * 4;
    if (bytes.size() != expected)
        throw LengthMismatch("NIRC payload is " + std::to_string(bytes.size()) +
                             " bytes, header implies " + std::to_string(expected));
    cube.wavelengths.resize(nb);
    for (uint32_t i = 0; i < nb; ++i) cube.wavelengths[i] = get_raw<float>(bytes, off);
    cube.data.resize(static_cast<size_t>(cube.width) * cube.height * nb);
    for (float& v : cube.data) v = get_raw<float>(bytes, off);
    return cube;
}

void write_cube(const SpectraCube& cube, const std::string& path) {
    const std::vector<uint8_t> bytes = cube_bytes(cube);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoFailure("short write to " + path);
}

SpectraCube read_cube(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_cube(bytes);
}

} // namespace fabtag::nir
