#include "fabtag/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "fabtag/errors.hpp"
#include "fabtag/rng.hpp"

namespace fabtag::thermal {

namespace {

geom::VoxelGrid resample(const geom::VoxelGrid& grid, double pitch) {
    if (std::fabs(grid.pitch - pitch) < 1e-12) return grid;
    geom::VoxelGrid g;
    g.pitch = pitch;
    g.origin = grid.origin;
    g.applied_mode = grid.applied_mode;
    const double ext_x = grid.nx * grid.pitch;
    const double ext_y = grid.ny * grid.pitch;
    const double ext_z = grid.nz * grid.pitch;
    g.nx = std::max(1, static_cast<int>(std::lround(ext_x / pitch)));
    g.ny = std::max(1, static_cast<int>(std::lround(ext_y / pitch)));
    g.nz = std::max(1, static_cast<int>(std::lround(ext_z / pitch)));
    g.cells.assign(static_cast<size_t>(g.nx) * g.ny * g.nz, geom::Cell::Empty);
    for (int z = 0; z < g.nz; ++z)
        for (int y = 0; y < g.ny; ++y)
            for (int x = 0; x < g.nx; ++x) {
                const geom::Vec3 c = g.center(x, y, z);
                const int sx = static_cast<int>((c.x - grid.origin.x) / grid.pitch);
                const int sy = static_cast<int>((c.y - grid.origin.y) / grid.pitch);
                const int sz = static_cast<int>((c.z - grid.origin.z) / grid.pitch);
                if (sx < 0 || sy < 0 || sz < 0 || sx >= grid.nx || sy >= grid.ny || sz >= grid.nz)
                    continue;
                g.at(x, y, z) = grid.at(sx, sy, sz);
            }
    return g;
}

} // namespace

MaterialField material_grid(const geom::VoxelGrid& grid, const geom::EmbedSpec& spec,
                            const MaterialConfig& cfg) {
    const std::vector<uint8_t> solid = geom::solid_mask(grid, spec, cfg.shell_mm);
    MaterialField f;
    f.nx = grid.nx;
    f.ny = grid.ny;
    f.nz = grid.nz;
    f.pitch_m = grid.pitch * 1e-3;
    f.k.resize(grid.cells.size());
    f.rho_c.resize(grid.cells.size());
    f.active.resize(grid.cells.size());

    const double k_fil = cfg.k_filament;
    const double rc_fil = cfg.rho_filament * cfg.c_filament;
    const double k_air = cfg.k_air;
    const double rc_air = cfg.rho_air * cfg.c_air;
    const double fr = spec.infill_fraction;
    const double k_mix = fr * k_fil + (1.0 - fr) * k_air;
    const double rc_mix = fr * rc_fil + (1.0 - fr) * rc_air;

    for (size_t i = 0; i < grid.cells.size(); ++i) {
        if (grid.cells[i] == geom::Cell::Empty) {
            f.k[i] = k_air;
            f.rho_c[i] = rc_air;
            f.active[i] = 0;
        } else if (solid[i]) {
            f.k[i] = k_fil;
            f.rho_c[i] = rc_fil;
            f.active[i] = 1;
        } else {
            f.k[i] = k_mix;
            f.rho_c[i] = rc_mix;
            f.active[i] = 1;
        }
    }
    return f;
}

void MaterialField::prepare() const {
    if (prepared) return;
    const size_t n = k.size();
    gx.assign(n, 0.0);
    gy.assign(n, 0.0);
    gz.assign(n, 0.0);
    const double area_over_len = pitch_m; // (pitch^2) / pitch
    auto harmonic = [](double a, double b) { return 2.0 * a * b / (a + b); };
    for (int z = 0; z < nz; ++z)
        for (int y = 0; y < ny; ++y)
            for (int x = 0; x < nx; ++x) {
                const size_t i = index(x, y, z);
                if (!active[i]) continue;
                if (x + 1 < nx && active[index(x + 1, y, z)])
                    gx[i] = harmonic(k[i], k[index(x + 1, y, z)]) * area_over_len;
                if (y + 1 < ny && active[index(x, y + 1, z)])
                    gy[i] = harmonic(k[i], k[index(x, y + 1, z)]) * area_over_len;
                if (z + 1 < nz && active[index(x, y, z + 1)])
                    gz[i] = harmonic(k[i], k[index(x, y, z + 1)]) * area_over_len;
            }
    prepared = true;
}

double stable_dt(const MaterialField& props) {
    props.prepare();
    const double h2 = props.pitch_m * props.pitch_m;
    const double vol = h2 * props.pitch_m;
    double bound = std::numeric_limits<double>::infinity();
    for (int z = 0; z < props.nz; ++z)
        for (int y = 0; y < props.ny; ++y)
            for (int x = 0; x < props.nx; ++x) {
                const size_t i = props.index(x, y, z);
                if (!props.active[i]) continue;
                bound = std::min(bound, props.rho_c[i] * h2 / (6.0 * props.k[i]));
                double gsum = props.gx[i] + props.gy[i] + props.gz[i];
                if (x > 0) gsum += props.gx[props.index(x - 1, y, z)];
                if (y > 0) gsum += props.gy[props.index(x, y - 1, z)];
                if (z > 0) gsum += props.gz[props.index(x, y, z - 1)];
                if (gsum > 0.0) bound = std::min(bound, props.rho_c[i] * vol / gsum);
            }
    return bound;
}

void step_heat(std::vector<double>& temp, const MaterialField& props, double dt) {
    if (temp.size() != props.k.size())
        throw SpecViolation("temperature field size does not match the material grid");
    const double bound = stable_dt(props);
    if (dt > bound * (1.0 + 1e-12))
        throw UnstableDt("dt " + std::to_string(dt) + " s exceeds the stability bound " +
                         std::to_string(bound) + " s");
    props.prepare();
    const double vol = props.pitch_m * props.pitch_m * props.pitch_m;

    static thread_local std::vector<double> delta;
    delta.assign(temp.size(), 0.0);
    for (int z = 0; z < props.nz; ++z)
        for (int y = 0; y < props.ny; ++y)
            for (int x = 0; x < props.nx; ++x) {
                const size_t i = props.index(x, y, z);
                if (!props.active[i]) continue;
                if (props.gx[i] != 0.0) {
                    const size_t j = i + 1;
                    const double f = props.gx[i] * (temp[j] - temp[i]);
                    delta[i] += f;
                    delta[j] -= f;
                }
                if (props.gy[i] != 0.0) {
                    const size_t j = i + props.nx;
                    const double f = props.gy[i] * (temp[j] - temp[i]);
                    delta[i] += f;
                    delta[j] -= f;
                }
                if (props.gz[i] != 0.0) {
                    const size_t j = i + static_cast<size_t>(props.nx) * props.ny;
                    const double f = props.gz[i] * (temp[j] - temp[i]);
                    delta[i] += f;
                    delta[j] -= f;
                }
            }
    for (size_t i = 0; i < temp.size(); ++i)
        if (props.active[i]) temp[i] += dt * delta[i] / (props.rho_c[i] * vol);
}

double total_enthalpy(const std::vector<double>& temp, const MaterialField& props) {
    const double vol = props.pitch_m * props.pitch_m * props.pitch_m;
    double e = 0.0;
    for (size_t i = 0; i < temp.size(); ++i)
        if (props.active[i]) e += props.rho_c[i] * temp[i] * vol;
    return e;
}

namespace {

struct BoundaryFaces {
    // per voxel: number of convective faces, and whether the +z face is
    // exposed (clamped during contact, convective afterwards)
    std::vector<uint8_t> side_faces;
    std::vector<uint8_t> top_face;
};

BoundaryFaces find_boundaries(const MaterialField& props) {
    BoundaryFaces b;
    b.side_faces.assign(props.k.size(), 0);
    b.top_face.assign(props.k.size(), 0);
    auto inactive = [&](int x, int y, int z) {
        if (x < 0 || y < 0 || z < 0 || x >= props.nx || y >= props.ny || z >= props.nz)
            return true;
        return props.active[props.index(x, y, z)] == 0;
    };
    for (int z = 0; z < props.nz; ++z)
        for (int y = 0; y < props.ny; ++y)
            for (int x = 0; x < props.nx; ++x) {
                const size_t i = props.index(x, y, z);
                if (!props.active[i]) continue;
                uint8_t sides = 0;
                if (inactive(x - 1, y, z)) ++sides;
                if (inactive(x + 1, y, z)) ++sides;
                if (inactive(x, y - 1, z)) ++sides;
                if (inactive(x, y + 1, z)) ++sides;
                if (inactive(x, y, z - 1)) ++sides;
                if (inactive(x, y, z + 1)) b.top_face[i] = 1;
                b.side_faces[i] = sides;
            }
    return b;
}

} // namespace

ThermalRecording simulate_reading(const geom::VoxelGrid& grid_in, const geom::EmbedSpec& spec,
                                  const ThermalScenario& sc, const MaterialConfig& cfg) {
    if (grid_in.applied_mode < 0)
        throw SpecViolation("simulate_reading requires a grid with a fabrication mode applied");
    if (grid_in.applied_mode == static_cast<int>(geom::FabMode::SurfaceFill))
        std::cerr << "warning: thermal reading simulated on a surface-fill design\n";
    if (sc.record_duration_s <= 0.0 || sc.frame_rate <= 0.0)
        throw SpecViolation("record_duration and frame_rate must be positive");

    const geom::VoxelGrid grid = resample(grid_in, cfg.sim_pitch_mm);
    const MaterialField props = material_grid(grid, spec, cfg);
    props.prepare();
    const BoundaryFaces bounds = find_boundaries(props);

    const double area = props.pitch_m * props.pitch_m;
    const double vol = area * props.pitch_m;
    const double half_pitch = 0.5 * props.pitch_m;

    // positivity bound including boundary conductances (clamp dominates)
    double dt_max = std::numeric_limits<double>::infinity();
    for (int z = 0; z < props.nz; ++z)
        for (int y = 0; y < props.ny; ++y)
            for (int x = 0; x < props.nx; ++x) {
                const size_t i = props.index(x, y, z);
                if (!props.active[i]) continue;
                double gsum = props.gx[i] + props.gy[i] + props.gz[i];
                if (x > 0) gsum += props.gx[props.index(x - 1, y, z)];
                if (y > 0) gsum += props.gy[props.index(x, y - 1, z)];
                if (z > 0) gsum += props.gz[props.index(x, y, z - 1)];
                gsum += bounds.side_faces[i] * cfg.h_convection * area;
                if (bounds.top_face[i]) gsum += props.k[i] * area / half_pitch;
                dt_max = std::min(dt_max, props.rho_c[i] * vol / gsum);
            }
    dt_max *= 0.85;

    std::vector<double> temp(props.k.size(), sc.ambient_temp_c);
    static thread_local std::vector<double> delta;

    auto advance = [&](double from, double to, bool contact_phase) {
        const double span = to - from;
        if (span <= 0.0) return;
        const int nsub = std::max(1, static_cast<int>(std::ceil(span / dt_max - 1e-12)));
        const double dt = span / nsub;
        for (int s = 0; s < nsub; ++s) {
            delta.assign(temp.size(), 0.0);
            for (int z = 0; z < props.nz; ++z)
                for (int y = 0; y < props.ny; ++y)
                    for (int x = 0; x < props.nx; ++x) {
                        const size_t i = props.index(x, y, z);
                        if (!props.active[i]) continue;
                        if (props.gx[i] != 0.0) {
                            const double f = props.gx[i] * (temp[i + 1] - temp[i]);
                            delta[i] += f;
                            delta[i + 1] -= f;
                        }
                        if (props.gy[i] != 0.0) {
                            const size_t j = i + props.nx;
                            const double f = props.gy[i] * (temp[j] - temp[i]);
                            delta[i] += f;
                            delta[j] -= f;
                        }
                        if (props.gz[i] != 0.0) {
                            const size_t j = i + static_cast<size_t>(props.nx) * props.ny;
                            const double f = props.gz[i] * (temp[j] - temp[i]);
                            delta[i] += f;
                            delta[j] -= f;
                        }
                        if (bounds.side_faces[i])
                            delta[i] += bounds.side_faces[i] * cfg.h_convection * area *
                                        (sc.ambient_temp_c - temp[i]);
                        if (bounds.top_face[i]) {
                            if (contact_phase)
                                delta[i] += props.k[i] * area / half_pitch *
                                            (sc.contact_temp_c - temp[i]);
                            else
                                delta[i] += cfg.h_convection * area *
                                            (sc.ambient_temp_c - temp[i]);
                        }
                    }
            for (size_t i = 0; i < temp.size(); ++i)
                if (props.active[i]) temp[i] += dt * delta[i] / (props.rho_c[i] * vol);
        }
    };

    ThermalRecording rec;
    const double t_end = sc.contact_duration_s + sc.record_duration_s;
    const int nframes = static_cast<int>(std::floor(t_end * sc.frame_rate + 1e-9)) + 1;
    double t_now = 0.0;
    for (int fi = 0; fi < nframes; ++fi) {
        const double t_frame = fi / sc.frame_rate;
        if (t_frame > t_now) {
            // split the interval at the contact->cooling switch if needed
            const double t_switch = sc.contact_duration_s;
            if (t_now < t_switch && t_frame > t_switch) {
                advance(t_now, t_switch, true);
                advance(t_switch, t_frame, false);
            } else {
                advance(t_now, t_frame, t_frame <= t_switch + 1e-12);
            }
            t_now = t_frame;
        }
        // camera view: surface skin temperatures with a guaranteed ambient
        // margin around the object so the outline stays detectable
        const int margin = 2;
        ThermalFrame frame;
        frame.t = t_frame;
        frame.temp = img::GrayImage(props.nx + 2 * margin, props.ny + 2 * margin,
                                    sc.ambient_temp_c);
        for (int y = 0; y < frame.temp.height; ++y)
            for (int x = 0; x < frame.temp.width; ++x) {
                double v = sc.ambient_temp_c;
                const int gx2 = x - margin, gy2 = y - margin;
                if (gx2 >= 0 && gy2 >= 0 && gx2 < props.nx && gy2 < props.ny) {
                    for (int z = props.nz - 1; z >= 0; --z) {
                        const size_t i = props.index(gx2, gy2, z);
                        if (props.active[i]) {
                            v = temp[i];
                            break;
                        }
                    }
                }
                const uint64_t pix = static_cast<uint64_t>(y) * frame.temp.width + x;
                frame.temp.at(x, y) =
                    v + sc.noise_sigma_c * counter_gauss(sc.seed, static_cast<uint64_t>(fi), pix);
            }
        rec.frames.push_back(std::move(frame));
    }
    return rec;
}

std::vector<uint8_t> thermal_csv_bytes(const ThermalRecording& rec) {
    if (rec.frames.empty()) throw EmptyRecording("recording has no frames");
    const int rows = rec.frames[0].temp.height;
    const int cols = rec.frames[0].temp.width;
    std::string out;
    out.reserve(rec.frames.size() * static_cast<size_t>(rows) * cols * 8);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "rows,%d,cols,%d\n", rows, cols);
    out += buf;
    for (size_t fi = 0; fi < rec.frames.size(); ++fi) {
        const ThermalFrame& f = rec.frames[fi];
        std::snprintf(buf, sizeof(buf), "t,%.3f\n", f.t);
        out += buf;
        for (int y = 0; y < rows; ++y) {
            for (int x = 0; x < cols; ++x) {
                std::snprintf(buf, sizeof(buf), x + 1 < cols ? "%.3f," : "%.3f\n", f.temp.at(x, y));
                out += buf;
            }
        }
        if (fi + 1 < rec.frames.size()) out += "\n";
    }
    return {out.begin(), out.end()};
}

void write_thermal_csv(const ThermalRecording& rec, const std::string& path) {
    const std::vector<uint8_t> bytes = thermal_csv_bytes(rec);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoFailure("short write to " + path);
}

namespace {

[[noreturn]] void csv_error(size_t line, const std::string& what) {
    throw FormatError("thermal csv line " + std::to_string(line) + ": " + what);
}

} // namespace

ThermalRecording parse_thermal_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;

    auto next_line = [&](std::string& out) {
        if (!std::getline(in, out)) return false;
        ++lineno;
        if (!out.empty() && out.back() == '\r') out.pop_back();
        return true;
    };

    if (!next_line(line)) csv_error(1, "missing header");
    int rows = 0, cols = 0;
    if (std::sscanf(line.c_str(), "rows,%d,cols,%d", &rows, &cols) != 2 || rows <= 0 || cols <= 0)
        csv_error(lineno, "expected 'rows,<R>,cols,<C>'");

    ThermalRecording rec;
    double prev_t = -std::numeric_limits<double>::infinity();
    while (next_line(line)) {
        if (line.empty()) continue; // frame separator
        double t = 0.0;
        if (std::sscanf(line.c_str(), "t,%lf", &t) != 1)
            csv_error(lineno, "expected 't,<seconds>'");
        if (t <= prev_t) csv_error(lineno, "timestamps must be strictly increasing");
        prev_t = t;
        ThermalFrame frame;
        frame.t = t;
        frame.temp = img::GrayImage(cols, rows);
        for (int y = 0; y < rows; ++y) {
            if (!next_line(line) || line.empty())
                csv_error(lineno + 1, "frame block ended early (empty frame block)");
            std::istringstream ls(line);
            std::string tok;
            for (int x = 0; x < cols; ++x) {
                if (!std::getline(ls, tok, ','))
                    csv_error(lineno, "expected " + std::to_string(cols) + " values");
                try {
                    frame.temp.at(x, y) = std::stod(tok);
                } catch (const std::exception&) {
                    csv_error(lineno, "non-numeric temperature '" + tok + "'");
                }
                if (!std::isfinite(frame.temp.at(x, y)))
                    csv_error(lineno, "non-finite temperature");
            }
            if (std::getline(ls, tok, ','))
                csv_error(lineno, "more than " + std::to_string(cols) + " values");
        }
        rec.frames.push_back(std::move(frame));
    }
    if (rec.frames.empty()) csv_error(lineno, "no frames in file");
    return rec;
}

ThermalRecording read_thermal_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_thermal_csv(ss.str());
}

} // namespace fabtag::thermal
