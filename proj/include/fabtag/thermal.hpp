#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fabtag/image.hpp"
#include "fabtag/voxel.hpp"

namespace fabtag::thermal {

/// Bulk constants for the conduction model. Filament/air defaults are
/// PLA and room-air handbook values; all tunable through config files.
struct MaterialConfig {
    double k_filament = 0.13;  // W/(m K)
    double rho_filament = 1240.0;
    double c_filament = 1800.0;
    double k_air = 0.026;
    double rho_air = 1.2;
    double c_air = 1005.0;
    double h_convection = 10.0; // W/(m^2 K) to ambient
    double shell_mm = 1.0;      // printed top/wall solid thickness
    double sim_pitch_mm = 0.5;  // simulation resampling pitch
};

/// Per-voxel conductivity and volumetric heat capacity on the sim grid.
/// Effective-medium mixing for infill: k = f*k_fil + (1-f)*k_air, same for
/// rho*c. Solid regions (shell, mode slabs, info body) get filament values.
struct MaterialField {
    int nx = 0, ny = 0, nz = 0;
    double pitch_m = 0.0;
    std::vector<double> k;      // W/(m K)
    std::vector<double> rho_c;  // J/(m^3 K)
    std::vector<uint8_t> active;

    size_t index(int x, int y, int z) const {
        return (static_cast<size_t>(z) * ny + y) * nx + x;
    }

    // face conductance cache, built on demand
    void prepare() const;
    mutable std::vector<double> gx, gy, gz; // W/K per +x/+y/+z face
    mutable bool prepared = false;
};

MaterialField material_grid(const geom::VoxelGrid& grid, const geom::EmbedSpec& spec,
                            const MaterialConfig& cfg);

struct ThermalScenario {
    double contact_temp_c = 35.0;
    double contact_duration_s = 3.0;
    double ambient_temp_c = 27.0;
    double record_duration_s = 60.0;
    double frame_rate = 6.0; // fps, camera runs 5-7
    double noise_sigma_c = 0.05;
    uint64_t seed = 0;
};

struct ThermalFrame {
    double t = 0.0;
    img::GrayImage temp; // deg C, one pixel per surface column
};

struct ThermalRecording {
    std::vector<ThermalFrame> frames;
};

// Explicit stability bound as stated for the scheme:
// min over voxels of rho*c*pitch^2 / (6k), further tightened by the
// positivity bound for heterogeneous neighborhoods.
double stable_dt(const MaterialField& props);

// One conduction step, insulated outer boundary, harmonic-mean face
// conductivities, flux form (conserves enthalpy to rounding).
void step_heat(std::vector<double>& temp, const MaterialField& props, double dt);

double total_enthalpy(const std::vector<double>& temp, const MaterialField& props);

// Contact phase clamps the top face to contact_temp; afterwards every
// exposed face exchanges convectively with ambient. Surface skin
// temperatures are sampled per column at frame_rate with seeded Gaussian
// camera noise.
ThermalRecording simulate_reading(const geom::VoxelGrid& grid, const geom::EmbedSpec& spec,
                                  const ThermalScenario& scenario,
                                  const MaterialConfig& cfg = {});

void write_thermal_csv(const ThermalRecording& rec, const std::string& path);
ThermalRecording read_thermal_csv(const std::string& path);

std::vector<uint8_t> thermal_csv_bytes(const ThermalRecording& rec);
ThermalRecording parse_thermal_csv(const std::string& text);

} // namespace fabtag::thermal
