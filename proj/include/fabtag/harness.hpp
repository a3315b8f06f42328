#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fabtag/decode.hpp"
#include "fabtag/nir.hpp"
#include "fabtag/payload.hpp"
#include "fabtag/thermal.hpp"
#include "fabtag/voxel.hpp"

namespace fabtag::harness {

/// Resolved run configuration: embed defaults, scenario, model constants.
struct Config {
    thermal::MaterialConfig materials;
    nir::OpticsConfig optics;
    geom::EmbedSpec embed;
    thermal::ThermalScenario scenario;
    nir::ScanSpec scan;
    int payload_rows = 4;
    int payload_cols = 4;
    int payload_ones = 8;
    int seeds = 5;
    double geometry_pitch_mm = 0.5; // pitch for sweep-time embedding
};

Config load_config(const std::string& path);
Config config_from_json_text(const std::string& text);
std::string config_to_json(const Config& cfg);
uint64_t config_hash(const Config& cfg);

enum class Axis { DepthD, DensityX, InfillFraction, ContactTemp, Color };

Axis axis_from_string(const std::string& s);
std::string to_string(Axis a);

struct SweepSpec {
    Axis axis = Axis::DepthD;
    std::vector<std::string> values; // numeric or color names depending on axis
    std::string method = "thermal";  // "thermal" | "nir"
    Config cfg;
};

struct RunResult {
    std::string value;
    uint64_t seed = 0;
    std::string method;
    double accuracy = 0.0;       // first post-contact frame (thermal) or cube decode
    double window_s = -1.0;      // thermal only; -1 when not applicable
};

struct SweepResult {
    SweepSpec spec;
    std::vector<RunResult> runs;
};

// One full embed-simulate-decode run at the given settings.
RunResult run_single(const Config& cfg, const std::string& method, uint64_t seed);

SweepResult run_sweep(const SweepSpec& spec, int threads = 0);

// results.csv + plot.svg + resolved_config.json under dir/<method>_<axis>/
void write_sweep_outputs(const SweepResult& result, const std::string& dir);

struct GuidelineRow {
    std::string imaging;
    std::string aspect;
    std::string requirement;
    std::string observed;
    bool pass = false;
};

struct GuidelineReport {
    std::vector<GuidelineRow> rows;
    bool all_pass = false;
};

// Verifies the imaging-comparison thresholds against sweep outputs found in
// `results_dir`; throws IncompleteCoverage when an axis is missing.
GuidelineReport check_guidelines(const std::string& results_dir);

std::string format_report(const GuidelineReport& report);

enum class Visibility { Visible, Unobtrusive, Invisible };
std::string to_string(Visibility v);

// Static visibility study lookup (surface-fill rows at d = 1, 2, 3 mm;
// surface-join at d = 1 mm).
Visibility visibility_lookup(const std::string& color, geom::FabMode mode, double depth_mm);

} // namespace fabtag::harness
