#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fabtag/decode.hpp"
#include "fabtag/errors.hpp"
#include "fabtag/harness.hpp"
#include "fabtag/nir.hpp"
#include "fabtag/payload.hpp"
#include "fabtag/thermal.hpp"
#include "fabtag/voxel.hpp"

namespace {

using namespace fabtag;

constexpr int kExitOk = 0;
constexpr int kExitDecodeBelowThreshold = 2;
constexpr int kExitFormatError = 3;
constexpr int kExitSpecViolation = 4;
constexpr int kExitOther = 1;

payload::BitMatrix load_payload_matrix(const std::string& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoFailure("cannot open " + path);
    char magic[2] = {0, 0};
    probe.read(magic, 2);
    probe.close();
    if (magic[0] == 'P' && (magic[1] == '1' || magic[1] == '4')) {
        const payload::GlyphBitmap g = payload::read_pbm_file(path);
        payload::BitMatrix m(g.height, g.width);
        for (int y = 0; y < g.height; ++y)
            for (int x = 0; x < g.width; ++x) m.at(y, x) = g.at(x, y);
        return m;
    }
    return payload::read_matrix_file(path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open " + path);
    f << text;
    if (!f) throw IoFailure("short write to " + path);
}

int cmd_embed(const std::string& object_path, const std::string& payload_path, double depth,
              double density, double height, const std::string& mode, double infill,
              const std::string& out_dir, double pitch, const std::string& object_color,
              const std::string& info_color) {
    geom::TriMesh object;
    if (object_path == "cube") {
        object = geom::make_cuboid({0, 0, 0}, {30, 30, 15});
    } else {
        object = geom::read_stl_file(object_path);
    }
    const geom::Box3 ob = object.bbox();

    geom::EmbedSpec spec;
    spec.depth_mm = depth;
    spec.density_mm_per_px = density;
    spec.info_height_mm = height;
    spec.mode = geom::fab_mode_from_string(mode);
    spec.infill_fraction = infill;
    spec.object_dims_mm = {ob.extent().x, ob.extent().y, ob.extent().z};
    spec.object_color = object_color;
    spec.info_color = info_color;

    const payload::BitMatrix m = load_payload_matrix(payload_path);
    m.validate_payload();
    const geom::TriMesh info = payload::matrix_to_mesh(m, spec);
    auto [grid, bodies] = geom::embed(object, info, spec, pitch);
    geom::export_bodies(bodies, out_dir);
    write_text((std::filesystem::path(out_dir) / "payload.txt").string(),
               payload::matrix_to_text(m));
    std::printf("embedded %dx%d payload, %zu info voxels, design written to %s\n", m.rows, m.cols,
                grid.count(geom::Cell::Info), out_dir.c_str());
    return kExitOk;
}

int cmd_simulate_thermal(const std::string& design_dir, double contact_temp, double ambient,
                         double duration, double fps, uint64_t seed, const std::string& out_csv,
                         double contact_duration, const std::string& config_path) {
    harness::Config cfg;
    if (!config_path.empty()) cfg = harness::load_config(config_path);
    const geom::BodySet bodies = geom::import_bodies(design_dir);

    const geom::TriMesh object = geom::subtract_contained(bodies.object_body, bodies.info_body);
    // object_body already carries the cavity; re-voxelize both as exported
    auto grid = geom::voxelize(bodies.object_body, cfg.materials.sim_pitch_mm, geom::Cell::Object);
    const geom::VoxelGrid info_grid =
        geom::voxelize(bodies.info_body, cfg.materials.sim_pitch_mm, geom::Cell::Info);
    // merge info occupancy onto the object grid
    for (int z = 0; z < grid.nz; ++z)
        for (int y = 0; y < grid.ny; ++y)
            for (int x = 0; x < grid.nx; ++x) {
                const geom::Vec3 c = grid.center(x, y, z);
                const int ix = static_cast<int>((c.x - info_grid.origin.x) / info_grid.pitch);
                const int iy = static_cast<int>((c.y - info_grid.origin.y) / info_grid.pitch);
                const int iz = static_cast<int>((c.z - info_grid.origin.z) / info_grid.pitch);
                if (ix < 0 || iy < 0 || iz < 0 || ix >= info_grid.nx || iy >= info_grid.ny ||
                    iz >= info_grid.nz)
                    continue;
                if (info_grid.at(ix, iy, iz) == geom::Cell::Info)
                    grid.at(x, y, z) = geom::Cell::Info;
            }

    const geom::VoxelGrid fab = geom::apply_mode(grid, bodies.spec);
    thermal::ThermalScenario sc = cfg.scenario;
    sc.contact_temp_c = contact_temp;
    sc.ambient_temp_c = ambient;
    sc.record_duration_s = duration;
    sc.frame_rate = fps;
    sc.seed = seed;
    if (contact_duration > 0.0) sc.contact_duration_s = contact_duration;
    const thermal::ThermalRecording rec =
        thermal::simulate_reading(fab, bodies.spec, sc, cfg.materials);
    thermal::write_thermal_csv(rec, out_csv);
    std::printf("recorded %zu frames to %s\n", rec.frames.size(), out_csv.c_str());
    return kExitOk;
}

int cmd_simulate_nir(const std::string& design_dir, const std::string& color, double step_mm,
                     const std::string& res, uint64_t seed, const std::string& out_path,
                     const std::string& config_path) {
    harness::Config cfg;
    if (!config_path.empty()) cfg = harness::load_config(config_path);
    const geom::BodySet bodies = geom::import_bodies(design_dir);

    auto grid = geom::voxelize(bodies.object_body, cfg.materials.sim_pitch_mm, geom::Cell::Object);
    const geom::VoxelGrid info_grid =
        geom::voxelize(bodies.info_body, cfg.materials.sim_pitch_mm, geom::Cell::Info);
    for (int z = 0; z < grid.nz; ++z)
        for (int y = 0; y < grid.ny; ++y)
            for (int x = 0; x < grid.nx; ++x) {
                const geom::Vec3 c = grid.center(x, y, z);
                const int ix = static_cast<int>((c.x - info_grid.origin.x) / info_grid.pitch);
                const int iy = static_cast<int>((c.y - info_grid.origin.y) / info_grid.pitch);
                const int iz = static_cast<int>((c.z - info_grid.origin.z) / info_grid.pitch);
                if (ix < 0 || iy < 0 || iz < 0 || ix >= info_grid.nx || iy >= info_grid.ny ||
                    iz >= info_grid.nz)
                    continue;
                if (info_grid.at(ix, iy, iz) == geom::Cell::Info)
                    grid.at(x, y, z) = geom::Cell::Info;
            }

    geom::EmbedSpec spec = bodies.spec;
    if (!color.empty()) spec.object_color = color;
    const geom::VoxelGrid fab = geom::apply_mode(grid, spec);

    nir::ScanSpec scan = cfg.scan;
    scan.step_mm = step_mm;
    scan.seed = seed;
    int w = 0, h = 0;
    if (std::sscanf(res.c_str(), "%dx%d", &w, &h) != 2 || w <= 0 || h <= 0)
        throw FormatError("--res expects WxH, got '" + res + "'");
    scan.width = w;
    scan.height = h;
    const nir::SpectraCube cube = nir::simulate_scan(fab, spec, cfg.optics, scan);
    nir::write_cube(cube, out_path);
    std::printf("scanned %dx%dx%zu cube to %s\n", cube.width, cube.height,
                cube.wavelengths.size(), out_path.c_str());
    return kExitOk;
}

int cmd_decode_thermal(const std::string& in_csv, const std::string& truth_path, double spacing,
                       const std::string& out_csv, bool invert, double contact_end) {
    const thermal::ThermalRecording rec = thermal::read_thermal_csv(in_csv);
    const payload::BitMatrix truth = load_payload_matrix(truth_path);
    decode::GridGeometry gg;
    gg.rows = truth.rows;
    gg.cols = truth.cols;
    gg.sample_spacing_px = spacing;
    gg.invert = invert;
    const decode::AccuracySeries series = decode::decode_thermal_recording(rec, gg, truth);
    if (!out_csv.empty()) write_text(out_csv, decode::accuracy_series_csv(series));

    double best = 0.0;
    for (const auto& p : series.points) best = std::max(best, p.accuracy);
    const double window = decode::reading_window(series, contact_end);
    std::printf("frames %zu, best accuracy %.4f, reading window %.3f s\n", series.points.size(),
                best, window);
    return best >= 1.0 ? kExitOk : kExitDecodeBelowThreshold;
}

int cmd_decode_nir(const std::string& in_path, const std::string& truth_path,
                   const std::string& out_csv, double spacing, bool invert) {
    const nir::SpectraCube cube = nir::read_cube(in_path);
    const payload::BitMatrix truth = load_payload_matrix(truth_path);
    decode::GridGeometry gg;
    gg.rows = truth.rows;
    gg.cols = truth.cols;
    gg.sample_spacing_px = spacing > 0.0 ? spacing : 5.0;
    gg.invert = invert;

    decode::AccuracySeries series;
    decode::AccuracyPoint p;
    try {
        const payload::BitMatrix decoded = decode::decode_nir_cube(cube, gg);
        p.accuracy = payload::matrix_accuracy(decoded, truth);
        std::printf("decoded matrix:\n%s", payload::matrix_to_text(decoded).c_str());
    } catch (const NoAnchorContour&) {
        p.accuracy = 0.0;
        std::printf("no anchor blob found\n");
    }
    series.points.push_back(p);
    if (!out_csv.empty()) write_text(out_csv, decode::accuracy_series_csv(series));
    std::printf("accuracy %.4f\n", p.accuracy);
    return p.accuracy >= 1.0 ? kExitOk : kExitDecodeBelowThreshold;
}

int cmd_sweep(const std::string& axis, const std::string& values_csv,
              const std::string& config_path, const std::string& out_dir,
              const std::string& method, int threads) {
    harness::SweepSpec spec;
    spec.axis = harness::axis_from_string(axis);
    spec.method = method;
    if (!config_path.empty()) spec.cfg = harness::load_config(config_path);
    std::istringstream vs(values_csv);
    std::string tok;
    while (std::getline(vs, tok, ','))
        if (!tok.empty()) spec.values.push_back(tok);
    const harness::SweepResult res = harness::run_sweep(spec, threads);
    harness::write_sweep_outputs(res, out_dir);
    std::printf("%zu runs written under %s/%s_%s\n", res.runs.size(), out_dir.c_str(),
                method.c_str(), harness::to_string(spec.axis).c_str());
    return kExitOk;
}

int cmd_check_guidelines(const std::string& results_dir) {
    const harness::GuidelineReport rep = harness::check_guidelines(results_dir);
    std::fputs(harness::format_report(rep).c_str(), stdout);
    return rep.all_pass ? kExitOk : kExitOther;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"embed machine-readable payloads in 3D-printable models and read them back "
                 "through simulated thermal or near-infrared imaging"};
    app.require_subcommand(1);

    // embed
    std::string object_path, payload_path, mode = "surface-join", out_dir;
    std::string object_color = "black", info_color = "white";
    double depth = 1.0, density = 5.0, height = 1.0, infill = 0.10, pitch = 0.2;
    auto* embed = app.add_subcommand("embed", "embed a payload into an object model");
    embed->add_option("--object", object_path, "object STL file, or 'cube' for a 30x30x15 box")
        ->required();
    embed->add_option("--payload", payload_path, "matrix text file or PBM bitmap")->required();
    embed->add_option("--depth", depth, "information depth d, mm");
    embed->add_option("--density", density, "information density X, mm per pixel");
    embed->add_option("--height", height, "information body height, mm");
    embed->add_option("--mode", mode, "surface-join|surface-fill");
    embed->add_option("--infill", infill, "infill fraction in (0,1]");
    embed->add_option("--out", out_dir, "output design directory")->required();
    embed->add_option("--pitch", pitch, "voxel pitch for the boolean stage, mm");
    embed->add_option("--object-color", object_color, "object filament color");
    embed->add_option("--info-color", info_color, "information filament color");

    // simulate-thermal
    std::string design_dir, out_path, config_path;
    double contact_temp = 35.0, ambient = 27.0, duration = 60.0, fps = 6.0;
    double contact_duration = 0.0;
    uint64_t seed = 0;
    auto* simt = app.add_subcommand("simulate-thermal", "simulate a thermal camera recording");
    simt->add_option("--design", design_dir, "design directory from 'embed'")->required();
    simt->add_option("--contact-temp", contact_temp, "contact temperature, C");
    simt->add_option("--ambient", ambient, "ambient temperature, C");
    simt->add_option("--duration", duration, "recording duration after contact, s");
    simt->add_option("--fps", fps, "camera frame rate");
    simt->add_option("--seed", seed, "noise seed");
    simt->add_option("--out", out_path, "output CSV path")->required();
    simt->add_option("--contact-duration", contact_duration, "contact phase length, s");
    simt->add_option("--config", config_path, "JSON config with model constants");

    // simulate-nir
    std::string nir_color, res = "24x24";
    double step_mm = 1.0;
    auto* simn = app.add_subcommand("simulate-nir", "simulate a near-infrared raster scan");
    simn->add_option("--design", design_dir, "design directory from 'embed'")->required();
    simn->add_option("--color", nir_color, "object color override");
    simn->add_option("--step-mm", step_mm, "raster step, mm");
    simn->add_option("--res", res, "scan resolution WxH");
    simn->add_option("--seed", seed, "noise seed");
    simn->add_option("--out", out_path, "output NIRC cube path")->required();
    simn->add_option("--config", config_path, "JSON config with model constants");

    // decode-thermal
    std::string in_path, truth_path;
    double spacing = 10.0, contact_end = 3.0;
    bool invert = false;
    auto* dect = app.add_subcommand("decode-thermal", "decode a thermal CSV recording");
    dect->add_option("--in", in_path, "thermal CSV")->required();
    dect->add_option("--truth", truth_path, "ground-truth matrix file")->required();
    dect->add_option("--spacing", spacing, "sample spacing, px");
    dect->add_option("--out", out_path, "accuracy series CSV");
    dect->add_flag("--invert", invert, "bits are darker than their surroundings");
    dect->add_option("--contact-end", contact_end, "contact end time for the reading window, s");

    // decode-nir
    double nir_spacing = 5.0;
    bool nir_invert = false;
    auto* decn = app.add_subcommand("decode-nir", "decode a NIRC spectra cube");
    decn->add_option("--in", in_path, "NIRC cube")->required();
    decn->add_option("--truth", truth_path, "ground-truth matrix file")->required();
    decn->add_option("--out", out_path, "accuracy CSV");
    decn->add_option("--spacing", nir_spacing, "sample spacing in scan px (before upsampling)");
    decn->add_flag("--invert", nir_invert, "bits are darker than their surroundings");

    // sweep
    std::string axis, values_csv, sweep_method = "thermal";
    int threads = 0;
    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write reports");
    sweep->add_option("--axis", axis, "depth_d|density_X|infill_fraction|contact_temp|color")
        ->required();
    sweep->add_option("--values", values_csv, "comma-separated axis values")->required();
    sweep->add_option("--config", config_path, "JSON config");
    sweep->add_option("--out", out_dir, "output directory")->required();
    sweep->add_option("--method", sweep_method, "thermal|nir");
    sweep->add_option("--threads", threads, "worker threads (default: hardware)");

    // check-guidelines
    std::string results_dir;
    auto* check = app.add_subcommand("check-guidelines", "verify guideline thresholds on sweeps");
    check->add_option("--results", results_dir, "directory with sweep outputs")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (embed->parsed())
            return cmd_embed(object_path, payload_path, depth, density, height, mode, infill,
                             out_dir, pitch, object_color, info_color);
        if (simt->parsed())
            return cmd_simulate_thermal(design_dir, contact_temp, ambient, duration, fps, seed,
                                        out_path, contact_duration, config_path);
        if (simn->parsed())
            return cmd_simulate_nir(design_dir, nir_color, step_mm, res, seed, out_path,
                                    config_path);
        if (dect->parsed())
            return cmd_decode_thermal(in_path, truth_path, spacing, out_path, invert, contact_end);
        if (decn->parsed())
            return cmd_decode_nir(in_path, truth_path, out_path, nir_spacing, nir_invert);
        if (sweep->parsed())
            return cmd_sweep(axis, values_csv, config_path, out_dir, sweep_method, threads);
        if (check->parsed()) return cmd_check_guidelines(results_dir);
    } catch (const fabtag::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case fabtag::ErrorKind::Format: return kExitFormatError;
            case fabtag::ErrorKind::Spec: return kExitSpecViolation;
            default: return kExitOther;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
    return kExitOk;
}
