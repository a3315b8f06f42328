#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fabtag/decode.hpp"
#include "fabtag/errors.hpp"
#include "fabtag/harness.hpp"
#include "fabtag/image.hpp"
#include "fabtag/nir.hpp"
#include "fabtag/payload.hpp"
#include "fabtag/thermal.hpp"
#include "fabtag/voxel.hpp"

namespace py = pybind11;
using namespace fabtag;

namespace {

payload::BitMatrix matrix_from_lists(const std::vector<std::vector<int>>& rows) {
    if (rows.empty() || rows[0].empty()) throw SpecViolation("matrix must be non-empty");
    payload::BitMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size())
            throw SpecViolation("matrix rows must have equal length");
        for (size_t c = 0; c < rows[r].size(); ++c)
            m.at(static_cast<int>(r), static_cast<int>(c)) = rows[r][c] ? 1 : 0;
    }
    return m;
}

std::vector<std::vector<int>> matrix_to_lists(const payload::BitMatrix& m) {
    std::vector<std::vector<int>> out(static_cast<size_t>(m.rows));
    for (int r = 0; r < m.rows; ++r) {
        out[static_cast<size_t>(r)].resize(static_cast<size_t>(m.cols));
        for (int c = 0; c < m.cols; ++c) out[static_cast<size_t>(r)][static_cast<size_t>(c)] = m.at(r, c);
    }
    return out;
}

img::GrayImage image_from_lists(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows[0].empty()) throw SpecViolation("image must be non-empty");
    img::GrayImage im(static_cast<int>(rows[0].size()), static_cast<int>(rows.size()));
    for (size_t y = 0; y < rows.size(); ++y) {
        if (rows[y].size() != rows[0].size())
            throw SpecViolation("image rows must have equal length");
        for (size_t x = 0; x < rows[y].size(); ++x)
            im.at(static_cast<int>(x), static_cast<int>(y)) = rows[y][x];
    }
    return im;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "payload embedding for 3D prints with simulated thermal and "
              "near-infrared readout";

    py::register_exception<Error>(m, "FabtagError");

    py::enum_<geom::FabMode>(m, "FabMode")
        .value("SurfaceJoin", geom::FabMode::SurfaceJoin)
        .value("SurfaceFill", geom::FabMode::SurfaceFill);

    py::class_<geom::EmbedSpec>(m, "EmbedSpec")
        .def(py::init<>())
        .def_readwrite("depth_mm", &geom::EmbedSpec::depth_mm)
        .def_readwrite("density_mm_per_px", &geom::EmbedSpec::density_mm_per_px)
        .def_readwrite("info_height_mm", &geom::EmbedSpec::info_height_mm)
        .def_readwrite("mode", &geom::EmbedSpec::mode)
        .def_readwrite("infill_fraction", &geom::EmbedSpec::infill_fraction)
        .def_readwrite("object_dims_mm", &geom::EmbedSpec::object_dims_mm)
        .def_readwrite("object_color", &geom::EmbedSpec::object_color)
        .def_readwrite("info_color", &geom::EmbedSpec::info_color)
        .def("validate", &geom::EmbedSpec::validate, py::arg("payload_rows") = 0,
             py::arg("payload_cols") = 0);

    py::class_<geom::TriMesh>(m, "TriMesh")
        .def("__len__", [](const geom::TriMesh& mm) { return mm.triangles.size(); })
        .def("bbox", [](const geom::TriMesh& mm) {
            const geom::Box3 b = mm.bbox();
            return py::make_tuple(py::make_tuple(b.min.x, b.min.y, b.min.z),
                                  py::make_tuple(b.max.x, b.max.y, b.max.z));
        });

    py::class_<geom::VoxelGrid>(m, "VoxelGrid")
        .def_readonly("nx", &geom::VoxelGrid::nx)
        .def_readonly("ny", &geom::VoxelGrid::ny)
        .def_readonly("nz", &geom::VoxelGrid::nz)
        .def_readonly("pitch", &geom::VoxelGrid::pitch)
        .def("count_object",
             [](const geom::VoxelGrid& g) { return g.count(geom::Cell::Object); })
        .def("count_info", [](const geom::VoxelGrid& g) { return g.count(geom::Cell::Info); });

    m.def("make_cuboid", [](double w, double d, double h) {
        return geom::make_cuboid({0, 0, 0}, {w, d, h});
    });
    m.def("parse_stl", [](py::bytes data) {
        const std::string s = data;
        return geom::parse_stl(std::vector<uint8_t>(s.begin(), s.end()));
    });
    m.def("write_stl", [](const geom::TriMesh& mesh, bool binary) {
        const auto bytes =
            geom::write_stl(mesh, binary ? geom::StlFormat::Binary : geom::StlFormat::Ascii);
        return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    }, py::arg("mesh"), py::arg("binary") = true);
    m.def("voxelize", [](const geom::TriMesh& mesh, double pitch) {
        return geom::voxelize(mesh, pitch);
    });
    m.def("embed",
          [](const geom::TriMesh& object, const geom::TriMesh& info, const geom::EmbedSpec& spec,
             double pitch) {
              auto [grid, bodies] = geom::embed(object, info, spec, pitch);
              return grid;
          });
    m.def("apply_mode", &geom::apply_mode);
    m.def("export_design", [](const geom::TriMesh& object, const geom::TriMesh& info,
                              const geom::EmbedSpec& spec, double pitch, const std::string& dir) {
        auto [grid, bodies] = geom::embed(object, info, spec, pitch);
        geom::export_bodies(bodies, dir);
        return grid;
    });

    m.def("random_matrix", [](int rows, int cols, int ones, uint64_t seed) {
        return matrix_to_lists(payload::random_matrix(rows, cols, ones, seed));
    });
    m.def("matrix_accuracy", [](const std::vector<std::vector<int>>& a,
                                const std::vector<std::vector<int>>& b) {
        return payload::matrix_accuracy(matrix_from_lists(a), matrix_from_lists(b));
    });
    m.def("matrix_to_mesh", [](const std::vector<std::vector<int>>& bits,
                               const geom::EmbedSpec& spec) {
        return payload::matrix_to_mesh(matrix_from_lists(bits), spec);
    });

    m.def("otsu_threshold", [](const std::vector<std::vector<double>>& image) {
        return img::otsu_threshold(img::normalize_u8(image_from_lists(image)));
    });
    m.def("gaussian_blur5", [](const std::vector<std::vector<double>>& image) {
        const img::GrayImage out = img::gaussian_blur5(image_from_lists(image));
        std::vector<std::vector<double>> rows(static_cast<size_t>(out.height));
        for (int y = 0; y < out.height; ++y) {
            rows[static_cast<size_t>(y)].resize(static_cast<size_t>(out.width));
            for (int x = 0; x < out.width; ++x) rows[static_cast<size_t>(y)][static_cast<size_t>(x)] = out.at(x, y);
        }
        return rows;
    });

    py::class_<thermal::MaterialConfig>(m, "MaterialConfig")
        .def(py::init<>())
        .def_readwrite("k_filament", &thermal::MaterialConfig::k_filament)
        .def_readwrite("rho_filament", &thermal::MaterialConfig::rho_filament)
        .def_readwrite("c_filament", &thermal::MaterialConfig::c_filament)
        .def_readwrite("h_convection", &thermal::MaterialConfig::h_convection)
        .def_readwrite("shell_mm", &thermal::MaterialConfig::shell_mm)
        .def_readwrite("sim_pitch_mm", &thermal::MaterialConfig::sim_pitch_mm);

    py::class_<thermal::ThermalScenario>(m, "ThermalScenario")
        .def(py::init<>())
        .def_readwrite("contact_temp_c", &thermal::ThermalScenario::contact_temp_c)
        .def_readwrite("contact_duration_s", &thermal::ThermalScenario::contact_duration_s)
        .def_readwrite("ambient_temp_c", &thermal::ThermalScenario::ambient_temp_c)
        .def_readwrite("record_duration_s", &thermal::ThermalScenario::record_duration_s)
        .def_readwrite("frame_rate", &thermal::ThermalScenario::frame_rate)
        .def_readwrite("noise_sigma_c", &thermal::ThermalScenario::noise_sigma_c)
        .def_readwrite("seed", &thermal::ThermalScenario::seed);

    py::class_<thermal::ThermalRecording>(m, "ThermalRecording")
        .def("__len__", [](const thermal::ThermalRecording& r) { return r.frames.size(); })
        .def("frame_time", [](const thermal::ThermalRecording& r, size_t i) {
            return r.frames.at(i).t;
        })
        .def("save", &thermal::write_thermal_csv, py::arg("rec") = nullptr);

    m.def("simulate_thermal", &thermal::simulate_reading, py::arg("grid"), py::arg("spec"),
          py::arg("scenario"), py::arg("materials") = thermal::MaterialConfig{});
    m.def("write_thermal_csv", &thermal::write_thermal_csv);
    m.def("read_thermal_csv", &thermal::read_thermal_csv);

    py::class_<nir::OpticsConfig>(m, "OpticsConfig").def(py::init<>());
    py::class_<nir::ScanSpec>(m, "ScanSpec")
        .def(py::init<>())
        .def_readwrite("width", &nir::ScanSpec::width)
        .def_readwrite("height", &nir::ScanSpec::height)
        .def_readwrite("step_mm", &nir::ScanSpec::step_mm)
        .def_readwrite("seed", &nir::ScanSpec::seed);
    py::class_<nir::SpectraCube>(m, "SpectraCube")
        .def_readonly("width", &nir::SpectraCube::width)
        .def_readonly("height", &nir::SpectraCube::height);

    m.def("simulate_nir", &nir::simulate_scan, py::arg("grid"), py::arg("spec"),
          py::arg("optics") = nir::OpticsConfig{}, py::arg("scan") = nir::ScanSpec{});
    m.def("write_cube", &nir::write_cube);
    m.def("read_cube", &nir::read_cube);

    py::class_<decode::GridGeometry>(m, "GridGeometry")
        .def(py::init<>())
        .def_readwrite("rows", &decode::GridGeometry::rows)
        .def_readwrite("cols", &decode::GridGeometry::cols)
        .def_readwrite("sample_spacing_px", &decode::GridGeometry::sample_spacing_px)
        .def_readwrite("invert", &decode::GridGeometry::invert);

    m.def("decode_thermal_recording",
          [](const thermal::ThermalRecording& rec, const decode::GridGeometry& gg,
             const std::vector<std::vector<int>>& truth) {
              const decode::AccuracySeries s =
                  decode::decode_thermal_recording(rec, gg, matrix_from_lists(truth));
              std::vector<std::tuple<double, double, bool>> out;
              out.reserve(s.points.size());
              for (const auto& p : s.points) out.emplace_back(p.t, p.accuracy, p.flagged);
              return out;
          });
    m.def("decode_nir_cube",
          [](const nir::SpectraCube& cube, const decode::GridGeometry& gg) {
              return matrix_to_lists(decode::decode_nir_cube(cube, gg));
          });
    m.def("reading_window",
          [](const std::vector<std::tuple<double, double, bool>>& pts, double contact_end) {
              decode::AccuracySeries s;
              for (const auto& [t, acc, flagged] : pts) s.points.push_back({t, acc, flagged});
              return decode::reading_window(s, contact_end);
          });

    m.def("visibility_lookup",
          [](const std::string& color, const std::string& mode, double depth) {
              return harness::to_string(
                  harness::visibility_lookup(color, geom::fab_mode_from_string(mode), depth));
          });
    m.def("run_single", [](const std::string& method, uint64_t seed) {
        const harness::Config cfg;
        const harness::RunResult r = harness::run_single(cfg, method, seed);
        return py::make_tuple(r.accuracy, r.window_s);
    });
}
