#include "fabtag/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fabtag/errors.hpp"
#include "fabtag/rng.hpp"

namespace fabtag::harness {

namespace {

template <typename T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

Config config_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    Config c;
    try {
        if (j.contains("materials")) {
            const auto& m = j["materials"];
            maybe(m, "k_filament", c.materials.k_filament);
            maybe(m, "rho_filament", c.materials.rho_filament);
            maybe(m, "c_filament", c.materials.c_filament);
            maybe(m, "k_air", c.materials.k_air);
            maybe(m, "rho_air", c.materials.rho_air);
            maybe(m, "c_air", c.materials.c_air);
            maybe(m, "h_convection", c.materials.h_convection);
            maybe(m, "shell_mm", c.materials.shell_mm);
            maybe(m, "sim_pitch_mm", c.materials.sim_pitch_mm);
        }
        if (j.contains("optics")) {
            const auto& o = j["optics"];
            if (o.contains("mu_center"))
                c.optics.mu_center = o.at("mu_center").get<std::map<std::string, double>>();
            maybe(o, "mu_slope", c.optics.mu_slope);
            maybe(o, "reflector_reflectance", c.optics.reflector_reflectance);
            maybe(o, "background_floor", c.optics.background_floor);
            maybe(o, "noise_sigma", c.optics.noise_sigma);
            maybe(o, "blur_mm_per_mm_depth", c.optics.blur_mm_per_mm_depth);
            maybe(o, "bands", c.optics.bands);
            maybe(o, "lambda_min_nm", c.optics.lambda_min_nm);
            maybe(o, "lambda_max_nm", c.optics.lambda_max_nm);
        }
        if (j.contains("embed")) {
            const auto& e = j["embed"];
            maybe(e, "depth_mm", c.embed.depth_mm);
            maybe(e, "density_mm_per_px", c.embed.density_mm_per_px);
            maybe(e, "info_height_mm", c.embed.info_height_mm);
            if (e.contains("mode"))
                c.embed.mode = geom::fab_mode_from_string(e.at("mode").get<std::string>());
            maybe(e, "infill_fraction", c.embed.infill_fraction);
            if (e.contains("object_dims_mm")) {
                const auto dims = e.at("object_dims_mm").get<std::vector<double>>();
                if (dims.size() != 3) throw FormatError("config: object_dims_mm needs 3 values");
                std::copy(dims.begin(), dims.end(), c.embed.object_dims_mm.begin());
            }
            maybe(e, "object_color", c.embed.object_color);
            maybe(e, "info_color", c.embed.info_color);
        }
        if (j.contains("scenario")) {
            const auto& s = j["scenario"];
            maybe(s, "contact_temp_c", c.scenario.contact_temp_c);
            maybe(s, "contact_duration_s", c.scenario.contact_duration_s);
            maybe(s, "ambient_temp_c", c.scenario.ambient_temp_c);
            maybe(s, "record_duration_s", c.scenario.record_duration_s);
            maybe(s, "frame_rate", c.scenario.frame_rate);
            maybe(s, "noise_sigma_c", c.scenario.noise_sigma_c);
            maybe(s, "seed", c.scenario.seed);
        }
        if (j.contains("scan")) {
            const auto& s = j["scan"];
            maybe(s, "width", c.scan.width);
            maybe(s, "height", c.scan.height);
            maybe(s, "step_mm", c.scan.step_mm);
        }
        if (j.contains("payload")) {
            const auto& p = j["payload"];
            maybe(p, "rows", c.payload_rows);
            maybe(p, "cols", c.payload_cols);
            maybe(p, "ones", c.payload_ones);
        }
        maybe(j, "seeds", c.seeds);
        maybe(j, "geometry_pitch_mm", c.geometry_pitch_mm);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("config: ") + e.what());
    }
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoFailure("cannot open config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json(const Config& c) {
    nlohmann::ordered_json j;
    j["materials"] = {{"k_filament", c.materials.k_filament},
                      {"rho_filament", c.materials.rho_filament},
                      {"c_filament", c.materials.c_filament},
                      {"k_air", c.materials.k_air},
                      {"rho_air", c.materials.rho_air},
                      {"c_air", c.materials.c_air},
                      {"h_convection", c.materials.h_convection},
                      {"shell_mm", c.materials.shell_mm},
                      {"sim_pitch_mm", c.materials.sim_pitch_mm}};
    j["optics"] = {{"mu_center", c.optics.mu_center},
                   {"mu_slope", c.optics.mu_slope},
                   {"reflector_reflectance", c.optics.reflector_reflectance},
                   {"background_floor", c.optics.background_floor},
                   {"noise_sigma", c.optics.noise_sigma},
                   {"blur_mm_per_mm_depth", c.optics.blur_mm_per_mm_depth},
                   {"bands", c.optics.bands},
                   {"lambda_min_nm", c.optics.lambda_min_nm},
                   {"lambda_max_nm", c.optics.lambda_max_nm}};
    j["embed"] = {{"depth_mm", c.embed.depth_mm},
                  {"density_mm_per_px", c.embed.density_mm_per_px},
                  {"info_height_mm", c.embed.info_height_mm},
                  {"mode", geom::to_string(c.embed.mode)},
                  {"infill_fraction", c.embed.infill_fraction},
                  {"object_dims_mm", c.embed.object_dims_mm},
                  {"object_color", c.embed.object_color},
                  {"info_color", c.embed.info_color}};
    j["scenario"] = {{"contact_temp_c", c.scenario.contact_temp_c},
                     {"contact_duration_s", c.scenario.contact_duration_s},
                     {"ambient_temp_c", c.scenario.ambient_temp_c},
                     {"record_duration_s", c.scenario.record_duration_s},
                     {"frame_rate", c.scenario.frame_rate},
                     {"noise_sigma_c", c.scenario.noise_sigma_c},
                     {"seed", c.scenario.seed}};
    j["scan"] = {{"width", c.scan.width}, {"height", c.scan.height}, {"step_mm", c.scan.step_mm}};
    j["payload"] = {{"rows", c.payload_rows}, {"cols", c.payload_cols}, {"ones", c.payload_ones}};
    j["seeds"] = c.seeds;
    j["geometry_pitch_mm"] = c.geometry_pitch_mm;
    return j.dump(2) + "\n";
}

uint64_t config_hash(const Config& cfg) {
    const std::string s = config_to_json(cfg);
    return fnv1a64(s.data(), s.size());
}

Axis axis_from_string(const std::string& s) {
    if (s == "depth_d") return Axis::DepthD;
    if (s == "density_X") return Axis::DensityX;
    if (s == "infill_fraction") return Axis::InfillFraction;
    if (s == "contact_temp") return Axis::ContactTemp;
    if (s == "color") return Axis::Color;
    throw FormatError("unknown sweep axis '" + s +
                      "' (expected depth_d, density_X, infill_fraction, contact_temp, color)");
}

std::string to_string(Axis a) {
    switch (a) {
        case Axis::DepthD: return "depth_d";
        case Axis::DensityX: return "density_X";
        case Axis::InfillFraction: return "infill_fraction";
        case Axis::ContactTemp: return "contact_temp";
        case Axis::Color: return "color";
    }
    return "?";
}

RunResult run_single(const Config& cfg, const std::string& method, uint64_t seed) {
    const payload::BitMatrix truth =
        payload::random_matrix(cfg.payload_rows, cfg.payload_cols, cfg.payload_ones, seed);
    const geom::TriMesh info = payload::matrix_to_mesh(truth, cfg.embed);
    const geom::TriMesh object = geom::make_cuboid(
        {0, 0, 0},
        {cfg.embed.object_dims_mm[0], cfg.embed.object_dims_mm[1], cfg.embed.object_dims_mm[2]});
    auto [grid, bodies] = geom::embed(object, info, cfg.embed, cfg.geometry_pitch_mm);
    const geom::VoxelGrid fab = geom::apply_mode(grid, cfg.embed);

    RunResult r;
    r.seed = seed;
    r.method = method;
    if (method == "thermal") {
        thermal::ThermalScenario sc = cfg.scenario;
        sc.seed = seed;
        const thermal::ThermalRecording rec =
            thermal::simulate_reading(fab, cfg.embed, sc, cfg.materials);
        decode::GridGeometry gg;
        gg.rows = cfg.payload_rows;
        gg.cols = cfg.payload_cols;
        gg.sample_spacing_px = cfg.embed.density_mm_per_px / cfg.materials.sim_pitch_mm;
        gg.invert = sc.contact_temp_c > sc.ambient_temp_c;
        const decode::AccuracySeries series = decode::decode_thermal_recording(rec, gg, truth);
        // decodability metric: first frame strictly after the contact phase
        r.accuracy = 0.0;
        for (const auto& p : series.points)
            if (p.t > sc.contact_duration_s + 1e-9) {
                r.accuracy = p.accuracy;
                break;
            }
        r.window_s = decode::reading_window(series, sc.contact_duration_s);
    } else if (method == "nir") {
        nir::ScanSpec scan = cfg.scan;
        scan.seed = seed;
        const nir::SpectraCube cube = nir::simulate_scan(fab, cfg.embed, cfg.optics, scan);
        decode::GridGeometry gg;
        gg.rows = cfg.payload_rows;
        gg.cols = cfg.payload_cols;
        gg.sample_spacing_px = cfg.embed.density_mm_per_px / cfg.scan.step_mm;
        try {
            const payload::BitMatrix decoded = decode::decode_nir_cube(cube, gg);
            r.accuracy = payload::matrix_accuracy(decoded, truth);
        } catch (const Error&) {
            r.accuracy = 0.0;
        }
        r.window_s = -1.0;
    } else {
        throw SpecViolation("unknown method '" + method + "'");
    }
    return r;
}

namespace {

Config apply_axis(const Config& base, Axis axis, const std::string& value) {
    Config c = base;
    switch (axis) {
        case Axis::DepthD: c.embed.depth_mm = std::stod(value); break;
        case Axis::DensityX: c.embed.density_mm_per_px = std::stod(value); break;
        case Axis::InfillFraction: c.embed.infill_fraction = std::stod(value); break;
        case Axis::ContactTemp: c.scenario.contact_temp_c = std::stod(value); break;
        case Axis::Color: c.embed.object_color = value; break;
    }
    return c;
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec, int threads) {
    if (spec.values.empty()) throw SpecViolation("sweep needs at least one value");
    if (spec.cfg.seeds < 1) throw SpecViolation("sweep needs at least one seed");

    struct Job {
        std::string value;
        uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const std::string& v : spec.values)
        for (int s = 0; s < spec.cfg.seeds; ++s)
            jobs.push_back({v, static_cast<uint64_t>(s + 1)});

    SweepResult out;
    out.spec = spec;
    out.runs.resize(jobs.size());

    const int nthreads = threads > 0
                             ? threads
                             : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::atomic<size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            const size_t i = cursor.fetch_add(1);
            if (i >= jobs.size()) break;
            const Config c = apply_axis(spec.cfg, spec.axis, jobs[i].value);
            RunResult r = run_single(c, spec.method, jobs[i].seed);
            r.value = jobs[i].value;
            out.runs[i] = std::move(r);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    return out;
}

namespace {

std::string results_csv(const SweepResult& res) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "# config_hash %016llx\n",
                  static_cast<unsigned long long>(config_hash(res.spec.cfg)));
    std::string out = buf;
    out += "axis,value,seed,method,accuracy,window_s\n";
    for (const RunResult& r : res.runs) {
        std::string window = r.window_s < 0.0 ? "" : [&] {
            char wb[32];
            std::snprintf(wb, sizeof(wb), "%.3f", r.window_s);
            return std::string(wb);
        }();
        std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%s,%.6f,%s\n",
                      to_string(res.spec.axis).c_str(), r.value.c_str(),
                      static_cast<unsigned long long>(r.seed), r.method.c_str(), r.accuracy,
                      window.c_str());
        out += buf;
    }
    return out;
}

std::string sweep_svg(const SweepResult& res) {
    // mean accuracy per axis value, with per-seed markers
    std::vector<std::pair<std::string, double>> means;
    for (const std::string& v : res.spec.values) {
        double sum = 0.0;
        int n = 0;
        for (const RunResult& r : res.runs)
            if (r.value == v) {
                sum += r.accuracy;
                ++n;
            }
        means.emplace_back(v, n ? sum / n : 0.0);
    }
    const int w = 640, h = 400, ml = 60, mr = 20, mt = 40, mb = 60;
    const int pw = w - ml - mr, ph = h - mt - mb;
    const size_t nv = means.size();
    auto xpos = [&](size_t i) {
        return ml + (nv == 1 ? pw / 2.0 : pw * static_cast<double>(i) / (nv - 1));
    };
    auto ypos = [&](double acc) { return mt + ph * (1.0 - acc); };

    char buf[256];
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\">\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">%s "
                  "sweep: accuracy vs %s (config %016llx)</text>\n",
                  ml, res.spec.method.c_str(), to_string(res.spec.axis).c_str(),
                  static_cast<unsigned long long>(config_hash(res.spec.cfg)));
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"none\" "
                  "stroke=\"#444\"/>\n",
                  ml, mt, pw, ph);
    s += buf;
    for (int g = 0; g <= 4; ++g) {
        const double acc = g / 4.0;
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"#ddd\"/>"
                      "<text x=\"%d\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"11\" "
                      "text-anchor=\"end\">%.2f</text>\n",
                      ml, ypos(acc), ml + pw, ypos(acc), ml - 6, ypos(acc) + 4, acc);
        s += buf;
    }
    for (size_t i = 0; i < nv; ++i) {
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\" "
                      "text-anchor=\"middle\">%s</text>\n",
                      xpos(i), mt + ph + 20, means[i].first.c_str());
        s += buf;
    }
    // per-seed markers
    for (const RunResult& r : res.runs) {
        size_t vi = 0;
        for (size_t i = 0; i < nv; ++i)
            if (means[i].first == r.value) vi = i;
        std::snprintf(buf, sizeof(buf),
                      "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"2.5\" fill=\"#4a90d9\" "
                      "fill-opacity=\"0.5\"/>\n",
                      xpos(vi), ypos(r.accuracy));
        s += buf;
    }
    // mean polyline
    s += "<polyline fill=\"none\" stroke=\"#d94a4a\" stroke-width=\"2\" points=\"";
    for (size_t i = 0; i < nv; ++i) {
        std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", xpos(i), ypos(means[i].second));
        s += buf;
    }
    s += "\"/>\n</svg>\n";
    return s;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open " + path);
    f << text;
    if (!f) throw IoFailure("short write to " + path);
}

} // namespace

void write_sweep_outputs(const SweepResult& result, const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path sub =
        fs::path(dir) / (result.spec.method + "_" + to_string(result.spec.axis));
    std::error_code ec;
    fs::create_directories(sub, ec);
    if (ec) throw IoFailure("cannot create " + sub.string() + ": " + ec.message());
    write_text_file((sub / "results.csv").string(), results_csv(result));
    write_text_file((sub / "plot.svg").string(), sweep_svg(result));
    write_text_file((sub / "resolved_config.json").string(), config_to_json(result.spec.cfg));
}

namespace {

struct LoadedSweep {
    std::map<std::string, std::vector<double>> acc_by_value;
};

std::optional<LoadedSweep> load_sweep_csv(const std::string& dir, const std::string& method,
                                          const std::string& axis) {
    namespace fs = std::filesystem;
    const fs::path p = fs::path(dir) / (method + "_" + axis) / "results.csv";
    std::ifstream f(p);
    if (!f) return std::nullopt;
    LoadedSweep out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.rfind("axis,", 0) == 0) continue;
        std::istringstream ls(line);
        std::string ax, value, seed, m, acc, window;
        if (!std::getline(ls, ax, ',') || !std::getline(ls, value, ',') ||
            !std::getline(ls, seed, ',') || !std::getline(ls, m, ',') ||
            !std::getline(ls, acc, ','))
            throw FormatError(p.string() + " line " + std::to_string(lineno) + ": short row");
        std::getline(ls, window, ',');
        try {
            out.acc_by_value[value].push_back(std::stod(acc));
        } catch (const std::exception&) {
            throw FormatError(p.string() + " line " + std::to_string(lineno) +
                              ": bad accuracy '" + acc + "'");
        }
    }
    if (out.acc_by_value.empty()) return std::nullopt;
    return out;
}

bool decodes(const LoadedSweep& s, const std::string& value) {
    const auto it = s.acc_by_value.find(value);
    if (it == s.acc_by_value.end() || it->second.empty()) return false;
    return std::all_of(it->second.begin(), it->second.end(),
                       [](double a) { return a >= 1.0 - 1e-12; });
}

std::string fmt_bool(bool b) { return b ? "pass" : "FAIL"; }

} // namespace

GuidelineReport check_guidelines(const std::string& results_dir) {
    struct Need {
        const char* method;
        const char* axis;
    };
    const Need needs[] = {
        {"thermal", "depth_d"},   {"thermal", "density_X"}, {"thermal", "infill_fraction"},
        {"nir", "depth_d"},       {"nir", "density_X"},     {"nir", "infill_fraction"},
        {"nir", "color"},
    };
    std::map<std::string, LoadedSweep> sweeps;
    for (const Need& n : needs) {
        auto s = load_sweep_csv(results_dir, n.method, n.axis);
        if (!s)
            throw IncompleteCoverage(std::string("missing sweep ") + n.method + "_" + n.axis +
                                     " under " + results_dir);
        sweeps[std::string(n.method) + "_" + n.axis] = std::move(*s);
    }

    GuidelineReport rep;
    auto add = [&](const std::string& imaging, const std::string& aspect,
                   const std::string& req, const std::string& obs, bool pass) {
        rep.rows.push_back({imaging, aspect, req, obs, pass});
    };

    {
        const LoadedSweep& s = sweeps["thermal_depth_d"];
        const bool ok1 = decodes(s, "1");
        const bool ok2 = decodes(s, "2");
        add("thermal", "depth", "readable at d <= 1 mm, not beyond",
            std::string("d=1 ") + (ok1 ? "decodes" : "fails") + ", d=2 " +
                (ok2 ? "decodes" : "fails"),
            ok1 && !ok2);
    }
    {
        const LoadedSweep& s = sweeps["thermal_density_X"];
        const bool ok5 = decodes(s, "5");
        const bool ok4 = decodes(s, "4");
        add("thermal", "density", "readable at X >= 5 mm/px, not below",
            std::string("X=5 ") + (ok5 ? "decodes" : "fails") + ", X=4 " +
                (ok4 ? "decodes" : "fails"),
            ok5 && !ok4);
    }
    {
        const LoadedSweep& s = sweeps["thermal_infill_fraction"];
        const bool ok10 = decodes(s, "0.10"), ok20 = decodes(s, "0.20");
        const bool ok40 = decodes(s, "0.40"), ok80 = decodes(s, "0.80");
        add("thermal", "infill", "readable at infill <= 20%, not beyond",
            "10%:" + fmt_bool(ok10) + " 20%:" + fmt_bool(ok20) + " 40%:" +
                fmt_bool(!ok40) + " 80%:" + fmt_bool(!ok80),
            ok10 && ok20 && !ok40 && !ok80);
    }
    {
        const LoadedSweep& s = sweeps["nir_depth_d"];
        const bool ok = decodes(s, "1") && decodes(s, "2") && decodes(s, "3") && !decodes(s, "4");
        add("near-infrared", "depth", "readable at d <= 3 mm, not beyond",
            std::string("d=1..3 ") + (decodes(s, "3") ? "decode" : "fail") + ", d=4 " +
                (decodes(s, "4") ? "decodes" : "fails"),
            ok);
    }
    {
        const LoadedSweep& s = sweeps["nir_density_X"];
        const bool ok = decodes(s, "3") && decodes(s, "5") && !decodes(s, "1");
        add("near-infrared", "density", "readable at X >= 3 mm/px, not below",
            std::string("X=3,5 ") + (decodes(s, "3") && decodes(s, "5") ? "decode" : "fail") +
                ", X=1 " + (decodes(s, "1") ? "decodes" : "fails"),
            ok);
    }
    {
        const LoadedSweep& s = sweeps["nir_infill_fraction"];
        bool ok = true;
        for (const char* v : {"0.10", "0.20", "0.40", "0.80"}) ok = ok && decodes(s, v);
        add("near-infrared", "infill", "readable at any infill", ok ? "all decode" : "some fail",
            ok);
    }
    {
        const LoadedSweep& s = sweeps["nir_color"];
        bool non_black = true;
        for (const char* v : {"blue", "gray", "orange", "red"}) non_black = non_black && decodes(s, v);
        const bool black = decodes(s, "black");
        add("near-infrared", "color", "non-black object colors readable, black not",
            std::string("non-black ") + (non_black ? "decode" : "fail") + ", black " +
                (black ? "decodes" : "fails"),
            non_black && !black);
    }

    rep.all_pass = std::all_of(rep.rows.begin(), rep.rows.end(),
                               [](const GuidelineRow& r) { return r.pass; });
    return rep;
}

std::string format_report(const GuidelineReport& rep) {
    std::string out;
    for (const GuidelineRow& r : rep.rows) {
        out += (r.pass ? "PASS  " : "FAIL  ");
        out += r.imaging + " / " + r.aspect + ": " + r.requirement + " [observed: " + r.observed +
               "]\n";
    }
    out += rep.all_pass ? "guideline check: all rows pass\n" : "guideline check: FAILURES above\n";
    return out;
}

std::string to_string(Visibility v) {
    switch (v) {
        case Visibility::Visible: return "Visible";
        case Visibility::Unobtrusive: return "Unobtrusive";
        case Visibility::Invisible: return "Invisible";
    }
    return "?";
}

Visibility visibility_lookup(const std::string& color, geom::FabMode mode, double depth_mm) {
    static const std::map<std::string, std::array<Visibility, 4>> table = {
        // surface-fill d=1, d=2, d=3, then surface-join (d=1)
        {"blue",
         {Visibility::Visible, Visibility::Invisible, Visibility::Invisible,
          Visibility::Unobtrusive}},
        {"red",
         {Visibility::Visible, Visibility::Invisible, Visibility::Invisible,
          Visibility::Unobtrusive}},
        {"orange",
         {Visibility::Visible, Visibility::Unobtrusive, Visibility::Invisible,
          Visibility::Visible}},
        {"gray",
         {Visibility::Visible, Visibility::Invisible, Visibility::Invisible,
          Visibility::Visible}},
        {"black",
         {Visibility::Invisible, Visibility::Invisible, Visibility::Invisible,
          Visibility::Invisible}},
    };
    const auto it = table.find(color);
    if (it == table.end()) throw OutOfTable("no visibility data for color '" + color + "'");
    if (mode == geom::FabMode::SurfaceJoin) {
        if (std::fabs(depth_mm - 1.0) > 1e-9)
            throw OutOfTable("surface-join visibility was studied at d = 1 mm only");
        return it->second[3];
    }
    const int d = static_cast<int>(std::lround(depth_mm));
    if (d < 1 || d > 3 || std::fabs(depth_mm - d) > 1e-9)
        throw OutOfTable("surface-fill visibility covers d = 1, 2, 3 mm");
    return it->second[static_cast<size_t>(d - 1)];
}

} // namespace fabtag::harness
