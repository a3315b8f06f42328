#include "fabtag/decode.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fabtag/errors.hpp"

namespace fabtag::decode {

namespace {

// Anchor blob: minimal bbox corner sum; this is stable when adjacent bits
// merge into one component, because the component containing the anchor bit
// always owns the top-left corner of the payload footprint.
const img::Contour& top_left_contour(const std::vector<img::Contour>& contours) {
    size_t best = 0;
    long best_key = std::numeric_limits<long>::max();
    for (size_t i = 0; i < contours.size(); ++i) {
        const long key = static_cast<long>(contours[i].y0) + contours[i].x0;
        if (key < best_key ||
            (key == best_key && (contours[i].y0 < contours[best].y0 ||
                                 (contours[i].y0 == contours[best].y0 &&
                                  contours[i].x0 < contours[best].x0)))) {
            best_key = key;
            best = i;
        }
    }
    return contours[best];
}

payload::BitMatrix sample_lattice(const img::Image8& bin, const img::Contour& anchor,
                                  int rows, int cols, double spacing) {
    const double ax = anchor.x0 + 0.5 * spacing;
    const double ay = anchor.y0 + 0.5 * spacing;
    payload::BitMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const int px = static_cast<int>(std::lround(ax + c * spacing));
            const int py = static_cast<int>(std::lround(ay + r * spacing));
            if (px < 0 || py < 0 || px >= bin.width || py >= bin.height) continue;
            m.at(r, c) = bin.at(px, py) != 0 ? 1 : 0;
        }
    return m;
}

// Stage-1 object detection: foreground is the Otsu class whose mean is
// farther from the image border median, so both warm and cold objects
// against an ambient background resolve to the object.
img::Image8 object_mask(const img::Image8& norm) {
    const int t = img::otsu_threshold(norm);

    std::vector<uint8_t> border;
    border.reserve(static_cast<size_t>(2 * norm.width + 2 * norm.height));
    for (int x = 0; x < norm.width; ++x) {
        border.push_back(norm.at(x, 0));
        border.push_back(norm.at(x, norm.height - 1));
    }
    for (int y = 0; y < norm.height; ++y) {
        border.push_back(norm.at(0, y));
        border.push_back(norm.at(norm.width - 1, y));
    }
    std::nth_element(border.begin(), border.begin() + border.size() / 2, border.end());
    const double border_med = border[border.size() / 2];

    double mean_hi = 0.0, mean_lo = 0.0;
    size_t n_hi = 0, n_lo = 0;
    for (uint8_t p : norm.v) {
        if (p > t) {
            mean_hi += p;
            ++n_hi;
        } else {
            mean_lo += p;
            ++n_lo;
        }
    }
    mean_hi = n_hi ? mean_hi / n_hi : 0.0;
    mean_lo = n_lo ? mean_lo / n_lo : 0.0;
    const bool object_is_bright =
        std::fabs(mean_hi - border_med) >= std::fabs(mean_lo - border_med);
    return img::binarize(norm, t, !object_is_bright);
}

} // namespace

payload::BitMatrix decode_thermal_frame(const img::GrayImage& frame, const GridGeometry& geom) {
    const img::GrayImage blurred = img::gaussian_blur5(frame);
    const img::Image8 norm = img::normalize_u8(blurred);

    img::Image8 obj_bin;
    try {
        obj_bin = object_mask(norm);
    } catch (const DegenerateHistogram&) {
        throw NoObjectContour("frame is constant, no object outline");
    }
    const std::vector<img::Contour> obj_contours = img::find_contours(obj_bin);
    if (obj_contours.empty()) throw NoObjectContour("no object outline found");
    const img::Image8 crop = img::crop_largest(norm, obj_contours);

    int t2;
    try {
        t2 = img::otsu_threshold(crop);
    } catch (const DegenerateHistogram&) {
        throw NoAnchorContour("cropped frame is constant");
    }
    const img::Image8 bits_bin = img::binarize(crop, t2, geom.invert);
    const std::vector<img::Contour> bit_contours = img::find_contours(bits_bin);
    if (bit_contours.empty()) throw NoAnchorContour("no bit blobs in the cropped frame");

    const img::Contour& anchor = top_left_contour(bit_contours);
    return sample_lattice(bits_bin, anchor, geom.rows, geom.cols, geom.sample_spacing_px);
}

AccuracySeries decode_thermal_recording(const thermal::ThermalRecording& rec,
                                        const GridGeometry& geom,
                                        const payload::BitMatrix& truth) {
    if (rec.frames.empty()) throw EmptyRecording("recording has no frames");
    AccuracySeries series;
    series.points.reserve(rec.frames.size());
    for (const thermal::ThermalFrame& f : rec.frames) {
        AccuracyPoint p;
        p.t = f.t;
        try {
            const payload::BitMatrix m = decode_thermal_frame(f.temp, geom);
            p.accuracy = payload::matrix_accuracy(m, truth);
        } catch (const Error&) {
            p.accuracy = 0.0; // unreadable frames score zero, excluded later
        }
        series.points.push_back(p);
    }

    std::vector<double> acc;
    acc.reserve(series.points.size());
    for (const AccuracyPoint& p : series.points) acc.push_back(p.accuracy);
    const double q = quantile_linear(acc, 0.2);
    for (AccuracyPoint& p : series.points) p.flagged = p.accuracy < q;
    return series;
}

double quantile_linear(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(std::floor(pos));
    const size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double reading_window(const AccuracySeries& series, double contact_end_s) {
    const auto& pts = series.points;
    size_t first = pts.size();
    for (size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].t + 1e-12 < contact_end_s) continue;
        if (pts[i].flagged) continue;
        first = i;
        break;
    }
    if (first == pts.size()) return 0.0;
    if (pts[first].accuracy < 1.0) return 0.0;

    // median frame interval stands in for the step past the last frame
    double dt = 0.0;
    if (pts.size() > 1) {
        std::vector<double> gaps;
        gaps.reserve(pts.size() - 1);
        for (size_t i = 1; i < pts.size(); ++i) gaps.push_back(pts[i].t - pts[i - 1].t);
        std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
        dt = gaps[gaps.size() / 2];
    }

    double last_good_t = pts[first].t;
    for (size_t i = first + 1; i < pts.size(); ++i) {
        if (pts[i].flagged) continue; // outliers do not break the run
        if (pts[i].accuracy < 1.0) return pts[i].t - pts[first].t;
        last_good_t = pts[i].t;
    }
    return last_good_t - pts[first].t + dt;
}

payload::BitMatrix decode_nir_cube(const nir::SpectraCube& cube, const GridGeometry& geom) {
    const size_t nb = cube.wavelengths.size();
    img::GrayImage mean(cube.width, cube.height);
    for (int row = 0; row < cube.height; ++row)
        for (int col = 0; col < cube.width; ++col) {
            double acc = 0.0;
            for (size_t b = 0; b < nb; ++b) acc += cube.at(row, col, static_cast<int>(b));
            mean.at(col, row) = acc / static_cast<double>(nb);
        }

    const img::Image8 norm = img::normalize_u8(mean);
    const img::GrayImage up = img::upsample4(img::to_gray(norm));
    img::Image8 bin = img::fixed_threshold(up, 0.4);
    if (geom.invert)
        for (uint8_t& p : bin.v) p = p ? 0 : 1;
    const std::vector<img::Contour> contours = img::find_contours(bin);
    if (contours.empty()) throw NoAnchorContour("no blobs above the fixed threshold");

    const img::Contour& anchor = top_left_contour(contours);
    return sample_lattice(bin, anchor, geom.rows, geom.cols, geom.sample_spacing_px * 4.0);
}

std::string accuracy_series_csv(const AccuracySeries& series) {
    std::string out = "t,accuracy,flagged\n";
    char buf[64];
    for (const AccuracyPoint& p : series.points) {
        std::snprintf(buf, sizeof(buf), "%.3f,%.6f,%d\n", p.t, p.accuracy, p.flagged ? 1 : 0);
        out += buf;
    }
    return out;
}

AccuracySeries parse_accuracy_series_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    AccuracySeries s;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line == "t,accuracy,flagged") continue;
        AccuracyPoint p;
        int flag = 0;
        if (std::sscanf(line.c_str(), "%lf,%lf,%d", &p.t, &p.accuracy, &flag) != 3)
            throw FormatError("accuracy csv line " + std::to_string(lineno) +
                              ": expected 't,accuracy,flagged'");
        p.flagged = flag != 0;
        s.points.push_back(p);
    }
    return s;
}

} // namespace fabtag::decode
