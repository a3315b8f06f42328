#pragma once

#include <vector>

#include "fabtag/image.hpp"
#include "fabtag/nir.hpp"
#include "fabtag/payload.hpp"
#include "fabtag/thermal.hpp"

namespace fabtag::decode {

/// Lattice the decoders sample after anchoring on the top-left blob.
struct GridGeometry {
    int rows = 4;
    int cols = 4;
    double sample_spacing_px = 10.0; // thermal frame px; NIR scales by the upsample factor
    bool invert = false;             // flip bit polarity (bits darker than surroundings)
};

struct AccuracyPoint {
    double t = 0.0;
    double accuracy = 0.0;
    bool flagged = false; // outlier, excluded from window runs but kept in the series
};

struct AccuracySeries {
    std::vector<AccuracyPoint> points;
};

// Two-stage pipeline: blur, normalize, Otsu-binarize, object contour crop,
// Otsu-binarize again, anchor on the top-left blob, sample the lattice.
payload::BitMatrix decode_thermal_frame(const img::GrayImage& frame, const GridGeometry& geom);

// Per-frame accuracy against truth (frames that fail to decode score 0),
// then frames below the 0.2 quantile of the series are flagged as outliers.
AccuracySeries decode_thermal_recording(const thermal::ThermalRecording& rec,
                                        const GridGeometry& geom,
                                        const payload::BitMatrix& truth);

// Longest run of perfect non-flagged frames starting at the first
// non-flagged frame at or after contact_end; flagged frames do not break
// the run. Returns seconds.
double reading_window(const AccuracySeries& series, double contact_end_s);

// Spectral mean, normalize, x4 upsample, fixed 0.4 threshold, contours,
// anchored lattice sampling.
payload::BitMatrix decode_nir_cube(const nir::SpectraCube& cube, const GridGeometry& geom);

std::string accuracy_series_csv(const AccuracySeries& series);
AccuracySeries parse_accuracy_series_csv(const std::string& text);

// linear-interpolated quantile (the 0.2-quantile outlier rule)
double quantile_linear(std::vector<double> values, double q);

} // namespace fabtag::decode
