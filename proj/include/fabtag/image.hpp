#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fabtag::img {

/// Grayscale raster with real-valued pixels, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> v;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), v(static_cast<size_t>(w) * h, fill) {}

    double& at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
    bool empty() const { return width <= 0 || height <= 0; }
};

/// 8-bit raster; also used for binary masks (0 = background, nonzero = fg).
struct Image8 {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> v;

    Image8() = default;
    Image8(int w, int h, uint8_t fill = 0)
        : width(w), height(h), v(static_cast<size_t>(w) * h, fill) {}

    uint8_t& at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
    bool empty() const { return width <= 0 || height <= 0; }
};

struct Contour {
    std::vector<std::pair<int, int>> boundary; // (x, y), ordered walk
    double centroid_x = 0.0;
    double centroid_y = 0.0;
    double area = 0.0; // pixel count of the component
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0; // inclusive bbox
};

// 5x5 Gaussian, sigma 1.1, mirrored borders (edge-repeating reflection).
GrayImage gaussian_blur5(const GrayImage& in);

// Affine min->0 max->255, round half up; constant input maps to all zeros.
Image8 normalize_u8(const GrayImage& in);

// Otsu threshold over the 256-bin histogram; ties take the smallest t.
// Binarize convention everywhere: value > t is foreground.
int otsu_threshold(const Image8& in);

Image8 binarize(const Image8& in, int threshold, bool invert = false);

// Outer borders of 8-connected foreground components, row-major first
// encounter order. Blank image gives an empty list.
std::vector<Contour> find_contours(const Image8& bin);

Image8 crop_largest(const Image8& img, const std::vector<Contour>& contours);
GrayImage crop_largest(const GrayImage& img, const std::vector<Contour>& contours);

// x4 Catmull-Rom upsampling (corner-aligned, linear-extrapolated borders),
// clamped to the input range. Reproduces constants and linear ramps.
GrayImage upsample4(const GrayImage& in);

// value > frac * max(img) -> foreground
Image8 fixed_threshold(const GrayImage& in, double frac);

GrayImage to_gray(const Image8& in);

// debug output, PGM P5
void write_pgm(const Image8& img, const std::string& path);

} // namespace fabtag::img
