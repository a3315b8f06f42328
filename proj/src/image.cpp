#include "fabtag/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "fabtag/errors.hpp"

namespace fabtag::img {

namespace {

std::array<double, 5> gauss5_weights() {
    const double sigma = 1.1;
    std::array<double, 5> w{};
    double sum = 0.0;
    for (int k = -2; k <= 2; ++k) {
        w[k + 2] = std::exp(-0.5 * k * k / (sigma * sigma));
        sum += w[k + 2];
    }
    for (double& x : w) x /= sum;
    return w;
}

// edge-repeating mirror: -1 -> 0, -2 -> 1, n -> n-1, n+1 -> n-2
inline int mirror(int i, int n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
    return i;
}

} // namespace

GrayImage gaussian_blur5(const GrayImage& in) {
    if (in.width < 5 || in.height < 5)
        throw ImageTooSmall("gaussian_blur5 needs at least 5x5, got " +
                            std::to_string(in.width) + "x" + std::to_string(in.height));
    static const std::array<double, 5> w = gauss5_weights();

    GrayImage tmp(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int k = -2; k <= 2; ++k)
                acc += w[k + 2] * in.at(mirror(x + k, in.width), y);
            tmp.at(x, y) = acc;
        }
    }
    GrayImage out(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) {
            double acc = 0.0;
            for (int k = -2; k <= 2; ++k)
                acc += w[k + 2] * tmp.at(x, mirror(y + k, in.height));
            out.at(x, y) = acc;
        }
    }
    return out;
}

Image8 normalize_u8(const GrayImage& in) {
    Image8 out(in.width, in.height);
    if (in.v.empty()) return out;
    auto [mn_it, mx_it] = std::minmax_element(in.v.begin(), in.v.end());
    const double mn = *mn_it, mx = *mx_it;
    if (mx <= mn) return out; // constant image -> all zeros
    const double scale = 255.0 / (mx - mn);
    for (size_t i = 0; i < in.v.size(); ++i) {
        double s = (in.v[i] - mn) * scale;
        out.v[i] = static_cast<uint8_t>(std::min(255.0, std::floor(s + 0.5)));
    }
    return out;
}

int otsu_threshold(const Image8& in) {
    std::array<int64_t, 256> hist{};
    for (uint8_t p : in.v) hist[p]++;

    int distinct = 0;
    for (int i = 0; i < 256; ++i)
        if (hist[i] > 0) distinct++;
    if (distinct < 2)
        throw DegenerateHistogram("otsu needs at least two distinct values");

    const int64_t total = static_cast<int64_t>(in.v.size());
    int64_t sum_all = 0;
    for (int i = 0; i < 256; ++i) sum_all += static_cast<int64_t>(i) * hist[i];

    int best_t = 0;
    double best_var = -1.0;
    int64_t w0 = 0, sum0 = 0;
    for (int t = 0; t <= 254; ++t) {
        w0 += hist[t];
        sum0 += static_cast<int64_t>(t) * hist[t];
        const int64_t w1 = total - w0;
        if (w0 == 0 || w1 == 0) {
            // one-sided split still participates with zero variance
            if (best_var < 0.0) {
                best_var = 0.0;
                best_t = t;
            }
            continue;
        }
        const double mu0 = static_cast<double>(sum0) / w0;
        const double mu1 = static_cast<double>(sum_all - sum0) / w1;
        const double d = mu0 - mu1;
        const double var = static_cast<double>(w0) * static_cast<double>(w1) * d * d;
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    return best_t;
}

Image8 binarize(const Image8& in, int threshold, bool invert) {
    Image8 out(in.width, in.height);
    for (size_t i = 0; i < in.v.size(); ++i) {
        bool fg = in.v[i] > threshold;
        out.v[i] = (fg != invert) ? 1 : 0;
    }
    return out;
}

namespace {

// Moore neighborhood, clockwise starting east.
constexpr int DX[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int DY[8] = {0, 1, 1, 1, 0, -1, -1, -1};

std::vector<std::pair<int, int>> trace_boundary(const Image8& bin, int sx, int sy) {
    auto fg = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < bin.width && y < bin.height && bin.at(x, y) != 0;
    };
    std::vector<std::pair<int, int>> out;
    out.emplace_back(sx, sy);

    bool has_neighbor = false;
    for (int d = 0; d < 8 && !has_neighbor; ++d) has_neighbor = fg(sx + DX[d], sy + DY[d]);
    if (!has_neighbor) return out; // isolated pixel

    // Moore tracing. The west neighbor of a row-major first-encounter pixel
    // is always background; stop on reentering the start state.
    const std::pair<int, int> start{sx, sy};
    const std::pair<int, int> start_back{sx - 1, sy};
    std::pair<int, int> cur = start, back = start_back;

    for (size_t guard = 0; guard <= bin.v.size() * 8; ++guard) {
        int bidx = 0;
        for (int d = 0; d < 8; ++d) {
            if (cur.first + DX[d] == back.first && cur.second + DY[d] == back.second) {
                bidx = d;
                break;
            }
        }
        std::pair<int, int> last_bg = back;
        int found = -1;
        for (int i = 1; i <= 8; ++i) {
            const int d = (bidx + i) % 8;
            const int nx = cur.first + DX[d], ny = cur.second + DY[d];
            if (fg(nx, ny)) {
                found = d;
                break;
            }
            last_bg = {nx, ny};
        }
        if (found < 0) break;
        back = last_bg;
        cur = {cur.first + DX[found], cur.second + DY[found]};
        if (cur == start && back == start_back) break;
        out.push_back(cur);
    }
    return out;
}

} // namespace

std::vector<Contour> find_contours(const Image8& bin) {
    std::vector<Contour> result;
    if (bin.empty()) return result;
    std::vector<uint8_t> seen(bin.v.size(), 0);
    std::vector<std::pair<int, int>> stack;

    for (int y = 0; y < bin.height; ++y) {
        for (int x = 0; x < bin.width; ++x) {
            const size_t idx = static_cast<size_t>(y) * bin.width + x;
            if (bin.v[idx] == 0 || seen[idx]) continue;

            Contour c;
            c.boundary = trace_boundary(bin, x, y);
            c.x0 = c.x1 = x;
            c.y0 = c.y1 = y;

            // flood fill the component for area / centroid / bbox
            double sx = 0.0, sy = 0.0;
            size_t count = 0;
            stack.clear();
            stack.emplace_back(x, y);
            seen[idx] = 1;
            while (!stack.empty()) {
                auto [px, py] = stack.back();
                stack.pop_back();
                ++count;
                sx += px;
                sy += py;
                c.x0 = std::min(c.x0, px);
                c.x1 = std::max(c.x1, px);
                c.y0 = std::min(c.y0, py);
                c.y1 = std::max(c.y1, py);
                for (int d = 0; d < 8; ++d) {
                    int nx = px + DX[d], ny = py + DY[d];
                    if (nx < 0 || ny < 0 || nx >= bin.width || ny >= bin.height) continue;
                    const size_t nidx = static_cast<size_t>(ny) * bin.width + nx;
                    if (bin.v[nidx] == 0 || seen[nidx]) continue;
                    seen[nidx] = 1;
                    stack.emplace_back(nx, ny);
                }
            }
            c.area = static_cast<double>(count);
            c.centroid_x = sx / count;
            c.centroid_y = sy / count;
            result.push_back(std::move(c));
        }
    }
    return result;
}

namespace {

const Contour& largest_contour(const std::vector<Contour>& contours) {
    if (contours.empty()) throw NoContours("no contours to crop from");
    size_t best = 0;
    for (size_t i = 1; i < contours.size(); ++i)
        if (contours[i].area > contours[best].area) best = i; // ties keep first encounter
    return contours[best];
}

} // namespace

Image8 crop_largest(const Image8& img, const std::vector<Contour>& contours) {
    const Contour& c = largest_contour(contours);
    Image8 out(c.x1 - c.x0 + 1, c.y1 - c.y0 + 1);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.at(x, y) = img.at(c.x0 + x, c.y0 + y);
    return out;
}

GrayImage crop_largest(const GrayImage& img, const std::vector<Contour>& contours) {
    const Contour& c = largest_contour(contours);
    GrayImage out(c.x1 - c.x0 + 1, c.y1 - c.y0 + 1);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.at(x, y) = img.at(c.x0 + x, c.y0 + y);
    return out;
}

namespace {

// Catmull-Rom (cubic convolution, a = -0.5)
inline double cubic_weight(double x) {
    x = std::fabs(x);
    if (x < 1.0) return 1.0 + x * x * (1.5 * x - 2.5);
    if (x < 2.0) return 2.0 - x * (4.0 - x * (2.5 - 0.5 * x));
    return 0.0;
}

// taps outside the image extrapolate linearly so ramps stay exact
inline double sample_extrap(const std::vector<double>& row, int n, int i) {
    if (i < 0) return 2.0 * row[0] - row[std::min(-i, n - 1)];
    if (i >= n) return 2.0 * row[n - 1] - row[std::max(0, 2 * (n - 1) - i)];
    return row[i];
}

void resample_line(const std::vector<double>& src, int n, std::vector<double>& dst, int m) {
    const double scale = (m > 1 && n > 1) ? static_cast<double>(n - 1) / (m - 1) : 0.0;
    for (int j = 0; j < m; ++j) {
        const double pos = j * scale;
        const int base = static_cast<int>(std::floor(pos));
        const double f = pos - base;
        double acc = 0.0;
        for (int k = -1; k <= 2; ++k)
            acc += cubic_weight(f - k) * sample_extrap(src, n, base + k);
        dst[j] = acc;
    }
}

} // namespace

GrayImage upsample4(const GrayImage& in) {
    if (in.empty()) return in;
    const int ow = in.width * 4, oh = in.height * 4;

    GrayImage horiz(ow, in.height);
    std::vector<double> srow(in.width), drow(ow);
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) srow[x] = in.at(x, y);
        resample_line(srow, in.width, drow, ow);
        for (int x = 0; x < ow; ++x) horiz.at(x, y) = drow[x];
    }

    GrayImage out(ow, oh);
    std::vector<double> scol(in.height), dcol(oh);
    for (int x = 0; x < ow; ++x) {
        for (int y = 0; y < in.height; ++y) scol[y] = horiz.at(x, y);
        resample_line(scol, in.height, dcol, oh);
        for (int y = 0; y < oh; ++y) out.at(x, y) = dcol[y];
    }

    const auto [mn_it, mx_it] = std::minmax_element(in.v.begin(), in.v.end());
    for (double& x : out.v) x = std::clamp(x, *mn_it, *mx_it);
    return out;
}

Image8 fixed_threshold(const GrayImage& in, double frac) {
    const double mx = in.v.empty() ? 0.0 : *std::max_element(in.v.begin(), in.v.end());
    const double cut = frac * mx;
    Image8 out(in.width, in.height);
    for (size_t i = 0; i < in.v.size(); ++i) out.v[i] = in.v[i] > cut ? 1 : 0;
    return out;
}

GrayImage to_gray(const Image8& in) {
    GrayImage out(in.width, in.height);
    for (size_t i = 0; i < in.v.size(); ++i) out.v[i] = in.v[i];
    return out;
}

void write_pgm(const Image8& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoFailure("cannot open " + path);
    f << "P5\n" << img.width << " " << img.height << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.v.data()), static_cast<std::streamsize>(img.v.size()));
    if (!f) throw IoFailure("short write to " + path);
}

} // namespace fabtag::img
