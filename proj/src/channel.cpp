#include "lineage/channel.hpp"

#include "lineage/error.hpp"
#include "lineage/prng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace lineage {

namespace {

constexpr double kRed = 0.299;
constexpr double kGreen = 0.587;
constexpr double kBlue = 0.114;

// Planar working copy, one double per sample, interleaved like ImageBuffer.
struct Planes {
    int width;
    int height;
    std::vector<double> v;

    explicit Planes(const ImageBuffer& img) : width{img.width()}, height{img.height()} {
        v.assign(img.data().begin(), img.data().end());
    }
    double& at(int x, int y, int c) { return v[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
    double at(int x, int y, int c) const { return v[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }

    ImageBuffer to_image() const {
        std::vector<std::uint8_t> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            out[i] = static_cast<std::uint8_t>(std::clamp(std::round(v[i]), 0.0, 255.0));
        }
        return ImageBuffer(width, height, std::move(out));
    }
};

template <typename Fn>
ImageBuffer per_pixel(const ImageBuffer& img, Fn&& fn) {
    Planes p(img);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) fn(p.v[3 * i], p.v[3 * i + 1], p.v[3 * i + 2]);
    return p.to_image();
}

// Moves a recoloured pixel back onto the luma of the original, then pulls it
// toward the grey axis just far enough to stay inside [0, 255].
void restore_luma(double& r, double& g, double& b, double r0, double g0, double b0) {
    const double shift = (kRed * r0 + kGreen * g0 + kBlue * b0) - (kRed * r + kGreen * g + kBlue * b);
    const double d[3] = {r + shift - r0, g + shift - g0, b + shift - b0};
    const double o[3] = {r0, g0, b0};
    double t = 1.0;
    for (int c = 0; c < 3; ++c) {
        if (o[c] + d[c] > 255.0) t = std::min(t, (255.0 - o[c]) / d[c]);
        if (o[c] + d[c] < 0.0) t = std::min(t, -o[c] / d[c]);
    }
    r = r0 + t * d[0];
    g = g0 + t * d[1];
    b = b0 + t * d[2];
}

template <typename Fn>
ImageBuffer recolour(const ImageBuffer& img, Fn&& fn) {
    return per_pixel(img, [&fn](double& r, double& g, double& b) {
        const double r0 = r, g0 = g, b0 = b;
        fn(r, g, b);
        restore_luma(r, g, b, r0, g0, b0);
    });
}

Planes gaussian(const Planes& src, double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double total = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-(i * i) / (2 * sigma * sigma));
        total += kernel[i + radius];
    }
    for (auto& k : kernel) k /= total;

    Planes tmp = src;
    Planes out = src;
    const int w = src.width;
    const int h = src.height;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * src.at(std::clamp(x + i, 0, w - 1), y, c);
                tmp.at(x, y, c) = acc;
            }
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.at(x, std::clamp(y + i, 0, h - 1), c);
                out.at(x, y, c) = acc;
            }
    return out;
}

// Bilinear sample at pixel-index coordinates; points outside the sample grid
// are black.
void sample_black(const ImageBuffer& src, double fx, double fy, double out[3]) {
    if (!(fx >= 0.0 && fy >= 0.0 && fx <= src.width() - 1.0 && fy <= src.height() - 1.0)) {
        out[0] = out[1] = out[2] = 0.0;
        return;
    }
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const int x1 = std::min(x0 + 1, src.width() - 1);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double wx = fx - x0;
    const double wy = fy - y0;
    for (int c = 0; c < 3; ++c) {
        const double top = src.at(x0, y0, c) * (1 - wx) + src.at(x1, y0, c) * wx;
        const double bottom = src.at(x0, y1, c) * (1 - wx) + src.at(x1, y1, c) * wx;
        out[c] = top * (1 - wy) + bottom * wy;
    }
}

// Inverse warp: for every output pixel centre, `map` gives the source point.
template <typename Map>
ImageBuffer warp(const ImageBuffer& img, Map&& map) {
    Planes out(img);
    double rgb[3];
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const auto [sx, sy] = map(static_cast<double>(x), static_cast<double>(y));
            sample_black(img, sx, sy, rgb);
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = rgb[c];
        }
    return out.to_image();
}

ImageBuffer crop(const ImageBuffer& img, double s) {
    const double keep = 1.0 - 0.5 * s;
    const double w = img.width();
    const double h = img.height();
    Planes out(img);
    for (int y = 0; y < img.height(); ++y) {
        const double fy = std::clamp(h * (1 - keep) / 2 + (y + 0.5) * keep - 0.5, 0.0, h - 1);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height() - 1);
        const double wy = fy - y0;
        for (int x = 0; x < img.width(); ++x) {
            const double fx = std::clamp(w * (1 - keep) / 2 + (x + 0.5) * keep - 0.5, 0.0, w - 1);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = img.at(x0, y0, c) * (1 - wx) + img.at(x1, y0, c) * wx;
                const double bottom = img.at(x0, y1, c) * (1 - wx) + img.at(x1, y1, c) * wx;
                out.at(x, y, c) = top * (1 - wy) + bottom * wy;
            }
        }
    }
    return out.to_image();
}

ImageBuffer rotate(const ImageBuffer& img, double s) {
    const double angle = 45.0 * s * std::numbers::pi / 180.0;
    const double cs = std::cos(angle);
    const double sn = std::sin(angle);
    const double cx = (img.width() - 1) / 2.0;
    const double cy = (img.height() - 1) / 2.0;
    return warp(img, [&](double x, double y) {
        const double dx = x - cx;
        const double dy = y - cy;
        return std::pair{cs * dx + sn * dy + cx, -sn * dx + cs * dy + cy};
    });
}

using Mat3 = std::array<double, 9>;

// Homography taking src[i] to dst[i] (h33 fixed to 1).
Mat3 homography(const std::array<std::pair<double, double>, 4>& src,
                const std::array<std::pair<double, double>, 4>& dst) {
    double a[8][9] = {};
    for (int i = 0; i < 4; ++i) {
        const auto [x, y] = src[i];
        const auto [u, v] = dst[i];
        double* r0 = a[2 * i];
        double* r1 = a[2 * i + 1];
        r0[0] = x; r0[1] = y; r0[2] = 1; r0[6] = -u * x; r0[7] = -u * y; r0[8] = u;
        r1[3] = x; r1[4] = y; r1[5] = 1; r1[6] = -v * x; r1[7] = -v * y; r1[8] = v;
    }
    for (int col = 0; col < 8; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 8; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        for (int r = 0; r < 8; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int k = col; k < 9; ++k) a[r][k] -= f * a[col][k];
        }
    }
    Mat3 h{};
    for (int i = 0; i < 8; ++i) h[i] = a[i][8] / a[i][i];
    h[8] = 1.0;
    return h;
}

ImageBuffer perspective(const ImageBuffer& img, double s, bool horizontal) {
    const double w = img.width() - 1.0;
    const double h = img.height() - 1.0;
    // Corners: top-left, top-right, bottom-right, bottom-left.
    const std::array<std::pair<double, double>, 4> rect = {{{0, 0}, {w, 0}, {w, h}, {0, h}}};
    auto quad = rect;
    if (horizontal) {
        const double pull = 0.25 * s * h;
        quad[1].second += pull;
        quad[2].second -= pull;
    } else {
        const double pull = 0.25 * s * w;
        quad[0].first += pull;
        quad[1].first -= pull;
    }
    // Output pixel in the tilted quad -> source pixel in the rectangle.
    const Mat3 m = homography(quad, rect);
    return warp(img, [&](double x, double y) {
        const double d = m[6] * x + m[7] * y + m[8];
        return std::pair{(m[0] * x + m[1] * y + m[2]) / d, (m[3] * x + m[4] * y + m[5]) / d};
    });
}

ImageBuffer grain(const ImageBuffer& img, double s, std::uint64_t seed) {
    const double stddev = 25.0 * s;
    SplitMix64 rng(seed);
    Planes p(img);
    for (std::size_t i = 0; i < p.v.size(); i += 2) {
        const double u1 = (static_cast<double>(rng.next() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        p.v[i] += stddev * r * std::cos(2 * std::numbers::pi * u2);
        if (i + 1 < p.v.size()) p.v[i + 1] += stddev * r * std::sin(2 * std::numbers::pi * u2);
    }
    return p.to_image();
}

}  // namespace

std::string to_string(OpId op) {
    switch (op) {
        case OpId::brightness: return "brightness";
        case OpId::contrast: return "contrast";
        case OpId::exposure: return "exposure";
        case OpId::saturation: return "saturation";
        case OpId::warmth: return "warmth";
        case OpId::tint: return "tint";
        case OpId::blur: return "blur";
        case OpId::sharpen: return "sharpen";
        case OpId::grain: return "grain";
        case OpId::jpeg: return "jpeg";
        case OpId::crop: return "crop";
        case OpId::rotate: return "rotate";
        case OpId::persp_h: return "persp_h";
        case OpId::persp_v: return "persp_v";
    }
    return "?";
}

OpId op_from_string(const std::string& name) {
    for (OpId op : kAllOps)
        if (to_string(op) == name) return op;
    throw InvalidArgument("unknown channel operation '" + name + "'");
}

bool is_signed(OpId op) {
    switch (op) {
        case OpId::brightness:
        case OpId::contrast:
        case OpId::exposure:
        case OpId::saturation:
        case OpId::warmth:
        case OpId::tint:
        case OpId::sharpen:
        case OpId::rotate:
            return true;
        default:
            return false;
    }
}

bool is_geometric(OpId op) {
    return op == OpId::crop || op == OpId::rotate || op == OpId::persp_h || op == OpId::persp_v;
}

void ChannelOp::validate() const {
    const double lo = is_signed(id) ? -1.0 : 0.0;
    if (!(severity >= lo && severity <= 1.0)) {
        throw InvalidArgument("severity " + std::to_string(severity) + " out of range for " +
                              to_string(id) + (is_signed(id) ? " ([-1, 1])" : " ([0, 1])"));
    }
}

ImageBuffer apply(const ImageBuffer& img, const ChannelOp& op) {
    op.validate();
    const double s = op.severity;
    if (s == 0.0) return img;

    switch (op.id) {
        case OpId::brightness:
            return per_pixel(img, [s](double& r, double& g, double& b) { r += 64 * s; g += 64 * s; b += 64 * s; });
        case OpId::contrast: {
            const double k = 1.0 + 0.8 * s;
            return per_pixel(img, [k](double& r, double& g, double& b) {
                r = (r - 128) * k + 128;
                g = (g - 128) * k + 128;
                b = (b - 128) * k + 128;
            });
        }
        case OpId::exposure: {
            const double k = std::exp2(s);
            return per_pixel(img, [k](double& r, double& g, double& b) { r *= k; g *= k; b *= k; });
        }
        case OpId::saturation: {
            const double k = 1.0 + s;
            return recolour(img, [k](double& r, double& g, double& b) {
                const double y = kRed * r + kGreen * g + kBlue * b;
                r = y + (r - y) * k;
                g = y + (g - y) * k;
                b = y + (b - y) * k;
            });
        }
        case OpId::warmth:
            return recolour(img, [s](double& r, double&, double& b) { r *= 1 + 0.3 * s; b *= 1 - 0.3 * s; });
        case OpId::tint:
            return recolour(img, [s](double& r, double& g, double& b) {
                g *= 1 + 0.3 * s;
                r *= 1 - 0.15 * s;
                b *= 1 - 0.15 * s;
            });
        case OpId::blur:
            return gaussian(Planes(img), 3.0 * s).to_image();
        case OpId::sharpen: {
            Planes p(img);
            const Planes soft = gaussian(p, 1.0);
            for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] += 2 * s * (p.v[i] - soft.v[i]);
            return p.to_image();
        }
        case OpId::grain:
            return grain(img, s, op.seed);
        case OpId::jpeg: {
            const int quality = static_cast<int>(std::lround(95.0 - 85.0 * s));
            return decode_image(encode_jpeg(img, quality));
        }
        case OpId::crop:
            return crop(img, s);
        case OpId::rotate:
            return rotate(img, s);
        case OpId::persp_h:
            return perspective(img, s, true);
        case OpId::persp_v:
            return perspective(img, s, false);
    }
    throw InvalidArgument("unknown channel operation");
}

}  // namespace lineage
