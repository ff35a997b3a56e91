#include "lineage/imaging.hpp"

#include "lineage/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace lineage {

const std::array<int, 64> kZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
};

namespace {

constexpr double kRed = 0.299;
constexpr double kGreen = 0.587;
constexpr double kBlue = 0.114;

std::vector<double> dct_matrix(int size) {
    std::vector<double> m(static_cast<std::size_t>(size) * size);
    const double scale0 = std::sqrt(1.0 / size);
    const double scale = std::sqrt(2.0 / size);
    for (int u = 0; u < size; ++u) {
        for (int x = 0; x < size; ++x) {
            const double c = std::cos((2.0 * x + 1.0) * u * std::numbers::pi / (2.0 * size));
            m[static_cast<std::size_t>(u) * size + x] = (u == 0 ? scale0 : scale) * c;
        }
    }
    return m;
}

const std::vector<double>& dct8() {
    static const std::vector<double> m = dct_matrix(8);
    return m;
}

void require_same_size(const ImageBuffer& a, const ImageBuffer& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw DimensionError("image dimensions differ: " + std::to_string(a.width()) + "x" +
                             std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                             "x" + std::to_string(b.height()));
    }
}

std::uint8_t to_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

// Separable "valid" convolution: output is (w - k + 1) x (h - k + 1).
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h,
                                 const std::vector<double>& kernel) {
    const int k = static_cast<int>(kernel.size());
    const int ow = w - k + 1;
    const int oh = h - k + 1;
    std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) acc += kernel[i] * src[static_cast<std::size_t>(y) * w + x + i];
            tmp[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * oh);
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int i = 0; i < k; ++i) acc += kernel[i] * tmp[static_cast<std::size_t>(y + i) * ow + x];
            out[static_cast<std::size_t>(y) * ow + x] = acc;
        }
    }
    return out;
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height)
    : ImageBuffer(width, height,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                            std::max(height, 0) * 3)) {}

ImageBuffer::ImageBuffer(int width, int height, std::vector<std::uint8_t> data)
    : width_{width}, height_{height}, data_{std::move(data)} {
    if (width <= 0 || height <= 0) throw DimensionError("image dimensions must be positive");
    if (data_.size() != pixel_count() * 3) {
        throw DimensionError("sample count " + std::to_string(data_.size()) +
                             " does not match " + std::to_string(width) + "x" +
                             std::to_string(height) + "x3");
    }
}

void require_block_aligned(const ImageBuffer& img) {
    if (img.width() < 8 || img.width() % 8 != 0) {
        throw DimensionError("width " + std::to_string(img.width()) +
                             " is not a positive multiple of 8");
    }
    if (img.height() < 8 || img.height() % 8 != 0) {
        throw DimensionError("height " + std::to_string(img.height()) +
                             " is not a positive multiple of 8");
    }
}

LumaPlane to_luma(const ImageBuffer& img) {
    LumaPlane out(img.width(), img.height());
    const auto px = img.data();
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        out.data[i] = kRed * px[3 * i] + kGreen * px[3 * i + 1] + kBlue * px[3 * i + 2];
    }
    return out;
}

ImageBuffer apply_luma(const ImageBuffer& img, const LumaPlane& new_luma) {
    if (new_luma.width != img.width() || new_luma.height != img.height()) {
        throw DimensionError("luma plane does not match image dimensions");
    }
    const LumaPlane old = to_luma(img);
    ImageBuffer out = img;
    auto px = out.data();
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        const double delta = new_luma.data[i] - old.data[i];
        for (int c = 0; c < 3; ++c) px[3 * i + c] = to_u8(px[3 * i + c] + delta);
    }
    return out;
}

CoeffGrid block_dct(const LumaPlane& luma) {
    if (luma.width % 8 != 0 || luma.height % 8 != 0 || luma.width < 8 || luma.height < 8) {
        throw DimensionError("luma plane " + std::to_string(luma.width) + "x" +
                             std::to_string(luma.height) + " is not block aligned");
    }
    const auto& m = dct8();
    CoeffGrid grid;
    grid.block_cols = luma.width / 8;
    grid.block_rows = luma.height / 8;
    grid.coeffs.resize(grid.block_count() * 64);

    std::array<double, 64> tmp{};
    std::array<double, 64> raster{};
    for (int by = 0; by < grid.block_rows; ++by) {
        for (int bx = 0; bx < grid.block_cols; ++bx) {
            // rows: tmp = X * M^T
            for (int y = 0; y < 8; ++y) {
                for (int u = 0; u < 8; ++u) {
                    double acc = 0.0;
                    for (int x = 0; x < 8; ++x) acc += luma.at(bx * 8 + x, by * 8 + y) * m[u * 8 + x];
                    tmp[y * 8 + u] = acc;
                }
            }
            // columns: raster = M * tmp
            for (int v = 0; v < 8; ++v) {
                for (int u = 0; u < 8; ++u) {
                    double acc = 0.0;
                    for (int y = 0; y < 8; ++y) acc += m[v * 8 + y] * tmp[y * 8 + u];
                    raster[v * 8 + u] = acc;
                }
            }
            auto block = grid.block(static_cast<std::size_t>(by) * grid.block_cols + bx);
            for (int k = 0; k < 64; ++k) block[k] = raster[kZigzag[k]];
        }
    }
    return grid;
}

LumaPlane block_idct(const CoeffGrid& grid) {
    const auto& m = dct8();
    LumaPlane out(grid.block_cols * 8, grid.block_rows * 8);
    std::array<double, 64> raster{};
    std::array<double, 64> tmp{};
    for (int by = 0; by < grid.block_rows; ++by) {
        for (int bx = 0; bx < grid.block_cols; ++bx) {
            const auto block = grid.block(static_cast<std::size_t>(by) * grid.block_cols + bx);
            for (int k = 0; k < 64; ++k) raster[kZigzag[k]] = block[k];
            // tmp = M^T * F
            for (int y = 0; y < 8; ++y) {
                for (int u = 0; u < 8; ++u) {
                    double acc = 0.0;
                    for (int v = 0; v < 8; ++v) acc += m[v * 8 + y] * raster[v * 8 + u];
                    tmp[y * 8 + u] = acc;
                }
            }
            // X = tmp * M
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    double acc = 0.0;
                    for (int u = 0; u < 8; ++u) acc += tmp[y * 8 + u] * m[u * 8 + x];
                    out.at(bx * 8 + x, by * 8 + y) = acc;
                }
            }
        }
    }
    return out;
}

std::vector<double> dct2_square(std::span<const double> samples, int size) {
    if (size <= 0 || samples.size() != static_cast<std::size_t>(size) * size) {
        throw DimensionError("dct2_square expects size*size samples");
    }
    const auto m = dct_matrix(size);
    const auto n = static_cast<std::size_t>(size);
    std::vector<double> tmp(n * n);
    std::vector<double> out(n * n);
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t u = 0; u < n; ++u) {
            double acc = 0.0;
            for (std::size_t x = 0; x < n; ++x) acc += samples[y * n + x] * m[u * n + x];
            tmp[y * n + u] = acc;
        }
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t u = 0; u < n; ++u) {
            double acc = 0.0;
            for (std::size_t y = 0; y < n; ++y) acc += m[v * n + y] * tmp[y * n + u];
            out[v * n + u] = acc;
        }
    return out;
}

LumaPlane box_downscale(const LumaPlane& src, int out_width, int out_height) {
    if (src.width < out_width || src.height < out_height) {
        throw DimensionError("box_downscale cannot upscale " + std::to_string(src.width) + "x" +
                             std::to_string(src.height));
    }
    LumaPlane out(out_width, out_height);
    for (int oy = 0; oy < out_height; ++oy) {
        const int y0 = static_cast<int>(static_cast<long long>(oy) * src.height / out_height);
        const int y1 = static_cast<int>(static_cast<long long>(oy + 1) * src.height / out_height);
        for (int ox = 0; ox < out_width; ++ox) {
            const int x0 = static_cast<int>(static_cast<long long>(ox) * src.width / out_width);
            const int x1 = static_cast<int>(static_cast<long long>(ox + 1) * src.width / out_width);
            double acc = 0.0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) acc += src.at(x, y);
            out.at(ox, oy) = acc / (static_cast<double>(y1 - y0) * (x1 - x0));
        }
    }
    return out;
}

ImageBuffer resize_bilinear(const ImageBuffer& src, int out_width, int out_height) {
    ImageBuffer out(out_width, out_height);
    const double sx = static_cast<double>(src.width()) / out_width;
    const double sy = static_cast<double>(src.height()) / out_height;
    for (int y = 0; y < out_height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height() - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, src.height() - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width() - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, src.width() - 1);
            const double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = src.at(x0, y0, c) * (1 - wx) + src.at(x1, y0, c) * wx;
                const double bottom = src.at(x0, y1, c) * (1 - wx) + src.at(x1, y1, c) * wx;
                out.at(x, y, c) = to_u8(top * (1 - wy) + bottom * wy);
            }
        }
    }
    return out;
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_size(a, b);
    const auto da = a.data();
    const auto db = b.data();
    double sse = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = static_cast<double>(da[i]) - db[i];
        sse += d * d;
    }
    if (sse == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = sse / static_cast<double>(da.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_size(a, b);
    constexpr int kWindow = 11;
    constexpr double kSigma = 1.5;
    if (a.width() < kWindow || a.height() < kWindow) {
        throw DimensionError("ssim needs at least 11x11 pixels");
    }
    std::vector<double> kernel(kWindow);
    double total = 0.0;
    for (int i = 0; i < kWindow; ++i) {
        const double d = i - kWindow / 2;
        kernel[i] = std::exp(-d * d / (2 * kSigma * kSigma));
        total += kernel[i];
    }
    for (auto& k : kernel) k /= total;

    const LumaPlane la = to_luma(a);
    const LumaPlane lb = to_luma(b);
    const int w = a.width();
    const int h = a.height();
    std::vector<double> aa(la.data.size()), bb(la.data.size()), ab(la.data.size());
    for (std::size_t i = 0; i < la.data.size(); ++i) {
        aa[i] = la.data[i] * la.data[i];
        bb[i] = lb.data[i] * lb.data[i];
        ab[i] = la.data[i] * lb.data[i];
    }
    const auto mu_a = filter_valid(la.data, w, h, kernel);
    const auto mu_b = filter_valid(lb.data, w, h, kernel);
    const auto e_aa = filter_valid(aa, w, h, kernel);
    const auto e_bb = filter_valid(bb, w, h, kernel);
    const auto e_ab = filter_valid(ab, w, h, kernel);

    constexpr double c1 = (0.01 * 255) * (0.01 * 255);
    constexpr double c2 = (0.03 * 255) * (0.03 * 255);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
        const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
        const double cov = e_ab[i] - mu_a[i] * mu_b[i];
        sum += ((2 * mu_a[i] * mu_b[i] + c1) * (2 * cov + c2)) /
               ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2));
    }
    return sum / static_cast<double>(mu_a.size());
}

}  // namespace lineage
