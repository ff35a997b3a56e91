#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lineage {

/// 8-bit RGB raster, row-major, channel-interleaved.
///
/// The constructor only checks that the sample count matches the geometry.
/// Block alignment (both sides multiples of 8, at least 8) is a separate
/// precondition, enforced by `load_image` and by every embedding routine via
/// `require_block_aligned`, so that resampling helpers can still produce
/// arbitrary sizes on the way to an aligned image.
class ImageBuffer {
public:
    ImageBuffer() = default;
    ImageBuffer(int width, int height);
    ImageBuffer(int width, int height, std::vector<std::uint8_t> data);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    static constexpr int channels() noexcept { return 3; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }

    std::span<const std::uint8_t> data() const noexcept { return data_; }
    std::span<std::uint8_t> data() noexcept { return data_; }

    std::uint8_t at(int x, int y, int c) const noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
    }
    std::uint8_t& at(int x, int y, int c) noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
    }

    bool operator==(const ImageBuffer&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> data_;
};

/// Real-valued luminance samples, nominal range [0, 255].
struct LumaPlane {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    LumaPlane() = default;
    LumaPlane(int w, int h, double fill = 0.0)
        : width{w}, height{h}, data(static_cast<std::size_t>(w) * h, fill) {}

    double at(int x, int y) const noexcept { return data[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) noexcept { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Orthonormal 8x8 DCT-II coefficients of a luminance plane. Blocks are stored
/// block-major (raster order of blocks), and within a block in JPEG zigzag
/// order, so `block(b)[k]` is zigzag coefficient k of block b.
struct CoeffGrid {
    int block_cols = 0;
    int block_rows = 0;
    std::vector<double> coeffs;

    std::size_t block_count() const noexcept {
        return static_cast<std::size_t>(block_cols) * block_rows;
    }
    std::span<double, 64> block(std::size_t b) noexcept {
        return std::span<double, 64>{coeffs.data() + b * 64, 64};
    }
    std::span<const double, 64> block(std::size_t b) const noexcept {
        return std::span<const double, 64>{coeffs.data() + b * 64, 64};
    }
};

enum class ImageFormat { png, jpeg };

/// Raster index (row * 8 + col) of each zigzag position.
extern const std::array<int, 64> kZigzag;

// Throws DimensionError naming the offending axis unless both sides are
// multiples of 8 and at least 8.
void require_block_aligned(const ImageBuffer& img);

/// Decodes a PNG or JPEG file to 8-bit RGB. Greyscale is expanded to three
/// channels and alpha is composited onto black. Rejects sizes that are not
/// multiples of 8.
ImageBuffer load_image(const std::filesystem::path& path);

/// Same as `load_image` without the block-alignment check.
ImageBuffer load_image_any_size(const std::filesystem::path& path);

void save_image(const ImageBuffer& img, const std::filesystem::path& path,
                ImageFormat format = ImageFormat::png, int quality = 95);

/// Picks the format from the file extension (.jpg/.jpeg -> jpeg, else png).
ImageFormat format_for_path(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_png(const ImageBuffer& img);
std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality);
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);

/// BT.601 luma, unrounded.
LumaPlane to_luma(const ImageBuffer& img);

/// Shifts each pixel's three channels by (new_Y - old_Y), then rounds half
/// away from zero and clips to [0, 255]. Chrominance differences are kept.
ImageBuffer apply_luma(const ImageBuffer& img, const LumaPlane& new_luma);

CoeffGrid block_dct(const LumaPlane& luma);
LumaPlane block_idct(const CoeffGrid& grid);

/// Orthonormal 2-D DCT-II of an arbitrary square plane (used by pHash).
std::vector<double> dct2_square(std::span<const double> samples, int size);

/// Mean of each source cell, cell edges at floor(i * src / dst).
LumaPlane box_downscale(const LumaPlane& src, int out_width, int out_height);

/// Bilinear resampling with edge clamping, rounding to nearest.
ImageBuffer resize_bilinear(const ImageBuffer& src, int out_width, int out_height);

/// Full-reference PSNR over all RGB samples; +infinity when identical.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// Mean SSIM on the luminance plane (11x11 Gaussian window, sigma 1.5,
/// K1 = 0.01, K2 = 0.03, L = 255), averaged over fully-covered positions.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

}  // namespace lineage
