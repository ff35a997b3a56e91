#include "lineage/channel.hpp"
#include "lineage/error.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace lineage;
using namespace lineage::testing;

namespace {

ImageBuffer constant_grey(int w, int h, std::uint8_t v) {
    ImageBuffer img(w, h);
    for (auto& s : img.data()) s = v;
    return img;
}

// PSNR restricted to pixels within `radius` of the image centre.
double disc_psnr(const ImageBuffer& a, const ImageBuffer& b, double radius) {
    const double cx = (a.width() - 1) / 2.0, cy = (a.height() - 1) / 2.0;
    double sse = 0.0;
    std::size_t count = 0;
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x) {
            if (std::hypot(x - cx, y - cy) > radius) continue;
            for (int c = 0; c < 3; ++c) {
                const double d = static_cast<double>(a.at(x, y, c)) - b.at(x, y, c);
                sse += d * d;
                ++count;
            }
        }
    return 10.0 * std::log10(255.0 * 255.0 / (sse / static_cast<double>(count)));
}

}  // namespace

TEST(Channel, ZeroSeverityIsByteIdenticalForEveryOp) {
    const auto img = load_cover(0);
    for (auto op : kAllOps) EXPECT_EQ(apply(img, {op, 0.0, 5}), img) << to_string(op);
}

TEST(Channel, DimensionsPreservedForEveryOp) {
    const auto img = load_cover(1);
    for (auto op : kAllOps) {
        for (double s : {0.3, 1.0}) {
            const auto out = apply(img, {op, s, 5});
            EXPECT_EQ(out.width(), img.width()) << to_string(op);
            EXPECT_EQ(out.height(), img.height()) << to_string(op);
        }
        if (is_signed(op)) EXPECT_EQ(apply(img, {op, -0.7, 5}).width(), img.width()) << to_string(op);
    }
}

TEST(Channel, LightAdjustmentArithmetic) {
    const auto grey = constant_grey(16, 16, 128);
    EXPECT_EQ(apply(grey, {OpId::brightness, 1.0, 0}), constant_grey(16, 16, 192));
    EXPECT_EQ(apply(grey, {OpId::brightness, -1.0, 0}), constant_grey(16, 16, 64));
    EXPECT_EQ(apply(constant_grey(16, 16, 138), {OpId::contrast, 0.5, 0}), constant_grey(16, 16, 142));
    EXPECT_EQ(apply(constant_grey(16, 16, 100), {OpId::exposure, 1.0, 0}), constant_grey(16, 16, 200));
    EXPECT_EQ(apply(constant_grey(16, 16, 100), {OpId::exposure, -1.0, 0}), constant_grey(16, 16, 50));
    EXPECT_EQ(apply(constant_grey(16, 16, 200), {OpId::brightness, 1.0, 0}), constant_grey(16, 16, 255));
}

TEST(Channel, ColourAdjustmentArithmetic) {
    ImageBuffer img(8, 8);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            img.at(x, y, 0) = 100;
            img.at(x, y, 1) = 150;
            img.at(x, y, 2) = 200;
        }
    const auto warm = apply(img, {OpId::warmth, 0.5, 0});
    // Gains give (115, 150, 170); the luma is then restored from 141.815 to 140.75.
    EXPECT_EQ(warm.at(3, 3, 0), 114);
    EXPECT_EQ(warm.at(3, 3, 1), 149);
    EXPECT_EQ(warm.at(3, 3, 2), 169);
    const auto tint = apply(img, {OpId::tint, 1.0, 0});
    // (85, 195, 170) shifted down by 18.51.
    EXPECT_EQ(tint.at(0, 0, 0), 66);
    EXPECT_EQ(tint.at(0, 0, 1), 176);
    EXPECT_EQ(tint.at(0, 0, 2), 151);
    // Full desaturation collapses every channel onto the luma.
    const auto flat = apply(img, {OpId::saturation, -1.0, 0});
    const auto y = static_cast<std::uint8_t>(std::lround(0.299 * 100 + 0.587 * 150 + 0.114 * 200));
    for (int c = 0; c < 3; ++c) EXPECT_EQ(flat.at(5, 5, c), y);
}

TEST(Channel, ColourOpsPreserveGreyscaleLuma) {
    ImageBuffer grey(32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x)
            for (int c = 0; c < 3; ++c) grey.at(x, y, c) = static_cast<std::uint8_t>(8 * x + y);
    const auto base = to_luma(grey);
    for (double s : {-1.0, -0.4, 0.3, 1.0}) {
        EXPECT_EQ(apply(grey, {OpId::saturation, s, 0}), grey);
        for (auto op : {OpId::warmth, OpId::tint}) {
            const auto luma = to_luma(apply(grey, {op, s, 0}));
            for (std::size_t i = 0; i < luma.data.size(); ++i)
                ASSERT_LE(std::abs(luma.data[i] - base.data[i]), 1.0) << to_string(op) << " s=" << s;
        }
    }
}

TEST(Channel, BlurAndSharpenKeepConstantsConstant) {
    const auto grey = constant_grey(32, 32, 90);
    EXPECT_EQ(apply(grey, {OpId::blur, 0.7, 0}), grey);
    EXPECT_EQ(apply(grey, {OpId::sharpen, 0.7, 0}), grey);
    EXPECT_EQ(apply(grey, {OpId::sharpen, -0.7, 0}), grey);
}

TEST(Channel, BlurSmoothsNoise) {
    const auto noise = noise_image(3, 64, 64);
    auto variance = [](const ImageBuffer& img) {
        double sum = 0, sq = 0;
        for (auto v : img.data()) {
            sum += v;
            sq += static_cast<double>(v) * v;
        }
        const double n = static_cast<double>(img.data().size());
        return sq / n - (sum / n) * (sum / n);
    };
    EXPECT_LT(variance(apply(noise, {OpId::blur, 0.5, 0})), variance(noise) / 4);
}

TEST(Channel, GrainIsSeeded) {
    const auto img = load_cover(2);
    EXPECT_EQ(apply(img, {OpId::grain, 0.5, 11}), apply(img, {OpId::grain, 0.5, 11}));
    EXPECT_NE(apply(img, {OpId::grain, 0.5, 11}), apply(img, {OpId::grain, 0.5, 12}));
}

TEST(Channel, JpegFidelityFallsWithSeverity) {
    for (const auto& img : load_covers(50)) {
        double previous = std::numeric_limits<double>::infinity();
        for (double s : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
            const double p = psnr(img, apply(img, {OpId::jpeg, s, 0}));
            EXPECT_LE(p, previous) << "s=" << s;
            previous = p;
        }
    }
}

TEST(Channel, RotationRoundTripKeepsTheInscribedDisc) {
    // Corners leave the frame at 45 degrees and come back black, so the
    // comparison is made on the disc that stays in view throughout.
    for (const auto& img : load_covers(50)) {
        const auto back = apply(apply(img, {OpId::rotate, 1.0, 0}), {OpId::rotate, -1.0, 0});
        EXPECT_GE(disc_psnr(img, back, 0.45 * img.width()), 20.0);
    }
}

TEST(Channel, GeometricOpsFillBlack) {
    const auto white = constant_grey(64, 64, 255);
    for (auto op : {OpId::rotate, OpId::persp_h, OpId::persp_v}) {
        const auto out = apply(white, {op, 1.0, 0});
        // Some corner leaves the frame and is filled with black.
        const bool any_black = out.at(0, 0, 0) == 0 || out.at(63, 0, 0) == 0 || out.at(0, 63, 0) == 0 ||
                               out.at(63, 63, 0) == 0;
        EXPECT_TRUE(any_black) << to_string(op);
        EXPECT_EQ(out.at(32, 32, 0), 255) << to_string(op);
    }
}

TEST(Channel, CropMagnifiesCentre) {
    ImageBuffer img(64, 64);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = (x >= 16 && x < 48 && y >= 16 && y < 48) ? 200 : 0;
    const auto out = apply(img, {OpId::crop, 1.0, 0});
    EXPECT_EQ(out.at(2, 2, 0), 200);
    EXPECT_EQ(out.at(61, 61, 0), 200);
}

TEST(Channel, SeverityRangeAndNames) {
    const auto img = load_cover(0);
    EXPECT_THROW(apply(img, {OpId::blur, -0.5, 0}), InvalidArgument);
    EXPECT_THROW(apply(img, {OpId::brightness, 1.5, 0}), InvalidArgument);
    EXPECT_THROW(apply(img, {OpId::jpeg, std::nan(""), 0}), InvalidArgument);
    for (auto op : kAllOps) EXPECT_EQ(op_from_string(to_string(op)), op);
    EXPECT_THROW(op_from_string("inpaint"), InvalidArgument);
    EXPECT_EQ(kAllOps.size(), 14u);
}
