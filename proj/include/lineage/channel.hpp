#pragma once

#include "lineage/imaging.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace lineage {

/// The fourteen post-generation processing operations, grouped as light,
/// colour, details and geometry.
enum class OpId {
    brightness,
    contrast,
    exposure,
    saturation,
    warmth,
    tint,
    blur,
    sharpen,
    grain,
    jpeg,
    crop,
    rotate,
    persp_h,
    persp_v,
};

inline constexpr std::array<OpId, 14> kAllOps = {
    OpId::brightness, OpId::contrast, OpId::exposure, OpId::saturation, OpId::warmth,
    OpId::tint,       OpId::blur,     OpId::sharpen,  OpId::grain,      OpId::jpeg,
    OpId::crop,       OpId::rotate,   OpId::persp_h,  OpId::persp_v,
};

std::string to_string(OpId op);
OpId op_from_string(const std::string& name);

/// Signed ops accept severity in [-1, 1]; the rest accept [0, 1].
bool is_signed(OpId op);
bool is_geometric(OpId op);

struct ChannelOp {
    OpId id = OpId::brightness;
    double severity = 0.0;
    std::uint64_t seed = 0;  // grain only

    void validate() const;
};

/// Applies one operation. Severity 0 returns the input unchanged for every
/// operation; dimensions are always preserved.
///
/// Mappings (s = severity, v = channel value, Y = BT.601 luma):
///   brightness  v + 64 s
///   contrast    (v - 128)(1 + 0.8 s) + 128
///   exposure    v * 2^s
///   saturation  Y + (v - Y)(1 + s)
///   warmth      R(1 + 0.3 s), B(1 - 0.3 s)
///   tint        G(1 + 0.3 s), R and B (1 - 0.15 s)
///   blur        Gaussian, sigma = 3 s
///   sharpen     v + 2 s (v - gauss_1(v))
///   grain       v + N(0, (25 s)^2), Box-Muller over SplitMix64(seed)
///   jpeg        encode/decode at quality round(95 - 85 s)
///   crop        central crop keeping (1 - 0.5 s) per axis, resized back
///   rotate      45 s degrees about the centre, black fill
///   persp_h/v   projective tilt: the right (top) edge's corners pulled
///               toward its midpoint by 0.25 s of the edge length
ImageBuffer apply(const ImageBuffer& img, const ChannelOp& op);

}  // namespace lineage
