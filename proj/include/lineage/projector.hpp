#pragma once

#include "lineage/imaging.hpp"
#include "lineage/trait.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace lineage {

/// Real-valued descriptor produced by some external feature extractor.
struct FeatureVector {
    std::vector<double> values;
};

enum class ProjectorKind { sha256, phash, randproj };

std::string to_string(ProjectorKind kind);
ProjectorKind projector_kind_from_string(const std::string& name);

struct ProjectorSpec {
    ProjectorKind kind = ProjectorKind::sha256;
    std::size_t bits = 64;
    std::uint64_t seed = 0;  // randproj only

    /// Throws InvalidArgument when the combination is not allowed
    /// (phash with bits != 64, sha256 with bits > 256, bits == 0).
    void validate() const;
};

/// First n bits (MSB-first) of SHA-256 over width and height as 32-bit
/// big-endian integers followed by the raw RGB bytes.
Trait project_sha256(const ImageBuffer& img, std::size_t n = 64);

/// 64-bit DCT perceptual hash: luma -> 32x32 box downscale -> 32x32 DCT-II ->
/// top-left 8x8 block including DC -> bit set iff coefficient > median.
Trait project_phash(const ImageBuffer& img);

/// The 64 reference coefficients `project_phash` thresholds, raster order.
std::vector<double> phash_coefficients(const ImageBuffer& img);

/// Sign of a seeded Rademacher projection of `f` onto n dimensions. When the
/// dimension already equals n the signs are taken directly. sign(0) -> 1.
Trait project_features(const FeatureVector& f, std::uint64_t seed, std::size_t n);

/// Reads a feature-vector file: either the binary "FVEC" layout (32-byte
/// header: magic, u32 LE dimension, zero padding; then f64 LE values) or
/// plain text with one real per line.
FeatureVector load_features(const std::filesystem::path& path);
void save_features_binary(const FeatureVector& f, const std::filesystem::path& path);
void save_features_text(const FeatureVector& f, const std::filesystem::path& path);

/// Built-in descriptor used when no external features are supplied: the
/// 16x16 box-downscaled luma with its mean removed (d = 256).
FeatureVector thumbnail_features(const ImageBuffer& img);

/// Supplies the feature vector for an image. `source` is the file the image
/// was read from, or empty for in-memory content.
using FeatureProvider =
    std::function<FeatureVector(const ImageBuffer& img, const std::filesystem::path& source)>;

/// Looks for `<dir>/<stem>.fvec` then `<dir>/<stem>.txt`; falls back to
/// `thumbnail_features` when neither exists (or when `dir` is empty).
FeatureProvider sidecar_feature_provider(std::filesystem::path dir);

/// A configured projector: spec plus, for randproj, the feature source.
class Projector {
public:
    explicit Projector(ProjectorSpec spec, FeatureProvider features = {});

    const ProjectorSpec& spec() const noexcept { return spec_; }
    std::size_t bits() const noexcept { return spec_.bits; }

    Trait project(const ImageBuffer& img, const std::filesystem::path& source = {}) const;

private:
    ProjectorSpec spec_;
    FeatureProvider features_;
};

}  // namespace lineage
