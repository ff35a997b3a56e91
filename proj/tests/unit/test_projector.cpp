#include "lineage/error.hpp"
#include "lineage/prng.hpp"
#include "lineage/projector.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

using namespace lineage;
using namespace lineage::testing;

namespace {

// pHash written out longhand: 8x8 cell means of a 256x256 luma plane, direct
// 32x32 DCT-II of the low 8x8 frequencies, median split.
Trait reference_phash_256(const ImageBuffer& img) {
    double cells[32][32] = {};
    for (int y = 0; y < 256; ++y)
        for (int x = 0; x < 256; ++x) {
            const double luma = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
            cells[y / 8][x / 8] += luma / 64.0;
        }
    std::vector<double> low;
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) {
            double sum = 0.0;
            for (int y = 0; y < 32; ++y)
                for (int x = 0; x < 32; ++x)
                    sum += cells[y][x] * std::cos((2 * x + 1) * u * std::numbers::pi / 64) *
                           std::cos((2 * y + 1) * v * std::numbers::pi / 64);
            const double cu = u == 0 ? std::sqrt(1.0 / 32) : std::sqrt(2.0 / 32);
            const double cv = v == 0 ? std::sqrt(1.0 / 32) : std::sqrt(2.0 / 32);
            low.push_back(cu * cv * sum);
        }
    auto sorted = low;
    std::sort(sorted.begin(), sorted.end());
    const double median = (sorted[31] + sorted[32]) / 2;
    Trait t(64);
    for (int i = 0; i < 64; ++i) t.set(static_cast<std::size_t>(i), low[static_cast<std::size_t>(i)] > median);
    return t;
}

bool coefficients_well_separated(const ImageBuffer& img) {
    auto c = phash_coefficients(img);
    std::sort(c.begin(), c.end());
    for (std::size_t i = 1; i < c.size(); ++i)
        if (c[i] - c[i - 1] <= 1e-6 * std::max(1.0, std::abs(c[i]))) return false;
    return true;
}

ImageBuffer scaled(const ImageBuffer& img, double factor) {
    ImageBuffer out = img;
    for (auto& v : out.data()) v = static_cast<std::uint8_t>(std::clamp(std::lround(v * factor), 0L, 255L));
    return out;
}

Trait bits_of(std::initializer_list<int> bits) {
    Trait t(bits.size());
    std::size_t i = 0;
    for (int b : bits) t.set(i++, b != 0);
    return t;
}

}  // namespace

TEST(Sha256Projector, KnownAnswersOverCanonicalStream) {
    const ImageBuffer black(8, 8);
    EXPECT_EQ(project_sha256(black, 256).to_hex(), "6e02cabb5ed5fe7d32a554d67bed4e7d48ccc729d6c8d1d753b8c26084320a0a");
    EXPECT_EQ(project_sha256(black, 64).to_hex(), "6e02cabb5ed5fe7d");

    ImageBuffer ramp(16, 8);
    for (std::size_t i = 0; i < ramp.data().size(); ++i) ramp.data()[i] = static_cast<std::uint8_t>((i % 128) * 2);
    EXPECT_EQ(project_sha256(ramp, 256).to_hex(), "e5f1aca17bec4968641c76075a70cfcc59ed72a3cd3fbbe0730cbf61b9040eca");
}

TEST(Sha256Projector, DimensionsAreHashed) {
    EXPECT_NE(project_sha256(ImageBuffer(16, 8)), project_sha256(ImageBuffer(8, 16)));
}

TEST(Sha256Projector, DeterministicAndAvalanching) {
    for (std::size_t i = 0; i < 10; ++i) {
        const auto img = load_cover(i);
        EXPECT_EQ(project_sha256(img), project_sha256(img));
        auto changed = img;
        changed.data()[1000 + i] ^= 1;
        const double a = agreement(project_sha256(img), project_sha256(changed));
        EXPECT_GE(a, 0.25);
        EXPECT_LE(a, 0.75);
    }
    EXPECT_THROW(project_sha256(ImageBuffer(8, 8), 257), InvalidArgument);
}

TEST(Sha256Projector, IdealAgreementOnIndependentNoise) {
    std::vector<Trait> traits;
    for (std::uint64_t s = 0; s < 50; ++s) traits.push_back(project_sha256(noise_image(1000 + s, 64, 64)));
    double total = 0.0;
    int pairs = 0;
    for (std::size_t i = 0; i < traits.size(); ++i)
        for (std::size_t j = i + 1; j < traits.size(); ++j, ++pairs) total += agreement(traits[i], traits[j]);
    ASSERT_GE(pairs, 1000);
    EXPECT_NEAR(total / pairs, 0.5, 0.02);
}

TEST(PHash, MatchesLonghandReference) {
    for (std::size_t i = 0; i < 5; ++i) {
        const auto img = load_cover(i);
        EXPECT_EQ(project_phash(img), reference_phash_256(img)) << "cover " << i;
    }
}

TEST(PHash, IdenticalImagesAgreeFully) {
    const auto img = load_cover(4);
    EXPECT_EQ(agreement(project_phash(img), project_phash(img)), 1.0);
}

TEST(PHash, MedianSplitSetsHalfTheBits) {
    for (std::size_t i = 0; i < 10; ++i) {
        const auto img = load_cover(i);
        if (!coefficients_well_separated(img)) continue;
        EXPECT_EQ(project_phash(img).popcount(), 32u) << "cover " << i;
    }
}

TEST(PHash, RobustToTenPercentBrightening) {
    for (std::size_t i = 0; i < 10; ++i) {
        const auto img = load_cover(i);
        EXPECT_GE(agreement(project_phash(img), project_phash(scaled(img, 1.1))), 0.9) << "cover " << i;
    }
}

TEST(PHash, InvariantToExactLuminanceScaling) {
    // Samples on a lattice that the factor maps exactly onto integers, so no
    // rounding or clipping disturbs the comparison.
    SplitMix64 rng(77);
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const bool up = trial % 2 == 0;
        ImageBuffer img(64, 64);
        for (auto& v : img.data()) v = static_cast<std::uint8_t>(up ? 4 * rng.next_below(52) : 5 * rng.next_below(52));
        if (!coefficients_well_separated(img)) continue;
        ++checked;
        EXPECT_EQ(project_phash(img), project_phash(scaled(img, up ? 1.25 : 0.8))) << "trial " << trial;
    }
    EXPECT_GE(checked, 10);
}

TEST(PHash, RejectsSmallImages) { EXPECT_THROW(project_phash(ImageBuffer(24, 24)), DimensionError); }

TEST(RandProj, SignRuleWhenDimensionsMatch) {
    EXPECT_EQ(project_features({{2.5, -1.0, 0.0, 7.1}}, 123, 4), bits_of({1, 0, 1, 1}));
}

TEST(RandProj, GoldenValuesForSeed42) {
    // Computed by a standalone script: the first SplitMix64(42) output is
    // 0xbdd732262feb6e95, whose low eight bits give the 2x4 matrix
    // [+ - + -; + - - +].
    EXPECT_EQ(project_features({{2.5, -1.0, 0.0, 7.1}}, 42, 2), bits_of({0, 1}));
    EXPECT_EQ(project_features({{1.0, 2.0, 3.0, 4.0}}, 42, 2), bits_of({0, 1}));  // y = (-2, 0)
    EXPECT_EQ(project_features({{-3.0, 1.0, 1.0, 0.5}}, 42, 2), bits_of({0, 0}));
}

TEST(RandProj, MatchesIndependentMatrixProduct) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> normal;
    FeatureVector f;
    for (int i = 0; i < 37; ++i) f.values.push_back(normal(gen));
    const std::uint64_t seed = 0xfeedULL;
    // Matrix entries taken bit by bit from the raw generator outputs.
    SplitMix64 raw(seed);
    std::uint64_t word = 0;
    int used = 64;
    Trait expected(48);
    for (std::size_t i = 0; i < 48; ++i) {
        double y = 0.0;
        for (double v : f.values) {
            if (used == 64) {
                word = raw.next();
                used = 0;
            }
            y += ((word >> used++) & 1) ? v : -v;
        }
        expected.set(i, y >= 0.0);
    }
    EXPECT_EQ(project_features(f, seed, 48), expected);
    EXPECT_EQ(project_features(f, seed, 48), project_features(f, seed, 48));
}

TEST(RandProj, RejectsNonFiniteAndEmptyInput) {
    EXPECT_THROW(project_features({{1.0, std::numeric_limits<double>::quiet_NaN()}}, 1, 8), InvalidArgument);
    EXPECT_THROW(project_features({{std::numeric_limits<double>::infinity()}}, 1, 8), InvalidArgument);
    EXPECT_THROW(project_features({}, 1, 8), InvalidArgument);
}

TEST(RandProj, IdealAgreementOnIndependentGaussianFeatures) {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> normal;
    std::vector<Trait> traits;
    for (int i = 0; i < 2000; ++i) {
        FeatureVector f;
        for (int j = 0; j < 128; ++j) f.values.push_back(normal(gen));
        traits.push_back(project_features(f, 99, 64));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < traits.size(); i += 2) total += agreement(traits[i], traits[i + 1]);
    EXPECT_NEAR(total / 1000.0, 0.5, 0.03);
}

TEST(FeatureFiles, BinaryAndTextRoundTrip) {
    TempDir dir("fvec");
    const FeatureVector f{{1.5, -2.25, 1e-300, 12345.678901234567}};
    save_features_binary(f, dir / "a.fvec");
    save_features_text(f, dir / "a.txt");
    EXPECT_EQ(load_features(dir / "a.fvec").values, f.values);
    EXPECT_EQ(load_features(dir / "a.txt").values, f.values);
    EXPECT_EQ(slurp(dir / "a.fvec").size(), 32u + 4 * 8);
    EXPECT_EQ(slurp(dir / "a.fvec").substr(0, 4), "FVEC");
}

TEST(FeatureFiles, RejectsMalformedInput) {
    TempDir dir("fvec");
    {
        std::ofstream(dir / "bad.txt") << "1.0\nhello\n";
        std::ofstream(dir / "trunc.fvec", std::ios::binary) << "FVEC\x05";
    }
    EXPECT_THROW(load_features(dir / "bad.txt"), FormatError);
    EXPECT_THROW(load_features(dir / "trunc.fvec"), FormatError);
    EXPECT_THROW(load_features(dir / "missing.fvec"), IoError);
}

TEST(Projector, SidecarFeaturesTakePrecedence) {
    TempDir dir("sidecar");
    const auto img = load_cover(0);
    const FeatureVector f{{1.0, -1.0, 2.0, -2.0, 0.5}};
    save_features_binary(f, dir / "cover_00.fvec");
    const Projector proj({ProjectorKind::randproj, 64, 7}, sidecar_feature_provider(dir.path()));
    EXPECT_EQ(proj.project(img, covers_dir() / "cover_00.png"), project_features(f, 7, 64));
    // No sidecar for this name, or no source at all: built-in descriptor.
    EXPECT_EQ(proj.project(img, covers_dir() / "other.png"), project_features(thumbnail_features(img), 7, 64));
    EXPECT_EQ(proj.project(img), project_features(thumbnail_features(img), 7, 64));
}

TEST(Projector, SpecValidation) {
    EXPECT_THROW((ProjectorSpec{ProjectorKind::phash, 32, 0}.validate()), InvalidArgument);
    EXPECT_THROW((ProjectorSpec{ProjectorKind::sha256, 512, 0}.validate()), InvalidArgument);
    EXPECT_THROW((ProjectorSpec{ProjectorKind::randproj, 0, 0}.validate()), InvalidArgument);
    EXPECT_NO_THROW((ProjectorSpec{ProjectorKind::randproj, 128, 0}.validate()));
    EXPECT_EQ(projector_kind_from_string("phash"), ProjectorKind::phash);
    EXPECT_THROW(projector_kind_from_string("resnet"), InvalidArgument);
}

TEST(Projector, AllKindsAreDeterministic) {
    const auto img = load_cover(6);
    for (auto kind : {ProjectorKind::sha256, ProjectorKind::phash, ProjectorKind::randproj}) {
        const Projector proj({kind, 64, 5});
        EXPECT_EQ(proj.project(img).to_hex(), proj.project(img).to_hex());
    }
}
