#include "lineage/projector.hpp"

#include "lineage/error.hpp"
#include "lineage/prng.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace lineage {

namespace {

constexpr std::array<char, 4> kFvecMagic = {'F', 'V', 'E', 'C'};
constexpr std::size_t kFvecHeader = 32;

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    std::array<std::uint8_t, 32> digest{};
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw Error("EVP_MD_CTX_new failed");
    unsigned int len = 0;
    const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                    EVP_DigestUpdate(ctx, a.data(), a.size()) == 1 &&
                    EVP_DigestUpdate(ctx, b.data(), b.size()) == 1 &&
                    EVP_DigestFinal_ex(ctx, digest.data(), &len) == 1;
    EVP_MD_CTX_free(ctx);
    if (!ok || len != digest.size()) throw Error("SHA-256 computation failed");
    return digest;
}

std::uint64_t read_le(const std::uint8_t* p, int bytes) {
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

void check_finite(const FeatureVector& f) {
    if (f.values.empty()) throw InvalidArgument("feature vector is empty");
    for (double v : f.values) {
        if (!std::isfinite(v)) throw InvalidArgument("feature vector has a non-finite entry");
    }
}

}  // namespace

std::string to_string(ProjectorKind kind) {
    switch (kind) {
        case ProjectorKind::sha256: return "sha256";
        case ProjectorKind::phash: return "phash";
        case ProjectorKind::randproj: return "randproj";
    }
    return "?";
}

ProjectorKind projector_kind_from_string(const std::string& name) {
    if (name == "sha256") return ProjectorKind::sha256;
    if (name == "phash") return ProjectorKind::phash;
    if (name == "randproj") return ProjectorKind::randproj;
    throw InvalidArgument("unknown projector '" + name + "' (expected sha256, phash or randproj)");
}

void ProjectorSpec::validate() const {
    if (bits == 0) throw InvalidArgument("trait length must be positive");
    if (kind == ProjectorKind::phash && bits != 64) throw InvalidArgument("phash produces exactly 64 bits");
    if (kind == ProjectorKind::sha256 && bits > 256) throw InvalidArgument("sha256 yields at most 256 bits");
}

Trait project_sha256(const ImageBuffer& img, std::size_t n) {
    if (n == 0 || n > 256) throw InvalidArgument("sha256 trait length must be in [1, 256]");
    std::vector<std::uint8_t> header;
    append_be32(header, static_cast<std::uint32_t>(img.width()));
    append_be32(header, static_cast<std::uint32_t>(img.height()));
    const auto digest = sha256(header, img.data());
    return Trait::from_bytes_msb(digest.data(), digest.size(), n);
}

std::vector<double> phash_coefficients(const ImageBuffer& img) {
    if (img.width() < 32 || img.height() < 32) throw DimensionError("phash needs at least 32x32 pixels");
    const LumaPlane small = box_downscale(to_luma(img), 32, 32);
    const auto spectrum = dct2_square(small.data, 32);
    std::vector<double> out;
    out.reserve(64);
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) out.push_back(spectrum[static_cast<std::size_t>(v) * 32 + u]);
    return out;
}

Trait project_phash(const ImageBuffer& img) {
    const auto coeffs = phash_coefficients(img);
    auto sorted = coeffs;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[31] + sorted[32]);
    Trait out(64);
    for (std::size_t i = 0; i < 64; ++i) out.set(i, coeffs[i] > median);
    return out;
}

Trait project_features(const FeatureVector& f, std::uint64_t seed, std::size_t n) {
    check_finite(f);
    if (n == 0) throw InvalidArgument("trait length must be positive");
    const std::size_t d = f.values.size();
    Trait out(n);
    if (d == n) {
        for (std::size_t i = 0; i < n; ++i) out.set(i, f.values[i] >= 0.0);
        return out;
    }
    SplitMix64 rng(seed);
    RademacherStream signs(rng);
    for (std::size_t i = 0; i < n; ++i) {
        double y = 0.0;
        for (std::size_t j = 0; j < d; ++j) y += signs.next() * f.values[j];
        out.set(i, y >= 0.0);
    }
    return out;
}

FeatureVector load_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open feature file " + path.string());
    std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};

    FeatureVector f;
    if (bytes.size() >= 4 && std::equal(kFvecMagic.begin(), kFvecMagic.end(), bytes.begin())) {
        if (bytes.size() < kFvecHeader) throw FormatError(path.string() + ": truncated FVEC header");
        const auto dim = static_cast<std::size_t>(read_le(bytes.data() + 4, 4));
        if (bytes.size() != kFvecHeader + dim * 8) {
            throw FormatError(path.string() + ": FVEC payload size does not match dimension " +
                              std::to_string(dim));
        }
        f.values.resize(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            f.values[i] = std::bit_cast<double>(read_le(bytes.data() + kFvecHeader + i * 8, 8));
        }
    } else {
        std::istringstream text(std::string(bytes.begin(), bytes.end()));
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(text, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                std::size_t used = 0;
                f.values.push_back(std::stod(line, &used));
                if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw FormatError(path.string() + ":" + std::to_string(line_no) + ": not a real number");
            }
        }
    }
    check_finite(f);
    return f;
}

void save_features_binary(const FeatureVector& f, const std::filesystem::path& path) {
    std::vector<std::uint8_t> bytes(kFvecHeader + f.values.size() * 8, 0);
    std::copy(kFvecMagic.begin(), kFvecMagic.end(), bytes.begin());
    const auto dim = static_cast<std::uint32_t>(f.values.size());
    for (int i = 0; i < 4; ++i) bytes[4 + i] = static_cast<std::uint8_t>(dim >> (8 * i));
    for (std::size_t j = 0; j < f.values.size(); ++j) {
        const auto v = std::bit_cast<std::uint64_t>(f.values[j]);
        for (int i = 0; i < 8; ++i) bytes[kFvecHeader + j * 8 + i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void save_features_text(const FeatureVector& f, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.precision(17);
    for (double v : f.values) out << v << '\n';
}

FeatureVector thumbnail_features(const ImageBuffer& img) {
    const LumaPlane small = box_downscale(to_luma(img), 16, 16);
    double mean = 0.0;
    for (double v : small.data) mean += v;
    mean /= static_cast<double>(small.data.size());
    FeatureVector f;
    f.values.reserve(small.data.size());
    for (double v : small.data) f.values.push_back(v - mean);
    return f;
}

FeatureProvider sidecar_feature_provider(std::filesystem::path dir) {
    return [dir = std::move(dir)](const ImageBuffer& img, const std::filesystem::path& source) {
        if (!dir.empty() && !source.empty()) {
            const auto stem = source.stem().string();
            for (const char* ext : {".fvec", ".txt"}) {
                const auto candidate = dir / (stem + ext);
                if (std::filesystem::exists(candidate)) return load_features(candidate);
            }
        }
        return thumbnail_features(img);
    };
}

Projector::Projector(ProjectorSpec spec, FeatureProvider features)
    : spec_{spec}, features_{std::move(features)} {
    spec_.validate();
    if (spec_.kind == ProjectorKind::randproj && !features_) features_ = sidecar_feature_provider({});
}

Trait Projector::project(const ImageBuffer& img, const std::filesystem::path& source) const {
    switch (spec_.kind) {
        case ProjectorKind::sha256: return project_sha256(img, spec_.bits);
        case ProjectorKind::phash: return project_phash(img);
        case ProjectorKind::randproj: return project_features(features_(img, source), spec_.seed, spec_.bits);
    }
    throw InvalidArgument("unknown projector kind");
}

}  // namespace lineage
