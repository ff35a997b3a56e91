#include "lineage/stego.hpp"

#include "lineage/error.hpp"
#include "lineage/prng.hpp"

#include <cmath>
#include <numeric>

namespace lineage {

namespace {

void require_key_matches(const ImageBuffer& img, const StegoKey& key) {
    require_block_aligned(img);
    if (img.width() != key.width || img.height() != key.height) {
        throw DimensionError("key was derived for " + std::to_string(key.width) + "x" +
                             std::to_string(key.height) + " but image is " +
                             std::to_string(img.width()) + "x" + std::to_string(img.height()));
    }
}

void require_trait_matches(const Trait& trait, const StegoKey& key) {
    if (trait.size() != key.bits) {
        throw InvalidArgument("trait has " + std::to_string(trait.size()) + " bits but key carries " +
                              std::to_string(key.bits));
    }
}

// Pool index -> offset into CoeffGrid::coeffs.
std::size_t coeff_offset(std::uint32_t pool_index, const Midband& band) {
    const auto per_block = static_cast<std::uint32_t>(band.size());
    return static_cast<std::size_t>(pool_index / per_block) * 64 + band.first + pool_index % per_block;
}

template <typename Update>
ImageBuffer embed_with(const ImageBuffer& img, const StegoKey& key, Update&& update) {
    const LumaPlane luma = to_luma(img);
    CoeffGrid grid = block_dct(luma);
    const auto current = carrier_projections(grid, key);
    std::vector<double> targets(current.size());
    for (std::size_t i = 0; i < current.size(); ++i) targets[i] = update(i, current[i]);
    set_projections(grid, key, targets);
    return apply_luma(img, block_idct(grid));
}

std::vector<double> projections_of(const ImageBuffer& img, const StegoKey& key) {
    require_key_matches(img, key);
    return carrier_projections(block_dct(to_luma(img)), key);
}

}  // namespace

StegoKey derive_material(std::uint64_t seed, int width, int height, std::size_t bits, Midband midband) {
    if (midband.first < 1 || midband.last > 63 || midband.first > midband.last) {
        throw InvalidArgument("mid-band must be an AC zigzag range within [1, 63]");
    }
    if (bits == 0) throw InvalidArgument("trait length must be positive");
    if (width < 8 || height < 8 || width % 8 || height % 8) {
        throw DimensionError("key geometry " + std::to_string(width) + "x" + std::to_string(height) +
                             " is not block aligned");
    }
    const std::size_t pool = static_cast<std::size_t>(width / 8) * (height / 8) * midband.size();
    if (pool < bits) {
        throw CapacityError("coefficient pool of " + std::to_string(pool) + " cannot carry " +
                            std::to_string(bits) + " bits");
    }

    StegoKey key;
    key.seed = seed;
    key.width = width;
    key.height = height;
    key.bits = bits;
    key.midband = midband;
    key.group_size = pool / bits;

    SplitMix64 rng(seed);
    std::vector<std::uint32_t> perm(pool);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = pool - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.next_below(i + 1));
        std::swap(perm[i], perm[j]);
    }
    perm.resize(bits * key.group_size);
    key.groups = std::move(perm);

    key.carriers.resize(key.groups.size());
    RademacherStream signs(rng);
    for (auto& c : key.carriers) c = static_cast<std::int8_t>(signs.next());

    key.dither_fraction.resize(bits);
    for (auto& d : key.dither_fraction) d = static_cast<double>(rng.next()) * 0x1.0p-64;
    return key;
}

double qim_quantise(double x, double delta, double dither, bool bit) {
    const double offset = dither + (bit ? delta / 2 : 0.0);
    return offset + delta * std::round((x - offset) / delta);
}

bool qim_decide(double x, double delta, double dither) {
    const double d0 = std::abs(x - qim_quantise(x, delta, dither, false));
    const double d1 = std::abs(x - qim_quantise(x, delta, dither, true));
    return d1 < d0;
}

double iss_displace(double x, double alpha, double lambda, bool bit) {
    const double sign = bit ? 1.0 : -1.0;
    return x + (alpha * sign - lambda * x);
}

bool iss_decide(double x) { return x >= 0.0; }

std::vector<double> carrier_projections(const CoeffGrid& grid, const StegoKey& key) {
    if (static_cast<int>(grid.block_cols) * 8 != key.width || static_cast<int>(grid.block_rows) * 8 != key.height) {
        throw DimensionError("coefficient grid does not match key geometry");
    }
    std::vector<double> out(key.bits);
    for (std::size_t i = 0; i < key.bits; ++i) {
        const auto group = key.group(i);
        const auto carrier = key.carrier(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < key.group_size; ++j) {
            acc += carrier[j] * grid.coeffs[coeff_offset(group[j], key.midband)];
        }
        out[i] = acc / static_cast<double>(key.group_size);
    }
    return out;
}

void set_projections(CoeffGrid& grid, const StegoKey& key, std::span<const double> targets) {
    if (targets.size() != key.bits) throw InvalidArgument("one target per carried bit required");
    const auto current = carrier_projections(grid, key);
    for (std::size_t i = 0; i < key.bits; ++i) {
        const double step = targets[i] - current[i];
        const auto group = key.group(i);
        const auto carrier = key.carrier(i);
        for (std::size_t j = 0; j < key.group_size; ++j) {
            grid.coeffs[coeff_offset(group[j], key.midband)] += step * carrier[j];
        }
    }
}

ImageBuffer qim_embed(const ImageBuffer& img, const Trait& trait, const StegoKey& key,
                      const QimParams& params) {
    if (!(params.delta > 0)) throw InvalidArgument("QIM step must be positive");
    require_key_matches(img, key);
    require_trait_matches(trait, key);
    return embed_with(img, key, [&](std::size_t i, double x) {
        return qim_quantise(x, params.delta, params.delta * key.dither_fraction[i], trait.bit(i));
    });
}

Trait qim_extract(const ImageBuffer& img, const StegoKey& key, const QimParams& params) {
    const auto proj = projections_of(img, key);
    Trait out(key.bits);
    for (std::size_t i = 0; i < key.bits; ++i) {
        out.set(i, qim_decide(proj[i], params.delta, params.delta * key.dither_fraction[i]));
    }
    return out;
}

ImageBuffer iss_embed(const ImageBuffer& img, const Trait& trait, const StegoKey& key,
                      const IssParams& params) {
    if (!(params.alpha > 0)) throw InvalidArgument("ISS amplitude must be positive");
    if (!(params.lambda >= 0 && params.lambda <= 1)) throw InvalidArgument("ISS lambda must be in [0, 1]");
    require_key_matches(img, key);
    require_trait_matches(trait, key);
    return embed_with(img, key, [&](std::size_t i, double x) {
        return iss_displace(x, params.alpha, params.lambda, trait.bit(i));
    });
}

Trait iss_extract(const ImageBuffer& img, const StegoKey& key, const IssParams&) {
    const auto proj = projections_of(img, key);
    Trait out(key.bits);
    for (std::size_t i = 0; i < key.bits; ++i) out.set(i, iss_decide(proj[i]));
    return out;
}

std::string to_string(StegoMethod method) { return method == StegoMethod::qim ? "qim" : "iss"; }

StegoMethod stego_method_from_string(const std::string& name) {
    if (name == "qim") return StegoMethod::qim;
    if (name == "iss") return StegoMethod::iss;
    throw InvalidArgument("unknown stegosystem '" + name + "' (expected qim or iss)");
}

void StegoConfig::validate() const {
    if (!(qim.delta > 0)) throw InvalidArgument("QIM step must be positive");
    if (!(iss.alpha > 0)) throw InvalidArgument("ISS amplitude must be positive");
    if (!(iss.lambda >= 0 && iss.lambda <= 1)) throw InvalidArgument("ISS lambda must be in [0, 1]");
}

Stegosystem::Stegosystem(StegoConfig config, std::uint64_t key_seed)
    : config_{config}, key_seed_{key_seed} {
    config_.validate();
}

StegoKey Stegosystem::key_for(int width, int height, std::size_t bits) const {
    return derive_material(key_seed_, width, height, bits, config_.midband());
}

ImageBuffer Stegosystem::embed(const ImageBuffer& img, const Trait& trait) const {
    const auto key = key_for(img.width(), img.height(), trait.size());
    return config_.method == StegoMethod::qim ? qim_embed(img, trait, key, config_.qim)
                                              : iss_embed(img, trait, key, config_.iss);
}

Trait Stegosystem::extract(const ImageBuffer& img, std::size_t bits) const {
    require_block_aligned(img);
    const auto key = key_for(img.width(), img.height(), bits);
    return config_.method == StegoMethod::qim ? qim_extract(img, key, config_.qim)
                                              : iss_extract(img, key, config_.iss);
}

}  // namespace lineage
