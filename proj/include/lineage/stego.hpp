#pragma once

#include "lineage/imaging.hpp"
#include "lineage/trait.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lineage {

/// Inclusive zigzag index range selected from every 8x8 block.
struct Midband {
    int first = 6;
    int last = 20;

    int size() const noexcept { return last - first + 1; }
    bool operator==(const Midband&) const = default;
};

struct QimParams {
    double delta = 6.0;
    Midband midband{};
};

struct IssParams {
    double alpha = 3.0;
    double lambda = 1.0;
    Midband midband{};
};

/// Key material shared by encoder and decoder, derived from a 64-bit seed.
///
/// The mid-band coefficients of all blocks form a pool (pool index
/// p = block * |midband| + (zigzag - first)). A Fisher-Yates shuffle of the
/// pool is cut into `bits` disjoint groups of `group_size` coefficients;
/// every group has a Rademacher carrier and a dither fraction in [0, 1).
struct StegoKey {
    std::uint64_t seed = 0;
    int width = 0;
    int height = 0;
    std::size_t bits = 0;
    Midband midband{};
    std::size_t group_size = 0;
    std::vector<std::uint32_t> groups;    // bits * group_size pool indices
    std::vector<std::int8_t> carriers;    // bits * group_size signs
    std::vector<double> dither_fraction;  // bits values in [0, 1)

    std::span<const std::uint32_t> group(std::size_t bit) const {
        return {groups.data() + bit * group_size, group_size};
    }
    std::span<const std::int8_t> carrier(std::size_t bit) const {
        return {carriers.data() + bit * group_size, group_size};
    }

    bool operator==(const StegoKey&) const = default;
};

/// Throws CapacityError when (width/8)*(height/8)*|midband| < bits.
StegoKey derive_material(std::uint64_t seed, int width, int height, std::size_t bits,
                         Midband midband = {});

// Scalar rules, exposed for testing and for anyone building another carrier.

/// Nearest point of {delta*z + dither + bit*delta/2}.
double qim_quantise(double x, double delta, double dither, bool bit);
/// Coset with the smaller distance; ties decode to 0.
bool qim_decide(double x, double delta, double dither);
/// x + (alpha*sign(bit) - lambda*x).
double iss_displace(double x, double alpha, double lambda, bool bit);
/// Sign rule, 0 decodes to 1.
bool iss_decide(double x);

/// Mean carrier-weighted value of each bit's coefficient group.
std::vector<double> carrier_projections(const CoeffGrid& grid, const StegoKey& key);

/// Moves each projection to `targets[i]` by adding (target - current) along
/// the carrier. Afterwards `carrier_projections` returns `targets` exactly up
/// to floating-point rounding.
void set_projections(CoeffGrid& grid, const StegoKey& key, std::span<const double> targets);

ImageBuffer qim_embed(const ImageBuffer& img, const Trait& trait, const StegoKey& key,
                      const QimParams& params = {});
Trait qim_extract(const ImageBuffer& img, const StegoKey& key, const QimParams& params = {});

ImageBuffer iss_embed(const ImageBuffer& img, const Trait& trait, const StegoKey& key,
                      const IssParams& params = {});
Trait iss_extract(const ImageBuffer& img, const StegoKey& key, const IssParams& params = {});

enum class StegoMethod { qim, iss };

std::string to_string(StegoMethod method);
StegoMethod stego_method_from_string(const std::string& name);

/// Method plus both parameter sets; only the one selected by `method` is used.
struct StegoConfig {
    StegoMethod method = StegoMethod::qim;
    QimParams qim{};
    IssParams iss{};

    const Midband& midband() const noexcept { return method == StegoMethod::qim ? qim.midband : iss.midband; }
    void validate() const;
};

/// A stegosystem bound to one key seed. Key material is derived lazily per
/// image geometry, so one instance can serve images of several sizes.
class Stegosystem {
public:
    Stegosystem(StegoConfig config, std::uint64_t key_seed);

    const StegoConfig& config() const noexcept { return config_; }
    std::uint64_t key_seed() const noexcept { return key_seed_; }

    StegoKey key_for(int width, int height, std::size_t bits) const;
    ImageBuffer embed(const ImageBuffer& img, const Trait& trait) const;
    Trait extract(const ImageBuffer& img, std::size_t bits) const;

private:
    StegoConfig config_;
    std::uint64_t key_seed_;
};

}  // namespace lineage
