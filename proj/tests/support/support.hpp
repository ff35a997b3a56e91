#pragma once

#include "lineage/imaging.hpp"
#include "lineage/phylogeny.hpp"
#include "lineage/projector.hpp"
#include "lineage/stego.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lineage::testing {

namespace fs = std::filesystem;

/// The bundled natural-image corpus: 50 RGB covers of 256x256.
fs::path covers_dir();
std::vector<fs::path> cover_paths(std::size_t count = 50);
ImageBuffer load_cover(std::size_t index);
std::vector<ImageBuffer> load_covers(std::size_t count = 50);

/// Uniform random samples.
ImageBuffer noise_image(std::uint64_t seed, int width = 256, int height = 256);

/// Directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const noexcept { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

/// Writes `count` JPEG images to `dir`: random crops, flips and quarter
/// turns of covers 10-49 (never the desk-tree roots), resized to 256x256.
std::vector<fs::path> make_extraneous(const fs::path& dir, std::size_t count, std::uint64_t seed);

/// A colour-layout descriptor standing in for an external feature
/// extractor: mean and standard deviation of each channel over a 4x4 grid,
/// centred on the image mean (d = 96).
FeatureVector grid_colour_features(const ImageBuffer& img);
FeatureProvider grid_colour_provider();

/// Copies the first `count` covers into a fresh directory (roots for trees).
fs::path stage_roots(const fs::path& dir, std::size_t count, std::size_t first = 0);

/// Builds a tree in `out_dir` from the first `roots` covers.
TreeManifest build_desk_tree(const fs::path& out_dir, std::size_t roots, std::vector<int> branching,
                             const Projector& projector, StegoMethod method = StegoMethod::qim,
                             std::uint64_t master_seed = 2024, int jobs = 1);

/// Byte contents of a file.
std::string slurp(const fs::path& path);

}  // namespace lineage::testing
