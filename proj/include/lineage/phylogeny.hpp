#pragma once

#include "lineage/channel.hpp"
#include "lineage/imaging.hpp"
#include "lineage/projector.hpp"
#include "lineage/stego.hpp"
#include "lineage/trait.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lineage {

struct PhyloNode {
    std::string id;
    std::string path;  // relative to the manifest directory
    std::optional<std::string> parent_id;
    int generation = 0;
    std::uint64_t key_seed = 0;
    ProjectorSpec projector{};
    std::optional<Trait> trait_embedded;
    std::vector<ChannelOp> cover_ops;  // how the offspring cover was synthesised, if it was
};

struct TreeManifest {
    std::vector<PhyloNode> nodes;
    std::vector<int> branching;
    StegoConfig stego{};
    std::uint64_t stego_key_seed = 0;
    std::uint64_t master_seed = 0;
    std::string created;

    /// Directory the node paths are relative to. Not serialised.
    std::filesystem::path base_dir;

    std::filesystem::path image_path(const PhyloNode& node) const { return base_dir / node.path; }
    const PhyloNode* find(const std::string& id) const;

    /// Checks generation/parent/trait consistency, resolvable and acyclic
    /// parent links, unique ids. Throws FormatError.
    void validate() const;

    std::string to_json() const;
    static TreeManifest from_json(const std::string& text, std::filesystem::path base_dir = {});

    static TreeManifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

/// Node count of a tree: roots * (1 + b1 + b1*b2 + ...).
std::size_t expected_node_count(std::size_t roots, const std::vector<int>& branching);

struct Inheritance {
    ImageBuffer offspring;
    Trait trait;
};

/// Forward phase: projects the parent and hides the trait in the offspring.
Inheritance inherit(const ImageBuffer& parent, const ImageBuffer& offspring_cover,
                    const Projector& projector, const Stegosystem& stego,
                    const std::filesystem::path& parent_source = {});

/// Seeded stand-in for a generative model: one geometric operation followed
/// by any operation, severities of magnitude in [0.2, 0.6].
std::vector<ChannelOp> draw_cover_ops(std::uint64_t seed);

struct BuildOptions {
    std::filesystem::path roots_dir;
    std::filesystem::path out_dir;
    std::vector<int> branching{3, 2, 1};
    std::uint64_t master_seed = 0;
    StegoConfig stego{};
    /// Optional externally generated covers, one directory per generation;
    /// a child's cover is `<dir>/<child id>.png|.jpg`.
    std::vector<std::filesystem::path> covers_dirs;
    /// Resize every root to 256x256 before use.
    bool pad = false;
    std::size_t max_roots = 0;  // 0 = all
    std::string created;
    int jobs = 1;
};

/// Builds the tree, writes images under `out_dir/images` and the manifest to
/// `out_dir/manifest.json`, and returns the manifest.
TreeManifest build_tree(const BuildOptions& options, const Projector& projector);

/// Stego key seed used for every node of a tree built from `master_seed`.
std::uint64_t tree_key_seed(std::uint64_t master_seed);

struct Candidate {
    std::string id;
    Trait trait;
};

struct MatchResult {
    std::optional<std::string> nominated;
    double similarity = 0.0;
    double threshold = 0.0;
    std::vector<std::pair<std::string, double>> ranked;
    std::vector<std::string> tied;     // every id sharing the best similarity
    std::vector<std::string> skipped;  // candidates that could not be read

    std::string to_json() const;
};

/// Projects every manifest node from its stored image. Unreadable images are
/// left out and reported through `skipped`.
std::vector<Candidate> project_pool(const TreeManifest& pool, const Projector& projector, int jobs,
                                    std::vector<std::string>* skipped = nullptr);

/// Scores `extracted` against the candidates; the best is the highest
/// agreement, ties going to the lexicographically smallest id.
MatchResult match_trait(const Trait& extracted, const std::vector<Candidate>& candidates,
                        double threshold, std::size_t top_k);

/// Backward phase end to end: extract, re-project the pool, match.
MatchResult match_query(const ImageBuffer& query, const TreeManifest& pool, const Projector& projector,
                        const Stegosystem& stego, double threshold, std::size_t top_k, int jobs = 1);

}  // namespace lineage
