#include "lineage/error.hpp"
#include "lineage/hex.hpp"
#include "lineage/phylogeny.hpp"
#include "lineage/prng.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <map>
#include <memory>

using namespace lineage;
using namespace lineage::testing;

namespace {

const Projector kSha256({ProjectorKind::sha256, 64, 0});

Candidate candidate(std::string id, const Trait& t) { return {std::move(id), t}; }

class SmallTree : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = std::make_unique<TempDir>("small-tree");
        manifest_ = std::make_unique<TreeManifest>(build_desk_tree(dir_->path(), 3, {2, 1}, kSha256));
    }
    static void TearDownTestSuite() {
        manifest_.reset();
        dir_.reset();
    }

    static const TreeManifest& manifest() { return *manifest_; }
    static Stegosystem stego() { return Stegosystem(manifest().stego, manifest().stego_key_seed); }

    static std::unique_ptr<TempDir> dir_;
    static std::unique_ptr<TreeManifest> manifest_;
};

std::unique_ptr<TempDir> SmallTree::dir_;
std::unique_ptr<TreeManifest> SmallTree::manifest_;

}  // namespace

TEST(NodeCount, PoolSizes) {
    EXPECT_EQ(expected_node_count(100, {3, 2, 1}), 1600u);
    EXPECT_EQ(expected_node_count(10, {3, 2, 1}), 160u);
    EXPECT_EQ(expected_node_count(1, {1}), 2u);
    EXPECT_EQ(expected_node_count(4, {}), 4u);
}

TEST(Inherit, SelfDerivationCarriesParentTrait) {
    const Stegosystem stego({}, 42);
    const auto parent = load_cover(0);
    const auto result = inherit(parent, parent, kSha256, stego);
    EXPECT_EQ(result.trait, project_sha256(parent));
    EXPECT_EQ(stego.extract(result.offspring, 64), project_sha256(parent));
}

TEST(Inherit, UnrelatedCoverStillCarriesParentTrait) {
    for (auto method : {StegoMethod::qim, StegoMethod::iss}) {
        StegoConfig cfg;
        cfg.method = method;
        const Stegosystem stego(cfg, 42);
        for (std::size_t i = 0; i < 5; ++i) {
            const auto parent = load_cover(i);
            const auto cover = load_cover(49 - i);
            const auto result = inherit(parent, cover, kSha256, stego);
            EXPECT_EQ(stego.extract(result.offspring, 64), project_sha256(parent));
        }
    }
}

TEST(Inherit, DifferentParentsGiveDifferentTraits) {
    const Stegosystem stego({}, 42);
    const auto cover = load_cover(20);
    const auto a = inherit(load_cover(1), cover, kSha256, stego);
    const auto b = inherit(load_cover(2), cover, kSha256, stego);
    EXPECT_NE(a.trait, b.trait);
    EXPECT_NE(a.offspring, b.offspring);
}

TEST(CoverOps, GeometricFirstWithBoundedSeverity) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto ops = draw_cover_ops(seed);
        ASSERT_EQ(ops.size(), 2u);
        EXPECT_TRUE(is_geometric(ops[0].id));
        for (const auto& op : ops) {
            EXPECT_GE(std::abs(op.severity), 0.2);
            EXPECT_LE(std::abs(op.severity), 0.6);
            if (!is_signed(op.id)) EXPECT_GT(op.severity, 0.0);
        }
        EXPECT_EQ(draw_cover_ops(seed)[1].seed, ops[1].seed);
    }
}

TEST_F(SmallTree, TopologyAndRecords) {
    const auto& m = manifest();
    ASSERT_EQ(m.nodes.size(), 15u);
    std::map<int, int> per_generation;
    for (const auto& n : m.nodes) {
        per_generation[n.generation]++;
        EXPECT_TRUE(fs::exists(m.image_path(n))) << n.id;
        EXPECT_EQ(n.key_seed, m.stego_key_seed);
        if (n.parent_id) {
            const auto* parent = m.find(*n.parent_id);
            ASSERT_NE(parent, nullptr);
            EXPECT_EQ(n.id.rfind(parent->id + ".", 0), 0u) << n.id;
            EXPECT_EQ(*n.trait_embedded, project_sha256(load_image(m.image_path(*parent))));
        }
    }
    EXPECT_EQ(per_generation[0], 3);
    EXPECT_EQ(per_generation[1], 6);
    EXPECT_EQ(per_generation[2], 6);
    EXPECT_NE(m.find("r00.2.1"), nullptr);
    EXPECT_EQ(m.stego_key_seed, tree_key_seed(2024));
}

TEST_F(SmallTree, ManifestJsonRoundTrip) {
    const auto reloaded = TreeManifest::load(dir_->path() / "manifest.json");
    EXPECT_EQ(reloaded.to_json(), manifest().to_json());
    EXPECT_EQ(slurp(dir_->path() / "manifest.json"), manifest().to_json());
    const auto text = manifest().to_json();
    EXPECT_NE(text.find("\"trait_embedded\": null"), std::string::npos);
    EXPECT_NE(text.find("\"key_seed\": \"" + hex64(tree_key_seed(2024))), std::string::npos);
}

TEST_F(SmallTree, CleanQueriesNominateTheirParents) {
    const auto pool = project_pool(manifest(), kSha256, 2);
    const auto s = stego();
    for (const auto& n : manifest().nodes) {
        if (!n.parent_id) continue;
        const auto result = match_trait(s.extract(load_image(manifest().image_path(n)), 64), pool, 0.75, 3);
        ASSERT_TRUE(result.nominated.has_value()) << n.id;
        EXPECT_EQ(*result.nominated, *n.parent_id);
        EXPECT_EQ(result.similarity, 1.0);
        EXPECT_EQ(result.ranked.size(), 3u);
    }
}

TEST_F(SmallTree, MatchQueryEndToEnd) {
    const auto* node = manifest().find("r01.1.1");
    ASSERT_NE(node, nullptr);
    const auto result =
        match_query(load_image(manifest().image_path(*node)), manifest(), kSha256, stego(), 0.75, 5, 3);
    ASSERT_TRUE(result.nominated);
    EXPECT_EQ(*result.nominated, "r01.1");
    EXPECT_NE(result.to_json().find("\"nominated\": \"r01.1\""), std::string::npos);
}

TEST_F(SmallTree, AbstainsWithoutTheParent) {
    const auto s = stego();
    const auto pool = project_pool(manifest(), kSha256, 1);
    for (const auto& n : manifest().nodes) {
        if (!n.parent_id) continue;
        std::vector<Candidate> without;
        for (const auto& c : pool)
            if (c.id != *n.parent_id) without.push_back(c);
        const auto result = match_trait(s.extract(load_image(manifest().image_path(n)), 64), without, 0.75, 1);
        EXPECT_FALSE(result.nominated.has_value()) << n.id;
    }
}

TEST_F(SmallTree, CorruptionStaysLocal) {
    // Replace one first-generation node with noise; only its children lose
    // their parent, and no other nomination moves.
    TempDir copy("corrupt");
    fs::copy(dir_->path(), copy.path(), fs::copy_options::recursive);
    auto corrupted = TreeManifest::load(copy / "manifest.json");
    const std::string victim = "r01.2";
    save_image(noise_image(9), corrupted.image_path(*corrupted.find(victim)));

    const auto s = stego();
    const auto before_pool = project_pool(manifest(), kSha256, 1);
    const auto after_pool = project_pool(corrupted, kSha256, 1);
    int affected = 0;
    for (const auto& n : manifest().nodes) {
        if (!n.parent_id || n.id == victim) continue;
        const auto query = load_image(manifest().image_path(n));
        const auto before = match_trait(s.extract(query, 64), before_pool, 0.75, 1);
        const auto after = match_trait(s.extract(query, 64), after_pool, 0.75, 1);
        if (*n.parent_id == victim) {
            ++affected;
            EXPECT_FALSE(after.nominated.has_value()) << n.id;
        } else {
            EXPECT_EQ(before.nominated, after.nominated) << n.id;
        }
    }
    EXPECT_EQ(affected, 1);
}

TEST_F(SmallTree, UnreadableCandidatesAreSkipped) {
    TempDir copy("skip");
    fs::copy(dir_->path(), copy.path(), fs::copy_options::recursive);
    auto pool = TreeManifest::load(copy / "manifest.json");
    fs::remove(pool.image_path(*pool.find("r02")));
    const auto query = load_image(pool.image_path(*pool.find("r00.1")));
    const auto result = match_query(query, pool, kSha256, stego(), 0.75, 3, 1);
    EXPECT_EQ(result.skipped, std::vector<std::string>{"r02"});
    EXPECT_EQ(result.nominated, std::optional<std::string>("r00"));
}

TEST(BuildTree, DeterministicAcrossRunsAndJobCounts) {
    TempDir a("det-a"), b("det-b");
    const auto ma = build_desk_tree(a.path(), 2, {2, 1}, kSha256, StegoMethod::iss, 77, 1);
    const auto mb = build_desk_tree(b.path(), 2, {2, 1}, kSha256, StegoMethod::iss, 77, 4);
    EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
    for (const auto& n : ma.nodes) EXPECT_EQ(slurp(ma.image_path(n)), slurp(mb.image_path(n))) << n.id;
}

TEST(BuildTree, AcceptsExternalCovers) {
    TempDir roots("ext-roots"), covers("ext-covers"), out("ext-out");
    stage_roots(roots.path(), 1);
    save_image(load_cover(30), covers / "r00.1.png");
    BuildOptions opt;
    opt.roots_dir = roots.path();
    opt.out_dir = out.path();
    opt.branching = {1};
    opt.covers_dirs = {covers.path()};
    opt.master_seed = 5;
    const auto m = build_tree(opt, kSha256);
    ASSERT_EQ(m.nodes.size(), 2u);
    const Stegosystem stego(m.stego, m.stego_key_seed);
    const auto child = load_image(m.image_path(m.nodes[1]));
    EXPECT_EQ(stego.extract(child, 64), project_sha256(load_cover(0)));
    EXPECT_GE(psnr(child, load_cover(30)), 37.0);
    EXPECT_TRUE(m.nodes[1].cover_ops.empty());
}

TEST(BuildTree, PadResizesRoots) {
    TempDir roots("pad-roots"), out("pad-out");
    save_image(resize_bilinear(load_cover(3), 250, 190), roots / "odd.png");
    BuildOptions opt;
    opt.roots_dir = roots.path();
    opt.out_dir = out.path();
    opt.branching = {1};
    EXPECT_THROW(build_tree(opt, kSha256), DimensionError);
    opt.pad = true;
    const auto m = build_tree(opt, kSha256);
    EXPECT_EQ(load_image(m.image_path(m.nodes[0])).width(), 256);
}

TEST(BuildTree, RejectsEmptyRootDirectory) {
    TempDir roots("empty-roots"), out("empty-out");
    BuildOptions opt;
    opt.roots_dir = roots.path();
    opt.out_dir = out.path();
    EXPECT_THROW(build_tree(opt, kSha256), IoError);
}

TEST(Matching, TiesGoToSmallestId) {
    Trait t(8);
    t.set(0, true);
    const auto r = match_trait(t, {candidate("b", t), candidate("a", t), candidate("c", t.complement())}, 0.75, 3);
    EXPECT_EQ(r.nominated, std::optional<std::string>("a"));
    EXPECT_EQ(r.tied, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(r.ranked[2].first, "c");
}

TEST(Matching, ThresholdControlsAbstention) {
    Trait t(64);
    Trait near = t;
    for (std::size_t i = 0; i < 16; ++i) near.set(i, true);  // agreement 0.75
    EXPECT_TRUE(match_trait(t, {candidate("x", near)}, 0.75, 1).nominated.has_value());
    near.set(16, true);
    const auto r = match_trait(t, {candidate("x", near)}, 0.75, 1);
    EXPECT_FALSE(r.nominated.has_value());
    EXPECT_NE(r.to_json().find("\"nominated\": null"), std::string::npos);
    EXPECT_THROW(match_trait(t, {}, 0.75, 1), InvalidArgument);
}

TEST(Matching, UnrelatedPoolYieldsNull) {
    const Stegosystem stego({}, 42);
    const auto offspring = inherit(load_cover(0), load_cover(1), kSha256, stego).offspring;
    std::vector<Candidate> pool;
    for (std::uint64_t s = 0; s < 100; ++s) pool.push_back(candidate("n" + std::to_string(s), project_sha256(noise_image(s, 32, 32))));
    EXPECT_FALSE(match_trait(stego.extract(offspring, 64), pool, 0.75, 5).nominated.has_value());
}

TEST(Manifest, ValidationCatchesBrokenLinks) {
    auto make = [](std::string id, std::optional<std::string> parent, int generation) {
        PhyloNode n;
        n.id = std::move(id);
        n.path = "images/" + n.id + ".png";
        n.parent_id = std::move(parent);
        n.generation = generation;
        if (n.parent_id) n.trait_embedded = Trait(64);
        return n;
    };
    TreeManifest m;
    m.nodes = {make("r0", std::nullopt, 0), make("r0.1", "r0", 1)};
    EXPECT_NO_THROW(m.validate());
    EXPECT_NO_THROW(TreeManifest::from_json(m.to_json()));

    auto broken = m;
    broken.nodes[1].parent_id = "missing";
    EXPECT_THROW(broken.validate(), FormatError);
    broken = m;
    broken.nodes[1].generation = 2;
    EXPECT_THROW(broken.validate(), FormatError);
    broken = m;
    broken.nodes[1].trait_embedded.reset();
    EXPECT_THROW(broken.validate(), FormatError);
    broken = m;
    broken.nodes.push_back(make("r0", std::nullopt, 0));
    EXPECT_THROW(broken.validate(), FormatError);
    broken = m;
    broken.branching = {2};
    EXPECT_THROW(broken.validate(), FormatError);
    // A two-node cycle cannot satisfy the generation rule.
    broken = m;
    broken.nodes[0] = make("r0", "r0.1", 2);
    EXPECT_THROW(broken.validate(), FormatError);

    EXPECT_THROW(TreeManifest::from_json("{not json"), FormatError);
    EXPECT_THROW(TreeManifest::from_json("{\"nodes\": [{\"id\": 3}]}"), FormatError);
    EXPECT_THROW(TreeManifest::load("/nonexistent/manifest.json"), IoError);
}
