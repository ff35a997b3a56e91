#include "lineage/phylogeny.hpp"

#include "lineage/error.hpp"
#include "lineage/hex.hpp"
#include "lineage/parallel.hpp"
#include "lineage/prng.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

namespace lineage {

using json = nlohmann::json;

namespace {

constexpr const char* kFormat = "lineage-tree/1";

json projector_to_json(const ProjectorSpec& spec) {
    return {{"kind", to_string(spec.kind)}, {"bits", spec.bits}, {"seed", hex64(spec.seed)}};
}

ProjectorSpec projector_from_json(const json& j) {
    ProjectorSpec spec;
    spec.kind = projector_kind_from_string(j.at("kind").get<std::string>());
    spec.bits = j.value("bits", std::size_t{64});
    spec.seed = parse_hex64(j.value("seed", std::string("0")));
    return spec;
}

json stego_to_json(const StegoConfig& cfg, std::uint64_t key_seed) {
    return {{"method", to_string(cfg.method)},
            {"key_seed", hex64(key_seed)},
            {"qim", {{"delta", cfg.qim.delta}, {"midband", {cfg.qim.midband.first, cfg.qim.midband.last}}}},
            {"iss",
             {{"alpha", cfg.iss.alpha},
              {"lambda", cfg.iss.lambda},
              {"midband", {cfg.iss.midband.first, cfg.iss.midband.last}}}}};
}

Midband midband_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw FormatError("midband must be [first, last]");
    return {j[0].get<int>(), j[1].get<int>()};
}

void stego_from_json(const json& j, StegoConfig& cfg, std::uint64_t& key_seed) {
    cfg.method = stego_method_from_string(j.at("method").get<std::string>());
    key_seed = parse_hex64(j.at("key_seed").get<std::string>());
    if (j.contains("qim")) {
        cfg.qim.delta = j["qim"].value("delta", cfg.qim.delta);
        if (j["qim"].contains("midband")) cfg.qim.midband = midband_from_json(j["qim"]["midband"]);
    }
    if (j.contains("iss")) {
        cfg.iss.alpha = j["iss"].value("alpha", cfg.iss.alpha);
        cfg.iss.lambda = j["iss"].value("lambda", cfg.iss.lambda);
        if (j["iss"].contains("midband")) cfg.iss.midband = midband_from_json(j["iss"]["midband"]);
    }
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string root_id(std::size_t index, std::size_t count) {
    std::size_t width = 2;
    for (std::size_t c = count > 0 ? count - 1 : 0; c >= 100; c /= 10) ++width;
    std::string digits = std::to_string(index);
    return "r" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

ImageBuffer external_cover(const std::filesystem::path& dir, const std::string& id) {
    for (const char* ext : {".png", ".jpg", ".jpeg"}) {
        const auto candidate = dir / (id + ext);
        if (std::filesystem::exists(candidate)) return load_image(candidate);
    }
    throw IoError("no external cover for node " + id + " in " + dir.string());
}

}  // namespace

const PhyloNode* TreeManifest::find(const std::string& id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

void TreeManifest::validate() const {
    std::map<std::string, const PhyloNode*> by_id;
    for (const auto& n : nodes) {
        if (n.id.empty()) throw FormatError("node with empty id");
        if (!by_id.emplace(n.id, &n).second) throw FormatError("duplicate node id " + n.id);
    }
    std::size_t roots = 0;
    for (const auto& n : nodes) {
        if ((n.generation == 0) != !n.parent_id.has_value()) {
            throw FormatError("node " + n.id + ": generation 0 must coincide with having no parent");
        }
        if (n.parent_id.has_value() != n.trait_embedded.has_value()) {
            throw FormatError("node " + n.id + ": embedded trait must be present exactly when a parent is");
        }
        if (!n.parent_id) {
            ++roots;
            continue;
        }
        const auto it = by_id.find(*n.parent_id);
        if (it == by_id.end()) throw FormatError("node " + n.id + ": parent " + *n.parent_id + " not in manifest");
        if (it->second->generation + 1 != n.generation) {
            throw FormatError("node " + n.id + ": generation is not parent's plus one");
        }
    }
    // Generations strictly increase along parent links, so the graph is acyclic.
    if (!branching.empty() && nodes.size() != expected_node_count(roots, branching)) {
        throw FormatError("manifest has " + std::to_string(nodes.size()) + " nodes, branching implies " +
                          std::to_string(expected_node_count(roots, branching)));
    }
}

std::string TreeManifest::to_json() const {
    json j;
    j["format"] = kFormat;
    j["created"] = created;
    j["master_seed"] = hex64(master_seed);
    j["branching"] = branching;
    j["stego"] = stego_to_json(stego, stego_key_seed);
    j["nodes"] = json::array();
    for (const auto& n : nodes) {
        json node;
        node["id"] = n.id;
        node["path"] = n.path;
        node["parent_id"] = n.parent_id ? json(*n.parent_id) : json(nullptr);
        node["generation"] = n.generation;
        node["key_seed"] = hex64(n.key_seed);
        node["projector"] = projector_to_json(n.projector);
        node["trait_embedded"] = n.trait_embedded ? json(n.trait_embedded->to_hex()) : json(nullptr);
        json ops = json::array();
        for (const auto& op : n.cover_ops) {
            ops.push_back({{"op", to_string(op.id)}, {"severity", op.severity}, {"seed", hex64(op.seed)}});
        }
        node["cover_ops"] = std::move(ops);
        j["nodes"].push_back(std::move(node));
    }
    return j.dump(2) + "\n";
}

TreeManifest TreeManifest::from_json(const std::string& text, std::filesystem::path base_dir) {
    TreeManifest m;
    m.base_dir = std::move(base_dir);
    try {
        const json j = json::parse(text);
        if (!j.is_object() || !j.contains("nodes")) throw FormatError("manifest has no 'nodes' array");
        m.created = j.value("created", std::string{});
        m.master_seed = parse_hex64(j.value("master_seed", std::string("0")));
        m.branching = j.value("branching", std::vector<int>{});
        if (j.contains("stego")) stego_from_json(j["stego"], m.stego, m.stego_key_seed);
        for (const auto& jn : j.at("nodes")) {
            PhyloNode n;
            n.id = jn.at("id").get<std::string>();
            n.path = jn.at("path").get<std::string>();
            if (jn.contains("parent_id") && !jn["parent_id"].is_null()) n.parent_id = jn["parent_id"].get<std::string>();
            n.generation = jn.value("generation", 0);
            n.key_seed = parse_hex64(jn.value("key_seed", hex64(m.stego_key_seed)));
            if (jn.contains("projector")) n.projector = projector_from_json(jn["projector"]);
            if (jn.contains("trait_embedded") && !jn["trait_embedded"].is_null()) {
                n.trait_embedded = Trait::from_hex(jn["trait_embedded"].get<std::string>());
            }
            if (jn.contains("cover_ops")) {
                for (const auto& jo : jn["cover_ops"]) {
                    n.cover_ops.push_back({op_from_string(jo.at("op").get<std::string>()),
                                           jo.at("severity").get<double>(),
                                           parse_hex64(jo.value("seed", std::string("0")))});
                }
            }
            m.nodes.push_back(std::move(n));
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed manifest: ") + e.what());
    }
    m.validate();
    return m;
}

TreeManifest TreeManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str(), path.parent_path());
}

void TreeManifest::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write manifest " + path.string());
    out << to_json();
}

std::size_t expected_node_count(std::size_t roots, const std::vector<int>& branching) {
    std::size_t per_root = 1;
    std::size_t level = 1;
    for (int b : branching) {
        level *= static_cast<std::size_t>(b);
        per_root += level;
    }
    return roots * per_root;
}

Inheritance inherit(const ImageBuffer& parent, const ImageBuffer& offspring_cover, const Projector& projector,
                    const Stegosystem& stego, const std::filesystem::path& parent_source) {
    Trait trait = projector.project(parent, parent_source);
    ImageBuffer offspring = stego.embed(offspring_cover, trait);
    return {std::move(offspring), std::move(trait)};
}

std::vector<ChannelOp> draw_cover_ops(std::uint64_t seed) {
    constexpr std::array<OpId, 4> geometric = {OpId::crop, OpId::rotate, OpId::persp_h, OpId::persp_v};
    SplitMix64 rng(seed);
    auto severity = [&](OpId op) {
        const double magnitude = 0.2 + 0.4 * rng.next_unit();
        const bool negative = (rng.next() & 1) != 0;
        return is_signed(op) && negative ? -magnitude : magnitude;
    };
    std::vector<ChannelOp> ops;
    const OpId first = geometric[rng.next_below(geometric.size())];
    ops.push_back({first, severity(first), rng.next()});
    const OpId second = kAllOps[rng.next_below(kAllOps.size())];
    ops.push_back({second, severity(second), rng.next()});
    return ops;
}

std::uint64_t tree_key_seed(std::uint64_t master_seed) { return SplitMix64(master_seed).next(); }

TreeManifest build_tree(const BuildOptions& options, const Projector& projector) {
    for (int b : options.branching) {
        if (b < 1) throw InvalidArgument("branching factors must be at least 1");
    }
    if (!options.covers_dirs.empty() && options.covers_dirs.size() != options.branching.size()) {
        throw InvalidArgument("--covers-dir must be given once per generation");
    }
    auto root_files = list_images(options.roots_dir);
    if (options.max_roots > 0 && root_files.size() > options.max_roots) root_files.resize(options.max_roots);
    if (root_files.empty()) throw IoError("no PNG or JPEG images in " + options.roots_dir.string());

    const auto image_dir = options.out_dir / "images";
    std::filesystem::create_directories(image_dir);

    TreeManifest manifest;
    manifest.base_dir = options.out_dir;
    manifest.branching = options.branching;
    manifest.stego = options.stego;
    manifest.master_seed = options.master_seed;
    manifest.stego_key_seed = tree_key_seed(options.master_seed);
    manifest.created = options.created;
    const Stegosystem stego(options.stego, manifest.stego_key_seed);

    auto make_node = [&](std::string id, std::optional<std::string> parent, int generation) {
        PhyloNode n;
        n.path = "images/" + id + ".png";
        n.id = std::move(id);
        n.parent_id = std::move(parent);
        n.generation = generation;
        n.key_seed = manifest.stego_key_seed;
        n.projector = projector.spec();
        return n;
    };

    std::vector<ImageBuffer> level(root_files.size());
    std::vector<std::size_t> level_nodes(root_files.size());
    parallel_for(root_files.size(), options.jobs, [&](std::size_t i) {
        ImageBuffer img = options.pad ? resize_bilinear(load_image_any_size(root_files[i]), 256, 256)
                                      : load_image(root_files[i]);
        require_block_aligned(img);
        level[i] = std::move(img);
    });
    for (std::size_t i = 0; i < root_files.size(); ++i) {
        level_nodes[i] = manifest.nodes.size();
        manifest.nodes.push_back(make_node(root_id(i, root_files.size()), std::nullopt, 0));
    }
    parallel_for(level.size(), options.jobs, [&](std::size_t i) {
        save_image(level[i], manifest.image_path(manifest.nodes[level_nodes[i]]));
    });

    for (std::size_t g = 0; g < options.branching.size(); ++g) {
        const auto children_per_parent = static_cast<std::size_t>(options.branching[g]);
        const std::size_t first_child = manifest.nodes.size();
        // Register the generation first so node indices (and hence seeds)
        // never depend on scheduling.
        std::vector<std::size_t> parent_slot;
        for (std::size_t p = 0; p < level.size(); ++p) {
            const std::string parent_id = manifest.nodes[level_nodes[p]].id;
            for (std::size_t c = 0; c < children_per_parent; ++c) {
                manifest.nodes.push_back(make_node(parent_id + "." + std::to_string(c + 1), parent_id,
                                                   static_cast<int>(g) + 1));
                parent_slot.push_back(p);
            }
        }
        std::vector<Trait> parent_traits(level.size());
        parallel_for(level.size(), options.jobs, [&](std::size_t p) {
            parent_traits[p] = projector.project(level[p], manifest.image_path(manifest.nodes[level_nodes[p]]));
        });

        const std::size_t count = parent_slot.size();
        std::vector<ImageBuffer> next(count);
        parallel_for(count, options.jobs, [&](std::size_t i) {
            const std::size_t node_index = first_child + i;
            PhyloNode& node = manifest.nodes[node_index];
            const ImageBuffer& parent_img = level[parent_slot[i]];
            ImageBuffer cover;
            if (!options.covers_dirs.empty()) {
                cover = external_cover(options.covers_dirs[g], node.id);
                if (cover.width() != parent_img.width() || cover.height() != parent_img.height()) {
                    cover = resize_bilinear(cover, parent_img.width(), parent_img.height());
                }
            } else {
                node.cover_ops = draw_cover_ops(options.master_seed ^ node_index);
                cover = parent_img;
                for (const auto& op : node.cover_ops) cover = apply(cover, op);
            }
            node.trait_embedded = parent_traits[parent_slot[i]];
            next[i] = stego.embed(cover, *node.trait_embedded);
            save_image(next[i], manifest.image_path(node));
        });

        level = std::move(next);
        level_nodes.resize(count);
        for (std::size_t i = 0; i < count; ++i) level_nodes[i] = first_child + i;
    }

    manifest.validate();
    manifest.save(options.out_dir / "manifest.json");
    return manifest;
}

std::string MatchResult::to_json() const {
    json j;
    j["nominated"] = nominated ? json(*nominated) : json(nullptr);
    j["similarity"] = similarity;
    j["threshold"] = threshold;
    j["ranked"] = json::array();
    for (const auto& [id, s] : ranked) j["ranked"].push_back({{"id", id}, {"similarity", s}});
    j["tied"] = tied;
    j["skipped"] = skipped;
    return j.dump(2) + "\n";
}

std::vector<Candidate> project_pool(const TreeManifest& pool, const Projector& projector, int jobs,
                                    std::vector<std::string>* skipped) {
    std::vector<std::optional<Candidate>> slots(pool.nodes.size());
    std::vector<std::string> errors(pool.nodes.size());
    parallel_for(pool.nodes.size(), jobs, [&](std::size_t i) {
        const auto& node = pool.nodes[i];
        const auto path = pool.image_path(node);
        try {
            slots[i] = Candidate{node.id, projector.project(load_image(path), path)};
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    std::vector<Candidate> out;
    out.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i]) {
            out.push_back(std::move(*slots[i]));
        } else {
            std::cerr << "warning: skipping candidate " << pool.nodes[i].id << ": " << errors[i] << "\n";
            if (skipped) skipped->push_back(pool.nodes[i].id);
        }
    }
    return out;
}

MatchResult match_trait(const Trait& extracted, const std::vector<Candidate>& candidates, double threshold,
                        std::size_t top_k) {
    if (candidates.empty()) throw InvalidArgument("candidate pool is empty");
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(candidates.size());
    for (const auto& c : candidates) scored.emplace_back(c.id, agreement(extracted, c.trait));
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });

    MatchResult r;
    r.threshold = threshold;
    r.similarity = scored.front().second;
    for (const auto& [id, s] : scored) {
        if (s != r.similarity) break;
        r.tied.push_back(id);
    }
    if (r.similarity >= threshold) r.nominated = scored.front().first;
    scored.resize(std::min(top_k, scored.size()));
    r.ranked = std::move(scored);
    return r;
}

MatchResult match_query(const ImageBuffer& query, const TreeManifest& pool, const Projector& projector,
                        const Stegosystem& stego, double threshold, std::size_t top_k, int jobs) {
    if (pool.nodes.empty()) throw InvalidArgument("pool manifest has no nodes");
    const Trait extracted = stego.extract(query, projector.bits());
    std::vector<std::string> skipped;
    const auto candidates = project_pool(pool, projector, jobs, &skipped);
    if (candidates.empty()) throw IoError("no readable candidates in pool");
    MatchResult r = match_trait(extracted, candidates, threshold, top_k);
    r.skipped = std::move(skipped);
    return r;
}

}  // namespace lineage
