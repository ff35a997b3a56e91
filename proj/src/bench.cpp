#include "lineage/bench.hpp"

#include "lineage/error.hpp"
#include "lineage/parallel.hpp"
#include "lineage/prng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include <openssl/evp.h>

namespace lineage::bench {

namespace {

// Trait packed into 64-bit words for fast pairwise Hamming distances.
struct Packed {
    std::vector<std::uint64_t> words;
    std::size_t bits = 0;

    Packed() = default;
    explicit Packed(const Trait& t) : words((t.size() + 63) / 64, 0), bits{t.size()} {
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t.bit(i)) words[i / 64] |= 1ULL << (i % 64);
    }
};

std::size_t distance(const Packed& a, const Packed& b) {
    std::size_t d = 0;
    for (std::size_t w = 0; w < a.words.size(); ++w) d += static_cast<std::size_t>(std::popcount(a.words[w] ^ b.words[w]));
    return d;
}

double similarity(const Packed& a, const Packed& b) {
    return static_cast<double>(a.bits - distance(a, b)) / static_cast<double>(a.bits);
}

// Per-item material for pair scoring: projected trait (as a candidate) and
// extracted trait (as a query).
struct Item {
    std::string id;
    std::optional<std::string> parent_id;
    Packed projected;
    Packed extracted;
};

Item describe(const ImageBuffer& img, const std::filesystem::path& source, std::string id,
              std::optional<std::string> parent, const Projector& projector, const Stegosystem& stego) {
    Item it;
    it.id = std::move(id);
    it.parent_id = std::move(parent);
    it.projected = Packed(projector.project(img, source));
    it.extracted = Packed(stego.extract(img, projector.bits()));
    return it;
}

std::vector<Item> describe_manifest(const TreeManifest& manifest, const Projector& projector,
                                    const Stegosystem& stego, int jobs) {
    std::vector<Item> items(manifest.nodes.size());
    parallel_for(items.size(), jobs, [&](std::size_t i) {
        const auto& node = manifest.nodes[i];
        const auto path = manifest.image_path(node);
        items[i] = describe(load_image(path), path, node.id, node.parent_id, projector, stego);
    });
    return items;
}

struct Counts {
    std::size_t claimed = 0;
    std::size_t true_pairs = 0;
    std::size_t hits = 0;
};

// Scores every ordered pair (query, candidate), query != candidate, within
// `members` (indices into items).
Counts score_pairs(const std::vector<Item>& items, const std::vector<std::size_t>& members, double threshold,
                   int jobs) {
    std::map<std::string, std::size_t> present;
    for (std::size_t m : members) present.emplace(items[m].id, m);

    std::vector<Counts> per_query(members.size());
    parallel_for(members.size(), jobs, [&](std::size_t qi) {
        const Item& q = items[members[qi]];
        Counts c;
        const bool parent_present = q.parent_id && present.count(*q.parent_id);
        if (parent_present) c.true_pairs = 1;
        for (std::size_t ci = 0; ci < members.size(); ++ci) {
            if (ci == qi) continue;
            const Item& cand = items[members[ci]];
            if (similarity(q.extracted, cand.projected) >= threshold) {
                ++c.claimed;
                if (parent_present && cand.id == *q.parent_id) ++c.hits;
            }
        }
        per_query[qi] = c;
    });
    Counts total;
    for (const auto& c : per_query) {
        total.claimed += c.claimed;
        total.true_pairs += c.true_pairs;
        total.hits += c.hits;
    }
    return total;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void require_valid_ratios(const std::vector<double>& ratios) {
    if (ratios.empty()) throw InvalidArgument("at least one ratio is required");
    for (double r : ratios)
        if (!(r > 0.0 && r <= 1.0)) throw InvalidArgument("ratios must lie in (0, 1]");
}

}  // namespace

PRPoint make_pr_point(double ratio, double threshold, std::size_t claimed, std::size_t true_pairs,
                      std::size_t hits) {
    PRPoint p;
    p.ratio = ratio;
    p.threshold = threshold;
    p.claimed = claimed;
    p.true_pairs = true_pairs;
    p.hits = hits;
    p.empty_claims = claimed == 0;
    p.precision = claimed == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(claimed);
    p.recall_undefined = true_pairs == 0;
    p.recall = true_pairs == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(true_pairs);
    p.f_score = p.precision + p.recall > 0 ? 2 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
    return p;
}

std::uint64_t edit_seed(const TreeManifest& manifest, std::size_t node_index) {
    return SplitMix64(manifest.master_seed ^ (0xD1B54A32D192ED03ULL * (node_index + 1))).next();
}

std::vector<Row> estimate_stego_agreement(const TreeManifest& manifest, OpId op,
                                          const std::vector<double>& severities, const Stegosystem& stego,
                                          int jobs) {
    std::vector<std::size_t> queries;
    for (std::size_t i = 0; i < manifest.nodes.size(); ++i)
        if (manifest.nodes[i].trait_embedded) queries.push_back(i);
    if (queries.empty()) throw InvalidArgument("manifest has no nodes with embedded traits");

    std::vector<ImageBuffer> images(queries.size());
    parallel_for(queries.size(), jobs, [&](std::size_t i) {
        images[i] = load_image(manifest.image_path(manifest.nodes[queries[i]]));
    });

    std::vector<Row> rows;
    for (double s : severities) {
        std::vector<double> scores(queries.size());
        parallel_for(queries.size(), jobs, [&](std::size_t i) {
            const auto& node = manifest.nodes[queries[i]];
            const ImageBuffer edited = apply(images[i], {op, s, edit_seed(manifest, queries[i])});
            scores[i] = agreement(stego.extract(edited, node.trait_embedded->size()), *node.trait_embedded);
        });
        const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
        rows.push_back({"stego_agreement", to_string(op), s, "-", to_string(stego.config().method),
                        "bit_agreement", mean, scores.size()});
    }
    return rows;
}

double estimate_projector_agreement(const std::vector<ImageBuffer>& images, const Projector& projector,
                                    int jobs) {
    if (images.size() < 2) throw InvalidArgument("projector agreement needs at least two images");
    std::vector<Packed> traits(images.size());
    parallel_for(images.size(), jobs, [&](std::size_t i) { traits[i] = Packed(projector.project(images[i])); });
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < traits.size(); ++i)
        for (std::size_t j = i + 1; j < traits.size(); ++j) {
            total += similarity(traits[i], traits[j]);
            ++pairs;
        }
    return total / static_cast<double>(pairs);
}

std::vector<Row> run_distortion_retrieval(const TreeManifest& manifest, OpId op,
                                          const std::vector<double>& severities, const Projector& projector,
                                          const Stegosystem& stego, int jobs) {
    const std::size_t count = manifest.nodes.size();
    if (count == 0) throw InvalidArgument("manifest has no nodes");
    std::vector<ImageBuffer> originals(count);
    parallel_for(count, jobs, [&](std::size_t i) { originals[i] = load_image(manifest.image_path(manifest.nodes[i])); });

    std::vector<Row> rows;
    for (double s : severities) {
        std::vector<Item> items(count);
        parallel_for(count, jobs, [&](std::size_t i) {
            const auto& node = manifest.nodes[i];
            const ImageBuffer edited = apply(originals[i], {op, s, edit_seed(manifest, i)});
            // Sidecar features describe the unedited file only.
            const auto source = s == 0.0 ? manifest.image_path(node) : std::filesystem::path{};
            items[i] = describe(edited, source, node.id, node.parent_id, projector, stego);
        });

        std::vector<std::size_t> queries;
        for (std::size_t i = 0; i < count; ++i)
            if (items[i].parent_id) queries.push_back(i);
        std::vector<int> correct(queries.size(), 0);
        parallel_for(queries.size(), jobs, [&](std::size_t qi) {
            const Item& q = items[queries[qi]];
            std::size_t best = 0;
            double best_score = -1.0;
            for (std::size_t c = 0; c < count; ++c) {
                const double score = similarity(q.extracted, items[c].projected);
                if (score > best_score || (score == best_score && items[c].id < items[best].id)) {
                    best = c;
                    best_score = score;
                }
            }
            correct[qi] = items[best].id == *q.parent_id;
        });
        const double accuracy = queries.empty() ? 0.0
                                                : static_cast<double>(std::accumulate(correct.begin(), correct.end(), 0)) /
                                                      static_cast<double>(queries.size());
        rows.push_back({"retrieval", to_string(op), s, to_string(projector.spec().kind),
                        to_string(stego.config().method), "top1_accuracy", accuracy, queries.size()});
    }
    return rows;
}

std::vector<PRPoint> run_inclusion(const TreeManifest& manifest,
                                   const std::vector<std::filesystem::path>& extraneous,
                                   const std::vector<double>& ratios, const std::vector<double>& thresholds,
                                   const Projector& projector, const Stegosystem& stego, std::uint64_t seed,
                                   int jobs) {
    require_valid_ratios(ratios);
    const std::size_t relevant = manifest.nodes.size();
    if (relevant == 0) throw InvalidArgument("manifest has no nodes");

    std::size_t needed = 0;
    for (double r : ratios) {
        needed = std::max(needed, static_cast<std::size_t>(std::llround(static_cast<double>(relevant) / r)) - relevant);
    }
    if (needed > extraneous.size()) {
        throw InvalidArgument("inclusion needs " + std::to_string(needed) + " extraneous images, only " +
                              std::to_string(extraneous.size()) + " supplied");
    }

    auto order = extraneous;
    SplitMix64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.next_below(i)]);
    order.resize(needed);

    std::vector<Item> items = describe_manifest(manifest, projector, stego, jobs);
    items.resize(relevant + needed);
    parallel_for(needed, jobs, [&](std::size_t i) {
        items[relevant + i] = describe(load_image(order[i]), order[i], "~extra/" + order[i].filename().string(),
                                       std::nullopt, projector, stego);
    });

    std::vector<PRPoint> out;
    for (double ratio : ratios) {
        const std::size_t extra = static_cast<std::size_t>(std::llround(static_cast<double>(relevant) / ratio)) - relevant;
        std::vector<std::size_t> members(relevant + extra);
        std::iota(members.begin(), members.end(), std::size_t{0});
        for (double t : thresholds) {
            const Counts c = score_pairs(items, members, t, jobs);
            out.push_back(make_pr_point(ratio, t, c.claimed, c.true_pairs, c.hits));
        }
    }
    return out;
}

std::vector<PRPoint> run_deletion(const TreeManifest& manifest, const std::vector<double>& ratios,
                                  const std::vector<double>& thresholds, const Projector& projector,
                                  const Stegosystem& stego, std::uint64_t seed, int jobs) {
    require_valid_ratios(ratios);
    const std::size_t total = manifest.nodes.size();
    if (total == 0) throw InvalidArgument("manifest has no nodes");
    const std::vector<Item> items = describe_manifest(manifest, projector, stego, jobs);

    std::vector<PRPoint> out;
    for (std::size_t r = 0; r < ratios.size(); ++r) {
        const auto keep = static_cast<std::size_t>(std::llround(ratios[r] * static_cast<double>(total)));
        std::vector<std::size_t> members(total);
        std::iota(members.begin(), members.end(), std::size_t{0});
        SplitMix64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (r + 1)));
        for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.next_below(i)]);
        members.resize(keep);
        std::sort(members.begin(), members.end());
        for (double t : thresholds) {
            const Counts c = score_pairs(items, members, t, jobs);
            out.push_back(make_pr_point(ratios[r], t, c.claimed, c.true_pairs, c.hits));
        }
    }
    return out;
}

std::vector<std::filesystem::path> list_image_files(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto fmt_ext = entry.path().extension().string();
        if (fmt_ext == ".png" || fmt_ext == ".PNG" || fmt_ext == ".jpg" || fmt_ext == ".JPG" ||
            fmt_ext == ".jpeg" || fmt_ext == ".JPEG") {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kDigits[digest[i] >> 4];
        out += kDigits[digest[i] & 0xF];
    }
    return out;
}

void write_rows_csv(std::ostream& out, const std::vector<Row>& input) {
    auto rows = input;
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.experiment, a.op, a.severity) < std::tie(b.experiment, b.op, b.severity);
    });
    out << "experiment,op,severity,projector,stego,metric,value,samples\n";
    for (const auto& r : rows) {
        out << r.experiment << ',' << r.op << ',' << fmt6(r.severity) << ',' << r.projector << ',' << r.stego
            << ',' << r.metric << ',' << fmt6(r.value) << ',' << r.samples << '\n';
    }
}

void write_pr_csv(std::ostream& out, const std::string& experiment, const std::string& projector,
                  const std::string& stego, const std::vector<PRPoint>& points) {
    out << "experiment,ratio,threshold,projector,stego,claimed,true_pairs,hits,precision,recall,f_score,"
           "empty_claims,recall_undefined\n";
    for (const auto& p : points) {
        out << experiment << ',' << fmt6(p.ratio) << ',' << fmt6(p.threshold) << ',' << projector << ',' << stego
            << ',' << p.claimed << ',' << p.true_pairs << ',' << p.hits << ',' << fmt6(p.precision) << ','
            << fmt6(p.recall) << ',' << fmt6(p.f_score) << ',' << (p.empty_claims ? 1 : 0) << ','
            << (p.recall_undefined ? 1 : 0) << '\n';
    }
}

}  // namespace lineage::bench
