#pragma once

#include "lineage/channel.hpp"
#include "lineage/phylogeny.hpp"
#include "lineage/projector.hpp"
#include "lineage/stego.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace lineage::bench {

struct Row {
    std::string experiment;
    std::string op;
    double severity = 0.0;
    std::string projector;
    std::string stego;
    std::string metric;
    double value = 0.0;
    std::size_t samples = 0;
};

struct PRPoint {
    double ratio = 1.0;
    double threshold = 0.0;
    double precision = 1.0;
    double recall = 0.0;
    double f_score = 0.0;
    std::size_t claimed = 0;
    std::size_t true_pairs = 0;
    std::size_t hits = 0;
    bool empty_claims = false;      // precision reported as 1
    bool recall_undefined = false;  // no surviving true pairs; recall reported as 0
};

/// Fills precision/recall/F from the counts, applying the empty-claims and
/// no-true-pairs conventions.
PRPoint make_pr_point(double ratio, double threshold, std::size_t claimed, std::size_t true_pairs,
                      std::size_t hits);

/// Seed for the grain operation applied to node `node_index` of a tree.
std::uint64_t edit_seed(const TreeManifest& manifest, std::size_t node_index);

/// Mean bit agreement between the trait extracted from each edited non-root
/// node and the trait recorded as embedded in it. One row per severity.
std::vector<Row> estimate_stego_agreement(const TreeManifest& manifest, OpId op,
                                          const std::vector<double>& severities, const Stegosystem& stego,
                                          int jobs = 1);

/// Mean agreement over all unordered pairs of `images`.
double estimate_projector_agreement(const std::vector<ImageBuffer>& images, const Projector& projector,
                                    int jobs = 1);

/// Every pool image edited at the severity; each non-root query nominates its
/// best candidate without abstention. Row value: fraction nominating the
/// true parent.
std::vector<Row> run_distortion_retrieval(const TreeManifest& manifest, OpId op,
                                          const std::vector<double>& severities, const Projector& projector,
                                          const Stegosystem& stego, int jobs = 1);

/// Pool = manifest plus extraneous images so that the manifest makes up
/// `ratio` of it. Extraneous images are drawn as nested prefixes of one
/// seeded shuffle. Every ordered (query, candidate) pair with
/// similarity >= threshold is a claim.
std::vector<PRPoint> run_inclusion(const TreeManifest& manifest,
                                   const std::vector<std::filesystem::path>& extraneous,
                                   const std::vector<double>& ratios, const std::vector<double>& thresholds,
                                   const Projector& projector, const Stegosystem& stego, std::uint64_t seed,
                                   int jobs = 1);

/// Keeps a seeded uniform sample of round(ratio * nodes) manifest nodes and
/// scores pairs among the survivors.
std::vector<PRPoint> run_deletion(const TreeManifest& manifest, const std::vector<double>& ratios,
                                  const std::vector<double>& thresholds, const Projector& projector,
                                  const Stegosystem& stego, std::uint64_t seed, int jobs = 1);

/// Lists PNG/JPEG files of a directory, sorted by name.
std::vector<std::filesystem::path> list_image_files(const std::filesystem::path& dir);

/// Lowercase hex SHA-256 of a byte string (manifest hashes in summaries).
std::string sha256_hex(std::span<const std::uint8_t> bytes);

/// CSV writers: header row, LF endings, metrics at 6 significant digits.
void write_rows_csv(std::ostream& out, const std::vector<Row>& rows);
void write_pr_csv(std::ostream& out, const std::string& experiment, const std::string& projector,
                  const std::string& stego, const std::vector<PRPoint>& points);

}  // namespace lineage::bench
