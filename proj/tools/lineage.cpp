// lineage: command-line front end for trait projection, embedding, tree
// building, parent matching, the accuracy model and the benchmarks.
//
// Exit status: 0 on success, 1 on operational failure, 2 on usage errors.
// Machine output goes to stdout (or --out); everything else to stderr.

#include "lineage/bench.hpp"
#include "lineage/channel.hpp"
#include "lineage/error.hpp"
#include "lineage/hex.hpp"
#include "lineage/imaging.hpp"
#include "lineage/phylogeny.hpp"
#include "lineage/projector.hpp"
#include "lineage/stego.hpp"
#include "lineage/theory.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace lineage;

namespace {

// Thrown for bad flag values that CLI11 cannot catch on its own.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string seed = "0";
    std::string key;
    std::string projector = "sha256";
    std::string stego = "qim";
    std::size_t bits = 64;
    double threshold = 0.75;
    std::string out;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    bool pad = false;
    std::string features;
    std::string features_dir;
    double qim_delta = 6.0;
    double iss_alpha = 3.0;
    double iss_lambda = 1.0;
};

std::uint64_t parse_u64(const std::string& text, const char* what) {
    try {
        if (text.starts_with("0x") || text.starts_with("0X")) return parse_hex64(text);
        std::size_t used = 0;
        const auto v = std::stoull(text, &used, 10);
        if (used != text.size() || text.starts_with("-")) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string(what) + " must be a decimal or 0x-prefixed 64-bit integer, got '" + text + "'");
    }
}

std::string timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void add_globals(CLI::App* cmd, Globals& g) {
    cmd->add_option("--seed", g.seed, "64-bit seed (decimal or 0x hex): randproj matrix, master seed, sampling")
        ->capture_default_str();
    cmd->add_option("--key", g.key, "Stego key seed; defaults to --seed");
    cmd->add_option("--projector", g.projector, "Trait projector")
        ->check(CLI::IsMember({"sha256", "phash", "randproj"}))
        ->capture_default_str();
    cmd->add_option("--stego", g.stego, "Stegosystem")->check(CLI::IsMember({"qim", "iss"}))->capture_default_str();
    cmd->add_option("--bits", g.bits, "Trait length in bits")->check(CLI::Range(1, 4096))->capture_default_str();
    cmd->add_option("--threshold", g.threshold, "Nomination threshold on bit agreement")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--out", g.out, "Output file (default: standard output)");
    cmd->add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_flag("--pad", g.pad, "Resize every input image to 256x256 before processing");
    cmd->add_option("--features", g.features, "Feature-vector file (.fvec or text) for the randproj projector");
    cmd->add_option("--features-dir", g.features_dir,
                    "Directory of <image stem>.fvec|.txt feature files for randproj");
    cmd->add_option("--qim-delta", g.qim_delta, "QIM quantisation step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--iss-alpha", g.iss_alpha, "ISS signal amplitude")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--iss-lambda", g.iss_lambda, "ISS host-rejection factor")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
}

ProjectorSpec projector_spec(const Globals& g) {
    ProjectorSpec spec;
    spec.kind = projector_kind_from_string(g.projector);
    spec.bits = g.bits;
    spec.seed = parse_u64(g.seed, "--seed");
    try {
        spec.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    return spec;
}

FeatureProvider feature_provider(const Globals& g) {
    if (!g.features.empty()) {
        const fs::path file = g.features;
        return [file](const ImageBuffer&, const fs::path&) { return load_features(file); };
    }
    return sidecar_feature_provider(g.features_dir);
}

StegoConfig stego_config(const Globals& g) {
    StegoConfig cfg;
    cfg.method = stego_method_from_string(g.stego);
    cfg.qim.delta = g.qim_delta;
    cfg.iss.alpha = g.iss_alpha;
    cfg.iss.lambda = g.iss_lambda;
    try {
        cfg.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    return cfg;
}

std::uint64_t key_seed(const Globals& g) { return g.key.empty() ? parse_u64(g.seed, "--seed") : parse_u64(g.key, "--key"); }

ImageBuffer read_input(const Globals& g, const fs::path& path) {
    if (g.pad) return resize_bilinear(load_image_any_size(path), 256, 256);
    return load_image(path);
}

// Source path handed to the feature provider; padded content no longer
// matches whatever the sidecar describes.
fs::path feature_source(const Globals& g, const fs::path& path) { return g.pad ? fs::path{} : path; }

void emit(const Globals& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream f(g.out, std::ios::binary);
    if (!f) throw IoError("cannot write " + g.out);
    f << text;
    if (!f) throw IoError("failed writing " + g.out);
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string(what) + ": '" + item + "' is not a number");
        }
    }
    if (out.empty()) throw UsageError(std::string(what) + " must not be empty");
    return out;
}

// Projector for pipelines over a manifest: explicit --projector wins,
// otherwise the one recorded with the tree (whose randproj seed is kept even
// when --seed is given for sampling).
ProjectorSpec pool_projector(const Globals& g, const TreeManifest& m, const CLI::App* cmd) {
    if (cmd->count("--projector") > 0 || m.nodes.empty()) return projector_spec(g);
    ProjectorSpec spec = m.nodes.front().projector;
    if (cmd->count("--bits") > 0) spec.bits = g.bits;
    return spec;
}

std::string read_text(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

json summary(const std::string& experiment, const fs::path& manifest_path, const TreeManifest& m,
             const ProjectorSpec& proj, json config) {
    const std::string text = read_text(manifest_path);
    json j;
    j["experiment"] = experiment;
    j["manifest"] = manifest_path.string();
    j["manifest_sha256"] = bench::sha256_hex({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
    j["master_seed"] = hex64(m.master_seed);
    j["projector"] = {{"kind", to_string(proj.kind)}, {"bits", proj.bits}, {"seed", hex64(proj.seed)}};
    j["stego"] = to_string(m.stego.method);
    j["config"] = std::move(config);
    j["timestamp"] = timestamp();
    return j;
}

struct BenchFlags {
    std::string manifest;
    std::string op = "jpeg";
    std::string severities = "0,0.25,0.5,0.75,1";
    std::string ratios;
    std::string thresholds;
    std::string extraneous;
    std::string summary;
};

void write_summary(const Globals& g, const BenchFlags& b, const json& s) {
    const std::string text = s.dump(2) + "\n";
    if (!b.summary.empty()) {
        std::ofstream f(b.summary, std::ios::binary);
        if (!f) throw IoError("cannot write " + b.summary);
        f << text;
    } else if (!g.out.empty()) {
        std::cout << text;
    }
}

int run(int argc, char** argv) {
    Globals g;
    CLI::App app{"Steganographic inheritance of image traits: embed, trace and benchmark"};
    app.name("lineage");
    app.require_subcommand(1);

    // project
    std::string image;
    auto* project = app.add_subcommand("project", "Print the trait of an image as hex");
    project->add_option("image", image, "Image file (PNG or JPEG)")->required();
    add_globals(project, g);
    project->callback([&] {
        const auto spec = projector_spec(g);
        const Projector proj(spec, feature_provider(g));
        emit(g, proj.project(read_input(g, image), feature_source(g, image)).to_hex() + "\n");
    });

    // embed
    std::string trait_hex, parent_path, output_image;
    auto* embed = app.add_subcommand("embed", "Hide a trait in a cover image");
    embed->add_option("cover", image, "Cover image")->required();
    auto* trait_opt = embed->add_option("--trait", trait_hex, "Trait to embed, as hex");
    embed->add_option("--parent", parent_path, "Embed the projected trait of this image instead")
        ->excludes(trait_opt);
    embed->add_option("--image-out", output_image, "Stego image path (.png or .jpg)")->required();
    add_globals(embed, g);
    embed->callback([&] {
        const auto cfg = stego_config(g);
        if (trait_hex.empty() && parent_path.empty()) throw UsageError("one of --trait or --parent is required");
        Trait trait;
        if (!trait_hex.empty()) {
            try {
                trait = Trait::from_hex(trait_hex);
            } catch (const FormatError& e) {
                throw UsageError(e.what());
            }
        } else {
            const Projector proj(projector_spec(g), feature_provider(g));
            trait = proj.project(read_input(g, parent_path), feature_source(g, parent_path));
        }
        const Stegosystem stego(cfg, key_seed(g));
        save_image(stego.embed(read_input(g, image), trait), output_image, format_for_path(output_image));
        emit(g, trait.to_hex() + "\n");
    });

    // extract
    auto* extract = app.add_subcommand("extract", "Recover the hidden trait of an image as hex");
    extract->add_option("image", image, "Stego image")->required();
    add_globals(extract, g);
    extract->callback([&] {
        const Stegosystem stego(stego_config(g), key_seed(g));
        emit(g, stego.extract(read_input(g, image), g.bits).to_hex() + "\n");
    });

    // inherit
    std::string cover_path;
    auto* inherit_cmd = app.add_subcommand("inherit", "Project a parent and embed its trait into an offspring cover");
    inherit_cmd->add_option("--parent", parent_path, "Parent image")->required();
    inherit_cmd->add_option("--cover", cover_path, "Offspring cover image")->required();
    inherit_cmd->add_option("--image-out", output_image, "Stego offspring path (.png or .jpg)")->required();
    add_globals(inherit_cmd, g);
    inherit_cmd->callback([&] {
        const auto spec = projector_spec(g);
        const auto cfg = stego_config(g);
        const Projector proj(spec, feature_provider(g));
        const Stegosystem stego(cfg, key_seed(g));
        const auto result = inherit(read_input(g, parent_path), read_input(g, cover_path), proj, stego,
                                    feature_source(g, parent_path));
        save_image(result.offspring, output_image, format_for_path(output_image));
        json j;
        j["path"] = output_image;
        j["trait_embedded"] = result.trait.to_hex();
        j["key_seed"] = hex64(stego.key_seed());
        j["projector"] = {{"kind", to_string(spec.kind)}, {"bits", spec.bits}, {"seed", hex64(spec.seed)}};
        j["stego"] = to_string(cfg.method);
        emit(g, j.dump(2) + "\n");
    });

    // tree build
    std::string roots_dir, out_dir, branching_text = "3,2,1";
    std::vector<std::string> covers_dirs;
    std::size_t max_roots = 0;
    auto* tree = app.add_subcommand("tree", "Phylogenetic tree construction");
    tree->require_subcommand(1);
    auto* build = tree->add_subcommand("build", "Build an inheritance tree from a directory of root images");
    build->add_option("--roots", roots_dir, "Directory of root images")->required();
    build->add_option("--out-dir", out_dir, "Output directory (images/ and manifest.json)")->required();
    build->add_option("--branching", branching_text, "Children per node, per generation")->capture_default_str();
    build->add_option("--max-roots", max_roots, "Use only the first N roots (0 = all)")->capture_default_str();
    build->add_option("--covers-dir", covers_dirs,
                      "Externally generated offspring covers, one directory per generation, files named <id>.png");
    add_globals(build, g);
    build->callback([&] {
        BuildOptions opt;
        opt.roots_dir = roots_dir;
        opt.out_dir = out_dir;
        opt.branching.clear();
        for (double b : parse_list(branching_text, "--branching")) {
            if (b < 1 || b != std::floor(b)) throw UsageError("--branching entries must be positive integers");
            opt.branching.push_back(static_cast<int>(b));
        }
        opt.master_seed = parse_u64(g.seed, "--seed");
        opt.stego = stego_config(g);
        for (const auto& d : covers_dirs) opt.covers_dirs.emplace_back(d);
        if (!opt.covers_dirs.empty() && opt.covers_dirs.size() != opt.branching.size()) {
            throw UsageError("--covers-dir must be given once per generation");
        }
        opt.pad = g.pad;
        opt.max_roots = max_roots;
        opt.created = timestamp();
        opt.jobs = g.jobs;
        const Projector proj(projector_spec(g), sidecar_feature_provider(g.features_dir));
        const auto manifest = build_tree(opt, proj);
        json j;
        j["manifest"] = (fs::path(out_dir) / "manifest.json").string();
        j["nodes"] = manifest.nodes.size();
        j["stego_key_seed"] = hex64(manifest.stego_key_seed);
        emit(g, j.dump(2) + "\n");
    });

    // match
    std::string pool_path;
    std::size_t top_k = 5;
    auto* match = app.add_subcommand("match", "Nominate the parent of a query image from a pool, or abstain");
    match->add_option("--query", image, "Query image")->required();
    match->add_option("--pool", pool_path, "Pool manifest (manifest.json)")->required();
    match->add_option("--top-k", top_k, "Length of the ranked list")->capture_default_str();
    add_globals(match, g);
    match->callback([&] {
        const auto pool = TreeManifest::load(pool_path);
        if (pool.nodes.empty()) throw IoError("pool manifest " + pool_path + " has no nodes");
        const auto spec = pool_projector(g, pool, match);
        const Projector proj(spec, sidecar_feature_provider(g.features_dir));
        const Stegosystem stego(pool.stego, g.key.empty() ? pool.stego_key_seed : parse_u64(g.key, "--key"));
        const auto result = match_query(read_input(g, image), pool, proj, stego, g.threshold, top_k, g.jobs);
        emit(g, result.to_json());
    });

    // channel apply
    std::string op_name;
    double severity = 0.0;
    auto* channel = app.add_subcommand("channel", "Common processing operations");
    channel->require_subcommand(1);
    auto* channel_apply = channel->add_subcommand("apply", "Apply one operation at a severity");
    channel_apply->add_option("image", image, "Input image")->required();
    channel_apply->add_option("--op", op_name, "Operation id")
        ->required()
        ->check(CLI::IsMember([] {
            std::vector<std::string> names;
            for (auto op : kAllOps) names.push_back(to_string(op));
            return names;
        }()));
    channel_apply->add_option("--severity", severity, "Severity in [-1,1] (signed ops) or [0,1]")->required();
    channel_apply->add_option("--image-out", output_image, "Output image path (.png or .jpg)")->required();
    add_globals(channel_apply, g);
    channel_apply->callback([&] {
        const ChannelOp op{op_from_string(op_name), severity, parse_u64(g.seed, "--seed")};
        try {
            op.validate();
        } catch (const InvalidArgument& e) {
            throw UsageError(e.what());
        }
        save_image(apply(read_input(g, image), op), output_image, format_for_path(output_image));
    });

    // theory curve / check
    int n_bits = 64;
    std::string p_text = "0.5,0.55,0.6";
    std::string q_text = "0.5,0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95,1";
    std::string pool_text = "10,100,1600";
    double p = 0.5, q = 0.5;
    std::int64_t pool_size = 2, trials = 100000;
    auto* theory_cmd = app.add_subcommand("theory", "Closed-form phylogenetic accuracy");
    theory_cmd->require_subcommand(1);
    auto* curve = theory_cmd->add_subcommand("curve", "Accuracy over a (p, q, N) grid as CSV");
    curve->add_option("--n", n_bits, "Trait bits")->check(CLI::Range(1, 100000))->capture_default_str();
    curve->add_option("--p", p_text, "Projector agreement rates")->capture_default_str();
    curve->add_option("--q", q_text, "Stegosystem bit accuracies")->capture_default_str();
    curve->add_option("--N", pool_text, "Pool sizes")->capture_default_str();
    add_globals(curve, g);
    curve->callback([&] {
        const auto ps = parse_list(p_text, "--p");
        const auto qs = parse_list(q_text, "--q");
        std::vector<std::int64_t> pools;
        for (double v : parse_list(pool_text, "--N")) {
            if (v < 1 || v != std::floor(v)) throw UsageError("--N entries must be positive integers");
            pools.push_back(static_cast<std::int64_t>(v));
        }
        for (double v : ps)
            if (!(v >= 0 && v <= 1)) throw UsageError("--p entries must lie in [0, 1]");
        for (double v : qs)
            if (!(v >= 0 && v <= 1)) throw UsageError("--q entries must lie in [0, 1]");
        std::ostringstream csv;
        theory::write_curve_csv(csv, theory::accuracy_curve(n_bits, ps, qs, pools, g.jobs));
        emit(g, csv.str());
    });
    auto* check = theory_cmd->add_subcommand("check", "Compare the closed form against Monte Carlo");
    check->add_option("--n", n_bits, "Trait bits")->check(CLI::Range(1, 100000))->capture_default_str();
    check->add_option("--p", p, "Unrelated-candidate bit agreement")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    check->add_option("--q", q, "Stegosystem bit accuracy")->check(CLI::Range(0.0, 1.0))->capture_default_str();
    check->add_option("--N", pool_size, "Pool size")->check(CLI::PositiveNumber)->capture_default_str();
    check->add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber)->capture_default_str();
    add_globals(check, g);
    check->callback([&] {
        const theory::Params params{n_bits, p, q, pool_size};
        const double closed = theory::phylo_accuracy(params);
        const auto mc = theory::mc_accuracy(params, trials, parse_u64(g.seed, "--seed"));
        const double gap = std::abs(closed - mc.estimate);
        const bool ok = mc.std_error > 0 ? gap <= 4 * mc.std_error : gap == 0.0;
        json j;
        j["n"] = n_bits;
        j["p"] = p;
        j["q"] = q;
        j["N"] = pool_size;
        j["closed_form"] = closed;
        j["mc_estimate"] = mc.estimate;
        j["mc_std_error"] = mc.std_error;
        j["trials"] = mc.trials;
        j["within_4se"] = ok;
        emit(g, j.dump(2) + "\n");
        if (!ok) throw Error("closed form and Monte Carlo disagree by more than 4 standard errors");
    });

    // bench
    BenchFlags bf;
    auto* bench_cmd = app.add_subcommand("bench", "Desk-scale benchmarks over a built tree");
    bench_cmd->require_subcommand(1);
    auto add_bench_common = [&](CLI::App* cmd) {
        cmd->add_option("--manifest", bf.manifest, "Tree manifest (manifest.json)")->required();
        cmd->add_option("--summary", bf.summary, "Write the JSON summary here");
        add_globals(cmd, g);
    };
    auto* distortion = bench_cmd->add_subcommand("distortion", "Stegosystem bit agreement under one operation");
    distortion->add_option("--op", bf.op, "Operation id")->capture_default_str();
    distortion->add_option("--severities", bf.severities, "Severity sweep")->capture_default_str();
    add_bench_common(distortion);
    auto* retrieval = bench_cmd->add_subcommand("retrieval", "Top-1 phylogenetic accuracy under one operation");
    retrieval->add_option("--op", bf.op, "Operation id")->capture_default_str();
    retrieval->add_option("--severities", bf.severities, "Severity sweep")->capture_default_str();
    add_bench_common(retrieval);
    auto* inclusion = bench_cmd->add_subcommand("inclusion", "Precision/recall as extraneous images are added");
    inclusion->add_option("--extraneous", bf.extraneous, "Directory of unrelated images")->required();
    inclusion->add_option("--ratios", bf.ratios, "Relevant fraction of the pool (default 1,0.5,0.2,0.1)");
    inclusion->add_option("--thresholds", bf.thresholds, "Thresholds to sweep (default: --threshold)");
    add_bench_common(inclusion);
    auto* deletion = bench_cmd->add_subcommand("deletion", "Precision/recall as tree nodes are removed");
    deletion->add_option("--ratios", bf.ratios, "Retained fraction of the tree (default 1,0.8,0.6,0.4,0.2)");
    deletion->add_option("--thresholds", bf.thresholds, "Thresholds to sweep (default: --threshold)");
    add_bench_common(deletion);

    auto bench_callback = [&](const std::string& experiment, CLI::App* cmd) {
        return [&, experiment, cmd] {
            const auto manifest = TreeManifest::load(bf.manifest);
            const auto spec = pool_projector(g, manifest, cmd);
            const Projector proj(spec, sidecar_feature_provider(g.features_dir));
            const Stegosystem stego(manifest.stego, manifest.stego_key_seed);
            const auto seed = parse_u64(g.seed, "--seed");
            json config = {{"seed", hex64(seed)}, {"threshold", g.threshold}};
            std::ostringstream csv;
            if (experiment == "distortion" || experiment == "retrieval") {
                OpId op;
                try {
                    op = op_from_string(bf.op);
                } catch (const InvalidArgument& e) {
                    throw UsageError(e.what());
                }
                const auto sev = parse_list(bf.severities, "--severities");
                for (double s : sev) {
                    try {
                        ChannelOp{op, s, 0}.validate();
                    } catch (const InvalidArgument& e) {
                        throw UsageError(e.what());
                    }
                }
                config["op"] = bf.op;
                config["severities"] = sev;
                const auto rows = experiment == "distortion"
                                      ? bench::estimate_stego_agreement(manifest, op, sev, stego, g.jobs)
                                      : bench::run_distortion_retrieval(manifest, op, sev, proj, stego, g.jobs);
                bench::write_rows_csv(csv, rows);
            } else {
                const auto ratios = parse_list(
                    bf.ratios.empty() ? (experiment == "inclusion" ? "1,0.5,0.2,0.1" : "1,0.8,0.6,0.4,0.2")
                                      : bf.ratios,
                    "--ratios");
                const auto thresholds =
                    bf.thresholds.empty() ? std::vector<double>{g.threshold} : parse_list(bf.thresholds, "--thresholds");
                for (double r : ratios)
                    if (!(r > 0 && r <= 1)) throw UsageError("--ratios entries must lie in (0, 1]");
                config["ratios"] = ratios;
                config["thresholds"] = thresholds;
                std::vector<bench::PRPoint> points;
                if (experiment == "inclusion") {
                    config["extraneous"] = bf.extraneous;
                    points = bench::run_inclusion(manifest, bench::list_image_files(bf.extraneous), ratios,
                                                  thresholds, proj, stego, seed, g.jobs);
                } else {
                    points = bench::run_deletion(manifest, ratios, thresholds, proj, stego, seed, g.jobs);
                }
                bench::write_pr_csv(csv, experiment, to_string(spec.kind), to_string(manifest.stego.method), points);
            }
            emit(g, csv.str());
            write_summary(g, bf, summary(experiment, bf.manifest, manifest, spec, std::move(config)));
        };
    };
    distortion->callback(bench_callback("distortion", distortion));
    retrieval->callback(bench_callback("retrieval", retrieval));
    inclusion->callback(bench_callback("inclusion", inclusion));
    deletion->callback(bench_callback("deletion", deletion));

    // quality
    std::string other;
    auto* quality = app.add_subcommand("quality", "PSNR and SSIM between two images");
    quality->add_option("reference", image, "Reference image")->required();
    quality->add_option("test", other, "Test image")->required();
    add_globals(quality, g);
    quality->callback([&] {
        const auto a = read_input(g, image);
        const auto b = read_input(g, other);
        const double db = psnr(a, b);
        json j;
        j["psnr"] = std::isinf(db) ? json("inf") : json(db);
        j["ssim"] = ssim(a, b);
        emit(g, j.dump(2) + "\n");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "lineage: usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "lineage: error: " << e.what() << "\n";
        return 1;
    }
}
