#include "support.hpp"

#include "lineage/prng.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace lineage::testing {

fs::path covers_dir() { return fs::path(LINEAGE_TEST_DATA) / "covers"; }

std::vector<fs::path> cover_paths(std::size_t count) {
    std::vector<fs::path> out;
    for (std::size_t i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "cover_%02zu.png", i);
        out.push_back(covers_dir() / name);
    }
    return out;
}

ImageBuffer load_cover(std::size_t index) { return load_image(cover_paths(index + 1).back()); }

std::vector<ImageBuffer> load_covers(std::size_t count) {
    std::vector<ImageBuffer> out;
    for (const auto& p : cover_paths(count)) out.push_back(load_image(p));
    return out;
}

ImageBuffer noise_image(std::uint64_t seed, int width, int height) {
    ImageBuffer img(width, height);
    SplitMix64 rng(seed);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng.next() >> 56);
    return img;
}

TempDir::TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("lineage-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

std::vector<fs::path> make_extraneous(const fs::path& dir, std::size_t count, std::uint64_t seed) {
    fs::create_directories(dir);
    const auto sources = load_covers(50);
    SplitMix64 rng(seed);
    std::vector<fs::path> out;
    for (std::size_t i = 0; i < count; ++i) {
        const ImageBuffer& src = sources[10 + rng.next_below(40)];
        const int side = 96 + static_cast<int>(rng.next_below(129));  // 96..224
        const int x0 = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(src.width() - side + 1)));
        const int y0 = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(src.height() - side + 1)));
        const bool flip = rng.next() & 1;
        const int turns = static_cast<int>(rng.next_below(4));
        ImageBuffer crop(side, side);
        for (int y = 0; y < side; ++y)
            for (int x = 0; x < side; ++x) {
                int sx = flip ? side - 1 - x : x;
                int sy = y;
                for (int t = 0; t < turns; ++t) {
                    const int nx = side - 1 - sy;
                    sy = sx;
                    sx = nx;
                }
                for (int c = 0; c < 3; ++c) crop.at(x, y, c) = src.at(x0 + sx, y0 + sy, c);
            }
        char name[32];
        std::snprintf(name, sizeof name, "extra_%05zu.jpg", i);
        out.push_back(dir / name);
        save_image(resize_bilinear(crop, 256, 256), out.back(), ImageFormat::jpeg, 90);
    }
    return out;
}

FeatureVector grid_colour_features(const ImageBuffer& img) {
    constexpr int kGrid = 4;
    FeatureVector f;
    f.values.reserve(kGrid * kGrid * 6);
    double global = 0.0;
    for (auto v : img.data()) global += v;
    global /= static_cast<double>(img.data().size());
    for (int gy = 0; gy < kGrid; ++gy)
        for (int gx = 0; gx < kGrid; ++gx) {
            const int x0 = gx * img.width() / kGrid, x1 = (gx + 1) * img.width() / kGrid;
            const int y0 = gy * img.height() / kGrid, y1 = (gy + 1) * img.height() / kGrid;
            for (int c = 0; c < 3; ++c) {
                double sum = 0.0, sq = 0.0;
                for (int y = y0; y < y1; ++y)
                    for (int x = x0; x < x1; ++x) {
                        const double v = img.at(x, y, c);
                        sum += v;
                        sq += v * v;
                    }
                const double count = static_cast<double>((x1 - x0) * (y1 - y0));
                const double mean = sum / count;
                f.values.push_back(mean - global);
                f.values.push_back(std::sqrt(std::max(0.0, sq / count - mean * mean)));
            }
        }
    return f;
}

FeatureProvider grid_colour_provider() {
    return [](const ImageBuffer& img, const fs::path&) { return grid_colour_features(img); };
}

fs::path stage_roots(const fs::path& dir, std::size_t count, std::size_t first) {
    fs::create_directories(dir);
    const auto paths = cover_paths(first + count);
    for (std::size_t i = first; i < first + count; ++i) {
        fs::copy_file(paths[i], dir / paths[i].filename(), fs::copy_options::overwrite_existing);
    }
    return dir;
}

TreeManifest build_desk_tree(const fs::path& out_dir, std::size_t roots, std::vector<int> branching,
                             const Projector& projector, StegoMethod method, std::uint64_t master_seed, int jobs) {
    BuildOptions opt;
    opt.roots_dir = covers_dir();
    opt.max_roots = roots;
    opt.out_dir = out_dir;
    opt.branching = std::move(branching);
    opt.master_seed = master_seed;
    opt.stego.method = method;
    opt.created = "2024-01-01T00:00:00Z";
    opt.jobs = jobs;
    return build_tree(opt, projector);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace lineage::testing
