#include "facehop/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "facehop/dataset.hpp"
#include "facehop/errors.hpp"
#include "facehop/image_io.hpp"
#include "facehop/rng.hpp"

namespace facehop {

namespace {

constexpr int kFrame = 64;

void add_blob(Image& img, double cx, double cy, double sigma, double amp) {
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            img.at(x, y) += amp * std::exp(-(dx * dx + dy * dy) * inv);
        }
    }
}

}  // namespace

std::vector<SyntheticSample> make_synthetic_dataset(int count, std::uint64_t seed) {
    if (count < 4) throw ValidationError("synthetic dataset needs at least 4 samples");
    Rng rng(seed);

    // ~60% "neg", ~40% "pos", order shuffled.
    const int n_neg = static_cast<int>(std::lround(count * 0.6));
    std::vector<int> is_pos(static_cast<std::size_t>(count), 0);
    std::fill(is_pos.begin() + n_neg, is_pos.end(), 1);
    rng.shuffle(is_pos);

    std::vector<SyntheticSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        SyntheticSample s;
        s.label = is_pos[static_cast<std::size_t>(i)] ? "pos" : "neg";
        s.image.width = kFrame;
        s.image.height = kFrame;
        s.image.data.assign(static_cast<std::size_t>(kFrame) * kFrame, 0.0);

        // Class signal: smooth vertical ramp, bright top for "neg" and bright
        // bottom for "pos". Being constant along x it is mirror-symmetric, and
        // because it is monotone in y the ordering survives histogram
        // equalization.
        const double sign = is_pos[static_cast<std::size_t>(i)] ? 1.0 : -1.0;
        const double mid = 0.55 * kFrame + rng.uniform(-2.0, 2.0);
        for (int y = 0; y < kFrame; ++y) {
            const double v = 125.0 + sign * 55.0 * std::tanh((y - mid) / 6.0);
            for (int x = 0; x < kFrame; ++x) s.image.at(x, y) = v;
        }

        // Structured nuisance: a few soft blobs so patch covariances have full
        // rank, then white pixel noise.
        for (int b = 0; b < 3; ++b) {
            add_blob(s.image, rng.uniform(0.0, kFrame - 1.0), rng.uniform(0.0, kFrame - 1.0),
                     rng.uniform(3.0, 7.0), rng.uniform(-25.0, 25.0));
        }
        for (double& v : s.image.data) {
            v = std::clamp(v + 10.0 * rng.normal(), 0.0, 255.0);
        }

        s.landmarks.left_x = 0.3 * kFrame + rng.uniform(-1.5, 1.5);
        s.landmarks.left_y = 0.35 * kFrame + rng.uniform(-1.5, 1.5);
        s.landmarks.right_x = 0.7 * kFrame + rng.uniform(-1.5, 1.5);
        s.landmarks.right_y = 0.35 * kFrame + rng.uniform(-1.5, 1.5);
        out.push_back(std::move(s));
    }
    return out;
}

std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, int count,
                                              std::uint64_t seed) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

    const auto samples = make_synthetic_dataset(count, seed);
    std::vector<ManifestEntry> entries;
    entries.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%04zu.pgm", i);
        save_pgm(dir / name, samples[i].image);
        ManifestEntry e;
        e.path = name;  // relative to the manifest
        e.raw_label = samples[i].label;
        e.landmarks = samples[i].landmarks;
        entries.push_back(std::move(e));
    }
    const auto manifest = dir / "manifest.csv";
    save_manifest(manifest, entries);
    return manifest;
}

}  // namespace facehop
