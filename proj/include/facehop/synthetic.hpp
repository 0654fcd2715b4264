#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "facehop/image.hpp"
#include "facehop/preprocess.hpp"

namespace facehop {

// Self-contained two-class test data: 64x64 frames whose classes differ by
// a smooth vertical brightness template (bright-top vs bright-bottom, so a
// horizontal flip never changes the class), plus random blobs and pixel
// noise, with eye landmarks jittered around fixed positions. Classes are
// imbalanced roughly 60/40 ("neg" majority, "pos" minority) so balancing
// augmentation has work to do.
struct SyntheticSample {
    Image image;
    Landmarks landmarks;
    std::string label;  // "neg" or "pos"
};

std::vector<SyntheticSample> make_synthetic_dataset(int count, std::uint64_t seed);

// Writes PGMs plus a manifest.csv into dir (created if needed) and returns
// the manifest path.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, int count,
                                              std::uint64_t seed);

}  // namespace facehop
