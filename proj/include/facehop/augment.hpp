#pragma once

#include <cstdint>
#include <vector>

#include "facehop/image.hpp"

namespace facehop {

// Horizontal mirror (columns reversed).
Image flip_h(const Image& img);

// Pairs every image with its Euclidean nearest neighbor in a compact PCA
// space: components are the fewest top-variance directions covering at least
// 90% of the total variance. Distance ties and the survivor of a mutual pair
// both resolve to the earlier index, and each unordered pair appears once,
// in first-occurrence order.
struct NnPair {
    int a = 0;
    int b = 0;
};
std::vector<NnPair> nearest_neighbor_pairs(const std::vector<Image>& images);

// Pixel-wise mean of two same-sized images, clamped to [0, 255].
Image average_images(const Image& x, const Image& y);

// One synthesized average per nearest-neighbor pair, in pair order.
std::vector<Image> nn_average(const std::vector<Image>& images);

// How a sample of an augmented set came to be.
enum class Provenance : std::uint8_t { Original, Flipped, Averaged };

struct AugmentedSet {
    std::vector<Image> images;
    std::vector<int> labels;
    std::vector<Provenance> provenance;
    // Source positions within this very set (-1 when unused): the source of
    // a flip, both sources of an average. Originals come first and keep
    // their input order, so for them position and input index coincide.
    std::vector<int> source_a;
    std::vector<int> source_b;

    std::size_t size() const { return images.size(); }
};

// Evens out a two-class set by growing the minority class, first with
// horizontal flips of its images (in order, only as many as needed), then
// with nearest-neighbor averages over the enlarged minority pool, until
// minority/majority reaches target_ratio or the material runs out. The
// majority class is never synthesized for and may stay slightly larger.
// Intended for the training split only; evaluation data is never
// synthesized.
AugmentedSet balance(const std::vector<Image>& images, const std::vector<int>& labels,
                     double target_ratio = 0.9);

}  // namespace facehop
