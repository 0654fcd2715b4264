#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "facehop/image.hpp"
#include "facehop/saab.hpp"

namespace facehop {

// One hop of the cascade: window size, how its channels are partitioned, and
// whether a 2x2 max pool follows before the next hop.
struct HopSpec {
    int window = 5;
    PartitionMode mode = PartitionMode::energy_threshold(0.0);
    bool pool_after = true;
};

struct HopConfig {
    int input_size = 32;
    std::array<HopSpec, 3> hops = {HopSpec{}, HopSpec{}, HopSpec{5, PartitionMode::energy_threshold(0.0), false}};
    // Cap on patches pooled per unit fit; above it every s-th patch is taken
    // by global index (image-major) with s chosen to land under the cap.
    std::size_t max_fit_patches = 1'000'000;
};

// One channel of the tree. Channels of later hops descend from the
// intermediate channel they were fitted on; energy is the root-normalized
// share (the input image carries 1).
struct TreeNode {
    int hop = 1;        // 1-based
    int parent = -1;    // node id of the parent channel, -1 under the root
    int unit = 0;       // unit index within the hop
    int channel = 0;    // channel within the unit, 0 = DC
    double energy = 0.0;
    NodeKind kind = NodeKind::Discard;
};

// Fitted cascade. Units are stored pruned (discarded channels removed), so a
// unit's channels line up with the node ids in kept_nodes.
struct HopModel {
    HopConfig config;
    std::vector<std::vector<SaabUnit>> units;           // [hop][unit]
    std::vector<TreeNode> nodes;                        // every channel, discards included
    std::array<std::vector<int>, 3> kept_nodes;         // node ids per hop, unit-major
    std::array<std::vector<int>, 3> forwarded_columns;  // positions in kept_nodes that feed the next hop

    int kept_count(int hop) const { return static_cast<int>(kept_nodes[static_cast<std::size_t>(hop - 1)].size()); }
    int node_count(int hop, NodeKind kind) const;
};

// Per-image responses, one map per hop over that hop's kept channels, taken
// before pooling (hop 1 on the 28x28 grid, hop 2 on 10x10, hop 3 on 1x1 for
// the stock 32-pixel configuration).
struct HopOutputs {
    std::array<ResponseMap, 3> hops;
};

// Fits the full cascade on a training set: hop 1 sees the raw images, later
// hops fit one Saab unit per forwarded channel, energies chain
// multiplicatively down the tree, and each hop is partitioned globally over
// its unit-major channel list.
HopModel fit_tree(const std::vector<Image>& images, const HopConfig& config);

// Runs one image through the fitted cascade. The same routine is used on
// training images after fitting, so features always come from pruned units.
HopOutputs transform(const HopModel& model, const Image& image);

}  // namespace facehop
