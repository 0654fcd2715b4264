#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "facehop/features.hpp"
#include "facehop/hoptree.hpp"
#include "facehop/model.hpp"

namespace facehop {

// Everything a training or evaluation run needs. The defaults reproduce the
// stock configuration: 3 hops of 5x5 windows with fixed channel counts
// 18/7, 122/328, 233/2817, the 7 stock regions, 15 projection components,
// lambda 1e-3, FaceHop II, balancing augmentation, 4 repetitions of an
// 80/20 stratified split.
struct RunConfig {
    std::filesystem::path manifest;
    std::uint64_t seed = 42;
    double train_fraction = 0.8;
    HopConfig hop;
    std::vector<RegionSpec> regions = default_regions();
    int n_components = 15;
    double lambda = 1e-3;
    Variant variant = Variant::II;
    bool augment_enabled = true;
    double augment_ratio = 0.9;
    int repetitions = 4;
    int folds = 5;

    RunConfig() {
        hop.hops[0].mode = PartitionMode::fixed(18, 7);
        hop.hops[1].mode = PartitionMode::fixed(122, 328);
        hop.hops[2].mode = PartitionMode::fixed(233, 2817);
    }
};

// Parses a flat key = value file ('#' lines are comments). Unknown keys and
// malformed values raise ValidationError with the file and line. Any
// region.<name> key replaces the stock region list; regions keep file
// order. See the README for the full key reference.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace facehop
