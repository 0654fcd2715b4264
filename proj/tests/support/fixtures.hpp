#pragma once

// Shared fixtures: a quickly trainable miniature configuration, the
// synthetic dataset in preprocessed form, and zero-weight skeleton models
// whose shapes mimic the full-size configurations (for size and width
// checks without any training).

#include <array>
#include <utility>
#include <vector>

#include "facehop/config.hpp"
#include "facehop/model.hpp"
#include "facehop/pipeline.hpp"
#include "facehop/synthetic.hpp"

namespace fixtures {

inline facehop::LoadedDataset tiny_synthetic(int n, std::uint64_t seed) {
    const auto samples = facehop::make_synthetic_dataset(n, seed);
    facehop::LoadedDataset out;
    out.label_names = {"neg", "pos"};
    out.images.reserve(samples.size());
    out.labels.reserve(samples.size());
    for (const auto& s : samples) {
        out.images.push_back(facehop::preprocess_image(s.image, s.landmarks));
        out.labels.push_back(s.label == "pos" ? 1 : 0);
    }
    return out;
}

// A drastically thinned cascade plus two small regions: trains in well
// under a second on 40 images.
inline facehop::RunConfig tiny_config() {
    facehop::RunConfig cfg;
    cfg.hop.hops[0].mode = facehop::PartitionMode::fixed(4, 21);
    cfg.hop.hops[1].mode = facehop::PartitionMode::fixed(8, 92);
    cfg.hop.hops[2].mode = facehop::PartitionMode::fixed(12, 188);
    cfg.regions = {
        {"eye_band", 1, 6, 9, 4, 23},  // 4x20 on the 28x28 grid
        {"mid_band", 2, 3, 6, 2, 7},   // 4x6 on the 10x10 grid
    };
    cfg.n_components = 3;
    cfg.folds = 3;
    cfg.repetitions = 2;
    return cfg;
}

inline facehop::SaabUnit zero_unit(int channels) {
    facehop::SaabUnit u;
    u.window = 5;
    u.ac_kernels = Eigen::MatrixXd::Zero(channels - 1, 25);
    u.energies = Eigen::VectorXd::Zero(channels);
    u.bias = 1.0;
    return u;
}

inline facehop::LRModel zero_lr(int dim) {
    facehop::LRModel lr;
    lr.scaler.mean = Eigen::VectorXd::Zero(dim);
    lr.scaler.stddev = Eigen::VectorXd::Ones(dim);
    lr.weights = Eigen::VectorXd::Zero(dim);
    lr.intercept = 0.0;
    return lr;
}

// kept[h] = channels surviving hop h+1. Hop 1 is one unit; each later hop
// has one unit per surviving channel of the previous hop, with the kept
// channels spread as evenly as possible.
inline facehop::FaceHopModel skeleton_model(const std::array<int, 3>& kept, int n_components) {
    facehop::FaceHopModel m;
    m.variant = facehop::Variant::II;
    m.label_names = {"a", "b"};

    m.tree.units.assign(3, {});
    m.tree.units[0].push_back(zero_unit(kept[0]));
    for (int hop = 1; hop < 3; ++hop) {
        const int units = kept[static_cast<std::size_t>(hop - 1)];
        const int total = kept[static_cast<std::size_t>(hop)];
        const int base = total / units;
        const int extra = total % units;
        for (int u = 0; u < units; ++u) {
            m.tree.units[static_cast<std::size_t>(hop)].push_back(
                zero_unit(base + (u < extra ? 1 : 0)));
        }
    }
    for (int hop = 0; hop < 3; ++hop) {
        m.tree.kept_nodes[static_cast<std::size_t>(hop)].assign(
            static_cast<std::size_t>(kept[static_cast<std::size_t>(hop)]), 0);
    }

    m.features.regions = facehop::default_regions();
    m.features.n_components = n_components;
    for (const auto& r : m.features.regions) {
        facehop::RegionPCA pca;
        pca.mean = Eigen::VectorXd::Zero(r.dim());
        pca.components = Eigen::MatrixXd::Zero(n_components, r.dim());
        pca.fitted_channels = kept[static_cast<std::size_t>(r.hop - 1)];
        m.features.pcas.push_back(std::move(pca));
    }

    const auto dims = m.features.group_dims(m.tree);
    for (int d : dims) m.ensemble.base.push_back(zero_lr(d));
    m.ensemble.meta_groups = facehop::variant_groups(m.features.regions, m.variant);
    m.ensemble.meta = zero_lr(static_cast<int>(m.ensemble.meta_groups.size()));
    return m;
}

}  // namespace fixtures
