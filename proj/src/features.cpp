#include "facehop/features.hpp"

#include <string>

#include "facehop/eig.hpp"
#include "facehop/errors.hpp"

namespace facehop {

namespace {

void check_region(const RegionSpec& region, const ResponseMap& map) {
    if (region.hop != 1 && region.hop != 2) {
        throw ValidationError("region '" + region.name + "' must sit on hop 1 or 2");
    }
    if (region.row_min < 0 || region.col_min < 0 || region.row_min > region.row_max ||
        region.col_min > region.col_max || region.row_max >= map.height || region.col_max >= map.width) {
        throw ValidationError("region '" + region.name + "' [" + std::to_string(region.row_min) + ".." +
                              std::to_string(region.row_max) + "]x[" + std::to_string(region.col_min) +
                              ".." + std::to_string(region.col_max) + "] does not fit a " +
                              std::to_string(map.height) + "x" + std::to_string(map.width) + " grid");
    }
}

Eigen::VectorXd region_sample(const ResponseMap& map, const RegionSpec& region, int channel) {
    Eigen::VectorXd sample(region.dim());
    int i = 0;
    for (int r = region.row_min; r <= region.row_max; ++r) {
        for (int c = region.col_min; c <= region.col_max; ++c) {
            sample[i++] = map.values(static_cast<Eigen::Index>(r) * map.width + c, channel);
        }
    }
    return sample;
}

}  // namespace

std::vector<RegionSpec> default_regions() {
    return {
        {"left_eye", 1, 6, 15, 1, 12},
        {"right_eye", 1, 6, 15, 16, 27},
        {"nose", 1, 9, 20, 9, 18},
        {"mouth", 1, 19, 26, 5, 22},
        {"upper_stripe", 2, 2, 4, 0, 9},
        {"lower_stripe", 2, 6, 9, 0, 9},
        {"vertical_stripe", 2, 0, 9, 3, 6},
    };
}

std::vector<int> FeatureModel::group_dims(const HopModel& tree) const {
    int size = tree.config.input_size;
    int final_grid = 0;
    for (int h = 0; h < 3; ++h) {
        size = size - tree.config.hops[static_cast<std::size_t>(h)].window + 1;
        final_grid = size;
        if (tree.config.hops[static_cast<std::size_t>(h)].pool_after) size /= 2;
    }
    std::vector<int> dims;
    dims.reserve(regions.size() + 1);
    for (const RegionSpec& region : regions) {
        dims.push_back(tree.kept_count(region.hop) * n_components);
    }
    dims.push_back(tree.kept_count(3) * final_grid * final_grid);
    return dims;
}

FeatureModel fit_region_pca(const std::vector<HopOutputs>& outputs,
                            const std::vector<RegionSpec>& regions, int n_components) {
    if (outputs.empty()) {
        throw ValidationError("cannot fit region projections on an empty set");
    }
    if (n_components < 1) {
        throw ValidationError("need at least one projection component, got " +
                              std::to_string(n_components));
    }

    FeatureModel model;
    model.regions = regions;
    model.n_components = n_components;
    model.pcas.reserve(regions.size());

    for (const RegionSpec& region : regions) {
        const ResponseMap& first = outputs.front().hops[static_cast<std::size_t>(region.hop - 1)];
        check_region(region, first);
        if (n_components > region.dim()) {
            throw ValidationError("region '" + region.name + "' has " + std::to_string(region.dim()) +
                                  " responses, fewer than " + std::to_string(n_components) +
                                  " components");
        }
        const int channels = first.channels();
        if (channels == 0) {
            throw ValidationError("hop " + std::to_string(region.hop) +
                                  " kept no channels; region '" + region.name + "' has no samples");
        }

        Eigen::MatrixXd samples(static_cast<Eigen::Index>(outputs.size()) * channels, region.dim());
        if (samples.rows() < region.dim()) {
            throw ValidationError("region '" + region.name + "' has " + std::to_string(samples.rows()) +
                                  " samples for " + std::to_string(region.dim()) +
                                  " dimensions; supply more images");
        }
        Eigen::Index row = 0;
        for (const HopOutputs& out : outputs) {
            const ResponseMap& map = out.hops[static_cast<std::size_t>(region.hop - 1)];
            for (int ch = 0; ch < channels; ++ch) {
                samples.row(row++) = region_sample(map, region, ch).transpose();
            }
        }

        RegionPCA pca;
        pca.fitted_channels = channels;
        pca.mean = samples.colwise().mean();
        samples.rowwise() -= pca.mean.transpose();
        const Eigen::MatrixXd cov =
            samples.transpose() * samples / static_cast<double>(samples.rows());
        // Components are kept even past the data rank so the feature width
        // stays exactly channels x n_components.
        pca.components = sorted_symmetric_eig(cov, n_components).vectors;
        model.pcas.push_back(std::move(pca));
    }
    return model;
}

std::vector<Eigen::VectorXd> extract_features(const FeatureModel& model, const HopOutputs& out) {
    std::vector<Eigen::VectorXd> groups;
    groups.reserve(model.regions.size() + 1);

    for (std::size_t r = 0; r < model.regions.size(); ++r) {
        const RegionSpec& region = model.regions[r];
        const ResponseMap& map = out.hops[static_cast<std::size_t>(region.hop - 1)];
        check_region(region, map);
        const RegionPCA& pca = model.pcas[r];
        const int channels = map.channels();
        if (channels != pca.fitted_channels) {
            throw ValidationError("region '" + region.name + "' was fitted with " +
                                  std::to_string(pca.fitted_channels) + " channels but hop " +
                                  std::to_string(region.hop) + " now has " + std::to_string(channels));
        }
        Eigen::VectorXd feats(static_cast<Eigen::Index>(channels) * model.n_components);
        for (int ch = 0; ch < channels; ++ch) {
            feats.segment(static_cast<Eigen::Index>(ch) * model.n_components, model.n_components) =
                pca.components * (region_sample(map, region, ch) - pca.mean);
        }
        groups.push_back(std::move(feats));
    }

    // Hop-3 responses go in whole, position-major with channels innermost
    // (a single value per channel on the stock 32-pixel cascade).
    const ResponseMap& last = out.hops[2];
    Eigen::VectorXd tail(last.values.size());
    Eigen::Index i = 0;
    for (Eigen::Index pos = 0; pos < last.values.rows(); ++pos) {
        for (Eigen::Index ch = 0; ch < last.values.cols(); ++ch) {
            tail[i++] = last.values(pos, ch);
        }
    }
    groups.push_back(std::move(tail));
    return groups;
}

}  // namespace facehop
