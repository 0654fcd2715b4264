#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "facehop/hoptree.hpp"

namespace facehop {

// A rectangular window on a hop's response grid, rows/columns inclusive.
struct RegionSpec {
    std::string name;
    int hop = 1;  // 1 or 2; hop 3 responses are used whole, without a region
    int row_min = 0;
    int row_max = 0;
    int col_min = 0;
    int col_max = 0;

    int rows() const { return row_max - row_min + 1; }
    int cols() const { return col_max - col_min + 1; }
    int dim() const { return rows() * cols(); }
};

// The stock layout: four hop-1 regions on the 28x28 grid (both eyes, nose,
// mouth) and three hop-2 stripes on the 10x10 grid (upper and lower face
// bands plus a vertical center band).
std::vector<RegionSpec> default_regions();

// One PCA per region, shared across channels: every (image, channel) pair
// contributes the region's flattened response as a sample.
struct RegionPCA {
    Eigen::VectorXd mean;        // region dim
    Eigen::MatrixXd components;  // n_components x region dim, orthonormal rows
    int fitted_channels = 0;     // hop channel count seen at fit time
};

struct FeatureModel {
    std::vector<RegionSpec> regions;
    std::vector<RegionPCA> pcas;  // parallel to regions
    int n_components = 15;

    // Per-group feature widths given the hop channel counts; groups are the
    // regions in order followed by the hop-3 group.
    std::vector<int> group_dims(const HopModel& tree) const;
};

FeatureModel fit_region_pca(const std::vector<HopOutputs>& outputs,
                            const std::vector<RegionSpec>& regions, int n_components);

// One feature vector per region (channel-major: all components of channel 0,
// then channel 1, ...) plus a final vector of the raw hop-3 responses.
std::vector<Eigen::VectorXd> extract_features(const FeatureModel& model, const HopOutputs& out);

}  // namespace facehop
