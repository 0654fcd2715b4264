#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "facehop/image.hpp"

namespace facehop {

// Flattened sliding-window patches. grid_h/grid_w record the window-center
// grid when the patches came from one map (0 when rows were pooled across
// images for fitting).
struct PatchMatrix {
    Eigen::MatrixXd values;  // n_samples x patch_dim
    int grid_h = 0;
    int grid_w = 0;
};

enum class NodeKind : std::uint8_t { Intermediate = 0, Leaf = 1, Discard = 2 };

// One fitted Saab transform: the analytic DC kernel plus PCA kernels on the
// DC-removed patch space, a shared nonnegativity bias, and per-channel
// energies (channel 0 = DC, then AC channels in non-increasing eigenvalue
// order).
struct SaabUnit {
    int window = 5;
    Eigen::MatrixXd ac_kernels;  // k x patch_dim, orthonormal rows
    double bias = 0.0;
    Eigen::VectorXd energies;    // k+1 raw energies: [dc variance, eigenvalues...]

    int patch_dim() const { return window * window; }
    int ac_count() const { return static_cast<int>(ac_kernels.rows()); }
    int channel_count() const { return ac_count() + 1; }
    Eigen::VectorXd dc_kernel() const {
        return Eigen::VectorXd::Constant(patch_dim(), 1.0 / std::sqrt(static_cast<double>(patch_dim())));
    }
};

// Per-position responses on a spatial grid; values is (height*width) rows by
// channel columns, positions row-major.
struct ResponseMap {
    int height = 0;
    int width = 0;
    Eigen::MatrixXd values;

    int channels() const { return static_cast<int>(values.cols()); }
};

// How a hop's channels are split into intermediate / (leaf) / discard.
struct PartitionMode {
    enum class Type { Threshold, FixedCounts };
    Type type = Type::FixedCounts;
    double threshold = 0.0;   // root-normalized energy cutoff
    int n_intermediate = 0;   // kept count (labelled Leaf at the final hop)
    int n_discard = 0;

    static PartitionMode fixed(int n_int, int n_disc) {
        return {Type::FixedCounts, 0.0, n_int, n_disc};
    }
    static PartitionMode energy_threshold(double t) { return {Type::Threshold, t, 0, 0}; }
};

// All valid window positions (stride 1) of a single-channel grid, flattened
// row-major over center positions. Requires the grid to be at least window.
PatchMatrix build_neighborhoods(const Image& map, int window);
PatchMatrix build_neighborhoods(const ResponseMap& map, int channel, int window);

// Fits a Saab unit: analytic DC kernel, per-patch DC removal, PCA of the
// centered DC-removed patches for the AC kernels (eigenvalue-ranked, sign
// fixed so each kernel's largest-magnitude entry is positive), bias set to
// (1 + 1e-6) x the largest training-patch norm. Keeps at most max_kept AC
// channels and drops directions with eigenvalue <= 1e-12 x the largest.
SaabUnit fit_saab(const PatchMatrix& patches, int max_kept);

// Applies the transform: channel 0 = dc.patch + bias, channel j =
// ac_j.(patch - DC part) + bias.
ResponseMap apply_saab(const SaabUnit& unit, const PatchMatrix& patches);

// Splits one hop's channels by root-normalized energy. is_dc marks each
// unit's channel 0; DC channels are always kept. With FixedCounts the kept
// group is the top n_intermediate by energy (ties to the lower index) and
// counts must cover every channel. At the final hop kept channels are Leaf
// instead of Intermediate.
std::vector<NodeKind> partition_channels(const std::vector<double>& energies,
                                         const std::vector<bool>& is_dc,
                                         const PartitionMode& mode, bool final_hop);

// Keeps only the channels that are not discarded (kernels and energies
// alike, in their original relative order). kinds has one entry per channel
// (DC first) and kinds[0] must not be Discard.
SaabUnit prune_unit(const SaabUnit& unit, const std::vector<NodeKind>& kinds);

// Disjoint 2x2 block max per channel. Requires even height and width.
ResponseMap max_pool(const ResponseMap& map);

}  // namespace facehop
