#include "facehop/saab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "facehop/eig.hpp"
#include "facehop/errors.hpp"

namespace facehop {

namespace {

void check_window(int grid_h, int grid_w, int window) {
    if (window < 1) {
        throw ValidationError("window must be positive, got " + std::to_string(window));
    }
    if (grid_h < window || grid_w < window) {
        throw ValidationError("grid " + std::to_string(grid_h) + "x" + std::to_string(grid_w) +
                              " too small for window " + std::to_string(window));
    }
}

}  // namespace

PatchMatrix build_neighborhoods(const Image& map, int window) {
    check_window(map.height, map.width, window);
    const int out_h = map.height - window + 1;
    const int out_w = map.width - window + 1;
    PatchMatrix patches;
    patches.grid_h = out_h;
    patches.grid_w = out_w;
    patches.values.resize(static_cast<Eigen::Index>(out_h) * out_w, window * window);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const Eigen::Index row = static_cast<Eigen::Index>(y) * out_w + x;
            int col = 0;
            for (int dy = 0; dy < window; ++dy) {
                for (int dx = 0; dx < window; ++dx) {
                    patches.values(row, col++) = map.at(x + dx, y + dy);
                }
            }
        }
    }
    return patches;
}

PatchMatrix build_neighborhoods(const ResponseMap& map, int channel, int window) {
    check_window(map.height, map.width, window);
    if (channel < 0 || channel >= map.channels()) {
        throw ValidationError("channel " + std::to_string(channel) + " out of range [0, " +
                              std::to_string(map.channels()) + ")");
    }
    const int out_h = map.height - window + 1;
    const int out_w = map.width - window + 1;
    PatchMatrix patches;
    patches.grid_h = out_h;
    patches.grid_w = out_w;
    patches.values.resize(static_cast<Eigen::Index>(out_h) * out_w, window * window);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < out_w; ++x) {
            const Eigen::Index row = static_cast<Eigen::Index>(y) * out_w + x;
            int col = 0;
            for (int dy = 0; dy < window; ++dy) {
                for (int dx = 0; dx < window; ++dx) {
                    const Eigen::Index pos = static_cast<Eigen::Index>(y + dy) * map.width + (x + dx);
                    patches.values(row, col++) = map.values(pos, channel);
                }
            }
        }
    }
    return patches;
}

SaabUnit fit_saab(const PatchMatrix& patches, int max_kept) {
    const Eigen::Index n = patches.values.rows();
    const Eigen::Index dim = patches.values.cols();
    if (max_kept < 0) {
        throw ValidationError("max_kept must be nonnegative, got " + std::to_string(max_kept));
    }
    if (n < dim) {
        throw ValidationError("need at least " + std::to_string(dim) + " patches to fit a " +
                              std::to_string(dim) + "-dimensional unit, got " + std::to_string(n));
    }

    SaabUnit unit;
    unit.window = static_cast<int>(std::lround(std::sqrt(static_cast<double>(dim))));
    if (static_cast<Eigen::Index>(unit.window) * unit.window != dim) {
        throw ValidationError("patch dimension " + std::to_string(dim) + " is not a square window");
    }

    const Eigen::VectorXd dc = unit.dc_kernel();
    const Eigen::VectorXd dc_coeff = patches.values * dc;

    unit.bias = (1.0 + 1e-6) * patches.values.rowwise().norm().maxCoeff();

    // PCA of the DC-removed patches: residuals are orthogonal to the DC
    // direction, so the eigenvectors with nonzero eigenvalue are too.
    Eigen::MatrixXd residual = patches.values - dc_coeff * dc.transpose();
    const Eigen::RowVectorXd mean = residual.colwise().mean();
    residual.rowwise() -= mean;
    const Eigen::MatrixXd cov =
        residual.transpose() * residual / static_cast<double>(n);

    const EigResult eig = sorted_symmetric_eig(cov, static_cast<int>(dim));

    // Directions below the rank floor carry no signal (or are numerical
    // noise with a slightly negative eigenvalue) and are not kept.
    const double rank_floor = 1e-12 * std::max(eig.values[0], 0.0);
    Eigen::Index n_keep = 0;
    while (n_keep < max_kept && n_keep < eig.values.size() && eig.values[n_keep] > rank_floor) {
        ++n_keep;
    }

    unit.ac_kernels = eig.vectors.topRows(n_keep);
    unit.energies.resize(n_keep + 1);
    const double dc_mean = dc_coeff.mean();
    unit.energies[0] = (dc_coeff.array() - dc_mean).square().sum() / static_cast<double>(n);
    unit.energies.tail(n_keep) = eig.values.head(n_keep);
    return unit;
}

ResponseMap apply_saab(const SaabUnit& unit, const PatchMatrix& patches) {
    if (patches.values.cols() != unit.patch_dim()) {
        throw ValidationError("patch dimension " + std::to_string(patches.values.cols()) +
                              " does not match unit window " + std::to_string(unit.window));
    }
    const Eigen::VectorXd dc = unit.dc_kernel();
    const Eigen::VectorXd dc_coeff = patches.values * dc;
    const Eigen::MatrixXd residual = patches.values - dc_coeff * dc.transpose();

    ResponseMap out;
    out.height = patches.grid_h;
    out.width = patches.grid_w;
    out.values.resize(patches.values.rows(), unit.channel_count());
    out.values.col(0) = dc_coeff.array() + unit.bias;
    if (unit.ac_count() > 0) {
        out.values.rightCols(unit.ac_count()) =
            (residual * unit.ac_kernels.transpose()).array() + unit.bias;
    }
    return out;
}

std::vector<NodeKind> partition_channels(const std::vector<double>& energies,
                                         const std::vector<bool>& is_dc,
                                         const PartitionMode& mode, bool final_hop) {
    const int n = static_cast<int>(energies.size());
    if (is_dc.size() != energies.size()) {
        throw ValidationError("energy and DC-flag lists differ in length");
    }
    const NodeKind kept_kind = final_hop ? NodeKind::Leaf : NodeKind::Intermediate;
    std::vector<NodeKind> kinds(energies.size(), NodeKind::Discard);

    if (mode.type == PartitionMode::Type::Threshold) {
        for (int i = 0; i < n; ++i) {
            if (is_dc[static_cast<std::size_t>(i)] || energies[static_cast<std::size_t>(i)] >= mode.threshold) {
                kinds[static_cast<std::size_t>(i)] = kept_kind;
            }
        }
        return kinds;
    }

    if (mode.n_intermediate < 0 || mode.n_discard < 0 || mode.n_intermediate + mode.n_discard != n) {
        throw ValidationError("fixed partition counts " + std::to_string(mode.n_intermediate) + "+" +
                              std::to_string(mode.n_discard) + " do not cover " + std::to_string(n) +
                              " channels");
    }
    const int dc_total = static_cast<int>(std::count(is_dc.begin(), is_dc.end(), true));
    if (mode.n_intermediate < dc_total) {
        throw ValidationError("fixed partition keeps " + std::to_string(mode.n_intermediate) +
                              " channels but " + std::to_string(dc_total) + " DC channels may not be discarded");
    }

    // DC channels first, then the rest by energy; ties go to the lower index.
    std::vector<int> order(energies.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const bool dc_a = is_dc[static_cast<std::size_t>(a)];
        const bool dc_b = is_dc[static_cast<std::size_t>(b)];
        if (dc_a != dc_b) return dc_a;
        return energies[static_cast<std::size_t>(a)] > energies[static_cast<std::size_t>(b)];
    });
    for (int r = 0; r < mode.n_intermediate; ++r) {
        kinds[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = kept_kind;
    }
    return kinds;
}

SaabUnit prune_unit(const SaabUnit& unit, const std::vector<NodeKind>& kinds) {
    if (static_cast<int>(kinds.size()) != unit.channel_count()) {
        throw ValidationError("kind list length " + std::to_string(kinds.size()) +
                              " does not match " + std::to_string(unit.channel_count()) + " channels");
    }
    if (kinds[0] == NodeKind::Discard) {
        throw ValidationError("the DC channel may not be discarded");
    }
    SaabUnit pruned;
    pruned.window = unit.window;
    pruned.bias = unit.bias;
    std::vector<int> kept_ac;
    for (int j = 0; j < unit.ac_count(); ++j) {
        if (kinds[static_cast<std::size_t>(j) + 1] != NodeKind::Discard) kept_ac.push_back(j);
    }
    pruned.ac_kernels.resize(static_cast<Eigen::Index>(kept_ac.size()), unit.patch_dim());
    pruned.energies.resize(static_cast<Eigen::Index>(kept_ac.size()) + 1);
    pruned.energies[0] = unit.energies[0];
    for (std::size_t j = 0; j < kept_ac.size(); ++j) {
        pruned.ac_kernels.row(static_cast<Eigen::Index>(j)) = unit.ac_kernels.row(kept_ac[j]);
        pruned.energies[static_cast<Eigen::Index>(j) + 1] = unit.energies[kept_ac[j] + 1];
    }
    return pruned;
}

ResponseMap max_pool(const ResponseMap& map) {
    if (map.height % 2 != 0 || map.width % 2 != 0) {
        throw ValidationError("max pooling needs even dimensions, got " + std::to_string(map.height) +
                              "x" + std::to_string(map.width));
    }
    ResponseMap out;
    out.height = map.height / 2;
    out.width = map.width / 2;
    out.values.resize(static_cast<Eigen::Index>(out.height) * out.width, map.channels());
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            const Eigen::Index a = static_cast<Eigen::Index>(2 * y) * map.width + 2 * x;
            const Eigen::Index b = a + 1;
            const Eigen::Index c = a + map.width;
            const Eigen::Index d = c + 1;
            out.values.row(static_cast<Eigen::Index>(y) * out.width + x) =
                map.values.row(a).cwiseMax(map.values.row(b)).cwiseMax(
                    map.values.row(c).cwiseMax(map.values.row(d)));
        }
    }
    return out;
}

}  // namespace facehop
