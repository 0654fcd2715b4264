#include "facehop/hoptree.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "facehop/errors.hpp"
#include "facehop/parallel.hpp"

namespace facehop {

namespace {

ResponseMap wrap_image(const Image& img) {
    ResponseMap map;
    map.height = img.height;
    map.width = img.width;
    map.values.resize(static_cast<Eigen::Index>(img.height) * img.width, 1);
    map.values.col(0) = Eigen::Map<const Eigen::VectorXd>(img.data.data(),
                                                         static_cast<Eigen::Index>(img.data.size()));
    return map;
}

void copy_patch(const ResponseMap& map, int channel, int x, int y, int window,
                Eigen::MatrixXd& dest, Eigen::Index dest_row) {
    int col = 0;
    for (int dy = 0; dy < window; ++dy) {
        for (int dx = 0; dx < window; ++dx) {
            dest(dest_row, col++) =
                map.values(static_cast<Eigen::Index>(y + dy) * map.width + (x + dx), channel);
        }
    }
}

// Pools fitting patches for one channel across the whole set. Past the cap,
// every stride-th patch is taken by global index, image-major, so the
// selection does not depend on thread scheduling.
PatchMatrix gather_patches(const std::vector<ResponseMap>& maps, int channel, int window,
                           std::size_t cap) {
    const int h = maps.front().height;
    const int w = maps.front().width;
    if (h < window || w < window) {
        throw ValidationError("grid " + std::to_string(h) + "x" + std::to_string(w) +
                              " too small for window " + std::to_string(window));
    }
    const int out_w = w - window + 1;
    const std::size_t per_image = static_cast<std::size_t>(h - window + 1) * static_cast<std::size_t>(out_w);
    const std::size_t total = per_image * maps.size();
    std::size_t stride = 1;
    if (cap > 0 && total > cap) stride = (total + cap - 1) / cap;
    const std::size_t count = (total + stride - 1) / stride;

    PatchMatrix patches;
    patches.values.resize(static_cast<Eigen::Index>(count), window * window);
    Eigen::Index row = 0;
    for (std::size_t g = 0; g < total; g += stride, ++row) {
        const std::size_t img = g / per_image;
        const std::size_t pos = g % per_image;
        const int y = static_cast<int>(pos) / out_w;
        const int x = static_cast<int>(pos) % out_w;
        copy_patch(maps[img], channel, x, y, window, patches.values, row);
    }
    return patches;
}

// Energy share of each channel inside its unit. A zero-mass unit (constant
// inputs) assigns everything to the DC channel.
std::vector<double> unit_shares(const Eigen::VectorXd& energies) {
    std::vector<double> shares(static_cast<std::size_t>(energies.size()), 0.0);
    const double total = energies.sum();
    if (total <= 0.0) {
        shares[0] = 1.0;
        return shares;
    }
    for (Eigen::Index i = 0; i < energies.size(); ++i) {
        shares[static_cast<std::size_t>(i)] = energies[i] / total;
    }
    return shares;
}

// Applies every pruned unit of a hop to its input channel and concatenates
// the responses; output channels are the hop's kept channels, unit-major.
ResponseMap apply_hop(const std::vector<SaabUnit>& units, int window, const ResponseMap& input) {
    ResponseMap out;
    out.height = input.height - window + 1;
    out.width = input.width - window + 1;
    int total = 0;
    for (const SaabUnit& unit : units) total += unit.channel_count();
    out.values.resize(static_cast<Eigen::Index>(out.height) * out.width, total);
    int col = 0;
    for (std::size_t u = 0; u < units.size(); ++u) {
        const PatchMatrix patches = build_neighborhoods(input, static_cast<int>(u), window);
        const ResponseMap resp = apply_saab(units[u], patches);
        out.values.middleCols(col, resp.channels()) = resp.values;
        col += resp.channels();
    }
    return out;
}

ResponseMap select_columns(const ResponseMap& map, const std::vector<int>& cols) {
    ResponseMap out;
    out.height = map.height;
    out.width = map.width;
    out.values.resize(map.values.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) {
        out.values.col(static_cast<Eigen::Index>(i)) = map.values.col(cols[i]);
    }
    return out;
}

void check_input_size(const Image& img, int expected) {
    if (img.width != expected || img.height != expected) {
        throw ValidationError("expected " + std::to_string(expected) + "x" + std::to_string(expected) +
                              " input, got " + std::to_string(img.width) + "x" + std::to_string(img.height));
    }
}

}  // namespace

int HopModel::node_count(int hop, NodeKind kind) const {
    int n = 0;
    for (const TreeNode& node : nodes) {
        if (node.hop == hop && node.kind == kind) ++n;
    }
    return n;
}

HopModel fit_tree(const std::vector<Image>& images, const HopConfig& config) {
    if (images.empty()) {
        throw ValidationError("cannot fit the cascade on an empty image set");
    }
    for (const Image& img : images) check_input_size(img, config.input_size);

    HopModel model;
    model.config = config;
    model.units.resize(3);

    std::vector<ResponseMap> current(images.size());
    parallel_for(images.size(), [&](std::size_t i) { current[i] = wrap_image(images[i]); });
    std::vector<int> parent_ids{-1};
    std::vector<double> parent_energy{1.0};

    for (int hop = 1; hop <= 3; ++hop) {
        const HopSpec& spec = config.hops[static_cast<std::size_t>(hop - 1)];
        const int n_units = current.front().channels();

        std::vector<SaabUnit> fitted(static_cast<std::size_t>(n_units));
        for (int u = 0; u < n_units; ++u) {
            const PatchMatrix patches = gather_patches(current, u, spec.window, config.max_fit_patches);
            fitted[static_cast<std::size_t>(u)] = fit_saab(patches, spec.window * spec.window - 1);
        }

        // Flat unit-major channel list for the global partition.
        std::vector<double> energies;
        std::vector<bool> dc_flags;
        for (int u = 0; u < n_units; ++u) {
            const SaabUnit& unit = fitted[static_cast<std::size_t>(u)];
            const std::vector<double> shares = unit_shares(unit.energies);
            for (int c = 0; c < unit.channel_count(); ++c) {
                TreeNode node;
                node.hop = hop;
                node.parent = parent_ids[static_cast<std::size_t>(u)];
                node.unit = u;
                node.channel = c;
                node.energy = parent_energy[static_cast<std::size_t>(u)] * shares[static_cast<std::size_t>(c)];
                energies.push_back(node.energy);
                dc_flags.push_back(c == 0);
                model.nodes.push_back(node);
            }
        }

        const bool final_hop = (hop == 3);
        const int first_id = static_cast<int>(model.nodes.size() - energies.size());
        const std::vector<NodeKind> kinds = partition_channels(energies, dc_flags, spec.mode, final_hop);

        std::vector<int>& kept = model.kept_nodes[static_cast<std::size_t>(hop - 1)];
        std::vector<int>& forwarded = model.forwarded_columns[static_cast<std::size_t>(hop - 1)];
        std::vector<int> next_parent_ids;
        std::vector<double> next_parent_energy;
        std::size_t flat = 0;
        for (int u = 0; u < n_units; ++u) {
            const SaabUnit& unit = fitted[static_cast<std::size_t>(u)];
            const std::vector<NodeKind> unit_kinds(kinds.begin() + static_cast<std::ptrdiff_t>(flat),
                                                   kinds.begin() + static_cast<std::ptrdiff_t>(flat) +
                                                       unit.channel_count());
            for (int c = 0; c < unit.channel_count(); ++c) {
                const int id = first_id + static_cast<int>(flat) + c;
                model.nodes[static_cast<std::size_t>(id)].kind = unit_kinds[static_cast<std::size_t>(c)];
                if (unit_kinds[static_cast<std::size_t>(c)] == NodeKind::Discard) continue;
                if (unit_kinds[static_cast<std::size_t>(c)] == NodeKind::Intermediate) {
                    forwarded.push_back(static_cast<int>(kept.size()));
                    next_parent_ids.push_back(id);
                    next_parent_energy.push_back(model.nodes[static_cast<std::size_t>(id)].energy);
                }
                kept.push_back(id);
            }
            model.units[static_cast<std::size_t>(hop - 1)].push_back(prune_unit(unit, unit_kinds));
            flat += static_cast<std::size_t>(unit.channel_count());
        }

        if (hop < 3) {
            std::vector<ResponseMap> next(images.size());
            const std::vector<SaabUnit>& units = model.units[static_cast<std::size_t>(hop - 1)];
            parallel_for(images.size(), [&](std::size_t i) {
                const ResponseMap hop_map = apply_hop(units, spec.window, current[i]);
                ResponseMap fwd = select_columns(hop_map, forwarded);
                next[i] = spec.pool_after ? max_pool(fwd) : std::move(fwd);
            });
            current = std::move(next);
            parent_ids = std::move(next_parent_ids);
            parent_energy = std::move(next_parent_energy);
        }
    }
    return model;
}

HopOutputs transform(const HopModel& model, const Image& image) {
    check_input_size(image, model.config.input_size);
    HopOutputs out;
    ResponseMap current = wrap_image(image);
    for (int hop = 1; hop <= 3; ++hop) {
        const HopSpec& spec = model.config.hops[static_cast<std::size_t>(hop - 1)];
        ResponseMap hop_map = apply_hop(model.units[static_cast<std::size_t>(hop - 1)], spec.window, current);
        if (hop < 3) {
            ResponseMap fwd = select_columns(hop_map, model.forwarded_columns[static_cast<std::size_t>(hop - 1)]);
            current = spec.pool_after ? max_pool(fwd) : std::move(fwd);
        }
        out.hops[static_cast<std::size_t>(hop - 1)] = std::move(hop_map);
    }
    return out;
}

}  // namespace facehop
