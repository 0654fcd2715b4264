#include "facehop/model.hpp"

#include <iomanip>
#include <sstream>

#include "facehop/errors.hpp"

namespace facehop {

std::string variant_name(Variant v) {
    return v == Variant::I ? "FaceHopI" : "FaceHopII";
}

Variant parse_variant(const std::string& name) {
    if (name == "FaceHopI" || name == "I" || name == "1") return Variant::I;
    if (name == "FaceHopII" || name == "II" || name == "2") return Variant::II;
    throw ValidationError("unknown variant '" + name + "' (expected FaceHopI or FaceHopII)");
}

std::vector<int> variant_groups(const std::vector<RegionSpec>& regions, Variant v) {
    std::vector<int> groups;
    for (std::size_t g = 0; g < regions.size(); ++g) {
        if (v == Variant::I || regions[g].hop == 2) groups.push_back(static_cast<int>(g));
    }
    groups.push_back(static_cast<int>(regions.size()));  // the hop-3 group
    return groups;
}

ParamCountReport count_parameters(const FaceHopModel& model, Variant variant) {
    ParamCountReport report;
    const auto add = [&](std::string name, long long count) {
        report.sections.push_back({std::move(name), count});
        report.total += count;
    };

    for (int hop = 1; hop <= 3; ++hop) {
        const std::vector<SaabUnit>& units = model.tree.units[static_cast<std::size_t>(hop - 1)];
        long long kernels = 0;
        for (const SaabUnit& unit : units) {
            kernels += static_cast<long long>(unit.channel_count()) * unit.patch_dim();
        }
        add("hop " + std::to_string(hop) + " kernels", kernels);
        add("hop " + std::to_string(hop) + " biases", static_cast<long long>(units.size()));
    }

    const std::vector<int> groups = variant_groups(model.features.regions, variant);
    const int n_regions = static_cast<int>(model.features.regions.size());
    for (int g : groups) {
        if (g < n_regions) {
            add("projection " + model.features.regions[static_cast<std::size_t>(g)].name,
                static_cast<long long>(model.features.pcas[static_cast<std::size_t>(g)].components.size()));
        }
    }
    for (int g : groups) {
        if (static_cast<std::size_t>(g) >= model.ensemble.base.size()) {
            throw ValidationError("model stores no classifier for feature group " + std::to_string(g));
        }
        const std::string name =
            g < n_regions ? model.features.regions[static_cast<std::size_t>(g)].name : "hop3";
        add("classifier " + name,
            static_cast<long long>(model.ensemble.base[static_cast<std::size_t>(g)].weights.size()) + 1);
    }
    add("meta classifier", static_cast<long long>(groups.size()) + 1);
    return report;
}

std::string inspect_report(const FaceHopModel& model) {
    std::ostringstream out;
    out << "variant: " << variant_name(model.variant) << "\n";
    out << "classes: 0=" << model.label_names[0] << " 1=" << model.label_names[1] << "\n";
    out << "input: " << model.tree.config.input_size << "x" << model.tree.config.input_size << "\n\n";

    const char* kind_names[] = {"intermediate", "leaf", "discard"};
    out << "channels per hop (intermediate/leaf/discarded):\n";
    for (int hop = 1; hop <= 3; ++hop) {
        out << "  hop " << hop << ": " << model.tree.node_count(hop, NodeKind::Intermediate) << "/"
            << model.tree.node_count(hop, NodeKind::Leaf) << "/"
            << model.tree.node_count(hop, NodeKind::Discard) << "  ("
            << model.tree.units[static_cast<std::size_t>(hop - 1)].size() << " units)\n";
    }

    // At every depth the live energy plus everything terminated above must
    // close to 1.
    out << "\nenergy closure by depth:\n";
    double terminated_above = 0.0;
    for (int hop = 1; hop <= 3; ++hop) {
        double live = 0.0;
        double terminated_here = 0.0;
        for (const TreeNode& node : model.tree.nodes) {
            if (node.hop != hop) continue;
            live += node.energy;
            if (node.kind != NodeKind::Intermediate) terminated_here += node.energy;
        }
        out << "  depth " << hop << ": " << std::setprecision(8) << std::fixed
            << live + terminated_above << " (live " << live << " + terminated above "
            << terminated_above << ")\n";
        out.unsetf(std::ios::fixed);
        terminated_above += terminated_here;
    }

    out << "\nfeature group widths:\n";
    const std::vector<int> dims = model.features.group_dims(model.tree);
    for (std::size_t g = 0; g < dims.size(); ++g) {
        const std::string name = g < model.features.regions.size()
                                     ? model.features.regions[g].name
                                     : std::string("hop3");
        out << "  " << name << ": " << dims[g] << "\n";
    }

    for (Variant v : {Variant::I, Variant::II}) {
        const ParamCountReport report = count_parameters(model, v);
        out << "\nparameters (" << variant_name(v) << "):\n";
        for (const ParamCountSection& section : report.sections) {
            out << "  " << section.name << ": " << section.count << "\n";
        }
        out << "  total: " << report.total << "\n";
    }

    out << "\nnode tree (hop unit channel kind energy):\n";
    for (const TreeNode& node : model.tree.nodes) {
        out << "  " << node.hop << " " << node.unit << " " << node.channel << " "
            << kind_names[static_cast<int>(node.kind)] << " " << std::setprecision(10)
            << node.energy << "\n";
    }
    return out.str();
}

}  // namespace facehop
