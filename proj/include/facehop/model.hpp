#pragma once

#include <array>
#include <string>
#include <vector>

#include "facehop/classify.hpp"
#include "facehop/features.hpp"
#include "facehop/hoptree.hpp"

namespace facehop {

// Which classifiers feed the meta stage: FaceHop I fuses all eight
// hop/region probabilities, FaceHop II only the hop-2 and hop-3 ones.
enum class Variant { I, II };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

// Feature-group indices a variant consumes: regions in order, then the
// final hop-3 group. FaceHop II keeps the hop-2 regions and hop 3.
std::vector<int> variant_groups(const std::vector<RegionSpec>& regions, Variant v);

// Everything a prediction needs, in one trainable/serializable bundle. All
// eight base classifiers are trained and stored regardless of variant, so
// one model can report both FaceHop I and II sizes and switch variants at
// inspection time; the variant field records what the meta was trained as.
struct FaceHopModel {
    Variant variant = Variant::II;
    HopModel tree;
    FeatureModel features;
    EnsembleModel ensemble;
    std::array<std::string, 2> label_names{};
};

struct ParamCountSection {
    std::string name;
    long long count = 0;
};

// Stored-parameter tally: one entry per kernel weight of every retained
// channel, one bias per unit, the region projection matrices, and the
// weights and intercepts of the classifiers the variant actually uses
// (standardizer statistics and projection means fold into the affine maps
// and are not counted).
struct ParamCountReport {
    std::vector<ParamCountSection> sections;
    long long total = 0;
};

ParamCountReport count_parameters(const FaceHopModel& model, Variant variant);

// Human-readable model dump: node tree with energies, per-depth energy
// closure, feature widths, and itemized parameter counts for both variants.
std::string inspect_report(const FaceHopModel& model);

}  // namespace facehop
