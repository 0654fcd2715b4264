#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "facehop/preprocess.hpp"

namespace facehop {

// One manifest row. Relative image paths are resolved against the manifest's
// own directory at load time.
struct ManifestEntry {
    std::filesystem::path path;
    std::string raw_label;
    Landmarks landmarks;
    std::string provenance;  // optional last column; empty when absent
};

// A parsed manifest with raw labels mapped to {0, 1}. Exactly two distinct
// labels must occur; the lexicographically smaller one becomes 0.
struct Dataset {
    std::vector<ManifestEntry> entries;
    std::vector<int> labels;
    std::array<std::string, 2> label_names;

    std::size_t size() const { return entries.size(); }
};

// Parses manifest rows: a header line
//   path,label,left_eye_x,left_eye_y,right_eye_x,right_eye_y[,provenance]
// followed by one row per image. Comma, tab, and semicolon delimiters are
// recognized from the header. Parse problems raise ValidationError with the
// file and line; a missing file raises IoError. No label-count requirement,
// so this also serves prediction inputs that cover a single class.
std::vector<ManifestEntry> load_manifest_entries(const std::filesystem::path& csv_path);

// load_manifest_entries plus the two-label check and the 0/1 mapping.
Dataset load_manifest(const std::filesystem::path& csv_path);

// Writes entries back out in the same column layout (comma-delimited); the
// provenance column appears if any entry carries one.
void save_manifest(const std::filesystem::path& csv_path, const std::vector<ManifestEntry>& entries);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Class-stratified train/test split. Per class, indices are shuffled with
// the seed and round(test_fraction * count) of them go to the test side,
// clamped so both sides keep at least one member. Both outputs are sorted,
// so downstream order follows the manifest.
SplitIndices stratified_split(const std::vector<int>& labels, double test_fraction,
                              std::uint64_t seed);

}  // namespace facehop
