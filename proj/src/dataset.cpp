#include "facehop/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "facehop/errors.hpp"
#include "facehop/rng.hpp"

namespace facehop {

namespace {

std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, delim)) fields.push_back(field);
    if (!line.empty() && line.back() == delim) fields.emplace_back();
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail_at(const std::filesystem::path& file, std::size_t line, const std::string& msg) {
    throw ValidationError(file.string() + ":" + std::to_string(line) + ": " + msg);
}

double parse_number(const std::string& text, const std::filesystem::path& file, std::size_t line,
                    const std::string& column) {
    const std::string t = trim(text);
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) fail_at(file, line, "bad number '" + t + "' in column " + column);
        return v;
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception&) {
        fail_at(file, line, "bad number '" + t + "' in column " + column);
    }
}

const std::vector<std::string> kColumns = {"path",       "label",      "left_eye_x",
                                           "left_eye_y", "right_eye_x", "right_eye_y"};

}  // namespace

std::vector<ManifestEntry> load_manifest_entries(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) {
        throw IoError("cannot open manifest " + csv_path.string());
    }

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    std::size_t first = 0;
    while (first < lines.size() && trim(lines[first]).empty()) ++first;
    if (first == lines.size()) {
        throw ValidationError(csv_path.string() + ": manifest has no header line");
    }

    // The delimiter is whichever one makes the header come out right.
    char delim = 0;
    bool has_provenance = false;
    for (char candidate : {',', '\t', ';'}) {
        std::vector<std::string> fields = split_fields(lines[first], candidate);
        for (std::string& f : fields) f = trim(f);
        if (fields.size() != kColumns.size() && fields.size() != kColumns.size() + 1) continue;
        bool match = true;
        for (std::size_t i = 0; i < kColumns.size(); ++i) {
            if (fields[i] != kColumns[i]) match = false;
        }
        if (fields.size() == kColumns.size() + 1 && fields.back() != "provenance") match = false;
        if (match) {
            delim = candidate;
            has_provenance = fields.size() == kColumns.size() + 1;
            break;
        }
    }
    if (delim == 0) {
        fail_at(csv_path, first + 1,
                "header must be 'path,label,left_eye_x,left_eye_y,right_eye_x,right_eye_y' "
                "(optionally ',provenance'), comma, tab, or semicolon delimited");
    }
    const std::size_t n_cols = kColumns.size() + (has_provenance ? 1 : 0);

    std::vector<ManifestEntry> entries;
    const std::filesystem::path base = csv_path.parent_path();
    for (std::size_t li = first + 1; li < lines.size(); ++li) {
        if (trim(lines[li]).empty()) continue;
        std::vector<std::string> fields = split_fields(lines[li], delim);
        if (fields.size() != n_cols) {
            fail_at(csv_path, li + 1, "expected " + std::to_string(n_cols) + " fields, got " +
                                          std::to_string(fields.size()));
        }
        ManifestEntry entry;
        const std::string raw_path = trim(fields[0]);
        if (raw_path.empty()) fail_at(csv_path, li + 1, "empty image path");
        std::filesystem::path p(raw_path);
        entry.path = p.is_absolute() ? p : base / p;
        entry.raw_label = trim(fields[1]);
        if (entry.raw_label.empty()) fail_at(csv_path, li + 1, "empty label");
        entry.landmarks.left_x = parse_number(fields[2], csv_path, li + 1, "left_eye_x");
        entry.landmarks.left_y = parse_number(fields[3], csv_path, li + 1, "left_eye_y");
        entry.landmarks.right_x = parse_number(fields[4], csv_path, li + 1, "right_eye_x");
        entry.landmarks.right_y = parse_number(fields[5], csv_path, li + 1, "right_eye_y");
        if (has_provenance) entry.provenance = trim(fields[6]);
        entries.push_back(std::move(entry));
    }
    if (entries.empty()) {
        throw ValidationError(csv_path.string() + ": manifest lists no images");
    }
    return entries;
}

Dataset load_manifest(const std::filesystem::path& csv_path) {
    Dataset ds;
    ds.entries = load_manifest_entries(csv_path);

    std::set<std::string> distinct;
    for (const ManifestEntry& e : ds.entries) distinct.insert(e.raw_label);
    if (distinct.size() != 2) {
        std::string seen;
        for (const std::string& s : distinct) seen += (seen.empty() ? "'" : ", '") + s + "'";
        throw ValidationError(csv_path.string() + ": need exactly 2 distinct labels, found " +
                              std::to_string(distinct.size()) + " (" + seen + ")");
    }
    ds.label_names[0] = *distinct.begin();
    ds.label_names[1] = *std::next(distinct.begin());
    ds.labels.reserve(ds.entries.size());
    for (const ManifestEntry& e : ds.entries) {
        ds.labels.push_back(e.raw_label == ds.label_names[1] ? 1 : 0);
    }
    return ds;
}

void save_manifest(const std::filesystem::path& csv_path, const std::vector<ManifestEntry>& entries) {
    std::ofstream out(csv_path);
    if (!out) {
        throw IoError("cannot write manifest " + csv_path.string());
    }
    bool has_provenance = false;
    for (const ManifestEntry& e : entries) {
        if (!e.provenance.empty()) has_provenance = true;
    }
    out << "path,label,left_eye_x,left_eye_y,right_eye_x,right_eye_y";
    if (has_provenance) out << ",provenance";
    out << "\n";
    out.precision(17);
    for (const ManifestEntry& e : entries) {
        out << e.path.string() << "," << e.raw_label << "," << e.landmarks.left_x << ","
            << e.landmarks.left_y << "," << e.landmarks.right_x << "," << e.landmarks.right_y;
        if (has_provenance) out << "," << e.provenance;
        out << "\n";
    }
    if (!out) {
        throw IoError("failed while writing manifest " + csv_path.string());
    }
}

SplitIndices stratified_split(const std::vector<int>& labels, double test_fraction,
                              std::uint64_t seed) {
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) {
        throw ValidationError("test fraction must be inside (0, 1)");
    }
    std::vector<std::vector<std::size_t>> by_class(2);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw ValidationError("labels must be 0 or 1, got " + std::to_string(labels[i]));
        }
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (int cls = 0; cls < 2; ++cls) {
        if (by_class[static_cast<std::size_t>(cls)].size() < 2) {
            throw ValidationError("class " + std::to_string(cls) +
                                  " needs at least 2 samples to split");
        }
    }

    SplitIndices split;
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t>& members = by_class[static_cast<std::size_t>(cls)];
        // Streams 2 and 3; fold assignment uses 0 and 1 off the same seed.
        Rng rng(Rng::derive_seed(seed, 2 + static_cast<std::uint64_t>(cls)));
        rng.shuffle(members);
        std::size_t n_test = static_cast<std::size_t>(
            std::lround(test_fraction * static_cast<double>(members.size())));
        n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
        for (std::size_t p = 0; p < members.size(); ++p) {
            (p < n_test ? split.test : split.train).push_back(members[p]);
        }
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

}  // namespace facehop
