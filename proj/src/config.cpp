#include "facehop/config.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "facehop/errors.hpp"

namespace facehop {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct Parser {
    std::filesystem::path file;
    std::size_t line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError(file.string() + ":" + std::to_string(line) + ": " + msg);
    }

    double number(const std::string& value, const std::string& key) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) fail("bad number '" + value + "' for " + key);
            return v;
        } catch (const ValidationError&) {
            throw;
        } catch (const std::exception&) {
            fail("bad number '" + value + "' for " + key);
        }
    }

    long integer(const std::string& value, const std::string& key) const {
        const double v = number(value, key);
        const long n = static_cast<long>(v);
        if (static_cast<double>(n) != v) fail(key + " must be an integer, got '" + value + "'");
        return n;
    }

    bool boolean(const std::string& value, const std::string& key) const {
        if (value == "true" || value == "yes" || value == "1") return true;
        if (value == "false" || value == "no" || value == "0") return false;
        fail(key + " must be true or false, got '" + value + "'");
    }
};

// region.<name> values look like hop:row_min:row_max:col_min:col_max.
RegionSpec parse_region(const Parser& p, const std::string& name, const std::string& value) {
    std::vector<long> parts;
    std::istringstream stream(value);
    std::string piece;
    while (std::getline(stream, piece, ':')) {
        parts.push_back(p.integer(trim(piece), "region." + name));
    }
    if (parts.size() != 5) {
        p.fail("region." + name + " needs hop:row_min:row_max:col_min:col_max, got '" + value + "'");
    }
    RegionSpec region;
    region.name = name;
    region.hop = static_cast<int>(parts[0]);
    region.row_min = static_cast<int>(parts[1]);
    region.row_max = static_cast<int>(parts[2]);
    region.col_min = static_cast<int>(parts[3]);
    region.col_max = static_cast<int>(parts[4]);
    if (region.hop != 1 && region.hop != 2) p.fail("region." + name + " must sit on hop 1 or 2");
    if (region.row_min < 0 || region.col_min < 0 || region.row_min > region.row_max ||
        region.col_min > region.col_max) {
        p.fail("region." + name + " has an empty or negative window");
    }
    return region;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }

    RunConfig cfg;
    std::vector<RegionSpec> regions;  // replaces the defaults if any appear
    Parser p{path, 0};

    std::string raw;
    while (std::getline(in, raw)) {
        ++p.line;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) p.fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) p.fail("empty key");
        if (value.empty()) p.fail("empty value for " + key);

        if (key == "manifest") {
            cfg.manifest = value;
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(p.integer(value, key));
        } else if (key == "split.train_fraction") {
            cfg.train_fraction = p.number(value, key);
        } else if (key == "input_size") {
            cfg.hop.input_size = static_cast<int>(p.integer(value, key));
        } else if (key == "fit.max_patches") {
            cfg.hop.max_fit_patches = static_cast<std::size_t>(p.integer(value, key));
        } else if (key == "n_components") {
            cfg.n_components = static_cast<int>(p.integer(value, key));
        } else if (key == "lambda") {
            cfg.lambda = p.number(value, key);
        } else if (key == "variant") {
            try {
                cfg.variant = parse_variant(value);
            } catch (const ValidationError& e) {
                p.fail(e.what());
            }
        } else if (key == "augment") {
            if (value == "balance") {
                cfg.augment_enabled = true;
            } else if (value == "none") {
                cfg.augment_enabled = false;
            } else {
                p.fail("augment must be 'balance' or 'none', got '" + value + "'");
            }
        } else if (key == "augment.ratio") {
            cfg.augment_ratio = p.number(value, key);
        } else if (key == "repetitions") {
            cfg.repetitions = static_cast<int>(p.integer(value, key));
        } else if (key == "folds") {
            cfg.folds = static_cast<int>(p.integer(value, key));
        } else if (key.rfind("hop", 0) == 0 && key.size() > 4 && key[4] == '.') {
            const char digit = key[3];
            if (digit < '1' || digit > '3') p.fail("unknown key '" + key + "'");
            HopSpec& hop = cfg.hop.hops[static_cast<std::size_t>(digit - '1')];
            const std::string field = key.substr(5);
            if (field == "window") {
                hop.window = static_cast<int>(p.integer(value, key));
            } else if (field == "mode") {
                if (value == "fixed") {
                    hop.mode.type = PartitionMode::Type::FixedCounts;
                } else if (value == "threshold") {
                    hop.mode.type = PartitionMode::Type::Threshold;
                } else {
                    p.fail(key + " must be 'fixed' or 'threshold', got '" + value + "'");
                }
            } else if (field == "intermediate") {
                hop.mode.n_intermediate = static_cast<int>(p.integer(value, key));
            } else if (field == "discard") {
                hop.mode.n_discard = static_cast<int>(p.integer(value, key));
            } else if (field == "threshold") {
                hop.mode.threshold = p.number(value, key);
            } else if (field == "pool") {
                hop.pool_after = p.boolean(value, key);
            } else {
                p.fail("unknown key '" + key + "'");
            }
        } else if (key.rfind("region.", 0) == 0) {
            regions.push_back(parse_region(p, key.substr(7), value));
        } else {
            p.fail("unknown key '" + key + "'");
        }
    }

    if (!regions.empty()) cfg.regions = std::move(regions);

    p.line = 0;  // whole-file complaints carry no line
    if (!(cfg.train_fraction > 0.0) || !(cfg.train_fraction < 1.0)) {
        throw ValidationError(path.string() + ": split.train_fraction must be inside (0, 1)");
    }
    if (cfg.repetitions < 1) {
        throw ValidationError(path.string() + ": repetitions must be at least 1");
    }
    if (cfg.folds < 2) {
        throw ValidationError(path.string() + ": folds must be at least 2");
    }
    if (cfg.n_components < 1) {
        throw ValidationError(path.string() + ": n_components must be at least 1");
    }
    if (cfg.lambda < 0.0) {
        throw ValidationError(path.string() + ": lambda must be nonnegative");
    }
    if (!(cfg.augment_ratio > 0.0) || cfg.augment_ratio > 1.0) {
        throw ValidationError(path.string() + ": augment.ratio must be inside (0, 1]");
    }
    if (cfg.hop.input_size < 1) {
        throw ValidationError(path.string() + ": input_size must be positive");
    }
    for (const HopSpec& hop : cfg.hop.hops) {
        if (hop.window < 1) {
            throw ValidationError(path.string() + ": hop windows must be positive");
        }
    }
    return cfg;
}

}  // namespace facehop
