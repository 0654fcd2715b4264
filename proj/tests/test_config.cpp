#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "facehop/config.hpp"
#include "facehop/errors.hpp"

using namespace facehop;

namespace {

namespace fs = std::filesystem;

fs::path write_config(const std::string& tag, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / tag;
    std::ofstream out(p);
    out << text;
    return p;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("the default configuration reproduces the stock run") {
    RunConfig cfg;
    CHECK(cfg.seed == 42);
    CHECK(cfg.train_fraction == 0.8);
    CHECK(cfg.n_components == 15);
    CHECK(cfg.lambda == 1e-3);
    CHECK(cfg.variant == Variant::II);
    CHECK(cfg.augment_enabled);
    CHECK(cfg.augment_ratio == 0.9);
    CHECK(cfg.repetitions == 4);
    CHECK(cfg.folds == 5);
    CHECK(cfg.regions.size() == 7);
    CHECK(cfg.hop.input_size == 32);
    CHECK(cfg.hop.hops[0].mode.n_intermediate == 18);
    CHECK(cfg.hop.hops[0].mode.n_discard == 7);
    CHECK(cfg.hop.hops[1].mode.n_intermediate == 122);
    CHECK(cfg.hop.hops[1].mode.n_discard == 328);
    CHECK(cfg.hop.hops[2].mode.n_intermediate == 233);
    CHECK(cfg.hop.hops[2].mode.n_discard == 2817);
    CHECK(cfg.hop.hops[0].pool_after);
    CHECK(cfg.hop.hops[1].pool_after);
    CHECK(!cfg.hop.hops[2].pool_after);
}

TEST_CASE("every key parses and lands in the right field") {
    const auto path = write_config("facehop_cfg_full.conf", R"(# full example
manifest = /data/faces.csv
seed = 7
split.train_fraction = 0.75
input_size = 32
fit.max_patches = 50000
n_components = 20
lambda = 0.01
variant = FaceHopI
augment = none
augment.ratio = 0.8
repetitions = 2
folds = 3

hop1.window = 5
hop1.mode = fixed
hop1.intermediate = 18
hop1.discard = 7
hop2.mode = threshold
hop2.threshold = 1e-4
hop2.pool = true
hop3.mode = threshold
hop3.threshold = 5e-5
hop3.pool = false

region.brow = 1:2:6:3:24
region.chin = 2:7:9:2:7
)");
    RunConfig cfg = load_config(path);
    fs::remove(path);

    CHECK(cfg.manifest == fs::path("/data/faces.csv"));
    CHECK(cfg.seed == 7);
    CHECK(cfg.train_fraction == 0.75);
    CHECK(cfg.hop.max_fit_patches == 50000);
    CHECK(cfg.n_components == 20);
    CHECK(cfg.lambda == 0.01);
    CHECK(cfg.variant == Variant::I);
    CHECK(!cfg.augment_enabled);
    CHECK(cfg.augment_ratio == 0.8);
    CHECK(cfg.repetitions == 2);
    CHECK(cfg.folds == 3);

    CHECK(cfg.hop.hops[0].mode.type == PartitionMode::Type::FixedCounts);
    CHECK(cfg.hop.hops[0].mode.n_intermediate == 18);
    CHECK(cfg.hop.hops[1].mode.type == PartitionMode::Type::Threshold);
    CHECK(cfg.hop.hops[1].mode.threshold == 1e-4);
    CHECK(cfg.hop.hops[1].pool_after);
    CHECK(!cfg.hop.hops[2].pool_after);

    // Custom regions replace the stock list, in file order.
    REQUIRE(cfg.regions.size() == 2);
    CHECK(cfg.regions[0].name == "brow");
    CHECK(cfg.regions[0].hop == 1);
    CHECK(cfg.regions[0].row_min == 2);
    CHECK(cfg.regions[0].row_max == 6);
    CHECK(cfg.regions[0].col_min == 3);
    CHECK(cfg.regions[0].col_max == 24);
    CHECK(cfg.regions[1].name == "chin");
    CHECK(cfg.regions[1].hop == 2);
}

TEST_CASE("variant names accept the short forms") {
    CHECK(parse_variant("FaceHopI") == Variant::I);
    CHECK(parse_variant("FaceHopII") == Variant::II);
    CHECK(parse_variant("I") == Variant::I);
    CHECK(parse_variant("II") == Variant::II);
    CHECK(parse_variant("1") == Variant::I);
    CHECK(parse_variant("2") == Variant::II);
    CHECK_THROWS_AS(parse_variant("III"), ValidationError);
    CHECK(variant_name(Variant::I) == "FaceHopI");
    CHECK(variant_name(Variant::II) == "FaceHopII");
}

TEST_CASE("unknown keys and malformed values point at their line") {
    auto bad_key = write_config("facehop_cfg_badkey.conf", "seed = 1\nbogus = 2\n");
    CHECK_THROWS_WITH_AS(load_config(bad_key), doctest::Contains(":2:"), ValidationError);
    fs::remove(bad_key);

    auto bad_num = write_config("facehop_cfg_badnum.conf", "seed = banana\n");
    CHECK_THROWS_WITH_AS(load_config(bad_num), doctest::Contains("banana"), ValidationError);
    fs::remove(bad_num);

    auto no_eq = write_config("facehop_cfg_noeq.conf", "seed 1\n");
    CHECK_THROWS_AS(load_config(no_eq), ValidationError);
    fs::remove(no_eq);

    auto bad_region = write_config("facehop_cfg_badregion.conf", "region.x = 1:2:3\n");
    CHECK_THROWS_AS(load_config(bad_region), ValidationError);
    fs::remove(bad_region);

    auto bad_hop = write_config("facehop_cfg_badhop.conf", "hop9.window = 5\n");
    CHECK_THROWS_AS(load_config(bad_hop), ValidationError);
    fs::remove(bad_hop);

    CHECK_THROWS_AS(load_config(fs::temp_directory_path() / "facehop_cfg_missing.conf"),
                    IoError);
}

TEST_CASE("whole-file validation rejects out-of-range settings") {
    for (const auto& [tag, text] : {
             std::pair{"frac", std::string("split.train_fraction = 1.2\n")},
             {"reps", "repetitions = 0\n"},
             {"folds", "folds = 1\n"},
             {"ncomp", "n_components = 0\n"},
             {"lambda", "lambda = -1\n"},
             {"ratio", "augment.ratio = 0\n"},
             {"size", "input_size = 0\n"},
             {"window", "hop2.window = 0\n"},
         }) {
        auto path = write_config(std::string("facehop_cfg_") + tag + ".conf", text);
        CHECK_THROWS_AS(load_config(path), ValidationError);
        fs::remove(path);
    }
}

}  // TEST_SUITE
