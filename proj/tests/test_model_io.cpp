#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "facehop/errors.hpp"
#include "facehop/model.hpp"
#include "facehop/model_io.hpp"
#include "facehop/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace facehop;

namespace {

const LoadedDataset& shared_data() {
    static LoadedDataset data = fixtures::tiny_synthetic(40, 7);
    return data;
}

const FaceHopModel& shared_model() {
    static FaceHopModel model = train_pipeline(shared_data(), fixtures::tiny_config(), 99);
    return model;
}

}  // namespace

TEST_SUITE("model io") {

TEST_CASE("serialization round-trips bit for bit") {
    const FaceHopModel& model = shared_model();
    const std::vector<std::uint8_t> bytes = serialize_model(model);
    REQUIRE(bytes.size() > 16);
    CHECK(bytes[0] == 'F');
    CHECK(bytes[1] == 'H');
    CHECK(bytes[2] == 'O');
    CHECK(bytes[3] == 'P');

    FaceHopModel back = deserialize_model(bytes);
    const std::vector<std::uint8_t> again = serialize_model(back);
    REQUIRE(again.size() == bytes.size());
    CHECK(again == bytes);

    CHECK(back.variant == model.variant);
    CHECK(back.label_names == model.label_names);
    CHECK(back.tree.nodes.size() == model.tree.nodes.size());
    CHECK(back.tree.kept_nodes == model.tree.kept_nodes);
    CHECK(back.tree.forwarded_columns == model.tree.forwarded_columns);
    CHECK(back.features.regions.size() == model.features.regions.size());
    CHECK(back.ensemble.meta_groups == model.ensemble.meta_groups);
}

TEST_CASE("a reloaded model predicts identically") {
    const FaceHopModel& model = shared_model();
    FaceHopModel back = deserialize_model(serialize_model(model));
    for (int i = 0; i < 5; ++i) {
        const Image& img = shared_data().images[static_cast<std::size_t>(i)];
        PredictionDetail a = predict_detail(model, img);
        PredictionDetail b = predict_detail(back, img);
        CHECK(a.probability == b.probability);
        REQUIRE(a.base_probabilities.size() == b.base_probabilities.size());
        for (std::size_t g = 0; g < a.base_probabilities.size(); ++g) {
            CHECK(a.base_probabilities[g] == b.base_probabilities[g]);
        }
    }
}

TEST_CASE("file save and load agree with the in-memory codec") {
    const FaceHopModel& model = shared_model();
    const auto path = std::filesystem::temp_directory_path() / "facehop_model_io.fhop";
    save_model(path, model);
    CHECK(!std::filesystem::exists(path.string() + ".tmp"));
    FaceHopModel back = load_model(path);
    CHECK(serialize_model(back) == serialize_model(model));
    std::filesystem::remove(path);

    CHECK_THROWS_AS(load_model(std::filesystem::temp_directory_path() / "facehop_absent.fhop"),
                    IoError);
}

TEST_CASE("every single-byte payload corruption trips the checksum") {
    std::vector<std::uint8_t> bytes = serialize_model(shared_model());
    // Sample positions across the payload (after the 8-byte header, before
    // the trailing 4-byte checksum), plus the checksum itself.
    for (std::size_t pos = 8; pos < bytes.size(); pos += bytes.size() / 41 + 1) {
        std::vector<std::uint8_t> dirty = bytes;
        dirty[pos] ^= 0x2d;
        try {
            deserialize_model(dirty);
            FAIL("corruption at byte ", pos, " went unnoticed");
        } catch (const CorruptModelError& e) {
            const bool expected = e.reason() == CorruptModelError::Reason::ChecksumMismatch ||
                                  e.reason() == CorruptModelError::Reason::Truncated;
            CHECK_MESSAGE(expected, "byte ", pos, ": ", e.what());
        }
    }
}

TEST_CASE("structural damage is classified by kind") {
    const std::vector<std::uint8_t> bytes = serialize_model(shared_model());

    std::vector<std::uint8_t> magic = bytes;
    magic[1] = 'X';
    CHECK_THROWS_AS(deserialize_model(magic), CorruptModelError);
    try {
        deserialize_model(magic);
    } catch (const CorruptModelError& e) {
        CHECK(e.reason() == CorruptModelError::Reason::BadMagic);
    }

    std::vector<std::uint8_t> version = bytes;
    version[4] = 0x7f;
    try {
        deserialize_model(version);
    } catch (const CorruptModelError& e) {
        CHECK(e.reason() == CorruptModelError::Reason::UnsupportedVersion);
    }

    std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + 10);
    try {
        deserialize_model(cut);
    } catch (const CorruptModelError& e) {
        CHECK(e.reason() == CorruptModelError::Reason::Truncated);
    }

    std::vector<std::uint8_t> mid_cut(bytes.begin(), bytes.begin() + bytes.size() / 2);
    try {
        deserialize_model(mid_cut);
    } catch (const CorruptModelError& e) {
        CHECK(e.reason() == CorruptModelError::Reason::Truncated);
    }

    CHECK_THROWS_AS(deserialize_model({}), CorruptModelError);
}

TEST_CASE("parameter sections add up and match the stored tensors") {
    const FaceHopModel& model = shared_model();
    const ParamCountReport report = count_parameters(model, model.variant);
    long long sum = 0;
    for (const auto& s : report.sections) sum += s.count;
    CHECK(sum == report.total);

    long long kernels = 0, biases = 0;
    for (const auto& hop_units : model.tree.units) {
        for (const auto& u : hop_units) {
            kernels += static_cast<long long>(u.channel_count()) * u.patch_dim();
            biases += 1;
        }
    }
    long long found_kernels = 0, found_biases = 0;
    for (const auto& s : report.sections) {
        if (s.name.find("kernels") != std::string::npos) found_kernels += s.count;
        if (s.name.find("biases") != std::string::npos) found_biases += s.count;
    }
    CHECK(found_kernels == kernels);
    CHECK(found_biases == biases);

    // FaceHop I counts at least as much as II: it adds hop-1 machinery.
    const ParamCountReport wide = count_parameters(model, Variant::I);
    CHECK(wide.total > report.total);
}

TEST_CASE("the inspection report shows the tree and both variant totals") {
    const FaceHopModel& model = shared_model();
    const std::string report = inspect_report(model);
    CHECK(report.find("FaceHopI") != std::string::npos);
    CHECK(report.find("FaceHopII") != std::string::npos);
    CHECK(report.find("hop 1") != std::string::npos);
    CHECK(report.find("hop 3") != std::string::npos);
    CHECK(report.find("eye_band") != std::string::npos);
    CHECK(report.find("total") != std::string::npos);
}

TEST_CASE("skeleton models with the stock shapes serialize too") {
    FaceHopModel skel = fixtures::skeleton_model({18, 122, 233}, 15);
    // The skeleton has no node list; it only exercises shape plumbing.
    const auto dims = skel.features.group_dims(skel.tree);
    REQUIRE(dims.size() == 8);
    CHECK(dims[0] == 270);
    CHECK(dims[4] == 1830);
    CHECK(dims[7] == 233);
    const std::vector<std::uint8_t> bytes = serialize_model(skel);
    FaceHopModel back = deserialize_model(bytes);
    CHECK(serialize_model(back) == bytes);
}

}  // TEST_SUITE
