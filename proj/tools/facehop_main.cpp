// Command-line front end: train / eval / predict / inspect / augment.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error, 3 corrupt model.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "facehop/augment.hpp"
#include "facehop/config.hpp"
#include "facehop/dataset.hpp"
#include "facehop/errors.hpp"
#include "facehop/image_io.hpp"
#include "facehop/model_io.hpp"
#include "facehop/pipeline.hpp"
#include "facehop/rng.hpp"
#include "facehop/synthetic.hpp"

namespace {

using facehop::RunConfig;
using json = nlohmann::json;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> variant;
    std::string out;
};

RunConfig resolve_config(const CommonArgs& args, bool allow_default) {
    RunConfig cfg;
    if (!args.config_path.empty()) {
        cfg = facehop::load_config(args.config_path);
    } else if (!allow_default) {
        throw facehop::ValidationError("--config is required for this command");
    }
    if (args.seed) cfg.seed = *args.seed;
    if (args.variant) cfg.variant = facehop::parse_variant(*args.variant);
    return cfg;
}

std::string group_name(const std::vector<facehop::RegionSpec>& regions, std::size_t g) {
    if (g < regions.size()) {
        return "hop" + std::to_string(regions[g].hop) + "/" + regions[g].name;
    }
    return "hop3/full";
}

void print_node_counts(std::ostream& os, const facehop::FaceHopModel& model) {
    using facehop::NodeKind;
    os << "node counts (intermediate, leaf, discarded):\n";
    for (int hop = 1; hop <= 3; ++hop) {
        os << "  hop " << hop << ": (" << model.tree.node_count(hop, NodeKind::Intermediate)
           << ", " << model.tree.node_count(hop, NodeKind::Leaf) << ", "
           << model.tree.node_count(hop, NodeKind::Discard) << ")\n";
    }
}

void print_feature_dims(std::ostream& os, const facehop::FaceHopModel& model) {
    const auto dims = model.features.group_dims(model.tree);
    os << "feature dimensions:\n";
    for (std::size_t g = 0; g < dims.size(); ++g) {
        os << "  " << group_name(model.features.regions, g) << ": " << dims[g] << "\n";
    }
}

void print_param_counts(std::ostream& os, const facehop::FaceHopModel& model,
                        facehop::Variant variant) {
    const auto report = facehop::count_parameters(model, variant);
    os << "parameter count (" << facehop::variant_name(variant) << "):\n";
    for (const auto& s : report.sections) {
        os << "  " << s.name << ": " << s.count << "\n";
    }
    os << "  total: " << report.total << "\n";
}

int cmd_train(const CommonArgs& args) {
    RunConfig cfg = resolve_config(args, false);
    if (cfg.manifest.empty()) {
        throw facehop::ValidationError("config must set 'manifest' for training");
    }
    const std::string out_path = args.out.empty() ? "facehop_model.fhop" : args.out;

    facehop::Dataset manifest = facehop::load_manifest(cfg.manifest);
    std::cout << "loaded " << manifest.size() << " images (" << manifest.label_names[0] << "/"
              << manifest.label_names[1] << ")\n";
    facehop::LoadedDataset data = facehop::load_and_preprocess(manifest, cfg.hop.input_size);

    const std::uint64_t run_seed = facehop::Rng::derive_seed(cfg.seed, 0);
    facehop::TrainResult result = facehop::train_and_evaluate(data, cfg, run_seed);

    std::cout << "trained " << facehop::variant_name(cfg.variant) << " on "
              << result.metrics.train_size << " images, tested on " << result.metrics.test_size
              << "\n";
    print_node_counts(std::cout, result.model);
    print_feature_dims(std::cout, result.model);
    print_param_counts(std::cout, result.model, cfg.variant);
    std::printf("holdout accuracy: %.4f\n", result.metrics.ensemble.accuracy);

    facehop::save_model(out_path, result.model);
    std::cout << "model written to " << out_path << "\n";
    return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& model_path) {
    facehop::FaceHopModel model = facehop::load_model(model_path);

    RunConfig cfg = resolve_config(args, false);
    if (cfg.manifest.empty()) {
        throw facehop::ValidationError("config must set 'manifest' for evaluation");
    }
    // The model fixes the architecture; the config supplies data and
    // protocol hyperparameters. --variant (or the config) may override the
    // trained variant, since every repetition retrains from scratch anyway.
    cfg.hop = model.tree.config;
    cfg.regions = model.features.regions;
    cfg.n_components = model.features.n_components;
    if (!args.variant) cfg.variant = model.variant;

    facehop::Dataset manifest = facehop::load_manifest(cfg.manifest);
    facehop::LoadedDataset data = facehop::load_and_preprocess(manifest, cfg.hop.input_size);
    facehop::ProtocolSummary summary = facehop::run_protocol(data, cfg);

    const std::size_t n_groups = summary.repetitions.front().base.size();
    std::printf("%-22s", "classifier");
    for (std::size_t r = 0; r < summary.repetitions.size(); ++r) {
        std::printf("   rep %zu", r);
    }
    std::printf("     mean\n");
    for (std::size_t g = 0; g < n_groups; ++g) {
        std::printf("%-22s", group_name(cfg.regions, g).c_str());
        for (const auto& rep : summary.repetitions) {
            std::printf("  %.4f", rep.base[g].accuracy);
        }
        std::printf("   %.4f\n", summary.base_mean_accuracy[g]);
    }
    std::printf("%-22s", ("ensemble (" + facehop::variant_name(cfg.variant) + ")").c_str());
    for (const auto& rep : summary.repetitions) {
        std::printf("  %.4f", rep.ensemble.accuracy);
    }
    std::printf("   %.4f\n", summary.mean_accuracy);
    std::printf("accuracy: %.4f +/- %.4f over %zu repetitions\n", summary.mean_accuracy,
                summary.stddev_accuracy, summary.repetitions.size());

    // The same numbers as machine-readable JSON lines.
    std::vector<json> records;
    for (std::size_t r = 0; r < summary.repetitions.size(); ++r) {
        const auto& rep = summary.repetitions[r];
        json rec{{"record", "repetition"},
                 {"index", r},
                 {"seed", rep.seed},
                 {"train_size", rep.train_size},
                 {"test_size", rep.test_size},
                 {"accuracy", rep.ensemble.accuracy}};
        json base = json::object();
        for (std::size_t g = 0; g < n_groups; ++g) {
            base[group_name(cfg.regions, g)] = rep.base[g].accuracy;
        }
        rec["base_accuracy"] = base;
        records.push_back(std::move(rec));
    }
    json mean_base = json::object();
    for (std::size_t g = 0; g < n_groups; ++g) {
        mean_base[group_name(cfg.regions, g)] = summary.base_mean_accuracy[g];
    }
    records.push_back(json{{"record", "summary"},
                           {"variant", facehop::variant_name(cfg.variant)},
                           {"repetitions", summary.repetitions.size()},
                           {"mean_accuracy", summary.mean_accuracy},
                           {"stddev_accuracy", summary.stddev_accuracy},
                           {"base_mean_accuracy", mean_base}});

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!args.out.empty()) {
        file.open(args.out);
        if (!file) throw facehop::IoError("cannot write metrics to " + args.out);
        out = &file;
    }
    for (const json& rec : records) *out << rec.dump() << "\n";
    if (!args.out.empty()) {
        if (!file.flush()) throw facehop::IoError("failed while writing metrics to " + args.out);
        std::cout << "metrics written to " << args.out << "\n";
    }
    return 0;
}

void print_prediction(const facehop::FaceHopModel& model, const std::string& name,
                      const facehop::PredictionDetail& detail) {
    std::printf("%s: %s (p=%.6f)\n", name.c_str(),
                model.label_names[static_cast<std::size_t>(detail.predicted)].c_str(),
                detail.probability);
    for (std::size_t g = 0; g < detail.base_probabilities.size(); ++g) {
        std::printf("  %-20s %.6f\n", group_name(model.features.regions, g).c_str(),
                    detail.base_probabilities[g]);
    }
}

int cmd_predict(const std::string& model_path, const std::string& image_path,
                std::vector<double> eyes, const std::string& manifest_path) {
    facehop::FaceHopModel model = facehop::load_model(model_path);
    const int input_size = model.tree.config.input_size;

    if (!manifest_path.empty()) {
        const auto entries = facehop::load_manifest_entries(manifest_path);
        for (const auto& e : entries) {
            facehop::Image raw = facehop::load_image(e.path);
            facehop::validate_landmarks(raw, e.landmarks);
            facehop::Image img =
                facehop::bilinear_resize(facehop::equalize_hist(facehop::crop(
                                             facehop::align(raw, e.landmarks),
                                             facehop::aligned_landmarks(raw, e.landmarks))),
                                         input_size, input_size);
            print_prediction(model, e.path.filename().string(), predict_detail(model, img));
        }
        return 0;
    }

    if (image_path.empty() || eyes.size() != 4) {
        throw facehop::ValidationError(
            "predict needs --manifest, or --image with --eyes x1,y1,x2,y2");
    }
    facehop::Landmarks lm;
    lm.left_x = eyes[0];
    lm.left_y = eyes[1];
    lm.right_x = eyes[2];
    lm.right_y = eyes[3];
    facehop::Image raw = facehop::load_image(image_path);
    facehop::validate_landmarks(raw, lm);
    facehop::Image img = facehop::bilinear_resize(
        facehop::equalize_hist(
            facehop::crop(facehop::align(raw, lm), facehop::aligned_landmarks(raw, lm))),
        input_size, input_size);
    print_prediction(model, image_path, predict_detail(model, img));
    return 0;
}

int cmd_inspect(const std::string& model_path) {
    facehop::FaceHopModel model = facehop::load_model(model_path);
    std::cout << facehop::inspect_report(model);
    return 0;
}

int cmd_augment(const CommonArgs& args) {
    RunConfig cfg = resolve_config(args, false);
    if (cfg.manifest.empty()) {
        throw facehop::ValidationError("config must set 'manifest' for augmentation");
    }
    if (args.out.empty()) {
        throw facehop::ValidationError("--out directory is required for augment");
    }

    facehop::Dataset manifest = facehop::load_manifest(cfg.manifest);
    facehop::LoadedDataset data = facehop::load_and_preprocess(manifest, cfg.hop.input_size);
    facehop::AugmentedSet set = facehop::balance(data.images, data.labels, cfg.augment_ratio);

    const std::filesystem::path dir(args.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw facehop::IoError("cannot create directory " + dir.string() + ": " + ec.message());

    // Every output image is aligned, so the eye positions are the canonical
    // ones of the crop geometry (scaled if the pipeline resizes elsewhere
    // than 32).
    facehop::Landmarks lm = facehop::canonical_aligned_landmarks();
    if (cfg.hop.input_size != 32) {
        const double s = cfg.hop.input_size / 32.0;
        lm.left_x *= s;
        lm.left_y *= s;
        lm.right_x *= s;
        lm.right_y *= s;
    }

    std::vector<facehop::ManifestEntry> entries;
    entries.reserve(set.images.size());
    for (std::size_t i = 0; i < set.images.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "img_%05zu.pgm", i);
        facehop::save_pgm(dir / name, set.images[i]);
        facehop::ManifestEntry e;
        e.path = name;
        e.raw_label = data.label_names[static_cast<std::size_t>(set.labels[i])];
        e.landmarks = lm;
        switch (set.provenance[i]) {
            case facehop::Provenance::Original:
                e.provenance = "original";
                break;
            case facehop::Provenance::Flipped:
                e.provenance = "flipped:" + std::to_string(set.source_a[i]);
                break;
            case facehop::Provenance::Averaged:
                e.provenance = "averaged:" + std::to_string(set.source_a[i]) + "+" +
                               std::to_string(set.source_b[i]);
                break;
        }
        entries.push_back(std::move(e));
    }
    facehop::save_manifest(dir / "manifest.csv", entries);

    int originals = 0, flipped = 0, averaged = 0;
    for (auto p : set.provenance) {
        if (p == facehop::Provenance::Original) ++originals;
        else if (p == facehop::Provenance::Flipped) ++flipped;
        else ++averaged;
    }
    std::cout << "wrote " << set.images.size() << " images to " << dir.string() << " ("
              << originals << " original, " << flipped << " flipped, " << averaged
              << " averaged)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FaceHop: interpretable face-attribute classification on 32x32 crops"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string model_path;
    std::string image_path;
    std::string manifest_path;
    std::vector<double> eyes;

    auto add_common = [&](CLI::App* sub, bool with_variant) {
        sub->add_option("--config", common.config_path, "run configuration file");
        sub->add_option("--seed", common.seed, "override the config seed");
        if (with_variant) {
            sub->add_option("--variant", common.variant, "FaceHopI or FaceHopII");
        }
        sub->add_option("--out", common.out, "output path");
    };

    CLI::App* train = app.add_subcommand("train", "train a model and write it to --out");
    add_common(train, true);

    CLI::App* eval = app.add_subcommand("eval", "re-split, retrain and score repeatedly");
    add_common(eval, true);
    eval->add_option("--model", model_path, "trained model file (fixes the architecture)")
        ->required();

    CLI::App* predict = app.add_subcommand("predict", "classify images with a trained model");
    predict->add_option("--model", model_path, "trained model file")->required();
    predict->add_option("--image", image_path, "single image to classify");
    predict->add_option("--eyes", eyes, "left_x,left_y,right_x,right_y for --image")
        ->delimiter(',')
        ->expected(4);
    predict->add_option("--manifest", manifest_path, "classify every row of a manifest");

    CLI::App* inspect = app.add_subcommand("inspect", "print tree, energies and model size");
    inspect->add_option("--model", model_path, "trained model file")->required();

    CLI::App* augment = app.add_subcommand("augment", "write a balanced augmented dataset");
    add_common(augment, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (train->parsed()) return cmd_train(common);
        if (eval->parsed()) return cmd_eval(common, model_path);
        if (predict->parsed()) return cmd_predict(model_path, image_path, eyes, manifest_path);
        if (inspect->parsed()) return cmd_inspect(model_path);
        if (augment->parsed()) return cmd_augment(common);
    } catch (const facehop::CorruptModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const facehop::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const facehop::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
