#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "facehop/config.hpp"
#include "facehop/dataset.hpp"
#include "facehop/image.hpp"
#include "facehop/model.hpp"

namespace facehop {

// A manifest's images after alignment, cropping, equalization and resize,
// ready for the hop cascade.
struct LoadedDataset {
    std::vector<Image> images;  // each input_size x input_size
    std::vector<int> labels;
    std::array<std::string, 2> label_names{};

    std::size_t size() const { return images.size(); }
};

LoadedDataset load_and_preprocess(const Dataset& manifest, int input_size = 32);

LoadedDataset subset(const LoadedDataset& data, const std::vector<std::size_t>& indices);

// Trains the full stack on the given (training) images: optional balancing
// augmentation, hop cascade, region projections, and the stacked classifier
// ensemble. `seed` drives fold assignment; the same seed and data give a
// bit-identical model.
FaceHopModel train_pipeline(const LoadedDataset& train, const RunConfig& cfg, std::uint64_t seed);

struct PredictionDetail {
    int predicted = 0;           // class index
    double probability = 0.0;    // ensemble probability of class 1
    std::vector<double> base_probabilities;  // one per feature group
};

PredictionDetail predict_detail(const FaceHopModel& model, const Image& image);

struct RepetitionResult {
    std::uint64_t seed = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    Metrics ensemble;
    std::vector<Metrics> base;  // test metrics of each stand-alone group
};

struct TrainResult {
    FaceHopModel model;
    RepetitionResult metrics;
};

// One protocol repetition: stratified split of `full` driven by rep_seed,
// training on one side, metrics on the other.
TrainResult train_and_evaluate(const LoadedDataset& full, const RunConfig& cfg,
                               std::uint64_t rep_seed);

struct ProtocolSummary {
    std::vector<RepetitionResult> repetitions;
    double mean_accuracy = 0.0;
    double stddev_accuracy = 0.0;            // population, 0 for one repetition
    std::vector<double> base_mean_accuracy;  // per group, across repetitions
};

// cfg.repetitions independent split/train/test rounds; repetition r runs
// with a seed derived from (cfg.seed, r), so results are reproducible and
// repetitions are decorrelated.
ProtocolSummary run_protocol(const LoadedDataset& full, const RunConfig& cfg);

}  // namespace facehop
