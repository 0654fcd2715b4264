#include "facehop/pipeline.hpp"

#include <cmath>
#include <utility>

#include "facehop/augment.hpp"
#include "facehop/errors.hpp"
#include "facehop/image_io.hpp"
#include "facehop/parallel.hpp"
#include "facehop/rng.hpp"

namespace facehop {

namespace {

// Ensemble fold assignment gets its own stream so it never aliases the
// split streams used by stratified_split / stratified_folds.
constexpr std::uint64_t kEnsembleStream = 1000;

Image preprocess_to(const Image& img, const Landmarks& lm, int size) {
    if (size == 32) return preprocess_image(img, lm);
    Image aligned = align(img, lm);
    Landmarks alm = aligned_landmarks(img, lm);
    return bilinear_resize(equalize_hist(crop(aligned, alm)), size, size);
}

std::vector<double> probs_for_group(const LRModel& lr,
                                    const std::vector<Eigen::VectorXd>& features) {
    std::vector<double> out(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) out[i] = predict_proba(lr, features[i]);
    return out;
}

}  // namespace

LoadedDataset load_and_preprocess(const Dataset& manifest, int input_size) {
    if (input_size < 1) throw ValidationError("input size must be positive");
    LoadedDataset out;
    out.labels = manifest.labels;
    out.label_names = manifest.label_names;
    out.images.resize(manifest.size());
    parallel_for(manifest.size(), [&](std::size_t i) {
        const ManifestEntry& e = manifest.entries[i];
        Image raw = load_image(e.path);
        validate_landmarks(raw, e.landmarks);
        out.images[i] = preprocess_to(raw, e.landmarks, input_size);
    });
    return out;
}

LoadedDataset subset(const LoadedDataset& data, const std::vector<std::size_t>& indices) {
    LoadedDataset out;
    out.label_names = data.label_names;
    out.images.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (std::size_t idx : indices) {
        if (idx >= data.size()) throw ValidationError("subset index out of range");
        out.images.push_back(data.images[idx]);
        out.labels.push_back(data.labels[idx]);
    }
    return out;
}

FaceHopModel train_pipeline(const LoadedDataset& train, const RunConfig& cfg, std::uint64_t seed) {
    if (train.size() == 0) throw ValidationError("training set is empty");

    const std::vector<Image>* images = &train.images;
    const std::vector<int>* labels = &train.labels;
    AugmentedSet augmented;
    if (cfg.augment_enabled) {
        augmented = balance(train.images, train.labels, cfg.augment_ratio);
        images = &augmented.images;
        labels = &augmented.labels;
    }

    FaceHopModel model;
    model.variant = cfg.variant;
    model.label_names = train.label_names;
    model.tree = fit_tree(*images, cfg.hop);

    std::vector<HopOutputs> outputs(images->size());
    parallel_for(images->size(), [&](std::size_t i) {
        outputs[i] = transform(model.tree, (*images)[i]);
    });

    model.features = fit_region_pca(outputs, cfg.regions, cfg.n_components);

    const std::size_t n_groups = cfg.regions.size() + 1;
    std::vector<std::vector<Eigen::VectorXd>> groups(
        n_groups, std::vector<Eigen::VectorXd>(images->size()));
    parallel_for(images->size(), [&](std::size_t i) {
        auto feats = extract_features(model.features, outputs[i]);
        for (std::size_t g = 0; g < n_groups; ++g) groups[g][i] = std::move(feats[g]);
    });
    outputs.clear();
    outputs.shrink_to_fit();

    EnsembleOptions eo;
    eo.lr.lambda = cfg.lambda;
    eo.folds = cfg.folds;
    eo.seed = Rng::derive_seed(seed, kEnsembleStream);
    eo.meta_groups = variant_groups(cfg.regions, cfg.variant);
    model.ensemble = train_ensemble(groups, *labels, eo);
    return model;
}

PredictionDetail predict_detail(const FaceHopModel& model, const Image& image) {
    HopOutputs out = transform(model.tree, image);
    auto groups = extract_features(model.features, out);

    PredictionDetail d;
    d.base_probabilities.resize(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        d.base_probabilities[g] = predict_proba(model.ensemble.base[g], groups[g]);
    }
    d.probability = predict_ensemble(model.ensemble, groups);
    d.predicted = d.probability >= 0.5 ? 1 : 0;
    return d;
}

TrainResult train_and_evaluate(const LoadedDataset& full, const RunConfig& cfg,
                               std::uint64_t rep_seed) {
    SplitIndices split = stratified_split(full.labels, 1.0 - cfg.train_fraction, rep_seed);
    LoadedDataset train = subset(full, split.train);
    LoadedDataset test = subset(full, split.test);

    TrainResult r;
    r.model = train_pipeline(train, cfg, rep_seed);
    r.metrics.seed = rep_seed;
    r.metrics.train_size = train.size();
    r.metrics.test_size = test.size();

    const std::size_t n_groups = r.model.ensemble.base.size();
    std::vector<std::vector<Eigen::VectorXd>> groups(
        n_groups, std::vector<Eigen::VectorXd>(test.size()));
    std::vector<double> ens_probs(test.size());
    parallel_for(test.size(), [&](std::size_t i) {
        HopOutputs out = transform(r.model.tree, test.images[i]);
        auto feats = extract_features(r.model.features, out);
        ens_probs[i] = predict_ensemble(r.model.ensemble, feats);
        for (std::size_t g = 0; g < n_groups; ++g) groups[g][i] = std::move(feats[g]);
    });

    r.metrics.ensemble = evaluate(test.labels, ens_probs);
    r.metrics.base.reserve(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
        r.metrics.base.push_back(
            evaluate(test.labels, probs_for_group(r.model.ensemble.base[g], groups[g])));
    }
    return r;
}

ProtocolSummary run_protocol(const LoadedDataset& full, const RunConfig& cfg) {
    if (cfg.repetitions < 1) throw ValidationError("repetitions must be at least 1");
    ProtocolSummary s;
    s.repetitions.reserve(static_cast<std::size_t>(cfg.repetitions));
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
        const std::uint64_t rep_seed =
            Rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
        s.repetitions.push_back(
            train_and_evaluate(full, cfg, rep_seed).metrics);
    }

    double sum = 0.0, sum_sq = 0.0;
    for (const auto& rep : s.repetitions) {
        sum += rep.ensemble.accuracy;
        sum_sq += rep.ensemble.accuracy * rep.ensemble.accuracy;
    }
    const double n = static_cast<double>(s.repetitions.size());
    s.mean_accuracy = sum / n;
    const double var = std::max(0.0, sum_sq / n - s.mean_accuracy * s.mean_accuracy);
    s.stddev_accuracy = std::sqrt(var);

    if (!s.repetitions.empty()) {
        const std::size_t n_groups = s.repetitions.front().base.size();
        s.base_mean_accuracy.assign(n_groups, 0.0);
        for (const auto& rep : s.repetitions) {
            for (std::size_t g = 0; g < n_groups; ++g) {
                s.base_mean_accuracy[g] += rep.base[g].accuracy;
            }
        }
        for (double& v : s.base_mean_accuracy) v /= n;
    }
    return s;
}

}  // namespace facehop
