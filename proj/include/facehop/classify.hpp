#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace facehop {

// Per-feature z-scoring fitted on training data. Near-constant features get
// their deviation clamped so apply() stays finite; with zero initialization
// and an L2 penalty their weights then stay at zero.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;  // clamped below at 1e-12

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        return (x - mean).cwiseQuotient(stddev);
    }
};

Standardizer fit_standardizer(const Eigen::MatrixXd& rows);

// Binary logistic regression over standardized inputs.
struct LRModel {
    Standardizer scaler;
    Eigen::VectorXd weights;
    double intercept = 0.0;
};

struct LROptions {
    double lambda = 1e-3;    // L2 strength on the weights; the intercept is free
    int max_iters = 1000;
    double tolerance = 1e-6; // stop once the gradient's max entry is below this
};

// Mean logistic loss plus (lambda/2)|w|^2 over already-standardized rows;
// targets are +-1. Exposed so the optimizer can be checked against finite
// differences.
double lr_objective(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets,
                    const Eigen::VectorXd& weights, double intercept, double lambda);

// Gradient of lr_objective as [d/dw; d/db].
Eigen::VectorXd lr_gradient(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets,
                            const Eigen::VectorXd& weights, double intercept, double lambda);

// Fits by L-BFGS (history 10, backtracking line search) from a zero start,
// which makes the result deterministic. Labels are 0/1.
LRModel train_lr(const Eigen::MatrixXd& rows, const std::vector<int>& labels,
                 const LROptions& options);

double predict_proba(const LRModel& model, const Eigen::VectorXd& x);

// Deterministic stratified fold assignment: each class's indices are
// shuffled with the seed, then dealt round-robin. Every class needs at
// least `folds` members.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed);

// Stacked ensemble: one base classifier per feature group and a meta
// classifier over the probabilities of the groups listed in meta_groups.
// The meta model is trained on out-of-fold base probabilities so it never
// sees a base prediction made on that base model's own training rows.
struct EnsembleModel {
    std::vector<LRModel> base;   // one per feature group
    std::vector<int> meta_groups;
    LRModel meta;
};

struct EnsembleOptions {
    LROptions lr;
    int folds = 5;
    std::uint64_t seed = 0;
    std::vector<int> meta_groups;  // empty means every group
};

// features is group-major: features[g][i] is sample i's vector for group g,
// with every group aligned to `labels`.
EnsembleModel train_ensemble(const std::vector<std::vector<Eigen::VectorXd>>& features,
                             const std::vector<int>& labels, const EnsembleOptions& options);

double predict_ensemble(const EnsembleModel& model, const std::vector<Eigen::VectorXd>& groups);

struct Metrics {
    int total = 0;
    int correct = 0;
    int true_pos = 0;
    int true_neg = 0;
    int false_pos = 0;
    int false_neg = 0;
    double accuracy = 0.0;

    // Recall of each class; 0 when the class is absent from the split.
    double class0_accuracy() const {
        const int n = true_neg + false_pos;
        return n ? static_cast<double>(true_neg) / n : 0.0;
    }
    double class1_accuracy() const {
        const int n = true_pos + false_neg;
        return n ? static_cast<double>(true_pos) / n : 0.0;
    }
};

// Thresholds probabilities at 0.5 (0.5 itself counts as class 1).
Metrics evaluate(const std::vector<int>& labels, const std::vector<double>& probs);

}  // namespace facehop
