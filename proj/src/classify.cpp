#include "facehop/classify.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>
#include <utility>

#include "facehop/errors.hpp"
#include "facehop/parallel.hpp"
#include "facehop/rng.hpp"

namespace facehop {

namespace {

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// log(1 + e^t) without overflow for large |t|.
double softplus(double t) {
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

Eigen::VectorXd to_targets(const std::vector<int>& labels) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
    bool saw[2] = {false, false};
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw ValidationError("labels must be 0 or 1, got " + std::to_string(labels[i]));
        }
        saw[labels[i]] = true;
        y[static_cast<Eigen::Index>(i)] = labels[i] == 1 ? 1.0 : -1.0;
    }
    if (!saw[0] || !saw[1]) {
        throw ValidationError("training labels must contain both classes");
    }
    return y;
}

struct Objective {
    const Eigen::MatrixXd& rows;
    const Eigen::VectorXd& targets;
    double lambda;

    double value(const Eigen::VectorXd& theta) const {
        const Eigen::Index d = rows.cols();
        return lr_objective(rows, targets, theta.head(d), theta[d], lambda);
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
        const Eigen::Index d = rows.cols();
        return lr_gradient(rows, targets, theta.head(d), theta[d], lambda);
    }
};

}  // namespace

Standardizer fit_standardizer(const Eigen::MatrixXd& rows) {
    if (rows.rows() == 0) {
        throw ValidationError("cannot standardize an empty sample set");
    }
    Standardizer scaler;
    scaler.mean = rows.colwise().mean();
    const Eigen::MatrixXd centered = rows.rowwise() - scaler.mean.transpose();
    scaler.stddev = (centered.array().square().colwise().mean()).sqrt().matrix();
    scaler.stddev = scaler.stddev.cwiseMax(1e-12);
    return scaler;
}

double lr_objective(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets,
                    const Eigen::VectorXd& weights, double intercept, double lambda) {
    const Eigen::VectorXd z = (rows * weights).array() + intercept;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        loss += softplus(-targets[i] * z[i]);
    }
    loss /= static_cast<double>(z.size());
    return loss + 0.5 * lambda * weights.squaredNorm();
}

Eigen::VectorXd lr_gradient(const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets,
                            const Eigen::VectorXd& weights, double intercept, double lambda) {
    const Eigen::Index n = rows.rows();
    const Eigen::VectorXd z = (rows * weights).array() + intercept;
    Eigen::VectorXd residual(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        residual[i] = -targets[i] * sigmoid(-targets[i] * z[i]);
    }
    Eigen::VectorXd grad(weights.size() + 1);
    grad.head(weights.size()) =
        rows.transpose() * residual / static_cast<double>(n) + lambda * weights;
    grad[weights.size()] = residual.mean();
    return grad;
}

LRModel train_lr(const Eigen::MatrixXd& rows, const std::vector<int>& labels,
                 const LROptions& options) {
    if (rows.rows() != static_cast<Eigen::Index>(labels.size())) {
        throw ValidationError("feature rows and labels differ in count");
    }
    if (rows.cols() < 1) {
        throw ValidationError("classifier needs at least one feature");
    }
    const Eigen::VectorXd y = to_targets(labels);

    LRModel model;
    model.scaler = fit_standardizer(rows);
    Eigen::MatrixXd X = rows;
    X.rowwise() -= model.scaler.mean.transpose();
    X.array().rowwise() /= model.scaler.stddev.transpose().array();

    const Objective objective{X, y, options.lambda};
    const Eigen::Index dim = X.cols() + 1;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
    double f = objective.value(theta);
    Eigen::VectorXd g = objective.gradient(theta);

    // L-BFGS with a short history and Armijo backtracking. Curvature pairs
    // with a non-positive product are skipped to keep the approximation
    // positive definite.
    std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> history;
    std::deque<double> rho;
    constexpr std::size_t kHistory = 10;

    for (int iter = 0; iter < options.max_iters; ++iter) {
        if (g.lpNorm<Eigen::Infinity>() < options.tolerance) break;

        Eigen::VectorXd q = g;
        std::vector<double> alpha(history.size());
        for (std::size_t i = history.size(); i-- > 0;) {
            alpha[i] = rho[i] * history[i].first.dot(q);
            q -= alpha[i] * history[i].second;
        }
        if (!history.empty()) {
            const auto& [s, yv] = history.back();
            q *= s.dot(yv) / yv.squaredNorm();
        }
        for (std::size_t i = 0; i < history.size(); ++i) {
            const double beta = rho[i] * history[i].second.dot(q);
            q += (alpha[i] - beta) * history[i].first;
        }
        Eigen::VectorXd direction = -q;
        double slope = g.dot(direction);
        if (slope >= 0.0) {  // history led uphill; fall back to steepest descent
            history.clear();
            rho.clear();
            direction = -g;
            slope = -g.squaredNorm();
        }

        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd theta_new;
        double f_new = f;
        for (int halvings = 0; halvings < 60; ++halvings) {
            theta_new = theta + step * direction;
            f_new = objective.value(theta_new);
            if (f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no descent possible at representable steps

        Eigen::VectorXd g_new = objective.gradient(theta_new);
        const Eigen::VectorXd s = theta_new - theta;
        const Eigen::VectorXd yv = g_new - g;
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            history.emplace_back(s, yv);
            rho.push_back(1.0 / sy);
            if (history.size() > kHistory) {
                history.pop_front();
                rho.pop_front();
            }
        }
        theta = std::move(theta_new);
        f = f_new;
        g = std::move(g_new);
    }

    model.weights = theta.head(X.cols());
    model.intercept = theta[X.cols()];
    return model;
}

double predict_proba(const LRModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.weights.size()) {
        throw ValidationError("feature vector length " + std::to_string(x.size()) +
                              " does not match classifier width " + std::to_string(model.weights.size()));
    }
    return sigmoid(model.weights.dot(model.scaler.apply(x)) + model.intercept);
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed) {
    if (folds < 2) {
        throw ValidationError("need at least 2 folds, got " + std::to_string(folds));
    }
    std::vector<std::vector<std::size_t>> by_class(2);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw ValidationError("labels must be 0 or 1, got " + std::to_string(labels[i]));
        }
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (int cls = 0; cls < 2; ++cls) {
        if (by_class[static_cast<std::size_t>(cls)].size() < static_cast<std::size_t>(folds)) {
            throw ValidationError("class " + std::to_string(cls) + " has " +
                                  std::to_string(by_class[static_cast<std::size_t>(cls)].size()) +
                                  " samples, fewer than " + std::to_string(folds) + " folds");
        }
    }

    std::vector<int> fold_of(labels.size(), 0);
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t>& members = by_class[static_cast<std::size_t>(cls)];
        Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(cls)));
        rng.shuffle(members);
        for (std::size_t pos = 0; pos < members.size(); ++pos) {
            fold_of[members[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
        }
    }
    return fold_of;
}

EnsembleModel train_ensemble(const std::vector<std::vector<Eigen::VectorXd>>& features,
                             const std::vector<int>& labels, const EnsembleOptions& options) {
    const std::size_t n_groups = features.size();
    if (n_groups == 0) {
        throw ValidationError("ensemble needs at least one feature group");
    }
    const std::size_t n = features.front().size();
    if (n == 0 || n != labels.size()) {
        throw ValidationError("feature and label counts differ or are empty");
    }
    for (const auto& group : features) {
        if (group.size() != n) {
            throw ValidationError("every feature group must cover the same samples");
        }
    }

    EnsembleModel model;
    model.meta_groups = options.meta_groups;
    if (model.meta_groups.empty()) {
        for (std::size_t g = 0; g < n_groups; ++g) model.meta_groups.push_back(static_cast<int>(g));
    }
    std::vector<bool> used(n_groups, false);
    for (int g : model.meta_groups) {
        if (g < 0 || static_cast<std::size_t>(g) >= n_groups) {
            throw ValidationError("meta group " + std::to_string(g) + " out of range");
        }
        if (used[static_cast<std::size_t>(g)]) {
            throw ValidationError("meta group " + std::to_string(g) + " listed twice");
        }
        used[static_cast<std::size_t>(g)] = true;
    }

    // One matrix per group; rows follow the sample order.
    std::vector<Eigen::MatrixXd> group_rows(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
        const Eigen::Index dim = features[g].front().size();
        group_rows[g].resize(static_cast<Eigen::Index>(n), dim);
        for (std::size_t i = 0; i < n; ++i) {
            if (features[g][i].size() != dim) {
                throw ValidationError("feature group " + std::to_string(g) +
                                      " varies in width across samples");
            }
            group_rows[g].row(static_cast<Eigen::Index>(i)) = features[g][i].transpose();
        }
    }

    const std::vector<int> fold_of = stratified_folds(labels, options.folds, options.seed);

    // Out-of-fold base probabilities, one column per group.
    Eigen::MatrixXd oof(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_groups));
    const std::size_t tasks = static_cast<std::size_t>(options.folds) * n_groups;
    parallel_for(tasks, [&](std::size_t task) {
        const int fold = static_cast<int>(task / n_groups);
        const std::size_t g = task % n_groups;

        std::vector<Eigen::Index> train_rows;
        std::vector<int> train_labels;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] != fold) {
                train_rows.push_back(static_cast<Eigen::Index>(i));
                train_labels.push_back(labels[i]);
            }
        }
        Eigen::MatrixXd sub(static_cast<Eigen::Index>(train_rows.size()), group_rows[g].cols());
        for (std::size_t r = 0; r < train_rows.size(); ++r) {
            sub.row(static_cast<Eigen::Index>(r)) = group_rows[g].row(train_rows[r]);
        }
        const LRModel fold_model = train_lr(sub, train_labels, options.lr);
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] == fold) {
                oof(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) =
                    predict_proba(fold_model, features[g][i]);
            }
        }
    });

    // Final base models see all the data; the meta model sees only the
    // held-out probabilities.
    model.base.resize(n_groups);
    parallel_for(n_groups, [&](std::size_t g) {
        model.base[g] = train_lr(group_rows[g], labels, options.lr);
    });

    Eigen::MatrixXd meta_rows(static_cast<Eigen::Index>(n),
                              static_cast<Eigen::Index>(model.meta_groups.size()));
    for (std::size_t j = 0; j < model.meta_groups.size(); ++j) {
        meta_rows.col(static_cast<Eigen::Index>(j)) = oof.col(model.meta_groups[static_cast<std::size_t>(j)]);
    }
    model.meta = train_lr(meta_rows, labels, options.lr);
    return model;
}

double predict_ensemble(const EnsembleModel& model, const std::vector<Eigen::VectorXd>& groups) {
    if (groups.size() != model.base.size()) {
        throw ValidationError("expected " + std::to_string(model.base.size()) +
                              " feature groups, got " + std::to_string(groups.size()));
    }
    Eigen::VectorXd meta_in(static_cast<Eigen::Index>(model.meta_groups.size()));
    for (std::size_t j = 0; j < model.meta_groups.size(); ++j) {
        const std::size_t g = static_cast<std::size_t>(model.meta_groups[j]);
        meta_in[static_cast<Eigen::Index>(j)] = predict_proba(model.base[g], groups[g]);
    }
    return predict_proba(model.meta, meta_in);
}

Metrics evaluate(const std::vector<int>& labels, const std::vector<double>& probs) {
    if (labels.size() != probs.size() || labels.empty()) {
        throw ValidationError("evaluation needs matching, non-empty labels and probabilities");
    }
    Metrics m;
    m.total = static_cast<int>(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int pred = probs[i] >= 0.5 ? 1 : 0;
        if (pred == labels[i]) {
            ++m.correct;
            (pred == 1 ? m.true_pos : m.true_neg)++;
        } else {
            (pred == 1 ? m.false_pos : m.false_neg)++;
        }
    }
    m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.total);
    return m;
}

}  // namespace facehop
