#include "facehop/augment.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <set>
#include <string>
#include <utility>

#include "facehop/eig.hpp"
#include "facehop/errors.hpp"
#include "facehop/parallel.hpp"

namespace facehop {

namespace {

void check_same_size(const std::vector<Image>& images) {
    for (const Image& img : images) {
        if (img.width != images.front().width || img.height != images.front().height) {
            throw ValidationError("images differ in size (" + std::to_string(img.width) + "x" +
                                  std::to_string(img.height) + " vs " +
                                  std::to_string(images.front().width) + "x" +
                                  std::to_string(images.front().height) + ")");
        }
        if (img.width < 1 || img.height < 1) {
            throw ValidationError("empty image in augmentation input");
        }
    }
}

bool balanced(std::size_t minority, std::size_t majority, double target_ratio) {
    // The epsilon keeps exact boundary counts (e.g. 9 against 10 at ratio
    // 0.9) on the satisfied side despite binary rounding of the ratio.
    return static_cast<double>(minority) >=
           target_ratio * static_cast<double>(majority) - 1e-9;
}

}  // namespace

Image flip_h(const Image& img) {
    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            out.at(x, y) = img.at(img.width - 1 - x, y);
        }
    }
    return out;
}

std::vector<NnPair> nearest_neighbor_pairs(const std::vector<Image>& images) {
    const std::size_t n = images.size();
    if (n < 2) {
        throw ValidationError("nearest-neighbor pairing needs at least 2 images, got " +
                              std::to_string(n));
    }
    check_same_size(images);
    const Eigen::Index dim =
        static_cast<Eigen::Index>(images.front().width) * images.front().height;

    Eigen::MatrixXd rows(static_cast<Eigen::Index>(n), dim);
    for (std::size_t i = 0; i < n; ++i) {
        rows.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::VectorXd>(images[i].data.data(), dim).transpose();
    }
    const Eigen::RowVectorXd mean = rows.colwise().mean();
    rows.rowwise() -= mean;

    const Eigen::MatrixXd cov = rows.transpose() * rows / static_cast<double>(n);
    const EigResult eig = sorted_symmetric_eig(cov, static_cast<int>(dim));

    // Fewest leading components reaching 90% of the total variance (at
    // least one, so purely flat sets still get a space to compare in).
    const Eigen::ArrayXd clamped = eig.values.array().max(0.0);
    const double total = clamped.sum();
    Eigen::Index k = 1;
    double covered = clamped[0];
    while (covered < 0.9 * total && k < eig.values.size()) {
        covered += clamped[k];
        ++k;
    }

    const Eigen::MatrixXd projected = rows * eig.vectors.topRows(k).transpose();
    const Eigen::VectorXd sq_norms = projected.rowwise().squaredNorm();

    std::vector<int> nn(n, -1);
    parallel_for(n, [&](std::size_t i) {
        const Eigen::VectorXd dots = projected * projected.row(static_cast<Eigen::Index>(i)).transpose();
        double best = 0.0;
        int best_j = -1;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double d2 = sq_norms[static_cast<Eigen::Index>(j)] +
                              sq_norms[static_cast<Eigen::Index>(i)] -
                              2.0 * dots[static_cast<Eigen::Index>(j)];
            if (best_j < 0 || d2 < best) {  // strict: ties keep the earlier index
                best = d2;
                best_j = static_cast<int>(j);
            }
        }
        nn[i] = best_j;
    });

    std::vector<NnPair> pairs;
    std::set<std::pair<int, int>> seen;
    for (std::size_t i = 0; i < n; ++i) {
        const int a = static_cast<int>(i);
        const int b = nn[i];
        const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
        if (seen.insert(key).second) {
            pairs.push_back({key.first, key.second});
        }
    }
    return pairs;
}

Image average_images(const Image& x, const Image& y) {
    if (x.width != y.width || x.height != y.height) {
        throw ValidationError("cannot average images of different sizes");
    }
    Image out(x.width, x.height);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = std::clamp(0.5 * (x.data[i] + y.data[i]), 0.0, 255.0);
    }
    return out;
}

std::vector<Image> nn_average(const std::vector<Image>& images) {
    std::vector<Image> out;
    for (const NnPair& pair : nearest_neighbor_pairs(images)) {
        out.push_back(average_images(images[static_cast<std::size_t>(pair.a)],
                                     images[static_cast<std::size_t>(pair.b)]));
    }
    return out;
}

AugmentedSet balance(const std::vector<Image>& images, const std::vector<int>& labels,
                     double target_ratio) {
    if (images.empty() || images.size() != labels.size()) {
        throw ValidationError("image and label counts differ or are empty");
    }
    if (!(target_ratio > 0.0) || target_ratio > 1.0) {
        throw ValidationError("balance target ratio must be in (0, 1]");
    }
    check_same_size(images);
    std::size_t count[2] = {0, 0};
    for (int label : labels) {
        if (label != 0 && label != 1) {
            throw ValidationError("labels must be 0 or 1, got " + std::to_string(label));
        }
        ++count[label];
    }
    if (count[0] == 0 || count[1] == 0) {
        throw ValidationError("balancing needs samples of both classes");
    }

    AugmentedSet out;
    for (std::size_t i = 0; i < images.size(); ++i) {
        out.images.push_back(images[i]);
        out.labels.push_back(labels[i]);
        out.provenance.push_back(Provenance::Original);
        out.source_a.push_back(-1);
        out.source_b.push_back(-1);
    }

    const int minority = count[1] < count[0] ? 1 : 0;
    const int majority = 1 - minority;
    std::size_t minority_count = count[minority];
    const std::size_t majority_count = count[majority];
    if (balanced(minority_count, majority_count, target_ratio)) return out;

    // Track the minority pool by position in the augmented set; averages
    // are drawn from originals and flips but never from other averages.
    std::vector<int> pool;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (labels[i] == minority) pool.push_back(static_cast<int>(i));
    }

    const std::size_t n_originals = pool.size();
    for (std::size_t p = 0; p < n_originals && !balanced(minority_count, majority_count, target_ratio); ++p) {
        const int src = pool[p];
        out.images.push_back(flip_h(out.images[static_cast<std::size_t>(src)]));
        out.labels.push_back(minority);
        out.provenance.push_back(Provenance::Flipped);
        out.source_a.push_back(src);
        out.source_b.push_back(-1);
        pool.push_back(static_cast<int>(out.images.size()) - 1);
        ++minority_count;
    }

    if (balanced(minority_count, majority_count, target_ratio) || pool.size() < 2) return out;

    std::vector<Image> pool_images;
    pool_images.reserve(pool.size());
    for (int idx : pool) pool_images.push_back(out.images[static_cast<std::size_t>(idx)]);
    const std::vector<NnPair> pairs = nearest_neighbor_pairs(pool_images);

    for (const NnPair& pair : pairs) {
        if (balanced(minority_count, majority_count, target_ratio)) break;
        const int a = pool[static_cast<std::size_t>(pair.a)];
        const int b = pool[static_cast<std::size_t>(pair.b)];
        out.images.push_back(average_images(out.images[static_cast<std::size_t>(a)],
                                            out.images[static_cast<std::size_t>(b)]));
        out.labels.push_back(minority);
        out.provenance.push_back(Provenance::Averaged);
        out.source_a.push_back(a);
        out.source_b.push_back(b);
        ++minority_count;
    }
    return out;
}

}  // namespace facehop
