#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "facehop/errors.hpp"
#include "facehop/hoptree.hpp"
#include "facehop/rng.hpp"
#include "support/oracles.hpp"

using namespace facehop;

namespace {

std::vector<Image> random_images(int n, int side, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Image> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Image img(side, side);
        for (double& v : img.data) v = rng.uniform(0.0, 255.0);
        out.push_back(std::move(img));
    }
    return out;
}

HopConfig keep_all_12() {
    // 12 -> conv3 -> 10 -> pool -> 5 -> conv3 -> 3 -> conv3 -> 1.
    HopConfig cfg;
    cfg.input_size = 12;
    cfg.hops[0] = HopSpec{3, PartitionMode::energy_threshold(0.0), true};
    cfg.hops[1] = HopSpec{3, PartitionMode::energy_threshold(0.0), false};
    cfg.hops[2] = HopSpec{3, PartitionMode::energy_threshold(0.0), false};
    return cfg;
}

}  // namespace

TEST_SUITE("hoptree") {

TEST_CASE("a keep-all window-3 cascade has the expected grids and channel counts") {
    auto images = random_images(30, 12, 100);
    HopModel model = fit_tree(images, keep_all_12());

    CHECK(model.kept_count(1) == 9);
    CHECK(model.kept_count(2) == 81);
    CHECK(model.kept_count(3) == 729);
    CHECK(model.units[0].size() == 1);
    CHECK(model.units[1].size() == 9);
    CHECK(model.units[2].size() == 81);

    HopOutputs out = transform(model, images[0]);
    CHECK(out.hops[0].height == 10);
    CHECK(out.hops[0].width == 10);
    CHECK(out.hops[0].channels() == 9);
    CHECK(out.hops[1].height == 3);
    CHECK(out.hops[1].channels() == 81);
    CHECK(out.hops[2].height == 1);
    CHECK(out.hops[2].channels() == 729);
}

TEST_CASE("the stock 32-pixel cascade produces 28/14/10/5/1 grids") {
    auto images = random_images(30, 32, 101);
    HopConfig cfg;  // defaults: windows 5, pooling after hops 1 and 2
    cfg.hops[0].mode = PartitionMode::fixed(18, 7);
    cfg.hops[1].mode = PartitionMode::fixed(122, 328);
    cfg.hops[2].mode = PartitionMode::fixed(233, 2817);
    HopModel model = fit_tree(images, cfg);

    using NK = NodeKind;
    CHECK(model.node_count(1, NK::Intermediate) == 18);
    CHECK(model.node_count(1, NK::Leaf) == 0);
    CHECK(model.node_count(1, NK::Discard) == 7);
    CHECK(model.node_count(2, NK::Intermediate) == 122);
    CHECK(model.node_count(2, NK::Discard) == 328);
    CHECK(model.node_count(3, NK::Intermediate) == 0);
    CHECK(model.node_count(3, NK::Leaf) == 233);
    CHECK(model.node_count(3, NK::Discard) == 2817);

    HopOutputs out = transform(model, images[5]);
    CHECK(out.hops[0].height == 28);
    CHECK(out.hops[0].width == 28);
    CHECK(out.hops[1].height == 10);
    CHECK(out.hops[2].height == 1);
    ResponseMap pooled1 = max_pool(out.hops[0]);
    CHECK(pooled1.height == 14);
    ResponseMap pooled2 = max_pool(out.hops[1]);
    CHECK(pooled2.height == 5);
}

TEST_CASE("root-normalized energies close to 1 at every depth") {
    auto images = random_images(25, 12, 102);
    HopConfig cfg = keep_all_12();
    cfg.hops[0].mode = PartitionMode::fixed(5, 4);
    cfg.hops[1].mode = PartitionMode::fixed(17, 28);
    cfg.hops[2].mode = PartitionMode::fixed(40, 113);
    HopModel model = fit_tree(images, cfg);

    double live1 = 0, disc1 = 0, live2 = 0, disc2 = 0, live3 = 0, disc3 = 0;
    for (const TreeNode& n : model.nodes) {
        double& acc = (n.kind == NodeKind::Discard)
                          ? (n.hop == 1 ? disc1 : n.hop == 2 ? disc2 : disc3)
                          : (n.hop == 1 ? live1 : n.hop == 2 ? live2 : live3);
        acc += n.energy;
    }
    CHECK(live1 + disc1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(live2 + disc2 + disc1 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(live3 + disc3 + disc2 + disc1 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("each intermediate node's energy is exactly split among its children") {
    auto images = random_images(25, 12, 103);
    HopConfig cfg = keep_all_12();
    cfg.hops[0].mode = PartitionMode::fixed(6, 3);
    cfg.hops[1].mode = PartitionMode::fixed(20, 34);
    cfg.hops[2].mode = PartitionMode::fixed(60, 120);
    HopModel model = fit_tree(images, cfg);

    std::map<int, double> child_sum;
    for (const TreeNode& n : model.nodes) {
        if (n.parent >= 0) child_sum[n.parent] += n.energy;
    }
    REQUIRE(!child_sum.empty());
    for (const auto& [parent_id, sum] : child_sum) {
        const TreeNode& parent = model.nodes[static_cast<std::size_t>(parent_id)];
        CHECK(parent.kind == NodeKind::Intermediate);
        CHECK(sum == doctest::Approx(parent.energy).epsilon(1e-9));
    }
}

TEST_CASE("hop-2 units descend from forwarded hop-1 channels in order") {
    auto images = random_images(25, 12, 104);
    HopConfig cfg = keep_all_12();
    cfg.hops[0].mode = PartitionMode::fixed(4, 5);
    cfg.hops[1].mode = PartitionMode::fixed(10, 26);
    cfg.hops[2].mode = PartitionMode::fixed(30, 60);
    HopModel model = fit_tree(images, cfg);

    // Collect hop-1 intermediates in node order; unit u of hop 2 must point
    // at the u-th of them.
    std::vector<int> forwarded;
    for (std::size_t i = 0; i < model.nodes.size(); ++i) {
        const TreeNode& n = model.nodes[i];
        if (n.hop == 1 && n.kind == NodeKind::Intermediate) forwarded.push_back(static_cast<int>(i));
    }
    REQUIRE(forwarded.size() == model.units[1].size());
    for (const TreeNode& n : model.nodes) {
        if (n.hop == 2) {
            CHECK(n.parent == forwarded[static_cast<std::size_t>(n.unit)]);
        }
    }
}

TEST_CASE("keep-all transform equals running the units by hand") {
    auto images = random_images(25, 12, 105);
    HopConfig cfg = keep_all_12();
    HopModel model = fit_tree(images, cfg);
    const Image& img = images[3];

    HopOutputs out = transform(model, img);
    ResponseMap naive = oracle::naive_apply_saab(model.units[0][0], img);
    // With nothing discarded the kept columns are the unit's channels as-is.
    REQUIRE(out.hops[0].channels() == naive.channels());
    CHECK((out.hops[0].values - naive.values).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("pruned transforms keep the surviving channels' values unchanged") {
    auto images = random_images(25, 12, 106);
    HopConfig keep = keep_all_12();
    HopConfig pruned_cfg = keep_all_12();
    pruned_cfg.hops[0].mode = PartitionMode::fixed(4, 5);
    pruned_cfg.hops[1].mode = PartitionMode::fixed(12, 24);
    pruned_cfg.hops[2].mode = PartitionMode::fixed(30, 78);

    HopModel full = fit_tree(images, keep);
    HopModel pruned = fit_tree(images, pruned_cfg);
    HopOutputs full_out = transform(full, images[7]);
    HopOutputs pruned_out = transform(pruned, images[7]);

    // Hop-1 kernels are fitted on identical patches in both runs, so kept
    // channel c of the pruned run must reproduce column (channel index) of
    // the keep-all run.
    REQUIRE(pruned.kept_count(1) == 4);
    for (int pos = 0; pos < 4; ++pos) {
        const TreeNode& node =
            pruned.nodes[static_cast<std::size_t>(pruned.kept_nodes[0][static_cast<std::size_t>(pos)])];
        Eigen::VectorXd a = pruned_out.hops[0].values.col(pos);
        Eigen::VectorXd b = full_out.hops[0].values.col(node.channel);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("fitting is deterministic") {
    auto images = random_images(25, 12, 107);
    HopConfig cfg = keep_all_12();
    cfg.hops[0].mode = PartitionMode::fixed(5, 4);
    cfg.hops[1].mode = PartitionMode::fixed(15, 30);
    cfg.hops[2].mode = PartitionMode::fixed(40, 95);
    HopModel a = fit_tree(images, cfg);
    HopModel b = fit_tree(images, cfg);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].energy == b.nodes[i].energy);
        CHECK(a.nodes[i].kind == b.nodes[i].kind);
    }
    for (int h = 0; h < 3; ++h) {
        REQUIRE(a.units[static_cast<std::size_t>(h)].size() ==
                b.units[static_cast<std::size_t>(h)].size());
        for (std::size_t u = 0; u < a.units[static_cast<std::size_t>(h)].size(); ++u) {
            const SaabUnit& ua = a.units[static_cast<std::size_t>(h)][u];
            const SaabUnit& ub = b.units[static_cast<std::size_t>(h)][u];
            REQUIRE(ua.ac_kernels.rows() == ub.ac_kernels.rows());
            if (ua.ac_kernels.size() > 0) {
                CHECK((ua.ac_kernels - ub.ac_kernels).cwiseAbs().maxCoeff() == 0.0);
            }
            CHECK(ua.bias == ub.bias);
        }
    }
}

TEST_CASE("threshold partitioning keeps DC everywhere and drops weak channels") {
    auto images = random_images(25, 12, 111);
    HopConfig cfg = keep_all_12();
    // For this input the hop-1 shares all exceed 0.10, every hop-2 AC share
    // stays below 0.023, and the hop-3 AC shares under the surviving DC
    // parents stay below 0.005, so these cutoffs keep all of hop 1 and
    // exactly the per-unit DC channel at hops 2 and 3.
    const double cuts[3] = {0.0, 0.05, 0.01};
    cfg.hops[0].mode = PartitionMode::energy_threshold(cuts[0]);
    cfg.hops[1].mode = PartitionMode::energy_threshold(cuts[1]);
    cfg.hops[2].mode = PartitionMode::energy_threshold(cuts[2]);
    HopModel model = fit_tree(images, cfg);

    CHECK(model.kept_count(1) == 9);
    CHECK(model.kept_count(2) == 9);   // one DC per unit survives
    CHECK(model.kept_count(3) == 9);
    CHECK(model.node_count(2, NodeKind::Discard) == 72);
    CHECK(model.node_count(3, NodeKind::Discard) == 72);

    for (const TreeNode& node : model.nodes) {
        const double cut = cuts[node.hop - 1];
        if (node.channel == 0) {
            CHECK(node.kind != NodeKind::Discard);
        } else if (node.kind == NodeKind::Discard) {
            CHECK(node.energy < cut);
        } else {
            CHECK(node.energy >= cut);
        }
        if (node.kind != NodeKind::Discard) {
            CHECK(node.kind == (node.hop == 3 ? NodeKind::Leaf : NodeKind::Intermediate));
        }
    }

    // Energy closure still holds on the thresholded tree.
    double live = 0.0, terminated = 0.0;
    for (const TreeNode& node : model.nodes) {
        if (node.hop == 3) {
            live += node.energy;
        } else if (node.kind == NodeKind::Discard) {
            terminated += node.energy;
        }
    }
    CHECK(std::abs(live + terminated - 1.0) < 1e-9);

    // DC-only units still transform (their kernel blocks are empty).
    HopOutputs out = transform(model, images[0]);
    CHECK(out.hops[0].channels() == 9);
    CHECK(out.hops[1].channels() == 9);
    CHECK(out.hops[2].channels() == 9);
    CHECK(out.hops[2].values.minCoeff() >= 0.0);
}

TEST_CASE("the patch cap subsamples but still fits") {
    auto images = random_images(30, 12, 108);
    HopConfig cfg = keep_all_12();
    cfg.max_fit_patches = 64;  // far below 30 images x 100 positions
    HopModel model = fit_tree(images, cfg);
    CHECK(model.kept_count(1) == 9);
    HopModel again = fit_tree(images, cfg);
    CHECK((model.units[0][0].ac_kernels - again.units[0][0].ac_kernels).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("bad inputs are rejected") {
    CHECK_THROWS_AS(fit_tree({}, keep_all_12()), ValidationError);

    auto images = random_images(5, 12, 109);
    images[2] = Image(11, 12);
    CHECK_THROWS_AS(fit_tree(images, keep_all_12()), ValidationError);

    HopConfig cfg = keep_all_12();
    cfg.input_size = 13;  // odd size cannot be pooled after hop 1
    CHECK_THROWS_AS(fit_tree(random_images(25, 13, 111), cfg), ValidationError);
}

TEST_CASE("transform checks the input size") {
    auto images = random_images(25, 12, 112);
    HopModel model = fit_tree(images, keep_all_12());
    CHECK_THROWS_AS(transform(model, Image(10, 10)), ValidationError);
}

}  // TEST_SUITE
