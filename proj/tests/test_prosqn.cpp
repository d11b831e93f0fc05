#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "vispro/common.hpp"
#include "vispro/prosqn.hpp"

using vispro::build_prosqn;
using vispro::Fire;
using vispro::FireSpec;
using vispro::ProSqnNet;
using vispro::Tensor;

namespace {

// Zero out every parameter tensor.
template <typename T>
void zero_parameters(ProSqnNet<T>& net) {
    for (auto* p : net.parameters()) p->zero();
}

Tensor<float> constant_image(float value) { return Tensor<float>({64, 64, 1}, value); }

}  // namespace

TEST_CASE("fire module shapes and weight counts", "[prosqn]") {
    vispro::Rng rng(1);

    SECTION("Fire2 on 15x15x32") {
        const auto fire = vispro::detail::make_fire<float>(32, FireSpec{16, 32, 32}, rng);
        const auto out = fire.forward(Tensor<float>({15, 15, 32}, 0.1f), 0.01f);
        CHECK(out.shape == std::vector<int>{15, 15, 64});
        CHECK(fire.weight_count() == 5632);
    }

    SECTION("Fire8 on 3x3x384") {
        const auto fire = vispro::detail::make_fire<float>(384, FireSpec{64, 256, 256}, rng);
        const auto out = fire.forward(Tensor<float>({3, 3, 384}, 0.1f), 0.01f);
        CHECK(out.shape == std::vector<int>{3, 3, 512});
        CHECK(fire.weight_count() == 188416);
    }

    SECTION("all-zero input with zero biases stays zero") {
        auto fire = vispro::detail::make_fire<float>(8, FireSpec{4, 8, 8}, rng);
        const auto out = fire.forward(Tensor<float>({5, 5, 8}), 0.01f);
        for (const float v : out.data) CHECK(v == 0.0f);
    }
}

TEST_CASE("built network passes the architecture audit", "[prosqn]") {
    const auto net = build_prosqn<float>(123);
    CHECK(net.weight_count() == 1244234);

    const auto report = vispro::audit_architecture(net);
    CHECK(report.total_weight_count == 1244234);
    CHECK(report.total_memory_bytes == 623260);

    // Spot-check named rows.
    const auto& conv1 = report.rows[1];
    CHECK(conv1.layer == "Conv1");
    CHECK(conv1.output_shape == std::array<int, 3>{30, 30, 32});
    CHECK(conv1.memory_bytes == 115200);
    CHECK(conv1.weight_count == 1152);

    const auto& den2 = report.rows[16];
    CHECK(den2.layer == "Den2");
    CHECK(den2.memory_bytes == 400);
    CHECK(den2.weight_count == 500);
}

TEST_CASE("audit failure names the first divergent layer", "[prosqn]") {
    auto net = build_prosqn<float>(5);
    vispro::Rng rng(9);
    net.den3 = vispro::detail::make_dense<float>(100, 31, rng);  // 30 -> 31
    try {
        vispro::audit_architecture(net);
        FAIL("expected audit failure");
    } catch (const vispro::DataError& e) {
        CHECK(std::string(e.what()).find("Den3") != std::string::npos);
    }
}

TEST_CASE("builds are deterministic per seed", "[prosqn]") {
    const auto a = build_prosqn<float>(77);
    const auto b = build_prosqn<float>(77);
    const auto c = build_prosqn<float>(78);
    const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
    bool any_diff = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        REQUIRE(pa[i]->data == pb[i]->data);
        if (pa[i]->data != pc[i]->data) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("width-reduced variants keep the topology", "[prosqn]") {
    const auto net = build_prosqn<float>(3, 8);
    const auto report = vispro::audit_architecture(net);
    CHECK(report.rows[1].output_shape == std::array<int, 3>{30, 30, 4});
    CHECK(report.rows.back().output_shape == std::array<int, 3>{1, 1, 1});
    CHECK(net.den2.n_in() == 5);  // four latents plus the time input

    CHECK_THROWS_AS(build_prosqn<float>(3, 7), vispro::UserError);
}

TEST_CASE("forward of the zero network is zero", "[prosqn]") {
    auto net = build_prosqn<float>(11, 8);
    zero_parameters(net);
    vispro::TfaImage image;
    image.rows = 64;
    image.cols = 64;
    image.values.assign(64 * 64, 0.0f);
    CHECK(vispro::forward(net, image, 0.0) == 0.0);
}

TEST_CASE("forward is deterministic and validates inputs", "[prosqn]") {
    const auto net = build_prosqn<float>(42, 8);
    vispro::TfaImage image;
    image.rows = 64;
    image.cols = 64;
    image.values.assign(64 * 64, 0.5f);
    const double a = vispro::forward(net, image, 0.0);
    const double b = vispro::forward(net, image, 0.0);
    CHECK(a == b);

    image.values[100] = 1.5f;  // outside [0,1]
    CHECK_THROWS_AS(vispro::forward(net, image, 0.0), vispro::UserError);
    image.values[100] = 0.5f;
    CHECK_THROWS_AS(vispro::forward(net, image, -1.0), vispro::UserError);
}

TEST_CASE("the time input is live", "[prosqn]") {
    auto net = build_prosqn<float>(1, 8);
    zero_parameters(net);
    net.t_ref = 100.0f;
    net.rul_scale = 1.0f;
    // Nonzero time column of the second dense layer plus pass-through head.
    for (int j = 0; j < net.den2.n_out(); ++j) {
        net.den2.weights.data[4 * net.den2.n_out() + j] = 0.02f;
    }
    for (int j = 0; j < net.den3.n_out(); ++j) net.den3.weights.data[j] = 0.5f;
    net.den4.weights.data[0] = 1.0f;

    vispro::TfaImage image;
    image.rows = 64;
    image.cols = 64;
    image.values.assign(64 * 64, 0.0f);

    const double y0 = vispro::forward(net, image, 0.0);
    const double y1 = vispro::forward(net, image, 50.0);
    const double y2 = vispro::forward(net, image, 100.0);
    CHECK(y1 != y0);

    // With everything in the positive branch the output is affine in t.
    const double slope_a = (y1 - y0) / 50.0;
    const double slope_b = (y2 - y1) / 50.0;
    CHECK(slope_a == Catch::Approx(slope_b).epsilon(1e-5));
    CHECK(std::abs(slope_a) > 0.0);
}

TEST_CASE("end-to-end gradients on a narrow model match finite differences",
          "[prosqn][grad]") {
    // Parameters start as float32 values; arithmetic runs in double.
    const auto net32 = build_prosqn<float>(2025, 16);
    auto net = ProSqnNet<double>{};
    {
        // rebuild the same topology in double and copy the float parameters
        net = build_prosqn<double>(2025, 16);
        auto dst = net.parameters();
        const auto src = net32.parameters();
        for (std::size_t i = 0; i < dst.size(); ++i) {
            for (long j = 0; j < dst[i]->size(); ++j) {
                dst[i]->data[j] = static_cast<double>(src[i]->data[j]);
            }
        }
    }
    net.t_ref = 100.0;
    net.rul_scale = 1.0;

    vispro::Rng rng(31);
    Tensor<double> image({64, 64, 1});
    for (auto& v : image.data) {
        v = static_cast<double>(static_cast<float>(vispro::uniform(rng, 0.0, 1.0)));
    }
    const double t = 40.0;
    const double target = 0.7;

    auto loss_of = [&](const ProSqnNet<double>& probe) {
        const double pred = vispro::forward_normalized(probe, image, t);
        return (pred - target) * (pred - target);
    };

    vispro::ForwardCache<double> cache;
    const double pred = vispro::forward_normalized(net, image, t, &cache);
    std::vector<Tensor<double>> grads;
    vispro::backward(net, cache, 2.0 * (pred - target), grads);

    // Probe a deterministic sample of parameters in every tensor.
    auto params = net.parameters();
    for (std::size_t k = 0; k < params.size(); ++k) {
        const long n = params[k]->size();
        const long stride = std::max(1L, n / 5);
        for (long j = 0; j < n; j += stride) {
            const double saved = params[k]->data[j];
            const double fd = oracle::central_difference(
                [&](double v) {
                    params[k]->data[j] = v;
                    const double value = loss_of(net);
                    params[k]->data[j] = saved;
                    return value;
                },
                saved, 1e-3);
            REQUIRE(oracle::relative_gap(grads[k].data[j], fd) < 1e-3);
        }
    }
}

TEST_CASE("training basics", "[prosqn]") {
    // Learnable toy set: brightness tracks elapsed time, RUL = 1000 - t.
    vispro::Rng rng(7);
    std::vector<vispro::TrainSample<float>> dataset;
    for (int i = 0; i < 50; ++i) {
        vispro::TrainSample<float> sample;
        const double t = 20.0 * i;
        sample.image = Tensor<float>({64, 64, 1});
        for (auto& v : sample.image.data) {
            v = static_cast<float>(
                std::clamp(t / 1000.0 + 0.05 * vispro::uniform(rng, -1, 1), 0.0, 1.0));
        }
        sample.time_seconds = t;
        sample.rul_seconds = 1000.0 - t;
        dataset.push_back(std::move(sample));
    }

    vispro::TrainConfig config;
    config.epochs = 3;
    config.batch_size = 10;
    config.learning_rate = 1e-3;
    config.rul_scale = 1000.0;
    config.time_scale = 1000.0;

    SECTION("zero learning rate leaves parameters fixed") {
        auto net = build_prosqn<float>(5, 16);
        const auto before = net;
        auto frozen = config;
        frozen.learning_rate = 0.0;
        frozen.epochs = 2;
        train(net, dataset, frozen);
        const auto pa = net.parameters(), pb = before.parameters();
        for (std::size_t i = 0; i < pa.size(); ++i) REQUIRE(pa[i]->data == pb[i]->data);
    }

    SECTION("empty dataset is rejected") {
        auto net = build_prosqn<float>(5, 16);
        CHECK_THROWS_AS(train(net, {}, config), vispro::UserError);
    }

    SECTION("training is deterministic") {
        auto net_a = build_prosqn<float>(5, 16);
        auto net_b = build_prosqn<float>(5, 16);
        const auto hist_a = train(net_a, dataset, config);
        const auto hist_b = train(net_b, dataset, config);
        REQUIRE(hist_a == hist_b);
        const auto pa = net_a.parameters(), pb = net_b.parameters();
        for (std::size_t i = 0; i < pa.size(); ++i) REQUIRE(pa[i]->data == pb[i]->data);
    }

    SECTION("duplicating every sample leaves the batch gradient unchanged") {
        auto net = build_prosqn<float>(5, 16);
        std::vector<const vispro::TrainSample<float>*> batch{&dataset[0], &dataset[1]};
        std::vector<const vispro::TrainSample<float>*> doubled{&dataset[0], &dataset[0],
                                                               &dataset[1], &dataset[1]};
        net.rul_scale = 1000.0f;
        net.t_ref = 1000.0f;
        std::vector<Tensor<float>> grads_a, grads_b;
        const double loss_a = batch_gradient(net, batch, grads_a);
        const double loss_b = batch_gradient(net, doubled, grads_b);
        CHECK(loss_a == Catch::Approx(loss_b).epsilon(1e-6));
        for (std::size_t i = 0; i < grads_a.size(); ++i) {
            for (long j = 0; j < grads_a[i].size(); ++j) {
                REQUIRE(grads_a[i].data[j] ==
                        Catch::Approx(grads_b[i].data[j]).margin(1e-7));
            }
        }
    }
}

TEST_CASE("synthetic convergence run", "[prosqn][slow]") {
    vispro::Rng rng(13);
    std::vector<vispro::TrainSample<float>> dataset;
    for (int i = 0; i < 200; ++i) {
        vispro::TrainSample<float> sample;
        const double t = 10.0 * i;
        sample.image = Tensor<float>({64, 64, 1});
        for (int p = 0; p < sample.image.size(); ++p) {
            const double base = (p % 64) < 32 ? t / 2000.0 : 0.3;
            sample.image.data[p] = static_cast<float>(
                std::clamp(base + 0.03 * vispro::uniform(rng, -1, 1), 0.0, 1.0));
        }
        sample.time_seconds = t;
        sample.rul_seconds = 2000.0 - t;
        dataset.push_back(std::move(sample));
    }

    vispro::TrainConfig config;
    config.epochs = 30;
    config.batch_size = 16;
    config.learning_rate = 1e-3;
    config.rul_scale = 2000.0;
    config.time_scale = 2000.0;

    auto net = build_prosqn<float>(21, 16);
    const auto history = train(net, dataset, config);
    REQUIRE(history.size() == 30);
    CHECK(history.back() < 0.5 * history.front());

    // Loss settles: the last epoch is near the observed minimum.
    const double min_loss = *std::min_element(history.begin(), history.end());
    CHECK(history.back() <= 1.05 * min_loss);
}

TEST_CASE("trajectory prediction arity and ordering checks", "[prosqn]") {
    const auto net = build_prosqn<float>(9, 16);
    const vispro::StftConfig stft_config;

    CHECK(predict_trajectory(net, {}, stft_config).empty());

    vispro::Rng rng(3);
    std::vector<vispro::VibrationSnapshot> snapshots;
    for (int i = 0; i < 3; ++i) {
        vispro::VibrationSnapshot s;
        s.timestamp = 10.0 * i;
        s.sample_rate = 25600.0;
        s.samples.resize(2560);
        for (auto& v : s.samples) v = vispro::uniform(rng, -1, 1);
        snapshots.push_back(std::move(s));
    }
    const auto trajectory = predict_trajectory(net, snapshots, stft_config);
    REQUIRE(trajectory.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(trajectory[i].first == 10.0 * i);

    std::swap(snapshots[0], snapshots[2]);  // break the ordering
    CHECK_THROWS_AS(predict_trajectory(net, snapshots, stft_config), vispro::UserError);
}
