#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "vispro/common.hpp"
#include "vispro/nn.hpp"

using vispro::ConvLayer;
using vispro::DenseLayer;
using vispro::Tensor;

namespace {

Tensor<double> random_tensor(std::vector<int> shape, vispro::Rng& rng, double lo = -1.0,
                             double hi = 1.0) {
    Tensor<double> t(std::move(shape));
    for (auto& v : t.data) v = vispro::uniform(rng, lo, hi);
    return t;
}

// Well-separated values so pooling argmaxes stay put under FD perturbation.
Tensor<double> separated_tensor(std::vector<int> shape, vispro::Rng& rng) {
    Tensor<double> t(std::move(shape));
    std::vector<std::size_t> order(t.data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    vispro::deterministic_shuffle(order, rng);
    for (std::size_t i = 0; i < order.size(); ++i) {
        t.data[order[i]] = 0.05 * static_cast<double>(i) - 1.0;
    }
    return t;
}

constexpr double kFdStep = 1e-3;
constexpr double kFdTol = 1e-3;

void check_gradient(double analytic, const std::function<double(double)>& loss_at,
                    double param_value) {
    const double fd = oracle::central_difference(loss_at, param_value, kFdStep);
    REQUIRE(oracle::relative_gap(analytic, fd) < kFdTol);
}

}  // namespace

TEST_CASE("conv2d shapes and fixed cases", "[nn]") {
    SECTION("64x64x1 with 6x6 stride-2 kernel and 32 filters gives 30x30x32") {
        ConvLayer<float> layer;
        layer.kernel = Tensor<float>({6, 6, 1, 32});
        layer.bias = Tensor<float>({32});
        layer.stride = 2;
        const auto out = conv2d(Tensor<float>({64, 64, 1}, 1.0f), layer);
        CHECK(out.shape == std::vector<int>{30, 30, 32});
    }

    SECTION("1x1 identity kernel is the identity map") {
        ConvLayer<float> layer;
        layer.kernel = Tensor<float>({1, 1, 3, 3});
        layer.bias = Tensor<float>({3});
        layer.stride = 1;
        for (int c = 0; c < 3; ++c) layer.kernel.data[c * 3 + c] = 1.0f;
        vispro::Rng rng(1);
        Tensor<float> input({4, 5, 3});
        for (auto& v : input.data) v = static_cast<float>(vispro::uniform(rng, -2, 2));
        const auto out = conv2d(input, layer);
        CHECK(out.data == input.data);
    }

    SECTION("3x3 ones with 2x2 ones kernel sums to 4") {
        ConvLayer<float> layer;
        layer.kernel = Tensor<float>({2, 2, 1, 1}, 1.0f);
        layer.bias = Tensor<float>({1});
        layer.stride = 1;
        const auto out = conv2d(Tensor<float>({3, 3, 1}, 1.0f), layer);
        CHECK(out.shape == std::vector<int>{2, 2, 1});
        for (const float v : out.data) CHECK(v == 4.0f);
    }

    SECTION("channel mismatch names both shapes") {
        ConvLayer<float> layer;
        layer.kernel = Tensor<float>({2, 2, 3, 4});
        layer.bias = Tensor<float>({4});
        try {
            conv2d(Tensor<float>({5, 5, 2}), layer);
            FAIL("expected shape error");
        } catch (const vispro::ShapeError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("[5 x 5 x 2]") != std::string::npos);
            CHECK(msg.find("[2 x 2 x 3 x 4]") != std::string::npos);
        }
    }
}

TEST_CASE("pooling output sizes follow ceil mode", "[nn]") {
    CHECK(vispro::pool_out_dim(30, 3, 2) == 15);
    CHECK(vispro::pool_out_dim(15, 3, 2) == 7);
    CHECK(vispro::pool_out_dim(7, 3, 2) == 3);

    const auto out = maxpool2d(Tensor<float>({30, 30, 32}, 2.5f), 3, 2);
    CHECK(out.shape == std::vector<int>{15, 15, 32});
    for (const float v : out.data) CHECK(v == 2.5f);  // constant in, constant out
}

TEST_CASE("global maxpool", "[nn]") {
    Tensor<float> wide({3, 3, 2});
    vispro::Rng rng(2);
    for (auto& v : wide.data) v = static_cast<float>(vispro::uniform(rng, -4, -1));
    const auto out = global_maxpool(wide);
    CHECK(out.shape == std::vector<int>{1, 1, 2});

    Tensor<float> single({1, 1, 3});
    single.data = {3.0f, -1.0f, 0.5f};
    CHECK(global_maxpool(single).data == single.data);

    Tensor<float> negatives({3, 1, 1});
    negatives.data = {-3.0f, -1.0f, -2.0f};
    CHECK(global_maxpool(negatives).data[0] == -1.0f);
}

TEST_CASE("pooling is invariant to permutations within windows", "[nn]") {
    vispro::Rng rng(3);
    Tensor<float> input({4, 4, 1});
    for (auto& v : input.data) v = static_cast<float>(vispro::uniform(rng, -1, 1));
    const auto base = global_maxpool(input);

    // Any spatial permutation keeps the global maximum.
    std::vector<float> shuffled = input.data;
    std::vector<std::size_t> order(shuffled.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    vispro::deterministic_shuffle(order, rng);
    Tensor<float> permuted({4, 4, 1});
    for (std::size_t i = 0; i < order.size(); ++i) permuted.data[i] = shuffled[order[i]];
    CHECK(global_maxpool(permuted).data == base.data);

    // Swapping two entries inside one 3x3 window keeps maxpool output.
    Tensor<float> swapped = input;
    std::swap(swapped.at(0, 0, 0), swapped.at(1, 1, 0));
    CHECK(maxpool2d(swapped, 3, 2).data == maxpool2d(input, 3, 2).data);
}

TEST_CASE("leaky relu values", "[nn]") {
    Tensor<float> input({3});
    input.data = {1.0f, -1.0f, 0.0f};
    const auto out = leaky_relu(input);
    CHECK(out.data[0] == 1.0f);
    CHECK(out.data[1] == -0.01f);
    CHECK(out.data[2] == 0.0f);
}

TEST_CASE("dense layer fixed cases", "[nn]") {
    SECTION("identity weights") {
        DenseLayer<float> layer;
        layer.weights = Tensor<float>({2, 2});
        layer.weights.data = {1, 0, 0, 1};
        layer.bias = Tensor<float>({2});
        Tensor<float> input({2});
        input.data = {3, 5};
        CHECK(dense(input, layer).data == std::vector<float>{3, 5});
    }

    SECTION("hand matrix product, column-per-output convention") {
        DenseLayer<float> layer;
        layer.weights = Tensor<float>({2, 2});
        layer.weights.data = {1, 2, 3, 4};
        layer.bias = Tensor<float>({2}, 1.0f);
        Tensor<float> input({2}, 1.0f);
        CHECK(dense(input, layer).data == std::vector<float>{5, 7});
    }

    SECTION("1024 to 4") {
        DenseLayer<float> layer;
        layer.weights = Tensor<float>({1024, 4});
        layer.bias = Tensor<float>({4});
        CHECK(layer.weight_count() == 4096);
        CHECK(dense(Tensor<float>({1024}), layer).shape == std::vector<int>{4});
    }

    SECTION("length mismatch") {
        DenseLayer<float> layer;
        layer.weights = Tensor<float>({3, 2});
        layer.bias = Tensor<float>({2});
        CHECK_THROWS_AS(dense(Tensor<float>({4}), layer), vispro::ShapeError);
    }
}

TEST_CASE("forward passes are deterministic", "[nn]") {
    vispro::Rng rng(10);
    ConvLayer<float> layer;
    layer.kernel = Tensor<float>({3, 3, 2, 4});
    layer.bias = Tensor<float>({4});
    vispro::init_fan_in(layer.kernel, 18, rng);
    Tensor<float> input({7, 7, 2});
    for (auto& v : input.data) v = static_cast<float>(vispro::uniform(rng, -1, 1));
    const auto a = conv2d(input, layer);
    const auto b = conv2d(input, layer);
    CHECK(a.data == b.data);
}

// ---------------------------------------------------------------------------
// Finite-difference gradient checks (double precision, step 1e-3)

TEST_CASE("conv2d gradients match finite differences", "[nn][grad]") {
    vispro::Rng rng(42);
    ConvLayer<double> layer;
    layer.kernel = random_tensor({3, 3, 2, 2}, rng);
    layer.bias = random_tensor({2}, rng);
    layer.stride = 1;
    Tensor<double> input = random_tensor({5, 5, 2}, rng);
    const Tensor<double> proj = random_tensor(
        {3, 3, 2}, rng);  // random linear functional over the output

    auto loss_of = [&](const Tensor<double>& in, const ConvLayer<double>& l) {
        const auto out = conv2d(in, l);
        double acc = 0.0;
        for (long i = 0; i < out.size(); ++i) acc += out.data[i] * proj.data[i];
        return acc;
    };

    Tensor<double> grad_kernel, grad_bias, grad_input;
    conv2d_backward(input, layer, proj, grad_kernel, grad_bias, grad_input);

    for (long i = 0; i < layer.kernel.size(); ++i) {
        check_gradient(grad_kernel.data[i],
                       [&](double v) {
                           ConvLayer<double> probe = layer;
                           probe.kernel.data[i] = v;
                           return loss_of(input, probe);
                       },
                       layer.kernel.data[i]);
    }
    for (long i = 0; i < layer.bias.size(); ++i) {
        check_gradient(grad_bias.data[i],
                       [&](double v) {
                           ConvLayer<double> probe = layer;
                           probe.bias.data[i] = v;
                           return loss_of(input, probe);
                       },
                       layer.bias.data[i]);
    }
    for (long i = 0; i < input.size(); ++i) {
        check_gradient(grad_input.data[i],
                       [&](double v) {
                           Tensor<double> probe = input;
                           probe.data[i] = v;
                           return loss_of(probe, layer);
                       },
                       input.data[i]);
    }
}

TEST_CASE("maxpool gradients match finite differences", "[nn][grad]") {
    vispro::Rng rng(43);
    Tensor<double> input = separated_tensor({4, 4, 2}, rng);
    const Tensor<double> proj = random_tensor({2, 2, 2}, rng);

    std::vector<int> argmax;
    maxpool2d(input, 3, 2, &argmax);
    const auto grad = maxpool2d_backward(input, proj, argmax);

    auto loss_of = [&](const Tensor<double>& in) {
        const auto out = maxpool2d(in, 3, 2);
        double acc = 0.0;
        for (long i = 0; i < out.size(); ++i) acc += out.data[i] * proj.data[i];
        return acc;
    };
    for (long i = 0; i < input.size(); ++i) {
        check_gradient(grad.data[i],
                       [&](double v) {
                           Tensor<double> probe = input;
                           probe.data[i] = v;
                           return loss_of(probe);
                       },
                       input.data[i]);
    }
}

TEST_CASE("maxpool routes gradient to the argmax only", "[nn]") {
    Tensor<double> input({3, 3, 1});
    input.data = {0, 1, 2, 3, 9, 5, 6, 7, 8};
    std::vector<int> argmax;
    const auto out = maxpool2d(input, 3, 2, &argmax);
    REQUIRE(out.size() == 1);
    Tensor<double> grad_out({1, 1, 1});
    grad_out.data = {1.5};
    const auto grad = maxpool2d_backward(input, grad_out, argmax);
    for (long i = 0; i < grad.size(); ++i) {
        CHECK(grad.data[i] == (input.data[i] == 9 ? 1.5 : 0.0));
    }
}

TEST_CASE("dense and mse gradients match finite differences", "[nn][grad]") {
    vispro::Rng rng(44);
    DenseLayer<double> layer;
    layer.weights = random_tensor({3, 2}, rng);
    layer.bias = random_tensor({2}, rng);
    Tensor<double> input = random_tensor({3}, rng);
    Tensor<double> target = random_tensor({2}, rng);

    auto loss_of = [&](const Tensor<double>& in, const DenseLayer<double>& l) {
        return mse_loss(dense(in, l), target);
    };

    const auto pred = dense(input, layer);
    const auto grad_pred = mse_loss_backward(pred, target);
    Tensor<double> grad_weights, grad_bias, grad_input;
    dense_backward(input, layer, grad_pred, grad_weights, grad_bias, grad_input);

    for (long i = 0; i < layer.weights.size(); ++i) {
        check_gradient(grad_weights.data[i],
                       [&](double v) {
                           DenseLayer<double> probe = layer;
                           probe.weights.data[i] = v;
                           return loss_of(input, probe);
                       },
                       layer.weights.data[i]);
    }
    for (long i = 0; i < input.size(); ++i) {
        check_gradient(grad_input.data[i],
                       [&](double v) {
                           Tensor<double> probe = input;
                           probe.data[i] = v;
                           return loss_of(probe, layer);
                       },
                       input.data[i]);
    }
}

TEST_CASE("single-weight dense matches the finite-difference oracle", "[nn][grad]") {
    DenseLayer<double> layer;
    layer.weights = Tensor<double>({1, 1});
    layer.weights.data = {0.7};
    layer.bias = Tensor<double>({1});
    Tensor<double> input({1});
    input.data = {1.3};
    Tensor<double> target({1});
    target.data = {2.0};

    const auto pred = dense(input, layer);
    Tensor<double> gw, gb, gi;
    dense_backward(input, layer, mse_loss_backward(pred, target), gw, gb, gi);
    check_gradient(gw.data[0],
                   [&](double v) {
                       DenseLayer<double> probe = layer;
                       probe.weights.data[0] = v;
                       return mse_loss(dense(input, probe), target);
                   },
                   layer.weights.data[0]);
}

TEST_CASE("concatenation gradients match finite differences", "[nn][grad]") {
    vispro::Rng rng(45);
    Tensor<double> a = random_tensor({2, 2, 2}, rng);
    Tensor<double> b = random_tensor({2, 2, 3}, rng);
    const Tensor<double> proj = random_tensor({2, 2, 5}, rng);

    auto loss_of = [&](const Tensor<double>& ta, const Tensor<double>& tb) {
        const auto out = concat_channels(ta, tb);
        double acc = 0.0;
        for (long i = 0; i < out.size(); ++i) acc += out.data[i] * proj.data[i];
        return acc;
    };

    Tensor<double> grad_a, grad_b;
    split_channels(proj, 2, grad_a, grad_b);
    for (long i = 0; i < a.size(); ++i) {
        check_gradient(grad_a.data[i],
                       [&](double v) {
                           Tensor<double> probe = a;
                           probe.data[i] = v;
                           return loss_of(probe, b);
                       },
                       a.data[i]);
    }
    for (long i = 0; i < b.size(); ++i) {
        check_gradient(grad_b.data[i],
                       [&](double v) {
                           Tensor<double> probe = b;
                           probe.data[i] = v;
                           return loss_of(a, probe);
                       },
                       b.data[i]);
    }
}

TEST_CASE("leaky relu slopes via its backward pass", "[nn]") {
    Tensor<double> input({2});
    input.data = {2.0, -2.0};
    Tensor<double> ones({2}, 1.0);
    const auto grad = leaky_relu_backward(input, ones);
    CHECK(grad.data[0] == 1.0);
    CHECK(grad.data[1] == 0.01);
}

// ---------------------------------------------------------------------------
// Optimizer

TEST_CASE("adam with zero gradient leaves parameters unchanged", "[nn]") {
    Tensor<float> param({3}, 1.5f);
    Tensor<float> grad({3}, 0.0f);
    vispro::OptimizerState state;
    state.init(std::vector<Tensor<float>*>{&param});
    adam_step<float>({&param}, {&grad}, state);
    CHECK(state.step_count == 1);
    for (const float v : param.data) CHECK(v == 1.5f);
}

TEST_CASE("adam first step moves by about the learning rate", "[nn]") {
    Tensor<double> param({1}, 1.0);
    Tensor<double> grad({1}, 1.0);
    vispro::OptimizerState state;
    state.init(std::vector<Tensor<double>*>{&param});
    adam_step<double>({&param}, {&grad}, state);
    // mhat = 1, vhat = 1 after bias correction, so the step is lr/(1+eps).
    CHECK(param.data[0] == Catch::Approx(1.0 - 1e-3).margin(1e-6));
}

TEST_CASE("adam updates identical tensors identically", "[nn]") {
    Tensor<float> p1({4}, 0.3f), p2({4}, 0.3f);
    Tensor<float> g({4}, 0.7f);
    vispro::OptimizerState state;
    state.init(std::vector<Tensor<float>*>{&p1, &p2});
    for (int i = 0; i < 5; ++i) adam_step<float>({&p1, &p2}, {&g, &g}, state);
    CHECK(p1.data == p2.data);
}
