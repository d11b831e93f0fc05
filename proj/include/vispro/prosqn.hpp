#pragma once

// The RUL regression network: conv stem, eight fire modules, 1x1 conv head,
// global max pooling, then a dense head with the time variable injected as
// the fifth input of the second dense layer.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vispro/common.hpp"
#include "vispro/nn.hpp"
#include "vispro/tensor.hpp"
#include "vispro/tfa.hpp"

namespace vispro {

struct FireSpec {
    int s1x1 = 0;
    int e1x1 = 0;
    int e3x3 = 0;

    int out_channels() const { return e1x1 + e3x3; }
};

// Squeeze 1x1 conv, then parallel 1x1 / 3x3 expand branches concatenated
// along channels. The 3x3 branch pads by 1 so both branches share spatial size.
template <typename T>
struct Fire {
    FireSpec spec;
    ConvLayer<T> squeeze;
    ConvLayer<T> expand1;
    ConvLayer<T> expand3;

    long weight_count() const {
        return squeeze.weight_count() + expand1.weight_count() + expand3.weight_count();
    }

    struct Cache {
        Tensor<T> input;
        Tensor<T> squeeze_pre, squeeze_act;
        Tensor<T> padded;
        Tensor<T> expand1_pre, expand3_pre;
    };

    Tensor<T> forward(const Tensor<T>& x, T slope, Cache* cache = nullptr) const {
        Tensor<T> s_pre = conv2d(x, squeeze);
        Tensor<T> s_act = leaky_relu(s_pre, slope);
        Tensor<T> e1_pre = conv2d(s_act, expand1);
        Tensor<T> padded = zero_pad2d(s_act, 1);
        Tensor<T> e3_pre = conv2d(padded, expand3);
        Tensor<T> out = concat_channels(leaky_relu(e1_pre, slope), leaky_relu(e3_pre, slope));
        if (cache) {
            cache->input = x;
            cache->squeeze_pre = std::move(s_pre);
            cache->squeeze_act = std::move(s_act);
            cache->padded = std::move(padded);
            cache->expand1_pre = std::move(e1_pre);
            cache->expand3_pre = std::move(e3_pre);
        }
        return out;
    }

    struct Grads {
        Tensor<T> squeeze_kernel, squeeze_bias;
        Tensor<T> expand1_kernel, expand1_bias;
        Tensor<T> expand3_kernel, expand3_bias;
    };

    Tensor<T> backward(const Cache& cache, const Tensor<T>& grad_out, T slope,
                       Grads& grads) const {
        Tensor<T> ge1_act, ge3_act;
        split_channels(grad_out, spec.e1x1, ge1_act, ge3_act);
        const Tensor<T> ge1 = leaky_relu_backward(cache.expand1_pre, ge1_act, slope);
        const Tensor<T> ge3 = leaky_relu_backward(cache.expand3_pre, ge3_act, slope);

        Tensor<T> gs_from_e1, gpadded, gs_act;
        conv2d_backward(cache.squeeze_act, expand1, ge1, grads.expand1_kernel,
                        grads.expand1_bias, gs_from_e1);
        conv2d_backward(cache.padded, expand3, ge3, grads.expand3_kernel,
                        grads.expand3_bias, gpadded);
        gs_act = crop2d(gpadded, 1, cache.squeeze_act.shape[0], cache.squeeze_act.shape[1]);
        for (long i = 0; i < gs_act.size(); ++i) gs_act.data[i] += gs_from_e1.data[i];

        const Tensor<T> gs_pre = leaky_relu_backward(cache.squeeze_pre, gs_act, slope);
        Tensor<T> grad_input;
        conv2d_backward(cache.input, squeeze, gs_pre, grads.squeeze_kernel,
                        grads.squeeze_bias, grad_input);
        return grad_input;
    }
};

struct AuditRow {
    std::string layer;
    std::array<int, 3> output_shape;  // h, w, c
    long memory_bytes = 0;
    long weight_count = 0;
};

struct AuditReport {
    std::vector<AuditRow> rows;
    long total_memory_bytes = 0;
    long total_weight_count = 0;
};

template <typename T>
struct ProSqnNet {
    static constexpr int kNumFires = 8;

    ConvLayer<T> conv1;
    std::array<Fire<T>, kNumFires> fires;
    ConvLayer<T> conv10;
    DenseLayer<T> den1, den2, den3, den4;

    int width_divisor = 1;
    T slope = T{0.01};
    float t_ref = 1.0f;      // time normalization constant, seconds
    float rul_scale = 1.0f;  // target normalization divisor, seconds

    std::vector<Tensor<T>*> parameters() {
        std::vector<Tensor<T>*> out{&conv1.kernel, &conv1.bias};
        for (auto& f : fires) {
            out.push_back(&f.squeeze.kernel);
            out.push_back(&f.squeeze.bias);
            out.push_back(&f.expand1.kernel);
            out.push_back(&f.expand1.bias);
            out.push_back(&f.expand3.kernel);
            out.push_back(&f.expand3.bias);
        }
        out.insert(out.end(), {&conv10.kernel, &conv10.bias, &den1.weights, &den1.bias,
                               &den2.weights, &den2.bias, &den3.weights, &den3.bias,
                               &den4.weights, &den4.bias});
        return out;
    }

    std::vector<const Tensor<T>*> parameters() const {
        auto mut = const_cast<ProSqnNet*>(this)->parameters();
        return {mut.begin(), mut.end()};
    }

    std::vector<std::string> parameter_names() const {
        std::vector<std::string> out{"conv1.kernel", "conv1.bias"};
        for (int i = 0; i < kNumFires; ++i) {
            const std::string base = "fire" + std::to_string(i + 2);
            for (const char* part : {"squeeze", "expand1", "expand3"}) {
                out.push_back(base + "." + part + ".kernel");
                out.push_back(base + "." + part + ".bias");
            }
        }
        out.insert(out.end(), {"conv10.kernel", "conv10.bias"});
        for (const char* d : {"den1", "den2", "den3", "den4"}) {
            out.push_back(std::string(d) + ".weights");
            out.push_back(std::string(d) + ".bias");
        }
        return out;
    }

    // Weight count excluding biases, the audit convention.
    long weight_count() const {
        long n = conv1.weight_count();
        for (const auto& f : fires) n += f.weight_count();
        n += conv10.weight_count();
        n += den1.weight_count() + den2.weight_count() + den3.weight_count() +
             den4.weight_count();
        return n;
    }
};

namespace detail {

template <typename T>
ConvLayer<T> make_conv(int kh, int kw, int cin, int cout, int stride, Rng& rng) {
    ConvLayer<T> layer;
    layer.kernel = Tensor<T>({kh, kw, cin, cout});
    layer.bias = Tensor<T>({cout});
    layer.stride = stride;
    init_fan_in(layer.kernel, static_cast<long>(kh) * kw * cin, rng);
    return layer;
}

template <typename T>
DenseLayer<T> make_dense(int n_in, int n_out, Rng& rng) {
    DenseLayer<T> layer;
    layer.weights = Tensor<T>({n_in, n_out});
    layer.bias = Tensor<T>({n_out});
    init_fan_in(layer.weights, n_in, rng);
    return layer;
}

template <typename T>
Fire<T> make_fire(int cin, FireSpec spec, Rng& rng) {
    Fire<T> fire;
    fire.spec = spec;
    fire.squeeze = make_conv<T>(1, 1, cin, spec.s1x1, 1, rng);
    fire.expand1 = make_conv<T>(1, 1, spec.s1x1, spec.e1x1, 1, rng);
    fire.expand3 = make_conv<T>(3, 3, spec.s1x1, spec.e3x3, 1, rng);
    return fire;
}

}  // namespace detail

inline constexpr std::array<FireSpec, 8> kFireSpecs{{{16, 32, 32},
                                                     {16, 64, 64},
                                                     {32, 128, 128},
                                                     {32, 128, 128},
                                                     {48, 192, 192},
                                                     {48, 192, 192},
                                                     {64, 256, 256},
                                                     {64, 256, 256}}};

template <typename T = float>
ProSqnNet<T> build_prosqn(std::uint64_t seed, int width_divisor = 1) {
    for (const int c : {32, 16, 48, 1024}) {
        if (width_divisor <= 0 || c % width_divisor != 0) {
            throw UserError("width divisor " + std::to_string(width_divisor) +
                            " does not divide the channel counts");
        }
    }
    const int d = width_divisor;
    Rng rng(seed);

    ProSqnNet<T> net;
    net.width_divisor = d;
    net.conv1 = detail::make_conv<T>(6, 6, 1, 32 / d, 2, rng);
    int channels = 32 / d;
    for (int i = 0; i < ProSqnNet<T>::kNumFires; ++i) {
        const FireSpec spec{kFireSpecs[i].s1x1 / d, kFireSpecs[i].e1x1 / d,
                            kFireSpecs[i].e3x3 / d};
        net.fires[i] = detail::make_fire<T>(channels, spec, rng);
        channels = spec.out_channels();
    }
    net.conv10 = detail::make_conv<T>(1, 1, channels, 1024 / d, 1, rng);
    net.den1 = detail::make_dense<T>(1024 / d, 4, rng);
    net.den2 = detail::make_dense<T>(5, 100, rng);
    net.den3 = detail::make_dense<T>(100, 30, rng);
    net.den4 = detail::make_dense<T>(30, 1, rng);
    return net;
}

// ---------------------------------------------------------------------------
// Architecture audit. Memory is counted at 4 bytes per activation value; fire
// rows include the squeeze activation alongside the concatenated output,
// matching the published accounting. Weight counts exclude biases.

template <typename T>
AuditReport audit_architecture(const ProSqnNet<T>& net) {
    AuditReport report;
    auto add = [&report](const std::string& name, int h, int w, int c, long mem,
                         long weights) {
        report.rows.push_back({name, {h, w, c}, mem, weights});
        report.total_memory_bytes += mem;
        report.total_weight_count += weights;
    };

    int h = 64, w = 64, c = 1;
    add("Input", h, w, c, static_cast<long>(h) * w * c * 4, 0);

    h = (h - net.conv1.kh()) / net.conv1.stride + 1;
    w = (w - net.conv1.kw()) / net.conv1.stride + 1;
    c = net.conv1.out_channels();
    add("Conv1", h, w, c, static_cast<long>(h) * w * c * 4, net.conv1.weight_count());

    auto pool = [&](const char* name) {
        h = pool_out_dim(h, 3, 2);
        w = pool_out_dim(w, 3, 2);
        add(name, h, w, c, static_cast<long>(h) * w * c * 4, 0);
    };

    pool("Pool");
    for (int i = 0; i < ProSqnNet<T>::kNumFires; ++i) {
        const Fire<T>& f = net.fires[i];
        c = f.spec.out_channels();
        const long mem =
            static_cast<long>(h) * w * (f.spec.s1x1 + f.spec.e1x1 + f.spec.e3x3) * 4;
        add("Fire" + std::to_string(i + 2), h, w, c, mem, f.weight_count());
        if (i == 1 || i == 3) pool("Pool");
    }

    c = net.conv10.out_channels();
    add("Conv10", h, w, c, static_cast<long>(h) * w * c * 4, net.conv10.weight_count());
    h = 1;
    w = 1;
    add("Pool", 1, 1, c, static_cast<long>(c) * 4, 0);

    for (const auto& [name, layer] :
         std::initializer_list<std::pair<const char*, const DenseLayer<T>*>>{
             {"Den1", &net.den1}, {"Den2", &net.den2}, {"Den3", &net.den3},
             {"Den4", &net.den4}}) {
        c = layer->n_out();
        add(name, 1, 1, c, static_cast<long>(c) * 4, layer->weight_count());
    }

    if (net.width_divisor == 1) {
        static const std::vector<AuditRow> kExpected = {
            {"Input", {64, 64, 1}, 16384, 0},
            {"Conv1", {30, 30, 32}, 115200, 1152},
            {"Pool", {15, 15, 32}, 28800, 0},
            {"Fire2", {15, 15, 64}, 72000, 5632},
            {"Fire3", {15, 15, 128}, 129600, 11264},
            {"Pool", {7, 7, 128}, 25088, 0},
            {"Fire4", {7, 7, 256}, 56448, 45056},
            {"Fire5", {7, 7, 256}, 56448, 49152},
            {"Pool", {3, 3, 256}, 9216, 0},
            {"Fire6", {3, 3, 384}, 15552, 104448},
            {"Fire7", {3, 3, 384}, 15552, 110592},
            {"Fire8", {3, 3, 512}, 20736, 188416},
            {"Fire9", {3, 3, 512}, 20736, 196608},
            {"Conv10", {3, 3, 1024}, 36864, 524288},
            {"Pool", {1, 1, 1024}, 4096, 0},
            {"Den1", {1, 1, 4}, 16, 4096},
            {"Den2", {1, 1, 100}, 400, 500},
            {"Den3", {1, 1, 30}, 120, 3000},
            {"Den4", {1, 1, 1}, 4, 30},
        };
        for (std::size_t i = 0; i < kExpected.size(); ++i) {
            const AuditRow& got = report.rows[i];
            const AuditRow& want = kExpected[i];
            if (got.layer != want.layer || got.output_shape != want.output_shape ||
                got.memory_bytes != want.memory_bytes ||
                got.weight_count != want.weight_count) {
                throw DataError("architecture audit failed at layer " + want.layer);
            }
        }
        if (report.total_memory_bytes != 623260 || report.total_weight_count != 1244234) {
            throw DataError("architecture audit failed at totals");
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Forward / backward

template <typename T>
struct ForwardCache {
    Tensor<T> input;
    Tensor<T> conv1_pre;
    Tensor<T> pool1_in;
    std::vector<int> pool1_arg, pool2_arg, pool3_arg;
    Tensor<T> pool2_in, pool3_in;
    std::array<typename Fire<T>::Cache, ProSqnNet<T>::kNumFires> fire;
    Tensor<T> conv10_in, conv10_pre;
    Tensor<T> gpool_in;
    std::vector<int> gpool_arg;
    Tensor<T> den1_in, den1_pre;
    Tensor<T> den2_in, den2_pre;
    Tensor<T> den3_in, den3_pre;
    Tensor<T> den4_in;
    T time_input = T{0};
};

template <typename T>
Tensor<T> image_to_tensor(const TfaImage& image) {
    if (image.rows != 64 || image.cols != 64) {
        throw UserError("network input must be a 64x64 image");
    }
    Tensor<T> t({64, 64, 1});
    for (std::size_t i = 0; i < image.values.size(); ++i) {
        const float v = image.values[i];
        if (v < -1e-6f || v > 1.0f + 1e-6f) {
            throw UserError("network input image is not normalized to [0,1]");
        }
        t.data[i] = static_cast<T>(v);
    }
    return t;
}

// Output is the network estimate in normalized units (multiply by rul_scale
// for seconds).
template <typename T>
T forward_normalized(const ProSqnNet<T>& net, const Tensor<T>& input, T time_seconds,
                     ForwardCache<T>* cache = nullptr) {
    const T slope = net.slope;
    auto act = [&](Tensor<T> pre, Tensor<T>* keep) {
        if (keep) *keep = pre;
        return leaky_relu(pre, slope);
    };

    if (cache) cache->input = input;
    Tensor<T> x = act(conv2d(input, net.conv1), cache ? &cache->conv1_pre : nullptr);

    if (cache) cache->pool1_in = x;
    x = maxpool2d(x, 3, 2, cache ? &cache->pool1_arg : nullptr);

    for (int i = 0; i < ProSqnNet<T>::kNumFires; ++i) {
        x = net.fires[i].forward(x, slope, cache ? &cache->fire[i] : nullptr);
        if (i == 1) {
            if (cache) cache->pool2_in = x;
            x = maxpool2d(x, 3, 2, cache ? &cache->pool2_arg : nullptr);
        } else if (i == 3) {
            if (cache) cache->pool3_in = x;
            x = maxpool2d(x, 3, 2, cache ? &cache->pool3_arg : nullptr);
        }
    }

    if (cache) cache->conv10_in = x;
    x = act(conv2d(x, net.conv10), cache ? &cache->conv10_pre : nullptr);

    if (cache) cache->gpool_in = x;
    x = global_maxpool(x, cache ? &cache->gpool_arg : nullptr);

    Tensor<T> flat({static_cast<int>(x.size())});
    flat.data = x.data;

    if (cache) cache->den1_in = flat;
    Tensor<T> latent = act(dense(flat, net.den1), cache ? &cache->den1_pre : nullptr);

    const T time_input = time_seconds / static_cast<T>(net.t_ref);
    Tensor<T> with_time({latent.dim(0) + 1});
    std::copy(latent.data.begin(), latent.data.end(), with_time.data.begin());
    with_time.data.back() = time_input;
    if (cache) {
        cache->den2_in = with_time;
        cache->time_input = time_input;
    }

    Tensor<T> h2 = act(dense(with_time, net.den2), cache ? &cache->den2_pre : nullptr);
    if (cache) cache->den3_in = h2;
    Tensor<T> h3 = act(dense(h2, net.den3), cache ? &cache->den3_pre : nullptr);
    if (cache) cache->den4_in = h3;
    Tensor<T> out = dense(h3, net.den4);
    return out.data[0];
}

template <typename T>
double forward(const ProSqnNet<T>& net, const TfaImage& normalized_image,
               double time_seconds) {
    if (time_seconds < 0.0) throw UserError("query time must be nonnegative");
    const Tensor<T> input = image_to_tensor<T>(normalized_image);
    return static_cast<double>(
               forward_normalized(net, input, static_cast<T>(time_seconds))) *
           static_cast<double>(net.rul_scale);
}

// Gradients in the same order as ProSqnNet::parameters().
template <typename T>
void backward(const ProSqnNet<T>& net, const ForwardCache<T>& cache, T grad_output,
              std::vector<Tensor<T>>& grads) {
    const T slope = net.slope;
    grads.assign(60, Tensor<T>{});

    Tensor<T> g({1});
    g.data[0] = grad_output;

    Tensor<T> gin;
    dense_backward(cache.den4_in, net.den4, g, grads[58], grads[59], gin);
    gin = leaky_relu_backward(cache.den3_pre, gin, slope);
    Tensor<T> gin2;
    dense_backward(cache.den3_in, net.den3, gin, grads[56], grads[57], gin2);
    gin2 = leaky_relu_backward(cache.den2_pre, gin2, slope);
    Tensor<T> gin3;
    dense_backward(cache.den2_in, net.den2, gin2, grads[54], grads[55], gin3);

    // Drop the time component; it is an input, not a parameter.
    Tensor<T> glatent({gin3.dim(0) - 1});
    std::copy(gin3.data.begin(), gin3.data.end() - 1, glatent.data.begin());
    glatent = leaky_relu_backward(cache.den1_pre, glatent, slope);
    Tensor<T> gflat;
    dense_backward(cache.den1_in, net.den1, glatent, grads[52], grads[53], gflat);

    Tensor<T> gpool({1, 1, gflat.dim(0)});
    gpool.data = gflat.data;
    Tensor<T> gx = global_maxpool_backward(cache.gpool_in, gpool, cache.gpool_arg);

    gx = leaky_relu_backward(cache.conv10_pre, gx, slope);
    Tensor<T> gconv10_in;
    conv2d_backward(cache.conv10_in, net.conv10, gx, grads[50], grads[51], gconv10_in);
    gx = std::move(gconv10_in);

    for (int i = ProSqnNet<T>::kNumFires - 1; i >= 0; --i) {
        if (i == 3) {
            gx = maxpool2d_backward(cache.pool3_in, gx, cache.pool3_arg);
        } else if (i == 1) {
            gx = maxpool2d_backward(cache.pool2_in, gx, cache.pool2_arg);
        }
        typename Fire<T>::Grads fg;
        gx = net.fires[i].backward(cache.fire[i], gx, slope, fg);
        const int base = 2 + i * 6;
        grads[base] = std::move(fg.squeeze_kernel);
        grads[base + 1] = std::move(fg.squeeze_bias);
        grads[base + 2] = std::move(fg.expand1_kernel);
        grads[base + 3] = std::move(fg.expand1_bias);
        grads[base + 4] = std::move(fg.expand3_kernel);
        grads[base + 5] = std::move(fg.expand3_bias);
    }

    gx = maxpool2d_backward(cache.pool1_in, gx, cache.pool1_arg);
    gx = leaky_relu_backward(cache.conv1_pre, gx, slope);
    Tensor<T> gimage;
    conv2d_backward(cache.input, net.conv1, gx, grads[0], grads[1], gimage);
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
    int epochs = 30;
    int batch_size = 16;
    double learning_rate = 1e-3;
    std::uint64_t seed = 42;
    double rul_scale = 1.0;   // seconds; target normalization divisor
    double time_scale = 1.0;  // seconds; T_ref for the time input

    void validate() const {
        if (epochs <= 0 || batch_size <= 0 || learning_rate < 0.0 ||
            rul_scale <= 0.0 || time_scale <= 0.0) {
            throw UserError("train config: all values must be positive");
        }
    }
};

template <typename T>
struct TrainSample {
    Tensor<T> image;  // 64x64x1, normalized
    double time_seconds = 0.0;
    double rul_seconds = 0.0;
};

// Mean squared error over the batch in normalized units, plus averaged
// parameter gradients ordered as ProSqnNet::parameters().
template <typename T>
double batch_gradient(const ProSqnNet<T>& net,
                      const std::vector<const TrainSample<T>*>& batch,
                      std::vector<Tensor<T>>& grads) {
    const auto params = net.parameters();
    grads.assign(params.size(), Tensor<T>{});
    for (std::size_t i = 0; i < params.size(); ++i) grads[i] = Tensor<T>(params[i]->shape);

    double loss = 0.0;
    std::vector<Tensor<T>> sample_grads;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const TrainSample<T>* sample : batch) {
        ForwardCache<T> cache;
        const T pred = forward_normalized(net, sample->image,
                                          static_cast<T>(sample->time_seconds), &cache);
        const T target = static_cast<T>(sample->rul_seconds / net.rul_scale);
        const T diff = pred - target;
        loss += static_cast<double>(diff) * static_cast<double>(diff) * inv_n;
        backward(net, cache, static_cast<T>(2.0 * inv_n) * diff, sample_grads);
        for (std::size_t i = 0; i < grads.size(); ++i) {
            for (long j = 0; j < grads[i].size(); ++j) {
                grads[i].data[j] += sample_grads[i].data[j];
            }
        }
    }
    return loss;
}

// Returns per-epoch mean loss over the dataset (normalized units).
template <typename T>
std::vector<double> train(ProSqnNet<T>& net, const std::vector<TrainSample<T>>& dataset,
                          const TrainConfig& config) {
    config.validate();
    if (dataset.empty()) throw UserError("train: empty dataset");

    net.rul_scale = static_cast<float>(config.rul_scale);
    net.t_ref = static_cast<float>(config.time_scale);

    auto params = net.parameters();
    OptimizerState state;
    state.config.learning_rate = config.learning_rate;
    state.init(params);

    Rng rng(config.seed);
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> history;
    std::vector<Tensor<T>> grads;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        deterministic_shuffle(order, rng);
        double epoch_loss = 0.0;
        long seen = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            std::vector<const TrainSample<T>*> batch;
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back(&dataset[order[i]]);
            }
            const double loss = batch_gradient(net, batch, grads);
            if (!std::isfinite(loss)) {
                throw NumericalError("training loss is not finite at epoch " +
                                     std::to_string(epoch));
            }
            epoch_loss += loss * static_cast<double>(batch.size());
            seen += static_cast<long>(batch.size());
            std::vector<const Tensor<T>*> grad_ptrs;
            grad_ptrs.reserve(grads.size());
            for (const auto& t : grads) grad_ptrs.push_back(&t);
            adam_step(params, grad_ptrs, state);
        }
        history.push_back(epoch_loss / static_cast<double>(seen));
    }
    return history;
}

// ---------------------------------------------------------------------------
// Phase-I trajectory: one RUL estimate per snapshot, in order.

template <typename T>
std::vector<std::pair<double, double>> predict_trajectory(
    const ProSqnNet<T>& net, const std::vector<VibrationSnapshot>& snapshots,
    const StftConfig& stft_config) {
    std::vector<std::pair<double, double>> trajectory;
    trajectory.reserve(snapshots.size());
    double prev = -1.0;
    for (const VibrationSnapshot& snapshot : snapshots) {
        if (snapshot.timestamp <= prev) {
            throw UserError("snapshots must be strictly increasing in timestamp");
        }
        prev = snapshot.timestamp;
        const TfaImage image = tfa_normalize(stft(snapshot, stft_config));
        trajectory.emplace_back(snapshot.timestamp,
                                forward(net, image, snapshot.timestamp));
    }
    return trajectory;
}

}  // namespace vispro
