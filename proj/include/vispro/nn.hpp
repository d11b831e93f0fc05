#pragma once

// Layer kernels with hand-written backward passes, plus the adaptive-moment
// optimizer. Everything is templated on the scalar type: production code
// instantiates float, numerical test oracles instantiate double.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <vector>

#include "vispro/common.hpp"
#include "vispro/tensor.hpp"

namespace vispro {

template <typename T>
struct ConvLayer {
    Tensor<T> kernel;  // k_h x k_w x c_in x c_out
    Tensor<T> bias;    // c_out
    int stride = 1;

    int kh() const { return kernel.shape[0]; }
    int kw() const { return kernel.shape[1]; }
    int in_channels() const { return kernel.shape[2]; }
    int out_channels() const { return kernel.shape[3]; }
    long weight_count() const { return kernel.size(); }  // biases excluded from audits
};

template <typename T>
struct DenseLayer {
    Tensor<T> weights;  // n_in x n_out
    Tensor<T> bias;     // n_out

    int n_in() const { return weights.shape[0]; }
    int n_out() const { return weights.shape[1]; }
    long weight_count() const { return weights.size(); }
};

// ---------------------------------------------------------------------------
// Convolution (no padding; pad explicitly with zero_pad2d when needed)

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const ConvLayer<T>& layer) {
    assert(input.shape.size() == 3);
    if (input.shape[2] != layer.in_channels()) {
        throw ShapeError("conv2d: input " + shape_string(input) + " vs kernel " +
                         shape_string(layer.kernel) + " channel mismatch");
    }
    const int h = input.shape[0], w = input.shape[1];
    const int kh = layer.kh(), kw = layer.kw(), cin = layer.in_channels();
    const int cout = layer.out_channels(), s = layer.stride;
    if (h < kh || w < kw) {
        throw ShapeError("conv2d: input " + shape_string(input) +
                         " smaller than kernel " + shape_string(layer.kernel));
    }
    const int oh = (h - kh) / s + 1;
    const int ow = (w - kw) / s + 1;

    Tensor<T> out({oh, ow, cout});
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            T* dst = &out.at(oy, ox, 0);
            for (int co = 0; co < cout; ++co) dst[co] = layer.bias.data[co];
            for (int ky = 0; ky < kh; ++ky) {
                for (int kx = 0; kx < kw; ++kx) {
                    const T* src = &input.at(oy * s + ky, ox * s + kx, 0);
                    const T* wrow = &layer.kernel.data[((static_cast<std::size_t>(ky) * kw + kx) * cin) * cout];
                    for (int ci = 0; ci < cin; ++ci) {
                        const T v = src[ci];
                        const T* wv = wrow + static_cast<std::size_t>(ci) * cout;
                        for (int co = 0; co < cout; ++co) dst[co] += v * wv[co];
                    }
                }
            }
        }
    }
    return out;
}

template <typename T>
void conv2d_backward(const Tensor<T>& input, const ConvLayer<T>& layer,
                     const Tensor<T>& grad_out, Tensor<T>& grad_kernel,
                     Tensor<T>& grad_bias, Tensor<T>& grad_input) {
    const int kh = layer.kh(), kw = layer.kw(), cin = layer.in_channels();
    const int cout = layer.out_channels(), s = layer.stride;
    const int oh = grad_out.shape[0], ow = grad_out.shape[1];

    grad_kernel = Tensor<T>(layer.kernel.shape);
    grad_bias = Tensor<T>(layer.bias.shape);
    grad_input = Tensor<T>(input.shape);

    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const T* g = &grad_out.at(oy, ox, 0);
            for (int co = 0; co < cout; ++co) grad_bias.data[co] += g[co];
            for (int ky = 0; ky < kh; ++ky) {
                for (int kx = 0; kx < kw; ++kx) {
                    const T* src = &input.at(oy * s + ky, ox * s + kx, 0);
                    T* gsrc = &grad_input.at(oy * s + ky, ox * s + kx, 0);
                    const std::size_t wbase = (static_cast<std::size_t>(ky) * kw + kx) * cin;
                    for (int ci = 0; ci < cin; ++ci) {
                        const T* wv = &layer.kernel.data[(wbase + ci) * cout];
                        T* gw = &grad_kernel.data[(wbase + ci) * cout];
                        const T v = src[ci];
                        T acc = T{0};
                        for (int co = 0; co < cout; ++co) {
                            gw[co] += v * g[co];
                            acc += wv[co] * g[co];
                        }
                        gsrc[ci] += acc;
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Pooling. Output sizing is ceil mode, windows clipped at the border:
// out = ceil((dim - kernel) / stride) + 1.

inline int pool_out_dim(int dim, int kernel, int stride) {
    if (dim <= kernel) return 1;
    return (dim - kernel + stride - 1) / stride + 1;
}

template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& input, int kernel, int stride,
                    std::vector<int>* argmax = nullptr) {
    const int h = input.shape[0], w = input.shape[1], c = input.shape[2];
    const int oh = pool_out_dim(h, kernel, stride);
    const int ow = pool_out_dim(w, kernel, stride);

    Tensor<T> out({oh, ow, c});
    if (argmax) argmax->assign(out.data.size(), 0);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const int y0 = oy * stride, x0 = ox * stride;
            const int y1 = std::min(y0 + kernel, h), x1 = std::min(x0 + kernel, w);
            for (int ch = 0; ch < c; ++ch) {
                T best = input.at(y0, x0, ch);
                int best_idx = (y0 * w + x0) * c + ch;
                for (int y = y0; y < y1; ++y) {
                    for (int x = x0; x < x1; ++x) {
                        const T v = input.at(y, x, ch);
                        if (v > best) {
                            best = v;
                            best_idx = (y * w + x) * c + ch;
                        }
                    }
                }
                out.at(oy, ox, ch) = best;
                if (argmax) (*argmax)[(static_cast<std::size_t>(oy) * ow + ox) * c + ch] = best_idx;
            }
        }
    }
    return out;
}

template <typename T>
Tensor<T> maxpool2d_backward(const Tensor<T>& input, const Tensor<T>& grad_out,
                             const std::vector<int>& argmax) {
    Tensor<T> grad_input(input.shape);
    for (std::size_t i = 0; i < grad_out.data.size(); ++i) {
        grad_input.data[argmax[i]] += grad_out.data[i];
    }
    return grad_input;
}

template <typename T>
Tensor<T> global_maxpool(const Tensor<T>& input, std::vector<int>* argmax = nullptr) {
    const int h = input.shape[0], w = input.shape[1], c = input.shape[2];
    Tensor<T> out({1, 1, c});
    if (argmax) argmax->assign(static_cast<std::size_t>(c), 0);
    for (int ch = 0; ch < c; ++ch) {
        T best = input.at(0, 0, ch);
        int best_idx = ch;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const T v = input.at(y, x, ch);
                if (v > best) {
                    best = v;
                    best_idx = (y * w + x) * c + ch;
                }
            }
        }
        out.data[ch] = best;
        if (argmax) (*argmax)[ch] = best_idx;
    }
    return out;
}

template <typename T>
Tensor<T> global_maxpool_backward(const Tensor<T>& input, const Tensor<T>& grad_out,
                                  const std::vector<int>& argmax) {
    Tensor<T> grad_input(input.shape);
    for (std::size_t i = 0; i < grad_out.data.size(); ++i) {
        grad_input.data[argmax[i]] += grad_out.data[i];
    }
    return grad_input;
}

// ---------------------------------------------------------------------------
// Activations and dense layers

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& input, T slope = T{0.01}) {
    Tensor<T> out = input;
    for (T& v : out.data) {
        if (v < T{0}) v *= slope;
    }
    return out;
}

template <typename T>
Tensor<T> leaky_relu_backward(const Tensor<T>& input, const Tensor<T>& grad_out,
                              T slope = T{0.01}) {
    Tensor<T> grad_input = grad_out;
    for (long i = 0; i < input.size(); ++i) {
        if (input.data[i] < T{0}) grad_input.data[i] *= slope;
    }
    return grad_input;
}

template <typename T>
Tensor<T> dense(const Tensor<T>& input, const DenseLayer<T>& layer) {
    if (input.size() != layer.n_in()) {
        throw ShapeError("dense: input length " + std::to_string(input.size()) +
                         " vs weights " + shape_string(layer.weights));
    }
    const int n_in = layer.n_in(), n_out = layer.n_out();
    Tensor<T> out({n_out});
    for (int j = 0; j < n_out; ++j) out.data[j] = layer.bias.data[j];
    for (int i = 0; i < n_in; ++i) {
        const T v = input.data[i];
        const T* wrow = &layer.weights.data[static_cast<std::size_t>(i) * n_out];
        for (int j = 0; j < n_out; ++j) out.data[j] += v * wrow[j];
    }
    return out;
}

template <typename T>
void dense_backward(const Tensor<T>& input, const DenseLayer<T>& layer,
                    const Tensor<T>& grad_out, Tensor<T>& grad_weights,
                    Tensor<T>& grad_bias, Tensor<T>& grad_input) {
    const int n_in = layer.n_in(), n_out = layer.n_out();
    grad_weights = Tensor<T>(layer.weights.shape);
    grad_bias = grad_out;
    grad_input = Tensor<T>(input.shape);
    for (int i = 0; i < n_in; ++i) {
        const T v = input.data[i];
        const T* wrow = &layer.weights.data[static_cast<std::size_t>(i) * n_out];
        T* gw = &grad_weights.data[static_cast<std::size_t>(i) * n_out];
        T acc = T{0};
        for (int j = 0; j < n_out; ++j) {
            gw[j] += v * grad_out.data[j];
            acc += wrow[j] * grad_out.data[j];
        }
        grad_input.data[i] = acc;
    }
}

// ---------------------------------------------------------------------------
// Shape glue: zero padding (for 3x3 expand convolutions) and channel concat.

template <typename T>
Tensor<T> zero_pad2d(const Tensor<T>& input, int pad) {
    const int h = input.shape[0], w = input.shape[1], c = input.shape[2];
    Tensor<T> out({h + 2 * pad, w + 2 * pad, c});
    for (int y = 0; y < h; ++y) {
        const T* src = &input.at(y, 0, 0);
        T* dst = &out.at(y + pad, pad, 0);
        std::copy(src, src + static_cast<std::size_t>(w) * c, dst);
    }
    return out;
}

template <typename T>
Tensor<T> crop2d(const Tensor<T>& input, int pad, int h, int w) {
    const int c = input.shape[2];
    Tensor<T> out({h, w, c});
    for (int y = 0; y < h; ++y) {
        const T* src = &input.at(y + pad, pad, 0);
        T* dst = &out.at(y, 0, 0);
        std::copy(src, src + static_cast<std::size_t>(w) * c, dst);
    }
    return out;
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    assert(a.shape[0] == b.shape[0] && a.shape[1] == b.shape[1]);
    const int h = a.shape[0], w = a.shape[1];
    const int ca = a.shape[2], cb = b.shape[2];
    Tensor<T> out({h, w, ca + cb});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            T* dst = &out.at(y, x, 0);
            std::copy(&a.at(y, x, 0), &a.at(y, x, 0) + ca, dst);
            std::copy(&b.at(y, x, 0), &b.at(y, x, 0) + cb, dst + ca);
        }
    }
    return out;
}

template <typename T>
void split_channels(const Tensor<T>& grad, int ca, Tensor<T>& grad_a, Tensor<T>& grad_b) {
    const int h = grad.shape[0], w = grad.shape[1], c = grad.shape[2];
    grad_a = Tensor<T>({h, w, ca});
    grad_b = Tensor<T>({h, w, c - ca});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const T* src = &grad.at(y, x, 0);
            std::copy(src, src + ca, &grad_a.at(y, x, 0));
            std::copy(src + ca, src + c, &grad_b.at(y, x, 0));
        }
    }
}

// ---------------------------------------------------------------------------
// Loss

template <typename T>
T mse_loss(const Tensor<T>& prediction, const Tensor<T>& target) {
    assert(prediction.same_shape(target));
    T acc = T{0};
    for (long i = 0; i < prediction.size(); ++i) {
        const T d = prediction.data[i] - target.data[i];
        acc += d * d;
    }
    return acc / static_cast<T>(prediction.size());
}

template <typename T>
Tensor<T> mse_loss_backward(const Tensor<T>& prediction, const Tensor<T>& target) {
    Tensor<T> grad(prediction.shape);
    const T scale = T{2} / static_cast<T>(prediction.size());
    for (long i = 0; i < prediction.size(); ++i) {
        grad.data[i] = scale * (prediction.data[i] - target.data[i]);
    }
    return grad;
}

// ---------------------------------------------------------------------------
// Adaptive-moment optimizer. Accumulators are double regardless of the
// parameter scalar type.

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct OptimizerState {
    AdamConfig config;
    long step_count = 0;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;

    template <typename T>
    void init(const std::vector<Tensor<T>*>& params) {
        first_moment.clear();
        second_moment.clear();
        for (const auto* p : params) {
            first_moment.emplace_back(p->data.size(), 0.0);
            second_moment.emplace_back(p->data.size(), 0.0);
        }
        step_count = 0;
    }
};

template <typename T>
void adam_step(const std::vector<Tensor<T>*>& params,
               const std::vector<const Tensor<T>*>& grads, OptimizerState& state) {
    assert(params.size() == grads.size());
    assert(params.size() == state.first_moment.size());
    state.step_count += 1;
    const AdamConfig& c = state.config;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step_count));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor<T>& p = *params[k];
        const Tensor<T>& g = *grads[k];
        assert(p.data.size() == g.data.size());
        auto& m = state.first_moment[k];
        auto& v = state.second_moment[k];
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            const double gi = static_cast<double>(g.data[i]);
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * gi;
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * gi * gi;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p.data[i] = static_cast<T>(
                static_cast<double>(p.data[i]) -
                c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon));
        }
    }
}

// Uniform fan-in init, bound sqrt(6 / fan_in).
template <typename T>
void init_fan_in(Tensor<T>& t, long fan_in, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (T& v : t.data) v = static_cast<T>(uniform(rng, -bound, bound));
}

}  // namespace vispro
