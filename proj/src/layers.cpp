#include "gradlab/layers.hpp"

#include <algorithm>
#include <cmath>

namespace gradlab {

// ---------------------------------------------------------------- FullyConnected

FullyConnected::FullyConnected(std::size_t out_dim, std::size_t in_dim, bool with_bias)
    : weight({out_dim, in_dim}),
      bias({out_dim}),
      weight_grad({out_dim, in_dim}),
      bias_grad({out_dim}),
      with_bias_(with_bias) {
    if (out_dim == 0 || in_dim == 0) {
        throw InvalidInput("FullyConnected: dimensions must be positive");
    }
}

Tensor FullyConnected::forward(const Tensor& x) {
    if (x.rank() != 2 || x.extent(1) != in_dim()) {
        throw ShapeError("FullyConnected: input " + shape_to_string(x.shape()) +
                         " does not match weight " + shape_to_string(weight.shape()));
    }
    input_cache_ = x;
    const std::size_t n = x.extent(0), m = in_dim(), d = out_dim();
    Tensor y({n, d});
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t o = 0; o < d; ++o) {
            double acc = with_bias_ ? bias[o] : 0.0;
            for (std::size_t c = 0; c < m; ++c) {
                acc += x[r * m + c] * weight[o * m + c];
            }
            y[r * d + o] = acc;
        }
    }
    return y;
}

Tensor FullyConnected::backward(const Tensor& grad_out) {
    const Tensor& x = input_cache_;
    const std::size_t n = x.extent(0), m = in_dim(), d = out_dim();
    Tensor dx({n, m});
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t o = 0; o < d; ++o) {
            const double g = grad_out[r * d + o];
            if (with_bias_) bias_grad[o] += g;
            for (std::size_t c = 0; c < m; ++c) {
                weight_grad[o * m + c] += g * x[r * m + c];
                dx[r * m + c] += g * weight[o * m + c];
            }
        }
    }
    return dx;
}

void FullyConnected::collect_params(const std::string& prefix, std::vector<ParamSlot>& out) {
    out.push_back({prefix + ".weight", &weight, &weight_grad});
    if (with_bias_) out.push_back({prefix + ".bias", &bias, &bias_grad});
}

void FullyConnected::zero_grads() {
    std::fill(weight_grad.vec().begin(), weight_grad.vec().end(), 0.0);
    std::fill(bias_grad.vec().begin(), bias_grad.vec().end(), 0.0);
}

std::unique_ptr<Layer> FullyConnected::clone() const {
    auto copy = std::make_unique<FullyConnected>(out_dim(), in_dim(), with_bias_);
    copy->weight = weight;
    copy->bias = bias;
    return copy;
}

// ---------------------------------------------------------------------- Conv2D

Conv2D::Conv2D(std::size_t out_ch, std::size_t in_ch, std::size_t k1, std::size_t k2,
               std::size_t stride, Padding padding, bool with_bias)
    : weight({out_ch, in_ch, k1, k2}),
      bias({out_ch}),
      weight_grad({out_ch, in_ch, k1, k2}),
      bias_grad({out_ch}),
      stride_(stride),
      padding_(padding),
      with_bias_(with_bias) {
    if (out_ch == 0 || in_ch == 0 || k1 == 0 || k2 == 0) {
        throw InvalidInput("Conv2D: dimensions must be positive");
    }
    if (stride != 1 && stride != 2) {
        throw InvalidInput("Conv2D: stride must be 1 or 2, got " + std::to_string(stride));
    }
}

namespace {

struct ConvGeometry {
    std::size_t out_h, out_w;
    std::ptrdiff_t pad_top, pad_left;
};

ConvGeometry conv_geometry(std::size_t h, std::size_t w, std::size_t k1, std::size_t k2,
                           std::size_t stride, Padding padding) {
    ConvGeometry g{};
    if (padding == Padding::Valid) {
        if (h < k1 || w < k2) {
            throw ShapeError("Conv2D: input " + std::to_string(h) + "x" + std::to_string(w) +
                             " smaller than kernel " + std::to_string(k1) + "x" +
                             std::to_string(k2) + " with valid padding");
        }
        g.out_h = (h - k1) / stride + 1;
        g.out_w = (w - k2) / stride + 1;
        g.pad_top = 0;
        g.pad_left = 0;
    } else {
        g.out_h = (h + stride - 1) / stride;
        g.out_w = (w + stride - 1) / stride;
        const std::size_t need_h = (g.out_h - 1) * stride + k1;
        const std::size_t need_w = (g.out_w - 1) * stride + k2;
        const std::size_t pad_h = need_h > h ? need_h - h : 0;
        const std::size_t pad_w = need_w > w ? need_w - w : 0;
        g.pad_top = static_cast<std::ptrdiff_t>(pad_h / 2);
        g.pad_left = static_cast<std::ptrdiff_t>(pad_w / 2);
    }
    return g;
}

}  // namespace

Tensor Conv2D::forward(const Tensor& x) {
    if (x.rank() != 4 || x.extent(1) != in_ch()) {
        throw ShapeError("Conv2D: input " + shape_to_string(x.shape()) +
                         " does not match weight " + shape_to_string(weight.shape()));
    }
    input_cache_ = x;
    const std::size_t n = x.extent(0), ci = in_ch(), h = x.extent(2), w = x.extent(3);
    const std::size_t co = out_ch(), k1 = kernel_h(), k2 = kernel_w();
    const ConvGeometry g = conv_geometry(h, w, k1, k2, stride_, padding_);
    Tensor y({n, co, g.out_h, g.out_w});
    const double* xd = x.data();
    const double* wd = weight.data();
    double* yd = y.data();
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t o = 0; o < co; ++o) {
            const double bo = with_bias_ ? bias[o] : 0.0;
            for (std::size_t oh = 0; oh < g.out_h; ++oh) {
                for (std::size_t ow = 0; ow < g.out_w; ++ow) {
                    double acc = bo;
                    for (std::size_t i = 0; i < ci; ++i) {
                        const double* xplane = xd + ((b * ci + i) * h) * w;
                        const double* wplane = wd + ((o * ci + i) * k1) * k2;
                        for (std::size_t p = 0; p < k1; ++p) {
                            const std::ptrdiff_t ih =
                                static_cast<std::ptrdiff_t>(oh * stride_ + p) - g.pad_top;
                            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
                            for (std::size_t q = 0; q < k2; ++q) {
                                const std::ptrdiff_t iw =
                                    static_cast<std::ptrdiff_t>(ow * stride_ + q) - g.pad_left;
                                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(w)) continue;
                                acc += wplane[p * k2 + q] * xplane[ih * w + iw];
                            }
                        }
                    }
                    yd[((b * co + o) * g.out_h + oh) * g.out_w + ow] = acc;
                }
            }
        }
    }
    return y;
}

Tensor Conv2D::backward(const Tensor& grad_out) {
    const Tensor& x = input_cache_;
    const std::size_t n = x.extent(0), ci = in_ch(), h = x.extent(2), w = x.extent(3);
    const std::size_t co = out_ch(), k1 = kernel_h(), k2 = kernel_w();
    const ConvGeometry g = conv_geometry(h, w, k1, k2, stride_, padding_);
    Tensor dx(x.shape());
    const double* xd = x.data();
    const double* wd = weight.data();
    const double* gd = grad_out.data();
    double* dxd = dx.data();
    double* dwd = weight_grad.data();
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t o = 0; o < co; ++o) {
            for (std::size_t oh = 0; oh < g.out_h; ++oh) {
                for (std::size_t ow = 0; ow < g.out_w; ++ow) {
                    const double grad = gd[((b * co + o) * g.out_h + oh) * g.out_w + ow];
                    if (with_bias_) bias_grad[o] += grad;
                    for (std::size_t i = 0; i < ci; ++i) {
                        const double* xplane = xd + ((b * ci + i) * h) * w;
                        double* dxplane = dxd + ((b * ci + i) * h) * w;
                        const double* wplane = wd + ((o * ci + i) * k1) * k2;
                        double* dwplane = dwd + ((o * ci + i) * k1) * k2;
                        for (std::size_t p = 0; p < k1; ++p) {
                            const std::ptrdiff_t ih =
                                static_cast<std::ptrdiff_t>(oh * stride_ + p) - g.pad_top;
                            if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
                            for (std::size_t q = 0; q < k2; ++q) {
                                const std::ptrdiff_t iw =
                                    static_cast<std::ptrdiff_t>(ow * stride_ + q) - g.pad_left;
                                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(w)) continue;
                                dwplane[p * k2 + q] += grad * xplane[ih * w + iw];
                                dxplane[ih * w + iw] += grad * wplane[p * k2 + q];
                            }
                        }
                    }
                }
            }
        }
    }
    return dx;
}

void Conv2D::collect_params(const std::string& prefix, std::vector<ParamSlot>& out) {
    out.push_back({prefix + ".weight", &weight, &weight_grad});
    if (with_bias_) out.push_back({prefix + ".bias", &bias, &bias_grad});
}

void Conv2D::zero_grads() {
    std::fill(weight_grad.vec().begin(), weight_grad.vec().end(), 0.0);
    std::fill(bias_grad.vec().begin(), bias_grad.vec().end(), 0.0);
}

std::unique_ptr<Layer> Conv2D::clone() const {
    auto copy = std::make_unique<Conv2D>(out_ch(), in_ch(), kernel_h(), kernel_w(), stride_,
                                         padding_, with_bias_);
    copy->weight = weight;
    copy->bias = bias;
    return copy;
}

// ----------------------------------------------------------------- activations

Tensor ReLU::forward(const Tensor& x) {
    input_cache_ = x;
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    return y;
}

Tensor ReLU::backward(const Tensor& grad_out) {
    Tensor dx(input_cache_.shape());
    for (std::size_t i = 0; i < dx.numel(); ++i) {
        dx[i] = input_cache_[i] > 0.0 ? grad_out[i] : 0.0;
    }
    return dx;
}

Tensor Sigmoid::forward(const Tensor& x) {
    Tensor y(x.shape());
    for (std::size_t i = 0; i < x.numel(); ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
    output_cache_ = y;
    return y;
}

Tensor Sigmoid::backward(const Tensor& grad_out) {
    Tensor dx(output_cache_.shape());
    for (std::size_t i = 0; i < dx.numel(); ++i) {
        const double y = output_cache_[i];
        dx[i] = grad_out[i] * y * (1.0 - y);
    }
    return dx;
}

Tensor GlobalAveragePool::forward(const Tensor& x) {
    if (x.rank() != 4) {
        throw ShapeError("GlobalAveragePool: expected a rank-4 input, got " +
                         shape_to_string(x.shape()));
    }
    input_shape_ = x.shape();
    const std::size_t n = x.extent(0), c = x.extent(1), hw = x.extent(2) * x.extent(3);
    Tensor y({n, c});
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            double acc = 0.0;
            const double* plane = x.data() + (b * c + ch) * hw;
            for (std::size_t i = 0; i < hw; ++i) acc += plane[i];
            y[b * c + ch] = acc / static_cast<double>(hw);
        }
    }
    return y;
}

Tensor GlobalAveragePool::backward(const Tensor& grad_out) {
    const std::size_t n = input_shape_[0], c = input_shape_[1];
    const std::size_t hw = input_shape_[2] * input_shape_[3];
    Tensor dx(input_shape_);
    for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double g = grad_out[b * c + ch] / static_cast<double>(hw);
            double* plane = dx.data() + (b * c + ch) * hw;
            for (std::size_t i = 0; i < hw; ++i) plane[i] = g;
        }
    }
    return dx;
}

// --------------------------------------------------------------- ResidualBlock

ResidualBlock::ResidualBlock(std::vector<std::unique_ptr<Layer>> inner)
    : inner_(std::move(inner)) {
    if (inner_.empty()) {
        throw InvalidInput("ResidualBlock: inner layer list must not be empty");
    }
}

Tensor ResidualBlock::forward(const Tensor& x) {
    Tensor y = x;
    for (auto& layer : inner_) y = layer->forward(y);
    if (!y.same_shape(x)) {
        throw ShapeError("ResidualBlock: inner path output " + shape_to_string(y.shape()) +
                         " does not match block input " + shape_to_string(x.shape()));
    }
    return add(y, x);
}

Tensor ResidualBlock::backward(const Tensor& grad_out) {
    Tensor g = grad_out;
    for (auto it = inner_.rbegin(); it != inner_.rend(); ++it) {
        g = (*it)->backward(g);
    }
    // Identity branch contributes the unmodified upstream gradient.
    return add(g, grad_out);
}

void ResidualBlock::collect_params(const std::string& prefix, std::vector<ParamSlot>& out) {
    for (std::size_t i = 0; i < inner_.size(); ++i) {
        inner_[i]->collect_params(prefix + ".inner" + std::to_string(i), out);
    }
}

void ResidualBlock::zero_grads() {
    for (auto& layer : inner_) layer->zero_grads();
}

std::unique_ptr<Layer> ResidualBlock::clone() const {
    std::vector<std::unique_ptr<Layer>> copies;
    copies.reserve(inner_.size());
    for (const auto& layer : inner_) copies.push_back(layer->clone());
    return std::make_unique<ResidualBlock>(std::move(copies));
}

}  // namespace gradlab
