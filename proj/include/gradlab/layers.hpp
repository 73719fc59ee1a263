#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gradlab/tensor.hpp"

namespace gradlab {

enum class LayerKind { FullyConnected, Conv2D, ReLU, Sigmoid, GlobalAveragePool, ResidualBlock };
enum class Padding { Valid, Same };

// Mutable view of one named parameter tensor and its gradient accumulator.
struct ParamSlot {
    std::string name;
    Tensor* value;
    Tensor* grad;
};

// Layers cache whatever forward state their backward pass needs, so a
// network instance is single-threaded by contract.
class Layer {
public:
    virtual ~Layer() = default;
    virtual LayerKind kind() const = 0;
    // Maps a batch tensor to the layer output, caching for backward().
    virtual Tensor forward(const Tensor& x) = 0;
    // Consumes d(loss)/d(output), accumulates parameter gradients, and
    // returns d(loss)/d(input). Requires a preceding forward().
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual void collect_params(const std::string&, std::vector<ParamSlot>&) {}
    virtual void zero_grads() {}
    virtual std::unique_ptr<Layer> clone() const = 0;
};

// y = x W^T + b with weight (out_dim x in_dim), bias (out_dim).
class FullyConnected : public Layer {
public:
    FullyConnected(std::size_t out_dim, std::size_t in_dim, bool with_bias = true);

    LayerKind kind() const override { return LayerKind::FullyConnected; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    void collect_params(const std::string& prefix, std::vector<ParamSlot>& out) override;
    void zero_grads() override;
    std::unique_ptr<Layer> clone() const override;

    std::size_t out_dim() const { return weight.extent(0); }
    std::size_t in_dim() const { return weight.extent(1); }
    bool has_bias() const { return with_bias_; }

    Tensor weight;       // out_dim x in_dim
    Tensor bias;         // out_dim, unused when !with_bias_
    Tensor weight_grad;
    Tensor bias_grad;

private:
    bool with_bias_;
    Tensor input_cache_;
};

// 2-D convolution, weight (out_ch x in_ch x k1 x k2), stride 1 or 2,
// valid or TF-style same padding.
class Conv2D : public Layer {
public:
    Conv2D(std::size_t out_ch, std::size_t in_ch, std::size_t k1, std::size_t k2,
           std::size_t stride, Padding padding, bool with_bias = true);

    LayerKind kind() const override { return LayerKind::Conv2D; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    void collect_params(const std::string& prefix, std::vector<ParamSlot>& out) override;
    void zero_grads() override;
    std::unique_ptr<Layer> clone() const override;

    std::size_t out_ch() const { return weight.extent(0); }
    std::size_t in_ch() const { return weight.extent(1); }
    std::size_t kernel_h() const { return weight.extent(2); }
    std::size_t kernel_w() const { return weight.extent(3); }
    std::size_t stride() const { return stride_; }
    Padding padding() const { return padding_; }
    bool has_bias() const { return with_bias_; }

    Tensor weight;  // out_ch x in_ch x k1 x k2
    Tensor bias;    // out_ch
    Tensor weight_grad;
    Tensor bias_grad;

private:
    std::size_t stride_;
    Padding padding_;
    bool with_bias_;
    Tensor input_cache_;
};

// max(x, 0); derivative at 0 is defined as 0.
class ReLU : public Layer {
public:
    LayerKind kind() const override { return LayerKind::ReLU; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<ReLU>(); }

private:
    Tensor input_cache_;
};

class Sigmoid : public Layer {
public:
    LayerKind kind() const override { return LayerKind::Sigmoid; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<Sigmoid>(); }

private:
    Tensor output_cache_;
};

// (N, C, H, W) -> (N, C) spatial mean.
class GlobalAveragePool : public Layer {
public:
    LayerKind kind() const override { return LayerKind::GlobalAveragePool; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    std::unique_ptr<Layer> clone() const override { return std::make_unique<GlobalAveragePool>(); }

private:
    Shape input_shape_;
};

// y = f(x) + x where f is the inner layer list. The inner path must
// preserve the input shape.
class ResidualBlock : public Layer {
public:
    explicit ResidualBlock(std::vector<std::unique_ptr<Layer>> inner);

    LayerKind kind() const override { return LayerKind::ResidualBlock; }
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& grad_out) override;
    void collect_params(const std::string& prefix, std::vector<ParamSlot>& out) override;
    void zero_grads() override;
    std::unique_ptr<Layer> clone() const override;

    const std::vector<std::unique_ptr<Layer>>& inner() const { return inner_; }

private:
    std::vector<std::unique_ptr<Layer>> inner_;
};

}  // namespace gradlab
