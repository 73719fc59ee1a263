#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "gradlab/layers.hpp"
#include "gradlab/tensor.hpp"

namespace gradlab {

enum class Loss { Mse, SoftmaxCrossEntropy, BinaryCrossEntropy };

struct Batch {
    Tensor inputs;
    Tensor targets;
};

// One parameter tensor paired with its gradient, as produced by backward().
struct ParamGrad {
    std::string name;
    Tensor param;
    Tensor grad;  // same shape as param
};

struct ForwardResult {
    Tensor output;
    double loss;
};

class Network {
public:
    Network() = default;
    Network(std::vector<std::unique_ptr<Layer>> layers, Loss loss);
    Network(const Network& other);
    Network& operator=(const Network& other);
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    Loss loss() const { return loss_; }
    void set_loss(Loss loss) { loss_ = loss; }

    std::vector<std::unique_ptr<Layer>>& layers() { return layers_; }
    const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }

    // Layer stack only, no loss. Caches per-layer state for backward.
    Tensor run_layers(const Tensor& inputs);

    ForwardResult forward(const Batch& batch);

    // Recomputes the forward pass, then backpropagates the batch-mean loss.
    // Returns one ParamGrad per parameter tensor in a fixed layer order.
    std::vector<ParamGrad> backward(const Batch& batch, double* loss_out = nullptr);

    // Mutable parameter views in the same fixed order backward() uses.
    std::vector<ParamSlot> param_slots();
    std::size_t param_count();
    void zero_grads();

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    Loss loss_ = Loss::Mse;
};

// Batch-mean loss value; see docs for the per-loss conventions.
double loss_value(Loss loss, const Tensor& output, const Tensor& targets);
// d(loss)/d(output), same shape as output.
Tensor loss_grad(Loss loss, const Tensor& output, const Tensor& targets);

struct GradCheckEntry {
    std::string name;
    double max_rel_err;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> per_param;
    double max_rel_err = 0.0;
    double h = 0.0;
    double tol = 0.0;
    bool pass = false;
};

// Compares analytic gradients against central finite differences, element
// by element. Relative error uses a 1e-3 denominator floor so near-zero
// gradients are judged on the finite-difference noise scale. Parameter
// count is capped at 10^4.
GradCheckReport grad_check(Network& net, const Batch& batch, double h, double tol);

// Deterministic fan-scaled uniform initialization from the given seed.
Network make_residual_mlp(std::size_t width, std::size_t depth, std::size_t in_dim,
                          std::size_t out_dim, std::uint64_t seed);
Network make_tiny_resnet(std::size_t channels, std::size_t blocks, std::size_t classes,
                         std::uint64_t seed, std::size_t in_channels = 3);
Network make_linear(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed);
// Shape-preserving conv net emitting one mask logit channel.
Network make_tiny_segnet(std::size_t channels, std::uint64_t seed, std::size_t in_channels = 1);

}  // namespace gradlab
