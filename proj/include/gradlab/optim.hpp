#pragma once

#include <map>
#include <string>

#include "gradlab/network.hpp"
#include "gradlab/transforms.hpp"

namespace gradlab {

enum class OptimizerKind { Sgd, Momentum, Adam, AdamW };

// Per-parameter moment accumulators plus hyperparameters. step() owns the
// transform placement: it receives raw gradients and applies the pipeline
// before any moment update, so the optimizer never sees raw gradients when
// a pipeline is configured.
struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;        // Adam stabilizer
    double weight_decay = 0.0;  // AdamW lambda
    double momentum = 0.9;      // Momentum gamma
    // Adds lambda*theta to the transformed gradient instead of decaying
    // the weights directly (the L2-coupled variant).
    bool coupled_l2 = false;

    long step_count = 0;  // t, incremented once per step()

    // Moment tensors keyed by parameter name; shapes mirror the parameters.
    // m doubles as the momentum buffer for the Momentum kind.
    std::map<std::string, Tensor> m;
    std::map<std::string, Tensor> v;
};

// Applies the pipeline to the raw gradients, then advances the parameters
// in place. grads must correspond 1:1 with the network's parameters.
void step(OptimizerState& state, const TransformPipeline& pipeline, Network& net,
          const std::vector<ParamGrad>& raw_grads);

// Property harness: verifies that a first Adam step on the given
// transformed gradient moves every element by at most the learning rate.
// Requires a fresh (t = 0) Adam or AdamW state.
bool adam_update_magnitude_bound_check(const OptimizerState& state, const Tensor& g_hat);

std::string optimizer_name(OptimizerKind kind);

}  // namespace gradlab
