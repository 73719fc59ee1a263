#include "gradlab/optim.hpp"

#include <cmath>

namespace gradlab {

namespace {

void validate(OptimizerState& state, const std::vector<ParamSlot>& slots,
              const std::vector<ParamGrad>& grads) {
    if (slots.size() != grads.size()) {
        throw InvalidInput("step: " + std::to_string(grads.size()) + " gradients for " +
                           std::to_string(slots.size()) + " parameters");
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].name != grads[i].name) {
            throw InvalidInput("step: gradient order mismatch at " + grads[i].name);
        }
        if (!slots[i].value->same_shape(grads[i].grad)) {
            throw ShapeError("step: gradient " + shape_to_string(grads[i].grad.shape()) +
                             " does not match parameter " + grads[i].name + " " +
                             shape_to_string(slots[i].value->shape()));
        }
    }
    if (state.learning_rate <= 0.0) throw InvalidInput("step: learning rate must be positive");
    if (state.beta1 < 0.0 || state.beta1 >= 1.0 || state.beta2 < 0.0 || state.beta2 >= 1.0) {
        throw InvalidInput("step: beta coefficients must lie in [0, 1)");
    }
}

Tensor& moment(std::map<std::string, Tensor>& store, const std::string& name,
               const Shape& shape) {
    auto it = store.find(name);
    if (it == store.end()) {
        it = store.emplace(name, Tensor::zeros(shape)).first;
    }
    return it->second;
}

}  // namespace

void step(OptimizerState& state, const TransformPipeline& pipeline, Network& net,
          const std::vector<ParamGrad>& raw_grads) {
    std::vector<ParamSlot> slots = net.param_slots();
    validate(state, slots, raw_grads);

    std::vector<ParamGrad> grads = pipeline.apply(raw_grads);
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);

    for (std::size_t i = 0; i < slots.size(); ++i) {
        Tensor& theta = *slots[i].value;
        Tensor& g = grads[i].grad;

        if (state.coupled_l2 && state.weight_decay != 0.0 &&
            (state.kind == OptimizerKind::Adam || state.kind == OptimizerKind::AdamW)) {
            for (std::size_t k = 0; k < g.numel(); ++k) g[k] += state.weight_decay * theta[k];
        }

        switch (state.kind) {
            case OptimizerKind::Sgd: {
                for (std::size_t k = 0; k < theta.numel(); ++k) {
                    theta[k] -= state.learning_rate * g[k];
                }
                break;
            }
            case OptimizerKind::Momentum: {
                Tensor& u = moment(state.m, grads[i].name, theta.shape());
                for (std::size_t k = 0; k < theta.numel(); ++k) {
                    u[k] = state.momentum * u[k] + g[k];
                    theta[k] -= state.learning_rate * u[k];
                }
                break;
            }
            case OptimizerKind::Adam:
            case OptimizerKind::AdamW: {
                Tensor& m = moment(state.m, grads[i].name, theta.shape());
                Tensor& v = moment(state.v, grads[i].name, theta.shape());
                const bool decoupled = state.kind == OptimizerKind::AdamW && !state.coupled_l2 &&
                                       state.weight_decay != 0.0;
                for (std::size_t k = 0; k < theta.numel(); ++k) {
                    m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
                    v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
                    const double m_hat = m[k] / bc1;
                    const double v_hat = v[k] / bc2;
                    double delta = m_hat / (std::sqrt(v_hat) + state.eps);
                    if (decoupled) delta += state.weight_decay * theta[k];
                    theta[k] -= state.learning_rate * delta;
                }
                break;
            }
        }
    }
}

bool adam_update_magnitude_bound_check(const OptimizerState& state, const Tensor& g_hat) {
    if (state.step_count != 0) {
        throw InvalidInput("adam_update_magnitude_bound_check: state must be fresh (t = 0)");
    }
    if (state.kind != OptimizerKind::Adam && state.kind != OptimizerKind::AdamW) {
        throw InvalidInput("adam_update_magnitude_bound_check: requires an Adam-family state");
    }
    // First step from zero moments: m_hat = g, v_hat = g*g, so the update
    // is lr * g / (|g| + eps).
    for (std::size_t k = 0; k < g_hat.numel(); ++k) {
        const double m_hat = g_hat[k];
        const double v_hat = g_hat[k] * g_hat[k];
        const double delta = state.learning_rate * m_hat / (std::sqrt(v_hat) + state.eps);
        if (!(std::abs(delta) <= state.learning_rate)) return false;
    }
    return true;
}

std::string optimizer_name(OptimizerKind kind) {
    switch (kind) {
        case OptimizerKind::Sgd:
            return "sgd";
        case OptimizerKind::Momentum:
            return "momentum";
        case OptimizerKind::Adam:
            return "adam";
        case OptimizerKind::AdamW:
            return "adamw";
    }
    return "unknown";
}

}  // namespace gradlab
