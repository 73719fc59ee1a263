#include "gradlab/network.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "gradlab/rng.hpp"

namespace gradlab {

Network::Network(std::vector<std::unique_ptr<Layer>> layers, Loss loss)
    : layers_(std::move(layers)), loss_(loss) {}

Network::Network(const Network& other) : loss_(other.loss_) {
    layers_.reserve(other.layers_.size());
    for (const auto& layer : other.layers_) layers_.push_back(layer->clone());
}

Network& Network::operator=(const Network& other) {
    if (this != &other) {
        Network copy(other);
        *this = std::move(copy);
    }
    return *this;
}

Tensor Network::run_layers(const Tensor& inputs) {
    Tensor x = inputs;
    for (auto& layer : layers_) x = layer->forward(x);
    return x;
}

ForwardResult Network::forward(const Batch& batch) {
    Tensor out = run_layers(batch.inputs);
    const double value = loss_value(loss_, out, batch.targets);
    return {std::move(out), value};
}

std::vector<ParamGrad> Network::backward(const Batch& batch, double* loss_out) {
    zero_grads();
    Tensor out = run_layers(batch.inputs);
    if (loss_out) *loss_out = loss_value(loss_, out, batch.targets);
    Tensor g = loss_grad(loss_, out, batch.targets);
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
        g = (*it)->backward(g);
    }
    std::vector<ParamGrad> grads;
    for (const ParamSlot& slot : param_slots()) {
        grads.push_back({slot.name, *slot.value, *slot.grad});
    }
    return grads;
}

std::vector<ParamSlot> Network::param_slots() {
    std::vector<ParamSlot> slots;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        layers_[i]->collect_params("layer" + std::to_string(i), slots);
    }
    std::unordered_set<std::string> seen;
    for (const auto& slot : slots) {
        if (!seen.insert(slot.name).second) {
            throw InvalidInput("duplicate parameter name: " + slot.name);
        }
    }
    return slots;
}

std::size_t Network::param_count() {
    std::size_t n = 0;
    for (const ParamSlot& slot : param_slots()) n += slot.value->numel();
    return n;
}

void Network::zero_grads() {
    for (auto& layer : layers_) layer->zero_grads();
}

// ------------------------------------------------------------------- losses

namespace {

void require_numel_match(const Tensor& output, const Tensor& targets, const char* loss_name) {
    if (output.numel() != targets.numel()) {
        throw ShapeError(std::string(loss_name) + ": output " + shape_to_string(output.shape()) +
                         " and targets " + shape_to_string(targets.shape()) +
                         " have different element counts");
    }
}

// Per-sample softmax-CE expects (N x K) logits and N integer labels.
void require_labels(const Tensor& output, const Tensor& targets) {
    if (output.rank() != 2) {
        throw ShapeError("softmax_cross_entropy: logits must be rank-2, got " +
                         shape_to_string(output.shape()));
    }
    if (targets.numel() != output.extent(0)) {
        throw ShapeError("softmax_cross_entropy: expected " + std::to_string(output.extent(0)) +
                         " labels, got " + shape_to_string(targets.shape()));
    }
    const std::size_t k = output.extent(1);
    for (std::size_t i = 0; i < targets.numel(); ++i) {
        const double v = targets[i];
        if (v != std::floor(v) || v < 0.0 || v >= static_cast<double>(k)) {
            throw InvalidInput("softmax_cross_entropy: label " + std::to_string(v) +
                               " out of range [0, " + std::to_string(k) + ")");
        }
    }
}

}  // namespace

double loss_value(Loss loss, const Tensor& output, const Tensor& targets) {
    switch (loss) {
        case Loss::Mse: {
            require_numel_match(output, targets, "mse");
            const std::size_t n = output.numel();
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = output[i] - targets[i];
                acc += d * d;
            }
            return acc / static_cast<double>(n);
        }
        case Loss::SoftmaxCrossEntropy: {
            require_labels(output, targets);
            const std::size_t n = output.extent(0), k = output.extent(1);
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                const double* row = output.data() + r * k;
                double mx = row[0];
                for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, row[c]);
                double z = 0.0;
                for (std::size_t c = 0; c < k; ++c) z += std::exp(row[c] - mx);
                const std::size_t label = static_cast<std::size_t>(targets[r]);
                acc += std::log(z) - (row[label] - mx);
            }
            return acc / static_cast<double>(n);
        }
        case Loss::BinaryCrossEntropy: {
            // Logit form: softplus(x) - x*t, numerically stable for any x.
            require_numel_match(output, targets, "binary_cross_entropy");
            const std::size_t n = output.numel();
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double x = output[i], t = targets[i];
                acc += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
            }
            return acc / static_cast<double>(n);
        }
    }
    throw InvalidInput("unknown loss kind");
}

Tensor loss_grad(Loss loss, const Tensor& output, const Tensor& targets) {
    Tensor g(output.shape());
    switch (loss) {
        case Loss::Mse: {
            require_numel_match(output, targets, "mse");
            const double inv = 1.0 / static_cast<double>(output.numel());
            for (std::size_t i = 0; i < output.numel(); ++i) {
                g[i] = 2.0 * (output[i] - targets[i]) * inv;
            }
            return g;
        }
        case Loss::SoftmaxCrossEntropy: {
            require_labels(output, targets);
            const std::size_t n = output.extent(0), k = output.extent(1);
            const double inv = 1.0 / static_cast<double>(n);
            for (std::size_t r = 0; r < n; ++r) {
                const double* row = output.data() + r * k;
                double mx = row[0];
                for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, row[c]);
                double z = 0.0;
                for (std::size_t c = 0; c < k; ++c) z += std::exp(row[c] - mx);
                const std::size_t label = static_cast<std::size_t>(targets[r]);
                for (std::size_t c = 0; c < k; ++c) {
                    const double p = std::exp(row[c] - mx) / z;
                    g[r * k + c] = (p - (c == label ? 1.0 : 0.0)) * inv;
                }
            }
            return g;
        }
        case Loss::BinaryCrossEntropy: {
            require_numel_match(output, targets, "binary_cross_entropy");
            const double inv = 1.0 / static_cast<double>(output.numel());
            for (std::size_t i = 0; i < output.numel(); ++i) {
                const double s = 1.0 / (1.0 + std::exp(-output[i]));
                g[i] = (s - targets[i]) * inv;
            }
            return g;
        }
    }
    throw InvalidInput("unknown loss kind");
}

// ---------------------------------------------------------------- grad check

GradCheckReport grad_check(Network& net, const Batch& batch, double h, double tol) {
    if (net.param_count() > 10000) {
        throw InvalidInput("grad_check: network has " + std::to_string(net.param_count()) +
                           " parameters, limit is 10000");
    }
    GradCheckReport report;
    report.h = h;
    report.tol = tol;

    const std::vector<ParamGrad> analytic = net.backward(batch);
    std::vector<ParamSlot> slots = net.param_slots();

    for (std::size_t s = 0; s < slots.size(); ++s) {
        Tensor& value = *slots[s].value;
        const Tensor& a = analytic[s].grad;
        double worst = 0.0;
        for (std::size_t i = 0; i < value.numel(); ++i) {
            const double orig = value[i];
            value[i] = orig + h;
            const double lp = net.forward(batch).loss;
            value[i] = orig - h;
            const double lm = net.forward(batch).loss;
            value[i] = orig;
            const double numeric = (lp - lm) / (2.0 * h);
            const double denom = std::max({std::abs(a[i]), std::abs(numeric), 1e-3});
            worst = std::max(worst, std::abs(a[i] - numeric) / denom);
        }
        report.per_param.push_back({slots[s].name, worst});
        report.max_rel_err = std::max(report.max_rel_err, worst);
    }
    report.pass = report.max_rel_err <= tol;
    return report;
}

// ------------------------------------------------------------------ builders

namespace {

void init_uniform(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-limit, limit);
}

std::unique_ptr<FullyConnected> init_fc(std::size_t out_dim, std::size_t in_dim, Rng& rng,
                                        bool with_bias = true) {
    auto fc = std::make_unique<FullyConnected>(out_dim, in_dim, with_bias);
    init_uniform(fc->weight, in_dim, out_dim, rng);
    return fc;
}

std::unique_ptr<Conv2D> init_conv(std::size_t out_ch, std::size_t in_ch, std::size_t k,
                                  std::size_t stride, Padding padding, Rng& rng) {
    auto conv = std::make_unique<Conv2D>(out_ch, in_ch, k, k, stride, padding, true);
    init_uniform(conv->weight, in_ch * k * k, out_ch * k * k, rng);
    return conv;
}

}  // namespace

Network make_residual_mlp(std::size_t width, std::size_t depth, std::size_t in_dim,
                          std::size_t out_dim, std::uint64_t seed) {
    if (width == 0 || in_dim == 0 || out_dim == 0) {
        throw InvalidInput("make_residual_mlp: dimensions must be positive");
    }
    Rng rng(seed);
    std::vector<std::unique_ptr<Layer>> layers;
    layers.push_back(init_fc(width, in_dim, rng));
    for (std::size_t i = 0; i < depth; ++i) {
        std::vector<std::unique_ptr<Layer>> inner;
        inner.push_back(init_fc(width, width, rng));
        inner.push_back(std::make_unique<ReLU>());
        layers.push_back(std::make_unique<ResidualBlock>(std::move(inner)));
    }
    layers.push_back(init_fc(out_dim, width, rng));
    return Network(std::move(layers), Loss::SoftmaxCrossEntropy);
}

Network make_tiny_resnet(std::size_t channels, std::size_t blocks, std::size_t classes,
                         std::uint64_t seed, std::size_t in_channels) {
    if (channels == 0 || classes == 0 || in_channels == 0) {
        throw InvalidInput("make_tiny_resnet: dimensions must be positive");
    }
    Rng rng(seed);
    std::vector<std::unique_ptr<Layer>> layers;
    layers.push_back(init_conv(channels, in_channels, 3, 2, Padding::Same, rng));
    layers.push_back(std::make_unique<ReLU>());
    for (std::size_t i = 0; i < blocks; ++i) {
        std::vector<std::unique_ptr<Layer>> inner;
        inner.push_back(init_conv(channels, channels, 3, 1, Padding::Same, rng));
        inner.push_back(std::make_unique<ReLU>());
        layers.push_back(std::make_unique<ResidualBlock>(std::move(inner)));
    }
    layers.push_back(std::make_unique<GlobalAveragePool>());
    layers.push_back(init_fc(classes, channels, rng));
    return Network(std::move(layers), Loss::SoftmaxCrossEntropy);
}

Network make_linear(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::unique_ptr<Layer>> layers;
    layers.push_back(init_fc(out_dim, in_dim, rng));
    return Network(std::move(layers), Loss::Mse);
}

Network make_tiny_segnet(std::size_t channels, std::uint64_t seed, std::size_t in_channels) {
    Rng rng(seed);
    std::vector<std::unique_ptr<Layer>> layers;
    layers.push_back(init_conv(channels, in_channels, 3, 1, Padding::Same, rng));
    layers.push_back(std::make_unique<ReLU>());
    std::vector<std::unique_ptr<Layer>> inner;
    inner.push_back(init_conv(channels, channels, 3, 1, Padding::Same, rng));
    inner.push_back(std::make_unique<ReLU>());
    layers.push_back(std::make_unique<ResidualBlock>(std::move(inner)));
    layers.push_back(init_conv(1, channels, 3, 1, Padding::Same, rng));
    return Network(std::move(layers), Loss::BinaryCrossEntropy);
}

}  // namespace gradlab
