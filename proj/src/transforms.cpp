#include "gradlab/transforms.hpp"

#include <algorithm>
#include <cmath>

namespace gradlab {

namespace {

bool all_equal(const Tensor& g) {
    for (std::size_t i = 1; i < g.numel(); ++i) {
        if (g[i] != g[0]) return false;
    }
    return true;
}

}  // namespace

Tensor znorm(const Tensor& g, double eps) {
    if (g.numel() == 0) throw InvalidInput("znorm: tensor has no elements");
    if (eps <= 0.0) throw InvalidInput("znorm: eps must be positive");
    // sigma = 0: the numerator vanishes elementwise, so the result is an
    // exact zero tensor. Detecting it up front keeps that exact under
    // floating-point summation too.
    if (all_equal(g)) return Tensor::zeros(g.shape());
    const TensorStats s = stats(g);
    const double inv = 1.0 / (s.std + eps);
    Tensor out(g.shape());
    for (std::size_t i = 0; i < g.numel(); ++i) out[i] = (g[i] - s.mean) * inv;
    return out;
}

Tensor centralize(const Tensor& g) {
    if (g.numel() == 0) throw InvalidInput("centralize: tensor has no elements");
    if (all_equal(g)) return Tensor::zeros(g.shape());
    const double mean = stats(g).mean;
    Tensor out(g.shape());
    for (std::size_t i = 0; i < g.numel(); ++i) out[i] = g[i] - mean;
    return out;
}

Tensor clip(const Tensor& g, double tau) {
    if (tau <= 0.0) throw InvalidInput("clip: tau must be positive");
    const double norm = l2_norm(g);
    if (norm <= tau) return g;
    return scale(g, tau / norm);
}

Tensor GradTransform::apply(const Tensor& g) const {
    switch (kind) {
        case TransformKind::ZNorm:
            return znorm(g, eps);
        case TransformKind::Centralize:
            return centralize(g);
        case TransformKind::Clip:
            return clip(g, tau);
        case TransformKind::Identity:
            return g;
    }
    throw InvalidInput("unknown transform kind");
}

GradTransform make_znorm(double eps) {
    GradTransform t;
    t.kind = TransformKind::ZNorm;
    t.eps = eps;
    return t;
}

GradTransform make_centralize() {
    GradTransform t;
    t.kind = TransformKind::Centralize;
    return t;
}

GradTransform make_clip(double tau) {
    GradTransform t;
    t.kind = TransformKind::Clip;
    t.tau = tau;
    return t;
}

GradTransform make_identity() { return GradTransform{}; }

namespace {

// Whole-model ablation: pool every applicable tensor into one virtual
// gradient, derive the correction there, apply it elementwise.
void apply_whole_model(const GradTransform& t, std::vector<ParamGrad>& grads) {
    std::vector<std::size_t> which;
    std::vector<double> pooled;
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (t.applicable(grads[i].grad)) {
            which.push_back(i);
            const auto& v = grads[i].grad.vec();
            pooled.insert(pooled.end(), v.begin(), v.end());
        }
    }
    if (pooled.empty() || pooled.size() < t.min_count) return;
    const std::size_t pooled_size = pooled.size();
    Tensor flat({pooled_size}, std::move(pooled));
    switch (t.kind) {
        case TransformKind::Identity:
            return;
        case TransformKind::Clip: {
            const double norm = l2_norm(flat);
            if (norm <= t.tau) return;
            const double s = t.tau / norm;
            for (std::size_t i : which) {
                grads[i].grad = scale(grads[i].grad, s);
            }
            return;
        }
        case TransformKind::ZNorm:
        case TransformKind::Centralize: {
            Tensor transformed = t.kind == TransformKind::ZNorm ? znorm(flat, t.eps)
                                                                : centralize(flat);
            std::size_t cursor = 0;
            for (std::size_t i : which) {
                Tensor& g = grads[i].grad;
                for (std::size_t k = 0; k < g.numel(); ++k) g[k] = transformed[cursor++];
            }
            return;
        }
    }
}

}  // namespace

std::vector<ParamGrad> TransformPipeline::apply(std::vector<ParamGrad> grads) const {
    for (const GradTransform& t : transforms) {
        if (t.whole_model) {
            apply_whole_model(t, grads);
            continue;
        }
        for (ParamGrad& pg : grads) {
            if (t.applicable(pg.grad)) pg.grad = t.apply(pg.grad);
        }
    }
    return grads;
}

std::string transform_name(TransformKind kind) {
    switch (kind) {
        case TransformKind::ZNorm:
            return "znorm";
        case TransformKind::Centralize:
            return "centralize";
        case TransformKind::Clip:
            return "clip";
        case TransformKind::Identity:
            return "identity";
    }
    return "unknown";
}

}  // namespace gradlab
