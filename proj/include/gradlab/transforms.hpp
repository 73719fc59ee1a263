#pragma once

#include <string>
#include <vector>

#include "gradlab/network.hpp"
#include "gradlab/tensor.hpp"

namespace gradlab {

enum class TransformKind { ZNorm, Centralize, Clip, Identity };

// Standardizes a gradient tensor to zero mean, unit-ish variance:
// (g - mean) / (std + eps), with population statistics over the whole
// flattened tensor. A constant tensor maps to all zeros.
Tensor znorm(const Tensor& g, double eps);

// Zero-centers a gradient tensor: g - mean(g).
Tensor centralize(const Tensor& g);

// Rescales so the L2 norm does not exceed tau: g * min(1, tau / ||g||).
// A zero tensor is returned unchanged.
Tensor clip(const Tensor& g, double tau);

// One per-tensor gradient transform plus its applicability rule. Tensors
// below the minimum rank or element count (biases, scalars) pass through
// untouched; a single-element tensor would otherwise normalize to zero
// forever.
struct GradTransform {
    TransformKind kind = TransformKind::Identity;
    double eps = 1e-8;        // ZNorm
    double tau = 1.0;         // Clip
    int min_rank = 2;
    std::size_t min_count = 2;
    // Per-layer applies the transform to each tensor independently (the
    // default); whole-model pools statistics across every applicable
    // tensor first (ablation).
    bool whole_model = false;

    bool applicable(const Tensor& g) const {
        return static_cast<int>(g.rank()) >= min_rank && g.numel() >= min_count;
    }

    Tensor apply(const Tensor& g) const;
};

GradTransform make_znorm(double eps = 1e-8);
GradTransform make_centralize();
GradTransform make_clip(double tau);
GradTransform make_identity();

// Ordered transform list applied left to right between backward() and the
// optimizer step. Parameter values are never touched.
struct TransformPipeline {
    std::vector<GradTransform> transforms;

    std::vector<ParamGrad> apply(std::vector<ParamGrad> grads) const;
};

std::string transform_name(TransformKind kind);

}  // namespace gradlab
