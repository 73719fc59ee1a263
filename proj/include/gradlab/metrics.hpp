#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gradlab/tensor.hpp"

namespace gradlab {

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
};

// Foreground pixel coordinates of a binary mask, (row, col), no duplicates.
struct PointSet {
    std::vector<std::pair<int, int>> points;

    bool empty() const { return points.empty(); }
    std::size_t size() const { return points.size(); }
};

// Fraction of exact matches. Lengths must agree and be nonzero.
double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

// 2tp / (2tp + fp + fn); 0 when the denominator is 0.
double f1(const ConfusionCounts& c);

// tp / (tp + alpha*fn + beta*fp); 0 when the denominator is 0.
// Reduces to Dice/F1 at alpha = beta = 0.5.
double tversky(const ConfusionCounts& c, double alpha, double beta);

// Symmetric Hausdorff distance between two nonempty point sets under
// Euclidean distance on the integer pixel grid. Exact: distances are
// compared as squared integers, with a single square root at the end.
double hausdorff(const PointSet& p, const PointSet& g);

// Coordinates of cells above 0.5 in a rank-2 mask, row-major order.
PointSet mask_to_pointset(const Tensor& mask);

// Per-pixel confusion after thresholding both masks at the given value.
ConfusionCounts confusion(const Tensor& pred_mask, const Tensor& true_mask, double threshold);

}  // namespace gradlab
