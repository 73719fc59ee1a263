#include "gradlab/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace gradlab {

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size()) {
        throw InvalidInput("accuracy: " + std::to_string(predictions.size()) +
                           " predictions vs " + std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) {
        throw InvalidInput("accuracy: no samples");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double f1(const ConfusionCounts& c) {
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    if (denom == 0.0) return 0.0;
    return static_cast<double>(2 * c.tp) / denom;
}

double tversky(const ConfusionCounts& c, double alpha, double beta) {
    if (alpha < 0.0 || beta < 0.0) {
        throw InvalidInput("tversky: alpha and beta must be non-negative");
    }
    const double denom = static_cast<double>(c.tp) + alpha * static_cast<double>(c.fn) +
                         beta * static_cast<double>(c.fp);
    if (denom == 0.0) return 0.0;
    return static_cast<double>(c.tp) / denom;
}

namespace {

std::int64_t sq_dist(const std::pair<int, int>& a, const std::pair<int, int>& b) {
    const std::int64_t dr = a.first - b.first;
    const std::int64_t dc = a.second - b.second;
    return dr * dr + dc * dc;
}

// Directed max-min squared distance with the standard early break: a point
// whose running minimum falls at or below the current answer cannot raise
// the maximum, so the inner scan stops there.
std::int64_t directed_sq(const PointSet& from, const PointSet& to, std::int64_t best) {
    for (const auto& p : from.points) {
        std::int64_t nearest = sq_dist(p, to.points[0]);
        for (std::size_t i = 1; i < to.points.size() && nearest > best; ++i) {
            nearest = std::min(nearest, sq_dist(p, to.points[i]));
        }
        best = std::max(best, nearest);
    }
    return best;
}

}  // namespace

double hausdorff(const PointSet& p, const PointSet& g) {
    if (p.empty() || g.empty()) {
        throw InvalidInput("hausdorff: point sets must be nonempty");
    }
    std::int64_t best = directed_sq(p, g, 0);
    best = directed_sq(g, p, best);
    return std::sqrt(static_cast<double>(best));
}

PointSet mask_to_pointset(const Tensor& mask) {
    if (mask.rank() != 2) {
        throw ShapeError("mask_to_pointset: expected a rank-2 mask, got " +
                         shape_to_string(mask.shape()));
    }
    PointSet out;
    const std::size_t rows = mask.extent(0), cols = mask.extent(1);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (mask[r * cols + c] > 0.5) {
                out.points.emplace_back(static_cast<int>(r), static_cast<int>(c));
            }
        }
    }
    return out;
}

ConfusionCounts confusion(const Tensor& pred_mask, const Tensor& true_mask, double threshold) {
    if (!pred_mask.same_shape(true_mask)) {
        throw ShapeError("confusion: mask shapes differ, " + shape_to_string(pred_mask.shape()) +
                         " vs " + shape_to_string(true_mask.shape()));
    }
    if (threshold <= 0.0 || threshold >= 1.0) {
        throw InvalidInput("confusion: threshold must lie in (0, 1)");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred_mask.numel(); ++i) {
        const bool p = pred_mask[i] > threshold;
        const bool t = true_mask[i] > threshold;
        if (p && t) ++c.tp;
        else if (p && !t) ++c.fp;
        else if (!p && t) ++c.fn;
        else ++c.tn;
    }
    return c;
}

}  // namespace gradlab
