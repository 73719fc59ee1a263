#include "gradlab/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

namespace gradlab {

std::string shape_to_string(const Shape& shape) {
    std::ostringstream out;
    out << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out << " x ";
        out << shape[i];
    }
    out << "]";
    return out.str();
}

namespace {

std::size_t checked_numel(const Shape& shape) {
    if (shape.size() > 4) {
        throw InvalidInput("tensor rank " + std::to_string(shape.size()) +
                           " exceeds the supported maximum of 4");
    }
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

}  // namespace

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
    data_.assign(checked_numel(shape_), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_numel(shape_) != data_.size()) {
        throw ShapeError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_to_string(shape_));
    }
}

Tensor Tensor::scalar(double value) {
    Tensor t;
    t.data_[0] = value;
    return t;
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t(std::move(shape));
    t.data_.assign(t.data_.size(), value);
    return t;
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> idx) const {
    if (idx.size() != shape_.size()) {
        throw InvalidInput("index rank " + std::to_string(idx.size()) +
                           " does not match tensor rank " + std::to_string(shape_.size()));
    }
    std::size_t off = 0;
    std::size_t dim = 0;
    for (std::size_t i : idx) {
        off = off * shape_[dim] + i;
        ++dim;
    }
    return off;
}

TensorStats stats(const Tensor& t) {
    const std::size_t n = t.numel();
    if (n == 0) {
        throw InvalidInput("stats: tensor has no elements");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += t[i];
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = t[i] - mean;
        sq += d * d;
    }
    TensorStats s;
    s.mean = mean;
    s.variance = sq / static_cast<double>(n);
    s.std = std::sqrt(s.variance);
    s.count = n;
    return s;
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                         " vs " + shape_to_string(b.shape()));
    }
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] + b[i];
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] - b[i];
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * b[i];
    return out;
}

Tensor scale(const Tensor& t, double factor) {
    Tensor out(t.shape());
    for (std::size_t i = 0; i < t.numel(); ++i) out[i] = t[i] * factor;
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) {
        throw ShapeError("matmul: expected two rank-2 tensors, got " +
                         shape_to_string(a.shape()) + " and " + shape_to_string(b.shape()));
    }
    if (a.extent(1) != b.extent(0)) {
        throw ShapeError("matmul: inner extents differ, " + shape_to_string(a.shape()) +
                         " vs " + shape_to_string(b.shape()));
    }
    const std::size_t m = a.extent(0), k = a.extent(1), n = b.extent(1);
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                acc += a[i * k + p] * b[p * n + j];
            }
            out[i * n + j] = acc;
        }
    }
    return out;
}

Tensor reshape(const Tensor& t, Shape new_shape) {
    const std::size_t n = checked_numel(new_shape);
    if (n != t.numel()) {
        throw ShapeError("reshape: cannot view " + shape_to_string(t.shape()) + " as " +
                         shape_to_string(new_shape));
    }
    return Tensor(std::move(new_shape), t.vec());
}

Tensor transpose(const Tensor& t) {
    if (t.rank() != 2) {
        throw ShapeError("transpose: expected a rank-2 tensor, got " +
                         shape_to_string(t.shape()));
    }
    const std::size_t r = t.extent(0), c = t.extent(1);
    Tensor out({c, r});
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            out[j * r + i] = t[i * c + j];
        }
    }
    return out;
}

double l2_norm(const Tensor& t) {
    double sq = 0.0;
    for (std::size_t i = 0; i < t.numel(); ++i) sq += t[i] * t[i];
    return std::sqrt(sq);
}

}  // namespace gradlab
