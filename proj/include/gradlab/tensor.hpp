#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gradlab {

// Thrown when an operation receives tensors of incompatible shapes.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an operation receives an otherwise invalid value (empty
// tensor, bad extent list, out-of-range argument).
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);

// Dense row-major array of doubles, rank 0 (scalar) through 4.
// The flat data length always equals the product of the extents.
class Tensor {
public:
    Tensor() : data_(1, 0.0) {}  // rank-0 scalar, value 0

    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double value);
    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
    static Tensor full(Shape shape, double value);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t numel() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& vec() { return data_; }
    const std::vector<double>& vec() const { return data_; }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    // Multi-index access, row-major. Index count must equal the rank.
    double& at(std::initializer_list<std::size_t> idx) { return data_[offset(idx)]; }
    double at(std::initializer_list<std::size_t> idx) const { return data_[offset(idx)]; }

    std::size_t extent(std::size_t dim) const { return shape_[dim]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

private:
    std::size_t offset(std::initializer_list<std::size_t> idx) const;

    Shape shape_;               // empty for rank-0 scalars
    std::vector<double> data_;  // length = product of extents
};

// Population statistics (divisor n) over the flattened tensor.
struct TensorStats {
    double mean = 0.0;
    double variance = 0.0;  // population, divisor n
    double std = 0.0;       // sqrt(variance)
    std::size_t count = 0;
};

// Two-pass mean/variance over the flattened data, fixed summation order.
TensorStats stats(const Tensor& t);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& t, double factor);

// 2-D x 2-D matrix product.
Tensor matmul(const Tensor& a, const Tensor& b);

// Same data, new shape; element count must be preserved.
Tensor reshape(const Tensor& t, Shape new_shape);

// 2-D transpose.
Tensor transpose(const Tensor& t);

double l2_norm(const Tensor& t);

}  // namespace gradlab
