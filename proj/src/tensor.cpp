#include "sevlm/tensor.hpp"

#include <cmath>
#include <sstream>

namespace sevlm {

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i != 0) {
            os << ", ";
        }
        os << shape[i];
    }
    os << ']';
    return os.str();
}

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) {
        n *= d;
    }
    return n;
}

namespace {

void check_dims(const Shape& shape) {
    for (std::size_t d : shape) {
        if (d == 0) {
            throw TensorError("tensor dimensions must be positive, got " + shape_to_string(shape));
        }
    }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_dims(shape_);
    data_.assign(shape_numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_dims(shape_);
    if (shape_numel(shape_) != data_.size()) {
        throw TensorError("shape " + shape_to_string(shape_) + " needs " + std::to_string(shape_numel(shape_)) +
                          " values, got " + std::to_string(data_.size()));
    }
}

Tensor Tensor::scalar(double value) { return Tensor(Shape{}, std::vector<double>{value}); }

Tensor Tensor::vector(std::vector<double> values) {
    const std::size_t n = values.size();
    return Tensor(Shape{n}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
    if (rows.size() == 0 || rows.begin()->size() == 0) {
        throw TensorError("matrix literal must be non-empty");
    }
    const std::size_t cols = rows.begin()->size();
    std::vector<double> data;
    data.reserve(rows.size() * cols);
    for (const auto& row : rows) {
        if (row.size() != cols) {
            throw TensorError("ragged matrix literal");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor(Shape{rows.size(), cols}, std::move(data));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw TensorError("axis " + std::to_string(axis) + " out of range for shape " + shape_to_string(shape_));
    }
    return shape_[axis];
}

double Tensor::at(std::size_t row, std::size_t col) const {
    if (rank() != 2 || row >= shape_[0] || col >= shape_[1]) {
        throw TensorError("at(" + std::to_string(row) + ", " + std::to_string(col) + ") invalid for shape " +
                          shape_to_string(shape_));
    }
    return data_[row * shape_[1] + col];
}

double Tensor::item() const {
    if (data_.size() != 1) {
        throw TensorError("item() requires a single-element tensor, got shape " + shape_to_string(shape_));
    }
    return data_[0];
}

void Tensor::accumulate_grad(std::span<const double> g) {
    if (g.size() != data_.size()) {
        throw TensorError("gradient size " + std::to_string(g.size()) + " does not match shape " +
                          shape_to_string(shape_));
    }
    if (!grad_) {
        grad_.emplace(g.begin(), g.end());
        return;
    }
    auto& acc = *grad_;
    for (std::size_t i = 0; i < g.size(); ++i) {
        acc[i] += g[i];
    }
}

bool Tensor::all_finite() const noexcept {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

}  // namespace sevlm
