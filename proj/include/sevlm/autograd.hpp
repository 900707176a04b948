#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sevlm/tensor.hpp"

namespace sevlm {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; only valid while its tape lives.
class Var {
public:
    Var() = default;

    Tape& tape() const;
    std::size_t id() const noexcept { return id_; }
    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

/// Records operations in execution order and replays their backward rules in reverse.
///
/// A tape is single-use: after `backward` it is dead and rejects both new operations and a
/// second backward pass. Parameters are registered once per tape (`param`), so every use of a
/// parameter within one forward pass shares a single leaf and gradients add up on it.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t node)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Leaf that never receives a gradient.
    Var constant(Tensor value);
    /// Leaf bound to a parameter; `backward` accumulates into `param.grad()` when the
    /// parameter has requires_grad set.
    Var param(Tensor& param);

    /// Appends the result of an operation. `inputs` must already be on this tape.
    Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

    void backward(Var loss);

    bool alive() const noexcept { return alive_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    const Tensor& value(std::size_t node) const { return nodes_[node].value; }
    const std::vector<std::size_t>& inputs(std::size_t node) const { return nodes_[node].inputs; }
    std::span<const double> grad(std::size_t node) const { return nodes_[node].grad; }
    bool requires_grad(std::size_t node) const { return nodes_[node].requires_grad; }

    /// Gradient buffer for an input during backward, allocated zeroed on first touch.
    std::span<double> grad_buffer(std::size_t node);

private:
    struct Node {
        Tensor value;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        std::vector<double> grad;
        Tensor* param = nullptr;
        bool requires_grad = false;
    };

    void ensure_alive() const;

    std::vector<Node> nodes_;
    std::unordered_map<const Tensor*, std::size_t> param_nodes_;
    bool alive_ = true;
};

/// Differentiable operations. Broadcasting in add/mul is limited to a scalar right operand or
/// a right operand whose shape equals the trailing dimensions of the left one.
namespace ops {

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var relu(Var a);
Var sum(Var a);
Var mean(Var a);

/// Rows of `table` ([V, d]) selected by `ids`; result is [ids.size(), d].
Var gather_rows(Var table, std::span<const std::int32_t> ids);
/// Entries x[rows[i], cols[i]] of a matrix as a vector.
Var gather_entries(Var x, std::span<const std::size_t> rows, std::span<const std::size_t> cols);

/// Columns [start, start + count) of a matrix.
Var slice_cols(Var x, std::size_t start, std::size_t count);
Var concat_cols(std::span<const Var> parts);
/// Single-element tensors collected into a vector.
Var stack(std::span<const Var> scalars);

inline constexpr double kLayerNormEps = 1e-5;

/// Normalizes the last dimension to zero mean and unit variance, then applies gain and bias.
Var layer_norm(Var x, Var gain, Var bias, double eps = kLayerNormEps);

Var log_softmax(Var x);
Var softmax(Var x);
/// Row-wise softmax of a square score matrix where row i only sees columns 0..i.
/// Entries above the diagonal are exactly zero.
Var causal_softmax(Var scores);

}  // namespace ops

namespace kernels {

/// c[m,n] (+)= a[m,k] * b[k,n], all row-major.
void matmul_accumulate(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                       std::size_t k, std::size_t n);

/// Max-shifted log-softmax of one row.
void log_softmax_row(std::span<const double> x, std::span<double> out);

}  // namespace kernels

}  // namespace sevlm
