#include "sevlm/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sevlm {

Tape& Var::tape() const {
    if (tape_ == nullptr) {
        throw TensorError("use of an unbound Var");
    }
    return *tape_;
}

const Tensor& Var::value() const { return tape().value(id_); }

void Tape::ensure_alive() const {
    if (!alive_) {
        throw TensorError("tape is dead: backward has already run on it");
    }
}

Var Tape::constant(Tensor value) {
    ensure_alive();
    Node node;
    node.value = std::move(value);
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::param(Tensor& param) {
    ensure_alive();
    if (auto it = param_nodes_.find(&param); it != param_nodes_.end()) {
        return Var(this, it->second);
    }
    Node node;
    node.value = param;
    node.param = &param;
    node.requires_grad = param.requires_grad();
    nodes_.push_back(std::move(node));
    param_nodes_.emplace(&param, nodes_.size() - 1);
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward) {
    ensure_alive();
    Node node;
    node.value = std::move(value);
    for (std::size_t in : inputs) {
        if (in >= nodes_.size()) {
            throw TensorError("operation input is not on this tape");
        }
        node.requires_grad = node.requires_grad || nodes_[in].requires_grad;
    }
    node.inputs = std::move(inputs);
    if (node.requires_grad) {
        node.backward = std::move(backward);
    }
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

std::span<double> Tape::grad_buffer(std::size_t node) {
    Node& n = nodes_[node];
    if (n.grad.empty()) {
        n.grad.assign(n.value.numel(), 0.0);
    }
    return n.grad;
}

void Tape::backward(Var loss) {
    ensure_alive();
    if (&loss.tape() != this) {
        throw TensorError("backward called with a Var from another tape");
    }
    const Tensor& root = nodes_[loss.id()].value;
    if (root.numel() != 1 || root.rank() > 1) {
        throw TensorError("backward requires a scalar loss, got shape " + shape_to_string(root.shape()));
    }
    alive_ = false;
    grad_buffer(loss.id())[0] = 1.0;
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
        Node& node = nodes_[i];
        if (!node.requires_grad || node.grad.empty()) {
            continue;
        }
        if (node.param != nullptr) {
            node.param->accumulate_grad(node.grad);
        } else if (node.backward) {
            node.backward(*this, i);
        }
    }
}

namespace kernels {

void matmul_accumulate(std::span<const double> a, std::span<const double> b, std::span<double> c, std::size_t m,
                       std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        double* crow = c.data() + i * n;
        const double* arow = a.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b.data() + p * n;
            for (std::size_t j = 0; j < n; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

void log_softmax_row(std::span<const double> x, std::span<double> out) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw TensorError("log_softmax received a non-finite input");
        }
        mx = std::max(mx, v);
    }
    double total = 0.0;
    for (double v : x) {
        total += std::exp(v - mx);
    }
    const double log_z = mx + std::log(total);
    for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] = x[j] - log_z;
    }
}

}  // namespace kernels

namespace ops {
namespace {

Tape& same_tape(Var a, Var b) {
    Tape& t = a.tape();
    if (&b.tape() != &t) {
        throw TensorError("operands belong to different tapes");
    }
    return t;
}

void require_matrix(const Tensor& t, const char* op) {
    if (t.rank() != 2) {
        throw TensorError(std::string(op) + " expects a matrix, got shape " + shape_to_string(t.shape()));
    }
}

// Right operand repeats over the left one: same shape, scalar, or trailing-dimension match.
void check_broadcast(const Shape& left, const Shape& right, const char* op) {
    bool ok = right.size() <= left.size();
    if (ok && shape_numel(right) != 1) {
        ok = std::equal(right.begin(), right.end(), left.end() - static_cast<std::ptrdiff_t>(right.size()));
    }
    if (!ok) {
        throw TensorError(std::string(op) + ": cannot broadcast " + shape_to_string(right) + " onto " +
                          shape_to_string(left));
    }
}

template <typename Forward, typename Backward>
Var binary_elementwise(Var a, Var b, const char* name, Forward fwd, Backward bwd) {
    Tape& tape = same_tape(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    check_broadcast(av.shape(), bv.shape(), name);
    const std::size_t nb = bv.numel();
    Tensor out(av.shape());
    for (std::size_t i = 0; i < av.numel(); ++i) {
        out[i] = fwd(av[i], bv[i % nb]);
    }
    const std::size_t ia = a.id();
    const std::size_t ib = b.id();
    return tape.record(std::move(out), {ia, ib}, [ia, ib, nb, bwd](Tape& t, std::size_t node) {
        const auto g = t.grad(node);
        const Tensor& x = t.value(ia);
        const Tensor& y = t.value(ib);
        std::span<double> ga = t.requires_grad(ia) ? t.grad_buffer(ia) : std::span<double>{};
        std::span<double> gb = t.requires_grad(ib) ? t.grad_buffer(ib) : std::span<double>{};
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto [da, db] = bwd(x[i], y[i % nb]);
            if (!ga.empty()) {
                ga[i] += g[i] * da;
            }
            if (!gb.empty()) {
                gb[i % nb] += g[i] * db;
            }
        }
    });
}

struct Pair {
    double first;
    double second;
};

}  // namespace

Var matmul(Var a, Var b) {
    Tape& tape = same_tape(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(0)) {
        throw TensorError("matmul shape mismatch: " + shape_to_string(av.shape()) + " x " +
                          shape_to_string(bv.shape()));
    }
    const std::size_t m = av.dim(0);
    const std::size_t k = av.dim(1);
    const std::size_t n = bv.dim(1);
    Tensor out(Shape{m, n});
    kernels::matmul_accumulate(av.data(), bv.data(), out.data(), m, k, n);
    const std::size_t ia = a.id();
    const std::size_t ib = b.id();
    return tape.record(std::move(out), {ia, ib}, [ia, ib, m, k, n](Tape& t, std::size_t node) {
        const auto g = t.grad(node);
        const auto A = t.value(ia).data();
        const auto B = t.value(ib).data();
        if (t.requires_grad(ia)) {
            // dA = dC * B^T
            auto ga = t.grad_buffer(ia);
            for (std::size_t i = 0; i < m; ++i) {
                const double* grow = g.data() + i * n;
                for (std::size_t p = 0; p < k; ++p) {
                    const double* brow = B.data() + p * n;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                        acc += grow[j] * brow[j];
                    }
                    ga[i * k + p] += acc;
                }
            }
        }
        if (t.requires_grad(ib)) {
            // dB = A^T * dC
            auto gb = t.grad_buffer(ib);
            for (std::size_t i = 0; i < m; ++i) {
                const double* grow = g.data() + i * n;
                for (std::size_t p = 0; p < k; ++p) {
                    const double av = A[i * k + p];
                    double* gbrow = gb.data() + p * n;
                    for (std::size_t j = 0; j < n; ++j) {
                        gbrow[j] += av * grow[j];
                    }
                }
            }
        }
    });
}

Var transpose(Var a) {
    const Tensor& av = a.value();
    require_matrix(av, "transpose");
    const std::size_t r = av.dim(0);
    const std::size_t c = av.dim(1);
    Tensor out(Shape{c, r});
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            out[j * r + i] = av[i * c + j];
        }
    }
    const std::size_t ia = a.id();
    return a.tape().record(std::move(out), {ia}, [ia, r, c](Tape& t, std::size_t node) {
        const auto g = t.grad(node);
        auto ga = t.grad_buffer(ia);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
                ga[i * c + j] += g[j * r + i];
            }
        }
    });
}

Var add(Var a, Var b) {
    return binary_elementwise(
        a, b, "add", [](double x, double y) { return x + y; }, [](double, double) { return Pair{1.0, 1.0}; });
}

Var sub(Var a, Var b) {
    return binary_elementwise(
        a, b, "sub", [](double x, double y) { return x - y; }, [](double, double) { return Pair{1.0, -1.0}; });
}

Var mul(Var a, Var b) {
    return binary_elementwise(
        a, b, "mul", [](double x, double y) { return x * y; }, [](double x, double y) { return Pair{y, x}; });
}

Var scale(Var a, double factor) {
    const Tensor& av = a.value();
    Tensor out(av.shape());
    for (std::size_t i = 0; i < av.numel(); ++i) {
        out[i] = av[i] * factor;
    }
    const std::size_t ia = a.id();
    return a.tape().record(std::move(out), {ia}, [ia, factor](Tape& t, std::size_t node) {
        const auto g = t.grad(node);
        auto ga = t.grad_buffer(ia);
        for (std::size_t i = 0; i < g.size(); ++i) {
            ga[i] += g[i] * factor;
        }
    });
}

Var relu(Var a) {
    const Tensor& av = a.value();
    Tensor out(av.shape());
    for (std::size_t i = 0; i < av.numel(); ++i) {
        out[i] = av[i] > 0.0 ? av[i] : 0.0;
    }
    const std::size_t ia = a.id();
    return a.tape().record(std::move(out), {ia}, [ia](Tape& t, std::size_t node) {
        const auto g = t.grad(node);
        const Tensor& x = t.value(ia);
        auto ga = t.grad_buffer(ia);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (x[i] > 0.0) {
                ga[i] += g[i];
            }
        }
    });
}

Var sum(Var a) {
    const Tensor& av = a.value();
    double total = 0.0;
    for (double v : av.data()) {
        total += v;
    }
    const std::size_t ia = a.id();
    return a.tape().record(Tensor::scalar(total), {ia}, [ia](Tape& t, std::size_t node) {
        const double g = t.grad(node)[0];
        for (double& v : t.grad_buffer(ia)) {
            v += g;
        }
    });
}

Var mean(Var a) {
    const double n = static_cast<double>(a.value().numel());
    const Tensor& av = a.value();
    double total = 0.0;
    for (double v : av.data()) {
        total += v;
    }
    const std::size_t ia = a.id();
    return a.tape().record(Tensor::scalar(total / n), {ia}, [ia, n](Tape& t, std::size_t node) {
        const double g = t.grad(node)[0] / n;
        for (double& v : t.grad_buffer(ia)) {
            v += g;
        }
    });
}

Var gather_rows(Var table, std::span<const std::int32_t> ids) {
    const Tensor& tv = table.value();
    require_matrix(tv, "gather_rows");
    if (ids.empty()) {
        throw TensorError("gather_rows needs at least one id");
    }
    const std::size_t rows = tv.dim(0);
    const std::size_t d = tv.dim(1);
    std::vector<std::size_t> index(ids.size());
    Tensor out(Shape{ids.size(), d});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= rows) {
            throw TensorError("gather_rows: id " + std::to_string(ids[i]) + " outside table of " +
                              std::to_string(rows) + " rows");
        }
        index[i] = static_cast<std::size_t>(ids[i]);
        std::copy_n(tv.data().begin() + static_cast<std::ptrdiff_t>(index[i] * d), d,
                    out.data().begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    const std::size_t it = table.id();
    return table.tape().record(std::move(out), {it}, [it, d, index = std::move(index)](Tape& t, std::size_t node) {
        const auto g = t.grad(node);
        auto gt = t.grad_buffer(it);
        for (std::size_t i = 0; i < index.size(); ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                gt[index[i] * d + j] += g[i * d + j];
            }
        }
    });
}

Var gather_entries(Var x, std::span<const std::size_t> rows, std::span<const std::size_t> cols) {
    const Tensor& xv = x.value();
    require_matrix(xv, "gather_entries");
    if (rows.size() != cols.size() || rows.empty()) {
        throw TensorError("gather_entries needs equal, non-empty row and column lists");
    }
    const std::size_t n = xv.dim(1);
    std::vector<std::size_t> flat(rows.size());
    Tensor out(Shape{rows.size()});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= xv.dim(0) || cols[i] >= n) {
            throw TensorError("gather_entries: (" + std::to_string(rows[i]) + ", " + std::to_string(cols[i]) +
                              ") outside " + shape_to_string(xv.shape()));
        }
        flat[i] = rows[i] * n + cols[i];
        out[i] = xv[flat[i]];
    }
    const std::size_t ix = x.id();
    return x.tape().record(std::move(out), {ix}, [ix, flat = std::move(flat)](Tape& t, std::size_t node) {
        const auto g = t.grad(node);
        auto gx = t.grad_buffer(ix);
        for (std::size_t i = 0; i < flat.size(); ++i) {
            gx[flat[i]] += g[i];
        }
    });
}

Var slice_cols(Var x, std::size_t start, std::size_t count) {
    const Tensor& xv = x.value();
    require_matrix(xv, "slice_cols");
    const std::size_t m = xv.dim(0);
    const std::size_t n = xv.dim(1);
    if (count == 0 || start + count > n) {
        throw TensorError("slice_cols [" + std::to_string(start) + ", " + std::to_string(start + count) +
                          ") outside " + shape_to_string(xv.shape()));
    }
    Tensor out(Shape{m, count});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < count; ++j) {
            out[i * count + j] = xv[i * n + start + j];
        }
    }
    const std::size_t ix = x.id();
    return x.tape().record(std::move(out), {ix}, [ix, m, n, start, count](Tape& t, std::size_t node) {
        const auto g = t.grad(node);
        auto gx = t.grad_buffer(ix);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < count; ++j) {
                gx[i * n + start + j] += g[i * count + j];
            }
        }
    });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) {
        throw TensorError("concat_cols needs at least one part");
    }
    Tape& tape = parts.front().tape();
    const std::size_t m = parts.front().value().dim(0);
    std::vector<std::size_t> ids;
    std::vector<std::size_t> widths;
    std::size_t total = 0;
    for (const Var& p : parts) {
        if (&p.tape() != &tape) {
            throw TensorError("concat_cols operands belong to different tapes");
        }
        const Tensor& pv = p.value();
        require_matrix(pv, "concat_cols");
        if (pv.dim(0) != m) {
            throw TensorError("concat_cols row mismatch: " + shape_to_string(pv.shape()) + " vs " +
                              std::to_string(m) + " rows");
        }
        ids.push_back(p.id());
        widths.push_back(pv.dim(1));
        total += pv.dim(1);
    }
    Tensor out(Shape{m, total});
    std::size_t offset = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        const Tensor& pv = parts[p].value();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < widths[p]; ++j) {
                out[i * total + offset + j] = pv[i * widths[p] + j];
            }
        }
        offset += widths[p];
    }
    std::vector<std::size_t> inputs = ids;
    return tape.record(std::move(out), std::move(inputs),
                       [ids = std::move(ids), widths = std::move(widths), m, total](Tape& t, std::size_t node) {
                           const auto g = t.grad(node);
                           std::size_t off = 0;
                           for (std::size_t p = 0; p < ids.size(); ++p) {
                               if (t.requires_grad(ids[p])) {
                                   auto gp = t.grad_buffer(ids[p]);
                                   for (std::size_t i = 0; i < m; ++i) {
                                       for (std::size_t j = 0; j < widths[p]; ++j) {
                                           gp[i * widths[p] + j] += g[i * total + off + j];
                                       }
                                   }
                               }
                               off += widths[p];
                           }
                       });
}

Var stack(std::span<const Var> scalars) {
    if (scalars.empty()) {
        throw TensorError("stack needs at least one element");
    }
    Tape& tape = scalars.front().tape();
    std::vector<std::size_t> ids;
    Tensor out(Shape{scalars.size()});
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        if (&scalars[i].tape() != &tape) {
            throw TensorError("stack operands belong to different tapes");
        }
        out[i] = scalars[i].value().item();
        ids.push_back(scalars[i].id());
    }
    std::vector<std::size_t> inputs = ids;
    return tape.record(std::move(out), std::move(inputs), [ids = std::move(ids)](Tape& t, std::size_t node) {
        const auto g = t.grad(node);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (t.requires_grad(ids[i])) {
                t.grad_buffer(ids[i])[0] += g[i];
            }
        }
    });
}

Var layer_norm(Var x, Var gain, Var bias, double eps) {
    Tape& tape = same_tape(x, gain);
    same_tape(x, bias);
    const Tensor& xv = x.value();
    if (xv.rank() == 0) {
        throw TensorError("layer_norm needs at least one dimension");
    }
    const std::size_t d = xv.shape().back();
    if (gain.value().shape() != Shape{d} || bias.value().shape() != Shape{d}) {
        throw TensorError("layer_norm gain/bias must have shape [" + std::to_string(d) + "], got " +
                          shape_to_string(gain.value().shape()) + " and " + shape_to_string(bias.value().shape()));
    }
    const std::size_t rows = xv.numel() / d;
    const Tensor& gv = gain.value();
    const Tensor& bv = bias.value();
    std::vector<double> xhat(xv.numel());
    std::vector<double> rstd(rows);
    Tensor out(xv.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = xv.data().data() + r * d;
        double mu = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            mu += row[j];
        }
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            var += (row[j] - mu) * (row[j] - mu);
        }
        var /= static_cast<double>(d);
        rstd[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < d; ++j) {
            const double h = (row[j] - mu) * rstd[r];
            xhat[r * d + j] = h;
            out[r * d + j] = h * gv[j] + bv[j];
        }
    }
    const std::size_t ix = x.id();
    const std::size_t ig = gain.id();
    const std::size_t ib = bias.id();
    return tape.record(std::move(out), {ix, ig, ib},
                       [ix, ig, ib, d, rows, xhat = std::move(xhat), rstd = std::move(rstd)](Tape& t,
                                                                                            std::size_t node) {
                           const auto g = t.grad(node);
                           const Tensor& gv = t.value(ig);
                           if (t.requires_grad(ig)) {
                               auto gg = t.grad_buffer(ig);
                               for (std::size_t i = 0; i < g.size(); ++i) {
                                   gg[i % d] += g[i] * xhat[i];
                               }
                           }
                           if (t.requires_grad(ib)) {
                               auto gb = t.grad_buffer(ib);
                               for (std::size_t i = 0; i < g.size(); ++i) {
                                   gb[i % d] += g[i];
                               }
                           }
                           if (!t.requires_grad(ix)) {
                               return;
                           }
                           auto gx = t.grad_buffer(ix);
                           const double inv_d = 1.0 / static_cast<double>(d);
                           for (std::size_t r = 0; r < rows; ++r) {
                               double mean_dh = 0.0;
                               double mean_dh_h = 0.0;
                               for (std::size_t j = 0; j < d; ++j) {
                                   const double dh = g[r * d + j] * gv[j];
                                   mean_dh += dh;
                                   mean_dh_h += dh * xhat[r * d + j];
                               }
                               mean_dh *= inv_d;
                               mean_dh_h *= inv_d;
                               for (std::size_t j = 0; j < d; ++j) {
                                   const double dh = g[r * d + j] * gv[j];
                                   gx[r * d + j] += rstd[r] * (dh - mean_dh - xhat[r * d + j] * mean_dh_h);
                               }
                           }
                       });
}

Var log_softmax(Var x) {
    const Tensor& xv = x.value();
    if (xv.rank() == 0) {
        throw TensorError("log_softmax needs at least one dimension");
    }
    const std::size_t v = xv.shape().back();
    const std::size_t rows = xv.numel() / v;
    Tensor out(xv.shape());
    for (std::size_t r = 0; r < rows; ++r) {
        kernels::log_softmax_row(xv.data().subspan(r * v, v), out.data().subspan(r * v, v));
    }
    const std::size_t ix = x.id();
    return x.tape().record(std::move(out), {ix}, [ix, v, rows](Tape& t, std::size_t node) {
        const auto g = t.grad(node);
        const Tensor& y = t.value(node);
        auto gx = t.grad_buffer(ix);
        for (std::size_t r = 0; r < rows; ++r) {
            double gsum = 0.0;
            for (std::size_t j = 0; j < v; ++j) {
                gsum += g[r * v + j];
            }
            for (std::size_t j = 0; j < v; ++j) {
                gx[r * v + j] += g[r * v + j] - std::exp(y[r * v + j]) * gsum;
            }
        }
    });
}

namespace {

// Softmax over the first `width(r)` entries of each row; the rest are zero.
template <typename Width>
Var masked_softmax(Var x, std::size_t rows, std::size_t v, Width width) {
    const Tensor& xv = x.value();
    Tensor out(xv.shape(), 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t w = width(r);
        const double* row = xv.data().data() + r * v;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < w; ++j) {
            if (!std::isfinite(row[j])) {
                throw TensorError("softmax received a non-finite input");
            }
            mx = std::max(mx, row[j]);
        }
        double total = 0.0;
        for (std::size_t j = 0; j < w; ++j) {
            const double e = std::exp(row[j] - mx);
            out[r * v + j] = e;
            total += e;
        }
        for (std::size_t j = 0; j < w; ++j) {
            out[r * v + j] /= total;
        }
    }
    const std::size_t ix = x.id();
    return x.tape().record(std::move(out), {ix}, [ix, rows, v, width](Tape& t, std::size_t node) {
        const auto g = t.grad(node);
        const Tensor& y = t.value(node);
        auto gx = t.grad_buffer(ix);
        for (std::size_t r = 0; r < rows; ++r) {
            const std::size_t w = width(r);
            double dot = 0.0;
            for (std::size_t j = 0; j < w; ++j) {
                dot += g[r * v + j] * y[r * v + j];
            }
            for (std::size_t j = 0; j < w; ++j) {
                gx[r * v + j] += y[r * v + j] * (g[r * v + j] - dot);
            }
        }
    });
}

}  // namespace

Var softmax(Var x) {
    const Tensor& xv = x.value();
    if (xv.rank() == 0) {
        throw TensorError("softmax needs at least one dimension");
    }
    const std::size_t v = xv.shape().back();
    return masked_softmax(x, xv.numel() / v, v, [v](std::size_t) { return v; });
}

Var causal_softmax(Var scores) {
    const Tensor& sv = scores.value();
    if (sv.rank() != 2 || sv.dim(0) != sv.dim(1)) {
        throw TensorError("causal_softmax expects a square matrix, got " + shape_to_string(sv.shape()));
    }
    const std::size_t n = sv.dim(0);
    return masked_softmax(scores, n, n, [](std::size_t r) { return r + 1; });
}

}  // namespace ops
}  // namespace sevlm
