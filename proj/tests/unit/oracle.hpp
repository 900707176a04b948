#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "sevlm/autograd.hpp"
#include "sevlm/gradcheck.hpp"
#include "sevlm/rng.hpp"

namespace sevlm::testing {

using Builder = std::function<Var(Tape&, std::span<const Var>)>;

inline Tensor random_tensor(Rng& rng, Shape shape, double scale = 1.0) {
    Tensor t(std::move(shape));
    for (double& x : t.data()) {
        x = scale * rng.normal();
    }
    return t;
}

// Loss used for op checks: sum(f(inputs) * r) with a fixed random r, so every output
// element contributes a distinct upstream gradient.
inline double probe_loss(std::vector<Tensor>& inputs, const Builder& f, const Tensor& r, bool with_grad) {
    Tape tape;
    std::vector<Var> leaves;
    for (Tensor& t : inputs) {
        t.set_requires_grad(with_grad);
        leaves.push_back(tape.param(t));
    }
    Var out = f(tape, leaves);
    Var loss = ops::sum(ops::mul(out, tape.constant(r)));
    const double value = loss.value().item();
    if (with_grad) {
        tape.backward(loss);
    }
    return value;
}

// Largest relative error (floored) between tape gradients and central differences.
inline double max_grad_error(std::vector<Tensor> inputs, const Builder& f, Rng& rng, double h = 1e-5,
                             double floor = 1e-3) {
    Shape out_shape;
    {
        Tape tape;
        std::vector<Var> leaves;
        for (Tensor& t : inputs) {
            leaves.push_back(tape.constant(t));
        }
        out_shape = f(tape, leaves).shape();
    }
    const Tensor r = random_tensor(rng, out_shape);
    for (Tensor& t : inputs) {
        t.zero_grad();
    }
    probe_loss(inputs, f, r, true);
    std::vector<std::vector<double>> analytic;
    for (const Tensor& t : inputs) {
        analytic.push_back(t.grad() ? *t.grad() : std::vector<double>(t.numel(), 0.0));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (std::size_t j = 0; j < inputs[i].numel(); ++j) {
            const double saved = inputs[i][j];
            inputs[i][j] = saved + h;
            const double up = probe_loss(inputs, f, r, false);
            inputs[i][j] = saved - h;
            const double down = probe_loss(inputs, f, r, false);
            inputs[i][j] = saved;
            worst = std::max(worst, relative_error(analytic[i][j], (up - down) / (2.0 * h), floor));
        }
    }
    return worst;
}

}  // namespace sevlm::testing
