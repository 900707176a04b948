#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sevlm/model.hpp"

namespace sevlm {

/// Elementwise relative error |a - b| / max(|a|, |b|, floor). The floor keeps entries whose
/// true gradient is near zero from being judged on pure rounding noise.
double relative_error(double analytic, double numeric, double floor);

inline constexpr double kGradcheckFloor = 1e-6;

struct GradcheckOptions {
    /// Reference tiny model: 2 layers, d_model 16, 2 heads, vocab 32, context 8.
    ModelConfig model{32, 16, 2, 2, 32, 8, 0};
    std::size_t trials = 1;
    std::size_t seq_len = 8;
    double tolerance = 1e-4;
    double step = 1e-5;
    double floor = kGradcheckFloor;
    /// Std of Gaussian noise added to every parameter before checking, so the check does not
    /// only see the near-linear regime of a fresh initialization.
    double parameter_noise = 0.3;
    std::uint64_t seed = 0;
};

struct TensorCheck {
    std::string name;
    std::size_t elements = 0;
    double max_rel_error = 0.0;
    double max_abs_grad = 0.0;
};

struct GradcheckReport {
    std::vector<TensorCheck> tensors;  // worst case over all trials
    double worst = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

/// For each trial draws a model, a token sequence, a loss mask, a severity distribution and a
/// weight configuration, then compares every parameter gradient of the severity-weighted loss
/// against central finite differences.
GradcheckReport gradcheck(const GradcheckOptions& options);

std::string format_gradcheck_report(const GradcheckReport& report);

}  // namespace sevlm
