#pragma once

#include <span>
#include <vector>

#include "dispref/autodiff/parameter.hpp"

namespace dispref::ad {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First and second moment estimates for one flat parameter vector.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
};

/// One bias-corrected Adam update of `params` in place:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2,
///   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps).
/// State vectors are sized on first use; later size mismatches throw.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr,
               const AdamConfig& config = {});

/// Adam over a whole ParameterSet, one state per parameter.
class Adam {
public:
    explicit Adam(AdamConfig config = {}) : config_(config) {}

    /// Applies the update using each parameter's current gradient; parameters
    /// without a gradient buffer are treated as having zero gradient.
    void step(ParameterSet& params, double lr);

    const std::vector<AdamState>& states() const { return states_; }

private:
    AdamConfig config_;
    std::vector<AdamState> states_;
};

}  // namespace dispref::ad
