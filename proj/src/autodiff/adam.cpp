#include "dispref/autodiff/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace dispref::ad {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr,
               const AdamConfig& config) {
    if (grads.size() != params.size()) throw std::domain_error("adam_step: gradient size mismatch");
    if (state.m.empty() && state.v.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size() || state.v.size() != params.size())
        throw std::domain_error("adam_step: optimizer state does not match parameter size");

    ++state.step;
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
}

void Adam::step(ParameterSet& params, double lr) {
    if (states_.empty()) states_.resize(params.size());
    if (states_.size() != params.size()) throw std::domain_error("Adam: parameter set changed between steps");
    std::size_t k = 0;
    for (auto& p : params) {
        auto grad = p.tensor.grad_buffer();
        adam_step(p.tensor.mutable_values(), grad, states_[k++], lr, config_);
    }
}

}  // namespace dispref::ad
