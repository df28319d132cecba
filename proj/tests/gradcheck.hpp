// Central finite-difference gradient checks for the autodiff engine.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "dispref/autodiff/ops.hpp"
#include "dispref/autodiff/tensor.hpp"

namespace gradcheck {

using dispref::ad::Tensor;

/// Random fixed weights turn any output into a scalar with a generic upstream gradient.
inline Tensor project(const Tensor& out, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> w(out.numel());
    for (double& v : w) v = u(rng);
    return dispref::ad::sum(dispref::ad::mul(out, Tensor::constant(out.shape(), std::move(w))));
}

struct Result {
    double max_relative = 0.0;  // worst tensor-wise ||analytic - numeric|| / max(||analytic||, ||numeric||)
    std::size_t checked = 0;
};

/// Compares backward() against central differences for the listed leaves.
/// `indices`, when non-empty, restricts each leaf to a subset of entries
/// (per leaf, same order as `leaves`).
inline Result check(const std::function<Tensor()>& f, std::vector<Tensor> leaves, double h = 1e-6,
                    const std::vector<std::vector<std::size_t>>& indices = {}) {
    for (Tensor& t : leaves) t.zero_grad();
    const Tensor loss = f();
    dispref::ad::backward(loss);
    Result r;
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        Tensor& t = leaves[k];
        const std::vector<double> analytic(t.grad().begin(), t.grad().end());
        std::vector<std::size_t> idx;
        if (indices.empty() || indices[k].empty()) {
            for (std::size_t i = 0; i < t.numel(); ++i) idx.push_back(i);
        } else {
            idx = indices[k];
        }
        double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
        for (std::size_t i : idx) {
            auto v = t.mutable_values();
            const double orig = v[i];
            v[i] = orig + h;
            const double up = f().item();
            v[i] = orig - h;
            const double down = f().item();
            v[i] = orig;
            const double numeric = (up - down) / (2.0 * h);
            const double a = analytic.empty() ? 0.0 : analytic[i];
            diff2 += (a - numeric) * (a - numeric);
            a2 += a * a;
            n2 += numeric * numeric;
            ++r.checked;
        }
        const double scale = std::max(std::sqrt(a2), std::sqrt(n2));
        const double rel = scale > 0.0 ? std::sqrt(diff2) / scale : 0.0;
        r.max_relative = std::max(r.max_relative, rel);
    }
    return r;
}

inline Tensor random_leaf(dispref::ad::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(dispref::ad::shape_numel(shape));
    for (double& x : v) x = u(rng);
    return Tensor::parameter(std::move(shape), std::move(v));
}

/// Values bounded away from zero (for kinks at the origin).
inline Tensor away_from_zero(dispref::ad::Shape shape, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.1, 1.0);
    std::bernoulli_distribution sign(0.5);
    std::vector<double> v(dispref::ad::shape_numel(shape));
    for (double& x : v) x = sign(rng) ? u(rng) : -u(rng);
    return Tensor::parameter(std::move(shape), std::move(v));
}

}  // namespace gradcheck
