#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "occlukg/error.hpp"

namespace occlukg {

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

    std::size_t size() const { return m.size(); }
};

// One bias-corrected Adam update of `params` in place.
inline void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size() || state.v.size() != state.m.size()) {
        throw Error("adam_step: shape mismatch (params " + std::to_string(params.size()) + ", grads " +
                    std::to_string(grads.size()) + ", state " + std::to_string(state.m.size()) + ")");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    const double b1 = state.beta1, b2 = state.beta2, eps = state.epsilon;
    double* m = state.m.data();
    double* v = state.v.data();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

}  // namespace occlukg
