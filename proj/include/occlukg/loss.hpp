#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "occlukg/error.hpp"

namespace occlukg {

// log(sigmoid(x)) without overflow.
inline double log_sigmoid(double x) {
    return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

struct LossResult {
    double loss = 0.0;
    double d_positive = 0.0;
    std::vector<double> d_negatives;
    std::vector<double> weights;  // softmax(temperature * f_neg)
};

// loss = -log sigmoid(f_pos) - sum_i w_i log sigmoid(-f_neg_i), with the
// weights w held constant when differentiating.
inline LossResult self_adversarial_loss(double positive_score, std::span<const double> negative_scores,
                                        double temperature = 1.0) {
    if (negative_scores.empty()) throw Error("self_adversarial_loss: no negatives");
    if (!(temperature > 0.0)) throw Error("self_adversarial_loss: temperature must be > 0");

    LossResult r;
    const std::size_t n = negative_scores.size();
    r.weights.resize(n);
    r.d_negatives.resize(n);

    double top = temperature * negative_scores[0];
    for (double f : negative_scores) top = std::max(top, temperature * f);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r.weights[i] = std::exp(temperature * negative_scores[i] - top);
        z += r.weights[i];
    }
    for (auto& w : r.weights) w /= z;

    r.loss = -log_sigmoid(positive_score);
    r.d_positive = sigmoid(positive_score) - 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        r.loss -= r.weights[i] * log_sigmoid(-negative_scores[i]);
        r.d_negatives[i] = r.weights[i] * sigmoid(negative_scores[i]);
    }
    return r;
}

}  // namespace occlukg
