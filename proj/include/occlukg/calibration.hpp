#pragma once

// Platt scaling of ComplEx scores.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "occlukg/complex_model.hpp"
#include "occlukg/error.hpp"
#include "occlukg/loss.hpp"
#include "occlukg/sampling.hpp"

namespace occlukg {

inline constexpr double kProbabilityFloor = 1e-6;
inline constexpr double kMinPlattSlope = 1e-6;

struct PlattOptions {
    int max_iterations = 200;
    double tolerance = 1e-8;
};

namespace detail {

// Mean binary cross-entropy of sigmoid(a*s + b) against hard 0/1 targets.
inline double platt_objective(std::span<const double> pos, std::span<const double> neg, double a, double b) {
    double acc = 0.0;
    for (double s : pos) acc -= log_sigmoid(a * s + b);
    for (double s : neg) acc -= log_sigmoid(-(a * s + b));
    return acc / static_cast<double>(pos.size() + neg.size());
}

}  // namespace detail

// Projected Newton iterations with backtracking; the slope stays >= 1e-6.
inline Calibration fit_platt(std::span<const double> positive_scores, std::span<const double> negative_scores,
                             const PlattOptions& options = {}) {
    if (positive_scores.empty() || negative_scores.empty()) {
        throw Error("calibrate: positive and negative score sets must be non-empty");
    }
    double lo = positive_scores[0], hi = positive_scores[0];
    for (auto set : {positive_scores, negative_scores})
        for (double s : set) {
            if (!std::isfinite(s)) throw Error("calibrate: non-finite score");
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
    Calibration c;
    if (hi == lo) {
        c.degenerate = true;
        return c;
    }

    const double n = static_cast<double>(positive_scores.size() + negative_scores.size());
    double a = 1.0, b = 0.0;
    double f = detail::platt_objective(positive_scores, negative_scores, a, b);
    for (int it = 0; it < options.max_iterations; ++it) {
        double ga = 0.0, gb = 0.0, haa = 0.0, hab = 0.0, hbb = 0.0;
        auto accumulate = [&](std::span<const double> scores, double y) {
            for (double s : scores) {
                const double p = sigmoid(a * s + b);
                const double d = p - y;
                const double w = p * (1.0 - p);
                ga += d * s;
                gb += d;
                haa += w * s * s;
                hab += w * s;
                hbb += w;
            }
        };
        accumulate(positive_scores, 1.0);
        accumulate(negative_scores, 0.0);
        ga /= n, gb /= n, haa /= n, hab /= n, hbb /= n;
        haa += 1e-12, hbb += 1e-12;
        const double det = haa * hbb - hab * hab;
        double da, db;
        if (det > 1e-300) {
            da = -(hbb * ga - hab * gb) / det;
            db = -(haa * gb - hab * ga) / det;
        } else {
            da = -ga;
            db = -gb;
        }

        double step = 1.0;
        double next_a = a, next_b = b, next_f = f;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
            next_a = std::max(kMinPlattSlope, a + step * da);
            next_b = b + step * db;
            next_f = detail::platt_objective(positive_scores, negative_scores, next_a, next_b);
            if (next_f <= f) {
                moved = true;
                break;
            }
        }
        if (!moved) break;
        const double improvement = f - next_f;
        a = next_a;
        b = next_b;
        f = next_f;
        if (improvement < options.tolerance) break;
    }
    c.a = a;
    c.b = b;
    c.fitted = true;
    return c;
}

// Clamped to [1e-6, 1 - 1e-6].
inline double calibrated_probability(const Calibration& c, double score) {
    return std::clamp(sigmoid(c.a * score + c.b), kProbabilityFloor, 1.0 - kProbabilityFloor);
}

inline double triple_probability(const ComplexModel& model, const IndexedTriple& t) {
    return calibrated_probability(model.calibration, score_triple(model, t));
}

inline double triple_probability(const ComplexModel& model, std::string_view subject, std::string_view relation,
                                 std::string_view object) {
    auto t = model.vocabulary.index(subject, relation, object);
    if (!t) {
        throw Error("triple <" + std::string(subject) + ", " + std::string(relation) + ", " + std::string(object) +
                    "> mentions an entity or relation unknown to the model");
    }
    return triple_probability(model, *t);
}

// Fits the model's calibration on the given triple sets.
inline Calibration calibrate(ComplexModel& model, std::span<const IndexedTriple> positives,
                             std::span<const IndexedTriple> negatives, const PlattOptions& options = {}) {
    if (positives.empty() || negatives.empty()) throw Error("calibrate: positive and negative sets must be non-empty");
    std::vector<double> pos, neg;
    pos.reserve(positives.size());
    neg.reserve(negatives.size());
    for (const auto& t : positives) pos.push_back(score_triple(model, t));
    for (const auto& t : negatives) neg.push_back(score_triple(model, t));
    model.calibration = fit_platt(pos, neg, options);
    return model.calibration;
}

// One corruption per positive, never a known triple (when avoidable).
inline std::vector<IndexedTriple> calibration_negatives(std::span<const IndexedTriple> positives,
                                                        std::size_t num_entities, const TripleSet& known,
                                                        std::uint64_t seed, std::size_t per_positive = 1) {
    std::mt19937_64 rng(seed);
    std::vector<IndexedTriple> out;
    for (const auto& t : positives) {
        auto negs = sample_corruptions(t, num_entities, known, per_positive, rng);
        out.insert(out.end(), negs.begin(), negs.end());
    }
    return out;
}

}  // namespace occlukg
