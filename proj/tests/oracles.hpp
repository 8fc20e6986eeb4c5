#pragma once

// Independent reference implementations used to check the library.

#include <cmath>
#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "occlukg/occlukg.hpp"

namespace oracles {

using namespace occlukg;
using cplx = std::complex<double>;

inline std::vector<cplx> as_complex(std::span<const double> row) {
    const std::size_t k = row.size() / 2;
    std::vector<cplx> out(k);
    for (std::size_t j = 0; j < k; ++j) out[j] = {row[j], row[k + j]};
    return out;
}

// Re(<e_s, w_r, conj(e_o)>) with std::complex arithmetic.
inline double complex_score(const ComplexModel& m, const IndexedTriple& t) {
    const auto s = as_complex(m.entity(t.subject));
    const auto r = as_complex(m.relation(t.relation));
    const auto o = as_complex(m.entity(t.object));
    cplx acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) acc += s[j] * r[j] * std::conj(o[j]);
    return acc.real();
}

// Filtered ranks by scoring every corruption in full; ties count against the
// true triple. Object rank then subject rank per test triple.
inline std::vector<std::size_t> brute_force_ranks(const ComplexModel& m, const std::vector<IndexedTriple>& test,
                                                  const std::vector<IndexedTriple>& known) {
    auto is_known = [&](const IndexedTriple& t) {
        for (const auto& k : known)
            if (k == t) return true;
        return false;
    };
    std::vector<std::size_t> ranks;
    for (const auto& t : test) {
        const double truth = complex_score(m, t);
        std::size_t obj = 1, subj = 1;
        for (std::uint32_t e = 0; e < m.num_entities(); ++e) {
            const IndexedTriple co{t.subject, t.relation, e};
            if (e != t.object && !is_known(co) && complex_score(m, co) >= truth) ++obj;
            const IndexedTriple cs{e, t.relation, t.object};
            if (e != t.subject && !is_known(cs) && complex_score(m, cs) >= truth) ++subj;
        }
        ranks.push_back(obj);
        ranks.push_back(subj);
    }
    return ranks;
}

// ||a - b|| / max(||a||, ||b||), zero when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double scale = std::sqrt(std::max(na, nb));
    return scale == 0.0 ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

// Central differences of `f` around `x`.
template <typename F>
std::vector<double> central_difference(std::vector<double> x, F&& f, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

struct GradientCheck {
    double score_error = 0.0;  // worst over subject, relation and object blocks
    double loss_error = 0.0;   // d loss / d (f_pos, f_neg...)
};

// One random k-dimensional instance: analytic score gradients against
// finite differences of the std::complex score, and the loss derivative
// against finite differences with the adversarial weights held fixed.
inline GradientCheck check_gradients(std::size_t k, std::uint64_t seed, double h = 1e-5) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    ComplexModel m(3, 1, k);
    for (auto& v : m.entity_table()) v = n(rng);
    for (auto& v : m.relation_table()) v = n(rng);
    const IndexedTriple t{0, 0, 1};
    const auto g = score_gradient(m, t);

    GradientCheck out;
    auto block = [&](std::span<double> row, const std::vector<double>& analytic) {
        const std::vector<double> x(row.begin(), row.end());
        const auto numeric = central_difference(x, [&](const std::vector<double>& y) {
            std::copy(y.begin(), y.end(), row.begin());
            const double s = complex_score(m, t);
            std::copy(x.begin(), x.end(), row.begin());
            return s;
        }, h);
        out.score_error = std::max(out.score_error, relative_error(analytic, numeric));
    };
    block(m.entity(0), g.subject);
    block(m.relation(0), g.relation);
    block(m.entity(1), g.object);

    std::vector<double> scores(1 + 15);
    for (auto& s : scores) s = 3.0 * n(rng);
    const std::span<const double> negs(scores.data() + 1, scores.size() - 1);
    const auto loss = self_adversarial_loss(scores[0], negs, 1.0);
    std::vector<double> analytic{loss.d_positive};
    analytic.insert(analytic.end(), loss.d_negatives.begin(), loss.d_negatives.end());
    const auto w = loss.weights;
    const auto numeric = central_difference(scores, [&](const std::vector<double>& f) {
        double l = -std::log(1.0 / (1.0 + std::exp(-f[0])));
        for (std::size_t i = 1; i < f.size(); ++i) l -= w[i - 1] * std::log(1.0 / (1.0 + std::exp(f[i])));
        return l;
    }, h);
    out.loss_error = relative_error(analytic, numeric);
    return out;
}

struct ConfusionCounts {
    std::size_t tp, fp, fn, tn;
};

// An exact rational number num/den.
struct Ratio {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
};

// Precision, recall and F1 as exact fractions; 0/1 when a denominator is 0.
// F1 is the harmonic mean 2PR/(P+R) reduced by hand.
inline std::array<Ratio, 3> hand_metrics(const ConfusionCounts& c) {
    const Ratio p = c.tp + c.fp == 0 ? Ratio{} : Ratio{c.tp, c.tp + c.fp};
    const Ratio r = c.tp + c.fn == 0 ? Ratio{} : Ratio{c.tp, c.tp + c.fn};
    Ratio f;
    if (p.num != 0 && r.num != 0) {
        // 2 (p.num/p.den)(r.num/r.den) / (p.num/p.den + r.num/r.den)
        f = Ratio{2 * p.num * r.num, p.num * r.den + r.num * p.den};
    }
    return {p, r, f};
}

// True when `x` is the double nearest to q.num / q.den.
inline bool is_nearest_double(double x, const Ratio& q) {
    if (q.num == 0) return x == 0.0;
    // long double resolves the quotient far below one double ulp.
    const long double target = static_cast<long double>(q.num) / static_cast<long double>(q.den);
    const double below = std::nextafter(x, 0.0);
    const double above = std::nextafter(x, 2.0);
    const long double ex = std::fabs(static_cast<long double>(x) - target);
    return ex <= std::fabs(static_cast<long double>(below) - target) &&
           ex <= std::fabs(static_cast<long double>(above) - target);
}

}  // namespace oracles
