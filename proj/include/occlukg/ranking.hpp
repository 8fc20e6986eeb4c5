#pragma once

// Filtered link-prediction ranking.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "occlukg/complex_model.hpp"
#include "occlukg/error.hpp"
#include "occlukg/knowledge_graph.hpp"

namespace occlukg {

struct RankingReport {
    double mrr = 0.0;
    double hits_at_1 = 0.0;
    double hits_at_3 = 0.0;
    double hits_at_10 = 0.0;
    double mean_rank = 0.0;
    // Two entries per test triple: object-side rank, then subject-side rank.
    std::vector<std::size_t> ranks;
    bool filtered = true;
};

inline RankingReport summarize_ranks(std::vector<std::size_t> ranks) {
    RankingReport r;
    r.ranks = std::move(ranks);
    if (r.ranks.empty()) return r;
    double rr = 0.0, sum = 0.0;
    std::size_t h1 = 0, h3 = 0, h10 = 0;
    for (auto rank : r.ranks) {
        rr += 1.0 / static_cast<double>(rank);
        sum += static_cast<double>(rank);
        h1 += rank <= 1;
        h3 += rank <= 3;
        h10 += rank <= 10;
    }
    const double n = static_cast<double>(r.ranks.size());
    r.mrr = rr / n;
    r.mean_rank = sum / n;
    r.hits_at_1 = static_cast<double>(h1) / n;
    r.hits_at_3 = static_cast<double>(h3) / n;
    r.hits_at_10 = static_cast<double>(h10) / n;
    return r;
}

namespace detail {

// For a fixed (s, r) the object score is linear in e_o: sum_j q_re o_re + q_im o_im
// with q = e_s * w_r. For a fixed (r, o) the subject score is linear in e_s with
// q = w_r * conj(e_o), taking Re(q * e_s).
inline void object_query(const ComplexModel& m, std::uint32_t s, std::uint32_t r, std::vector<double>& q) {
    const std::size_t k = m.dim();
    auto es = m.entity(s);
    auto wr = m.relation(r);
    q.resize(2 * k);
    for (std::size_t j = 0; j < k; ++j) {
        q[j] = es[j] * wr[j] - es[k + j] * wr[k + j];
        q[k + j] = es[j] * wr[k + j] + es[k + j] * wr[j];
    }
}

inline void subject_query(const ComplexModel& m, std::uint32_t r, std::uint32_t o, std::vector<double>& q) {
    const std::size_t k = m.dim();
    auto wr = m.relation(r);
    auto eo = m.entity(o);
    q.resize(2 * k);
    // Re((c+di)(e-fi)(a+bi)) = a(ce+df) + b(cf-de)
    for (std::size_t j = 0; j < k; ++j) {
        q[j] = wr[j] * eo[j] + wr[k + j] * eo[k + j];
        q[k + j] = wr[j] * eo[k + j] - wr[k + j] * eo[j];
    }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

}  // namespace detail

// Pessimistic filtered ranks: a candidate counts against the true triple when
// it is not in `filter` and scores at least as high.
inline RankingReport evaluate_ranking(const ComplexModel& model, std::span<const IndexedTriple> test,
                                      const TripleSet& filter) {
    std::vector<std::size_t> ranks;
    ranks.reserve(2 * test.size());
    std::vector<double> q;
    const auto n = static_cast<std::uint32_t>(model.num_entities());
    for (const auto& t : test) {
        model.check(t);
        if (!filter.contains(t)) {
            throw Error("evaluate_ranking: test triple (" + std::to_string(t.subject) + ", " +
                        std::to_string(t.relation) + ", " + std::to_string(t.object) + ") is not in the filter");
        }
        detail::object_query(model, t.subject, t.relation, q);
        double truth = detail::dot(q, model.entity(t.object));
        std::size_t rank = 1;
        for (std::uint32_t e = 0; e < n; ++e) {
            if (e == t.object) continue;
            if (detail::dot(q, model.entity(e)) >= truth && !filter.contains({t.subject, t.relation, e})) ++rank;
        }
        ranks.push_back(rank);

        detail::subject_query(model, t.relation, t.object, q);
        truth = detail::dot(q, model.entity(t.subject));
        rank = 1;
        for (std::uint32_t e = 0; e < n; ++e) {
            if (e == t.subject) continue;
            if (detail::dot(q, model.entity(e)) >= truth && !filter.contains({e, t.relation, t.object})) ++rank;
        }
        ranks.push_back(rank);
    }
    return summarize_ranks(std::move(ranks));
}

}  // namespace occlukg
