#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "occlukg/error.hpp"
#include "occlukg/knowledge_graph.hpp"

namespace occlukg {

inline constexpr int kCorruptionRetries = 32;

// Draws `eta` corruptions of `positive`: a fair coin picks the slot, the
// replacement is uniform over the other entities. Corruptions that are known
// true are redrawn; after kCorruptionRetries failures the previous accepted
// negative is repeated (or the last draw is kept if there is none yet).
template <typename Rng>
std::vector<IndexedTriple> sample_corruptions(const IndexedTriple& positive, std::size_t num_entities,
                                              const TripleSet& known, std::size_t eta, Rng& rng) {
    if (num_entities < 2) throw Error("sample_corruptions: need at least 2 entities");
    std::vector<IndexedTriple> out;
    out.reserve(eta);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(num_entities - 2));
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < eta; ++i) {
        IndexedTriple neg = positive;
        bool accepted = false;
        for (int attempt = 0; attempt < kCorruptionRetries; ++attempt) {
            neg = positive;
            const bool subject = coin(rng);
            std::uint32_t& slot = subject ? neg.subject : neg.object;
            std::uint32_t e = pick(rng);
            if (e >= slot) ++e;  // skip the original entity
            slot = e;
            if (!known.contains(neg)) {
                accepted = true;
                break;
            }
        }
        if (!accepted && !out.empty()) neg = out.back();
        out.push_back(neg);
    }
    return out;
}

template <typename Rng>
std::vector<IndexedTriple> sample_corruptions(const IndexedTriple& positive, const KnowledgeGraph& kg, std::size_t eta,
                                              Rng& rng) {
    return sample_corruptions(positive, kg.num_entities(), kg.known(), eta, rng);
}

}  // namespace occlukg
