#pragma once

// Scene-level train/validation/test folds and the triple sets derived from them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "occlukg/error.hpp"
#include "occlukg/knowledge_graph.hpp"
#include "occlukg/scene.hpp"

namespace occlukg {

struct SplitCounts {
    std::size_t train = 0;  // includes the validation scenes carved from it
    std::size_t test = 0;
};

struct SceneFolds {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
};

struct TripleSplit {
    KnowledgeGraph train;                  // graph of the train scenes, with prototypes
    std::vector<IndexedTriple> validation; // class-level triples, indexed in `train`
    std::vector<IndexedTriple> test;
    SceneFolds scenes;
};

struct SplitOptions {
    double validation_ratio = 0.1;
    BuildOptions build;
};

// Most frequent frame label; ties resolved in enum order.
inline PedestriansScene dominant_label(const RoadSceneDocument& doc) {
    std::array<std::size_t, enum_count<PedestriansScene>()> counts{};
    for (const auto& f : doc.frames) ++counts[static_cast<std::size_t>(f.pedestrians_scene)];
    return static_cast<PedestriansScene>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

namespace detail {

// Draws `n` items from label strata, allocating proportionally with largest
// remainders so every fold mirrors the label mix. Drawn items are removed.
inline std::vector<std::string> draw_stratified(std::vector<std::vector<std::string>>& strata, std::size_t n) {
    std::size_t available = 0;
    for (const auto& s : strata) available += s.size();
    std::vector<std::string> out;
    if (n == 0 || available == 0) return out;

    std::vector<std::size_t> take(strata.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < strata.size(); ++i) {
        const double exact = static_cast<double>(n) * static_cast<double>(strata[i].size()) / static_cast<double>(available);
        take[i] = std::min(strata[i].size(), static_cast<std::size_t>(std::floor(exact)));
        assigned += take[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t pass = 0; assigned < n && pass < 2; ++pass) {
        for (const auto& [rem, i] : remainders) {
            if (assigned == n) break;
            if (take[i] < strata[i].size()) {
                ++take[i];
                ++assigned;
            }
        }
    }
    for (std::size_t i = 0; i < strata.size(); ++i) {
        out.insert(out.end(), strata[i].end() - static_cast<std::ptrdiff_t>(take[i]), strata[i].end());
        strata[i].resize(strata[i].size() - take[i]);
    }
    return out;
}

}  // namespace detail

// Scene-level folds per environment; deterministic under `seed`. Folds are
// stratified by each scene's dominant label.
inline SceneFolds assign_folds(const std::vector<RoadSceneDocument>& corpus,
                               const std::map<Environment, SplitCounts>& counts, std::uint64_t seed,
                               double validation_ratio = 0.1) {
    if (!(validation_ratio >= 0.0 && validation_ratio < 1.0)) throw SplitError("validation ratio must be in [0,1)");
    SceneFolds folds;
    for (const auto& [env, want] : counts) {
        constexpr std::size_t kLabels = enum_count<PedestriansScene>();
        std::vector<std::vector<std::string>> strata(kLabels);
        std::size_t available = 0;
        std::vector<const RoadSceneDocument*> docs;
        for (const auto& doc : corpus)
            if (doc.context.environment == env) docs.push_back(&doc);
        std::sort(docs.begin(), docs.end(),
                  [](auto* a, auto* b) { return a->context.scene_id < b->context.scene_id; });
        for (auto* doc : docs) {
            strata[static_cast<std::size_t>(dominant_label(*doc))].push_back(doc->context.scene_id);
            ++available;
        }
        if (want.train + want.test > available) {
            throw SplitError(std::string(to_string(env)) + ": requested " + std::to_string(want.train) + " train + " +
                             std::to_string(want.test) + " test scenes but only " + std::to_string(available) +
                             " available");
        }
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(env), 0x5eedu};
        std::mt19937_64 rng(seq);
        for (auto& s : strata) std::shuffle(s.begin(), s.end(), rng);

        auto test = detail::draw_stratified(strata, want.test);
        auto train = detail::draw_stratified(strata, want.train);
        std::vector<std::vector<std::string>> train_strata(kLabels);
        for (const auto& id : train) {
            auto it = std::find_if(docs.begin(), docs.end(), [&](auto* d) { return d->context.scene_id == id; });
            train_strata[static_cast<std::size_t>(dominant_label(**it))].push_back(id);
        }
        for (auto& s : train_strata) std::shuffle(s.begin(), s.end(), rng);
        const auto n_val = static_cast<std::size_t>(std::llround(validation_ratio * static_cast<double>(train.size())));
        auto validation = detail::draw_stratified(train_strata, std::min(n_val, train.size() > 0 ? train.size() - 1 : 0));
        for (auto& s : train_strata) folds.train.insert(folds.train.end(), s.begin(), s.end());
        folds.validation.insert(folds.validation.end(), validation.begin(), validation.end());
        folds.test.insert(folds.test.end(), test.begin(), test.end());
    }
    std::sort(folds.train.begin(), folds.train.end());
    std::sort(folds.validation.begin(), folds.validation.end());
    std::sort(folds.test.begin(), folds.test.end());
    return folds;
}

inline std::vector<RoadSceneDocument> select_scenes(const std::vector<RoadSceneDocument>& corpus,
                                                    const std::vector<std::string>& ids) {
    const std::set<std::string> wanted(ids.begin(), ids.end());
    std::vector<RoadSceneDocument> out;
    for (const auto& doc : corpus)
        if (wanted.count(doc.context.scene_id)) out.push_back(doc);
    return out;
}

// Class-level triples (subject is a class prototype or RoadScene) of the
// graph built from `docs`, re-indexed into `reference`. Triples that mention
// entities unknown to the reference graph are dropped.
inline std::vector<IndexedTriple> class_level_triples(const std::vector<RoadSceneDocument>& docs,
                                                      const KnowledgeGraph& reference, const BuildOptions& options) {
    std::vector<IndexedTriple> out;
    if (docs.empty()) return out;
    BuildOptions linked = options;
    linked.link_prototypes = true;
    const auto kg = build_kg(docs, linked);
    for (const auto& t : kg.triples()) {
        const auto k = kg.kind(t.subject);
        if (k != EntityKind::ClassPrototype && k != EntityKind::GenericScene) continue;
        if (auto idx = reference.index(t)) out.push_back(*idx);
    }
    return out;
}

inline TripleSplit make_triple_split(const std::vector<RoadSceneDocument>& corpus, const SceneFolds& folds,
                                     const BuildOptions& options = {}) {
    TripleSplit split;
    split.scenes = folds;
    BuildOptions linked = options;
    linked.link_prototypes = true;
    split.train = build_kg(select_scenes(corpus, folds.train), linked);
    split.validation = class_level_triples(select_scenes(corpus, folds.validation), split.train, options);
    split.test = class_level_triples(select_scenes(corpus, folds.test), split.train, options);
    return split;
}

inline TripleSplit split_corpus(const std::vector<RoadSceneDocument>& corpus,
                                const std::map<Environment, SplitCounts>& counts, std::uint64_t seed,
                                const SplitOptions& options = {}) {
    return make_triple_split(corpus, assign_folds(corpus, counts, seed, options.validation_ratio), options.build);
}

}  // namespace occlukg
