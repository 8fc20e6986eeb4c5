#pragma once

// Mini-batch ComplEx training with self-adversarial negatives, Adam and
// MRR-based early stopping.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "occlukg/adam.hpp"
#include "occlukg/calibration.hpp"
#include "occlukg/complex_model.hpp"
#include "occlukg/error.hpp"
#include "occlukg/knowledge_graph.hpp"
#include "occlukg/loss.hpp"
#include "occlukg/ranking.hpp"
#include "occlukg/sampling.hpp"
#include "occlukg/split.hpp"

namespace occlukg {

struct TrainingConfig {
    std::size_t k = 150;
    std::size_t eta = 15;
    double learning_rate = 0.0005;
    std::size_t batch_size = 8000;
    double adversarial_temperature = 1.0;
    std::size_t max_epochs = 500;
    std::size_t patience = 5;
    std::size_t check_interval = 10;
    double l2 = 0.0;
    std::uint64_t seed = 0;

    // learning_rate == 0 is accepted so a frozen run can be expressed.
    void validate() const {
        if (k < 1) throw ConfigError("k must be >= 1");
        if (eta < 1) throw ConfigError("eta must be >= 1");
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be >= 0");
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (!(adversarial_temperature > 0.0)) throw ConfigError("adversarial_temperature must be > 0");
        if (patience < 1) throw ConfigError("patience must be >= 1");
        if (check_interval < 1) throw ConfigError("check_interval must be >= 1");
        if (!(l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
    }

    friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double loss = 0.0;
};

struct CheckRecord {
    std::size_t epoch = 0;
    double mrr = 0.0;
};

struct TrainingHistory {
    std::vector<EpochRecord> epochs;
    std::vector<CheckRecord> checks;
    std::size_t best_epoch = 0;
    double best_mrr = 0.0;
    bool stopped_early = false;
};

// "epoch<TAB>loss" and "check<TAB>epoch<TAB>mrr" lines in chronological order.
inline std::string format_history(const TrainingHistory& h) {
    std::ostringstream out;
    out.precision(17);
    std::size_t c = 0;
    auto flush_checks = [&](std::size_t upto) {
        while (c < h.checks.size() && h.checks[c].epoch <= upto) {
            out << "check\t" << h.checks[c].epoch << '\t' << h.checks[c].mrr << '\n';
            ++c;
        }
    };
    flush_checks(0);
    for (const auto& e : h.epochs) {
        out << "epoch\t" << e.epoch << '\t' << e.loss << '\n';
        flush_checks(e.epoch);
    }
    flush_checks(static_cast<std::size_t>(-1));
    return out.str();
}

struct TrainingResult {
    ComplexModel model;
    TrainingHistory history;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

namespace detail {

inline void add_l2(ComplexModel& model, double l2, std::vector<double>& ge, std::vector<double>& gr, double& loss) {
    if (l2 <= 0.0) return;
    const auto& e = model.entity_table();
    const auto& r = model.relation_table();
    for (std::size_t i = 0; i < e.size(); ++i) {
        loss += l2 * e[i] * e[i];
        ge[i] += 2.0 * l2 * e[i];
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        loss += l2 * r[i] * r[i];
        gr[i] += 2.0 * l2 * r[i];
    }
}

}  // namespace detail

// Trains on `triples` over dense entity/relation tables. Validation MRR
// (filtered by `filter`) drives early stopping; the returned model is the
// best checked snapshot.
inline TrainingResult train(std::size_t num_entities, std::size_t num_relations,
                            const std::vector<IndexedTriple>& triples, const std::vector<IndexedTriple>& validation,
                            const TripleSet& filter, const TrainingConfig& config,
                            const EpochCallback& on_epoch = {}) {
    config.validate();
    if (triples.empty()) throw TrainingError("training graph has no triples");
    if (validation.empty()) throw TrainingError("validation set is empty");

    TrainingResult result;
    ComplexModel model = init_embeddings(num_entities, num_relations, config.k, config.seed);
    const std::size_t k = config.k;
    const std::size_t row = 2 * k;
    const std::size_t n_ent = num_entities;
    const TripleSet known(triples);
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    AdamState adam_e(model.entity_table().size());
    AdamState adam_r(model.relation_table().size());
    std::vector<double> ge(model.entity_table().size());
    std::vector<double> gr(model.relation_table().size());

    std::vector<IndexedTriple> order = triples;
    std::vector<double> neg_scores(config.eta);

    auto& history = result.history;
    ComplexModel best = model;
    history.best_mrr = evaluate_ranking(model, validation, filter).mrr;
    history.best_epoch = 0;
    history.checks.push_back({0, history.best_mrr});
    std::size_t stale = 0;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            const double inv = 1.0 / static_cast<double>(end - start);
            std::fill(ge.begin(), ge.end(), 0.0);
            std::fill(gr.begin(), gr.end(), 0.0);
            double batch_loss = 0.0;

            for (std::size_t i = start; i < end; ++i) {
                const auto& pos = order[i];
                const auto negs = sample_corruptions(pos, n_ent, known, config.eta, rng);
                const double pos_score = score_triple(model, pos);
                for (std::size_t j = 0; j < negs.size(); ++j) neg_scores[j] = score_triple(model, negs[j]);
                const auto loss = self_adversarial_loss(pos_score, neg_scores, config.adversarial_temperature);
                batch_loss += loss.loss;

                auto push = [&](const IndexedTriple& t, double scale) {
                    if (scale == 0.0) return;
                    std::span<double> gs(ge.data() + t.subject * row, row);
                    std::span<double> go(ge.data() + t.object * row, row);
                    std::span<double> g_r(gr.data() + t.relation * row, row);
                    accumulate_score_gradient(model.entity(t.subject), model.relation(t.relation),
                                              model.entity(t.object), scale, gs, g_r, go);
                };
                push(pos, loss.d_positive * inv);
                for (std::size_t j = 0; j < negs.size(); ++j) push(negs[j], loss.d_negatives[j] * inv);
            }

            double mean_loss = batch_loss * inv;
            detail::add_l2(model, config.l2, ge, gr, mean_loss);
            if (!std::isfinite(mean_loss)) {
                throw TrainingError("non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(batch_index));
            }
            adam_step(adam_e, model.entity_table(), ge, config.learning_rate);
            adam_step(adam_r, model.relation_table(), gr, config.learning_rate);
            epoch_loss += batch_loss;
        }
        const EpochRecord rec{epoch, epoch_loss / static_cast<double>(order.size())};
        history.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);

        if (epoch % config.check_interval == 0) {
            if (!model.all_finite()) {
                throw TrainingError("non-finite parameters after epoch " + std::to_string(epoch));
            }
            const double mrr = evaluate_ranking(model, validation, filter).mrr;
            history.checks.push_back({epoch, mrr});
            if (mrr > history.best_mrr) {
                history.best_mrr = mrr;
                history.best_epoch = epoch;
                best = model;
                stale = 0;
            } else if (++stale >= config.patience) {
                history.stopped_early = true;
                break;
            }
        }
    }
    result.model = std::move(best);
    return result;
}

inline TrainingResult train(const KnowledgeGraph& kg, const std::vector<IndexedTriple>& validation,
                            const TripleSet& filter, const TrainingConfig& config,
                            const EpochCallback& on_epoch = {}) {
    auto result = train(kg.num_entities(), kg.num_relations(), kg.indexed_triples(), validation, filter, config,
                        on_epoch);
    result.model.vocabulary = Vocabulary::from_graph(kg);
    return result;
}

// Class-level triples of the training graph, used when a split carries no
// validation scenes.
inline std::vector<IndexedTriple> class_level_subset(const KnowledgeGraph& kg) {
    std::vector<IndexedTriple> out;
    for (const auto& t : kg.indexed_triples()) {
        const auto kind = kg.kind(t.subject);
        if (kind == EntityKind::ClassPrototype || kind == EntityKind::GenericScene) out.push_back(t);
    }
    return out;
}

// Validation triples, else the class-level training triples, else every
// training triple.
inline std::vector<IndexedTriple> monitored_triples(const TripleSplit& split) {
    if (!split.validation.empty()) return split.validation;
    auto out = class_level_subset(split.train);
    if (out.empty()) out = split.train.indexed_triples();
    return out;
}

inline TripleSet split_filter(const TripleSplit& split) {
    TripleSet filter = split.train.known();
    filter.insert(split.validation);
    filter.insert(split.test);
    return filter;
}

inline TrainingResult train(const TripleSplit& split, const TrainingConfig& config, const EpochCallback& on_epoch = {}) {
    return train(split.train, monitored_triples(split), split_filter(split), config, on_epoch);
}

// Where Platt positives come from: the validation triples, or the class-level
// triples of the training graph.
enum class CalibrationSource : std::uint8_t { Train, Validation };

inline std::string_view to_string(CalibrationSource s) { return s == CalibrationSource::Train ? "train" : "validation"; }
inline std::optional<CalibrationSource> calibration_source_from_string(std::string_view s) {
    if (s == "train") return CalibrationSource::Train;
    if (s == "validation") return CalibrationSource::Validation;
    return std::nullopt;
}

// Platt-fits `model` against one sampled corruption per positive.
inline Calibration calibrate_on(ComplexModel& model, const TripleSplit& split, std::uint64_t seed,
                                CalibrationSource source = CalibrationSource::Train) {
    auto positives = source == CalibrationSource::Train ? class_level_subset(split.train) : split.validation;
    if (positives.empty()) positives = monitored_triples(split);
    const auto filter = split_filter(split);
    const auto negatives = calibration_negatives(positives, model.num_entities(), filter, seed);
    return calibrate(model, positives, negatives);
}

}  // namespace occlukg
