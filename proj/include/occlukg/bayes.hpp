#pragma once

// Naive-Bayes scene prediction from calibrated triple probabilities:
// P(h|e) = P(h) * prod P(e_i|h) / prod P(e_i).

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "occlukg/calibration.hpp"
#include "occlukg/complex_model.hpp"
#include "occlukg/error.hpp"
#include "occlukg/ontology.hpp"
#include "occlukg/scene.hpp"

namespace occlukg {

struct Hypothesis {
    PedestriansScene label = PedestriansScene::PedestrianOccluded;
    std::string prototype;

    static Hypothesis of(PedestriansScene label) { return {label, std::string(prototype_entity(label))}; }
};

// Tie order for the decision rule.
inline constexpr std::array<PedestriansScene, 3> kHypothesisOrder{
    PedestriansScene::PedestrianOccluded, PedestriansScene::PedestrianNotOccluded, PedestriansScene::NonePedestrian};

enum class EvidenceSource : std::uint8_t { Context, Vehicle };

struct EvidenceItem {
    Relation relation = Relation::HasSurroundings;
    std::string object;
    EvidenceSource source = EvidenceSource::Context;

    friend bool operator==(const EvidenceItem& a, const EvidenceItem& b) {
        return a.relation == b.relation && a.object == b.object;
    }
};

enum class Denominator : std::uint8_t { Marginal, Mixture };

inline std::string_view to_string(Denominator d) { return d == Denominator::Marginal ? "marginal" : "mixture"; }
inline std::optional<Denominator> denominator_from_string(std::string_view s) {
    if (s == "marginal") return Denominator::Marginal;
    if (s == "mixture") return Denominator::Mixture;
    return std::nullopt;
}

struct EvidenceFactor {
    EvidenceItem item;
    double marginal = 0.0;     // P(e_i)
    double conditional = 0.0;  // P(e_i|h)
    double ratio = 0.0;        // conditional / marginal
};

struct PosteriorReport {
    Hypothesis hypothesis;
    double prior = 0.0;
    std::vector<EvidenceFactor> factors;
    double raw = 0.0;
    double posterior = 0.0;  // raw clamped to [0,1]
    bool clamped = false;
};

// Context items first (zebra crossing, surroundings, lanes), then per vehicle
// in id order: state, braking lights, distance, position. Duplicates dropped.
inline std::vector<EvidenceItem> extract_evidence(const RoadSceneDocument& doc, std::size_t frame_index) {
    if (frame_index >= doc.frames.size()) {
        throw Error("frame index " + std::to_string(frame_index) + " out of range for scene '" +
                    doc.context.scene_id + "' with " + std::to_string(doc.frames.size()) + " frames");
    }
    std::vector<EvidenceItem> out;
    auto add = [&](Relation r, std::string object, EvidenceSource src) {
        EvidenceItem item{r, std::move(object), src};
        if (std::find(out.begin(), out.end(), item) == out.end()) out.push_back(std::move(item));
    };
    const auto& ctx = doc.context;
    if (ctx.zebra_crossing) add(Relation::ThereIs, std::string(kZebraCrossing), EvidenceSource::Context);
    add(Relation::HasSurroundings, std::string(surroundings_entity(ctx.surroundings)), EvidenceSource::Context);
    add(Relation::HasLanes, lane_entity(ctx.lanes), EvidenceSource::Context);

    auto vehicles = doc.frames[frame_index].vehicles;
    std::stable_sort(vehicles.begin(), vehicles.end(),
                     [](const VehicleRecord& a, const VehicleRecord& b) { return a.vehicle_id < b.vehicle_id; });
    for (const auto& v : vehicles) {
        add(Relation::Includes, std::string(vehicle_state_entity(v.state)), EvidenceSource::Vehicle);
        add(Relation::HasBrakingLights, std::string(braking_lights_entity(v.braking_lights)), EvidenceSource::Vehicle);
        add(Relation::HasDistance, std::string(distance_entity(v.distance)), EvidenceSource::Vehicle);
        add(Relation::HasPosition, std::string(position_entity(v.position)), EvidenceSource::Vehicle);
    }
    return out;
}

inline double prior(const ComplexModel& model, const Hypothesis& h) {
    return triple_probability(model, kRoadScene, relation_name(Relation::Contains), label_entity(h.label));
}

inline double evidence_marginal(const ComplexModel& model, const EvidenceItem& e) {
    return triple_probability(model, kRoadScene, relation_name(e.relation), e.object);
}

inline double evidence_conditional(const ComplexModel& model, const EvidenceItem& e, const Hypothesis& h) {
    return triple_probability(model, h.prototype, relation_name(e.relation), e.object);
}

// Mixture denominator: sum over all hypotheses of P(e|h') P(h').
inline double evidence_mixture(const ComplexModel& model, const EvidenceItem& e) {
    double acc = 0.0;
    for (auto label : kHypothesisOrder) {
        const auto h = Hypothesis::of(label);
        acc += evidence_conditional(model, e, h) * prior(model, h);
    }
    return acc;
}

// raw = prior * prod(conditional) / prod(marginal), both products taken left
// to right over `factors`.
inline double combine_factors(double prior_value, const std::vector<EvidenceFactor>& factors) {
    double num = prior_value;
    double den = 1.0;
    for (const auto& f : factors) {
        num *= f.conditional;
        den *= f.marginal;
    }
    return num / den;
}

inline PosteriorReport posterior_from_factors(Hypothesis h, double prior_value, std::vector<EvidenceFactor> factors) {
    PosteriorReport r;
    r.hypothesis = std::move(h);
    r.prior = prior_value;
    r.factors = std::move(factors);
    r.raw = combine_factors(r.prior, r.factors);
    r.posterior = std::clamp(r.raw, 0.0, 1.0);
    r.clamped = r.posterior != r.raw;
    return r;
}

inline PosteriorReport posterior(const ComplexModel& model, const Hypothesis& h, const std::vector<EvidenceItem>& evidence,
                                 Denominator denominator = Denominator::Marginal) {
    std::vector<EvidenceFactor> factors;
    factors.reserve(evidence.size());
    for (const auto& e : evidence) {
        EvidenceFactor f;
        f.item = e;
        f.marginal = denominator == Denominator::Marginal ? evidence_marginal(model, e) : evidence_mixture(model, e);
        f.conditional = evidence_conditional(model, e, h);
        f.ratio = f.conditional / f.marginal;
        factors.push_back(std::move(f));
    }
    return posterior_from_factors(h, prior(model, h), std::move(factors));
}

// Argmax with ties resolved in kHypothesisOrder.
inline PedestriansScene decide(const std::array<PosteriorReport, 3>& reports) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < reports.size(); ++i)
        if (reports[i].posterior > reports[best].posterior) best = i;
    return reports[best].hypothesis.label;
}

struct FramePrediction {
    std::string scene_id;
    std::size_t frame_index = 0;
    std::int64_t frame_number = 0;
    std::size_t horizon = 30;
    std::size_t target_index = 0;
    std::int64_t target_frame_number = 0;
    bool truncated = false;  // t + horizon ran past the last frame
    PedestriansScene predicted = PedestriansScene::PedestrianOccluded;
    PedestriansScene truth = PedestriansScene::NonePedestrian;
    Denominator denominator = Denominator::Marginal;
    std::array<PosteriorReport, 3> reports;  // kHypothesisOrder
    std::vector<EvidenceItem> skipped;       // evidence the model has no embedding for
};

inline bool model_knows(const ComplexModel& model, const EvidenceItem& e) {
    return model.vocabulary.relation(relation_name(e.relation)).has_value() &&
           model.vocabulary.entity(e.object).has_value();
}

// Evidence comes from frame t only; the ground truth is the label of frame
// min(t + horizon, last). Indices are positions in doc.frames.
inline FramePrediction predict_frame(const ComplexModel& model, const RoadSceneDocument& doc, std::size_t t,
                                     std::size_t horizon = 30, Denominator denominator = Denominator::Marginal) {
    if (doc.frames.empty()) throw Error("scene '" + doc.context.scene_id + "' has no frames");
    FramePrediction p;
    p.scene_id = doc.context.scene_id;
    p.frame_index = t;
    p.horizon = horizon;
    p.denominator = denominator;
    std::vector<EvidenceItem> usable;
    for (auto& e : extract_evidence(doc, t)) {
        if (model_knows(model, e)) usable.push_back(std::move(e));
        else p.skipped.push_back(std::move(e));
    }
    p.frame_number = doc.frames[t].frame_number;
    const std::size_t last = doc.frames.size() - 1;
    p.truncated = horizon > last - t;
    p.target_index = p.truncated ? last : t + horizon;
    p.target_frame_number = doc.frames[p.target_index].frame_number;
    p.truth = doc.frames[p.target_index].pedestrians_scene;
    for (std::size_t i = 0; i < kHypothesisOrder.size(); ++i)
        p.reports[i] = posterior(model, Hypothesis::of(kHypothesisOrder[i]), usable, denominator);
    p.predicted = decide(p.reports);
    return p;
}

}  // namespace occlukg
