#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "occlukg/occlukg.hpp"

namespace fixtures {

using namespace occlukg;

inline RoadSceneDocument minimal_document(std::string id = "scene_min") {
    RoadSceneDocument doc;
    doc.context.scene_id = std::move(id);
    doc.context.lanes = 2;
    doc.frames.push_back(FrameAnnotation{0, PedestriansScene::NonePedestrian, {}, {}});
    return doc;
}

// Zebra crossing, vegetation, an occluded pedestrian and a decelerating
// front-left vehicle with its braking lights on.
inline RoadSceneDocument occluded_example(std::string id = "scene_occ", std::size_t frames = 1) {
    RoadSceneDocument doc;
    doc.context = SceneContext{std::move(id), Environment::Real, true, 2, Surroundings::Vegetation};
    for (std::size_t i = 0; i < frames; ++i) {
        FrameAnnotation f;
        f.frame_number = static_cast<std::int64_t>(i);
        f.pedestrians_scene = PedestriansScene::PedestrianOccluded;
        f.pedestrians.push_back(PedestrianRecord{"p1", Occlusion::Partial, 0.4});
        f.vehicles.push_back(VehicleRecord{"v1", VehicleState::Decelerating, BrakingLights::On,
                                           Distance::NearToEgoVeh, Position::FrontLeft});
        doc.frames.push_back(std::move(f));
    }
    return doc;
}

inline RoadSceneDocument labelled_scene(std::string id, PedestriansScene label, VehicleState state, bool zebra,
                                        Surroundings sur, std::size_t frames, Environment env = Environment::Real) {
    RoadSceneDocument doc;
    doc.context = SceneContext{std::move(id), env, zebra, 2, sur};
    for (std::size_t i = 0; i < frames; ++i) {
        FrameAnnotation f;
        f.frame_number = static_cast<std::int64_t>(i);
        f.pedestrians_scene = label;
        if (label == PedestriansScene::PedestrianOccluded) f.pedestrians.push_back({"p1", Occlusion::Full, 0.1});
        if (label == PedestriansScene::PedestrianNotOccluded) f.pedestrians.push_back({"p1", Occlusion::None, 0.9});
        const auto lights = state == VehicleState::Decelerating || state == VehicleState::Stopped ? BrakingLights::On
                                                                                                  : BrakingLights::Off;
        f.vehicles.push_back(VehicleRecord{"v1", state, lights, Distance::MiddleDisToEgoVeh, Position::Front});
        doc.frames.push_back(std::move(f));
    }
    return doc;
}

// A generic random KG: `entities` named e0.., `relations` relations from the
// ontology and `triples` distinct random triples. Returns the indexed triples.
struct RandomGraph {
    std::size_t entities = 0;
    std::size_t relations = 0;
    std::vector<IndexedTriple> triples;
};

inline RandomGraph random_graph(std::size_t entities, std::size_t relations, std::size_t triples, std::uint64_t seed) {
    RandomGraph g{entities, relations, {}};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint32_t> ent(0, static_cast<std::uint32_t>(entities - 1));
    std::uniform_int_distribution<std::uint32_t> rel(0, static_cast<std::uint32_t>(relations - 1));
    TripleSet seen;
    while (g.triples.size() < triples) {
        IndexedTriple t{ent(rng), rel(rng), ent(rng)};
        if (seen.contains(t)) continue;
        seen.insert(t);
        g.triples.push_back(t);
    }
    return g;
}

inline ComplexModel random_model(std::size_t entities, std::size_t relations, std::size_t k, std::uint64_t seed,
                                 double scale = 1.0) {
    ComplexModel m(entities, relations, k);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, scale);
    for (auto& v : m.entity_table()) v = n(rng);
    for (auto& v : m.relation_table()) v = n(rng);
    return m;
}

}  // namespace fixtures
