#pragma once

// Occluded-pedestrian ontology: relation vocabulary, entity kinds, and the
// names of the categorical value entities shared by every scene.

#include <algorithm>
#include <array>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>

#include "occlukg/scene.hpp"

namespace occlukg {

enum class Relation : std::uint8_t {
    Contains,
    ThereIs,
    Includes,
    HasSurroundings,
    HasLanes,
    NextFrame,
    PrevFrame,
    HasOcclusionLevel,
    HasState,
    HasBrakingLights,
    HasDistance,
    HasPosition,
    InstanceOfSceneClass,
};

inline constexpr std::array<std::string_view, 13> kRelationNames{
    "contains",          "thereIs",  "includes",         "hasSurroundings", "hasLanes",
    "nextFrame",         "prevFrame", "hasOcclusionLevel", "hasState",        "hasBrakingLights",
    "hasDistance",       "hasPosition", "instanceOfSceneClass",
};

inline constexpr std::string_view relation_name(Relation r) { return kRelationNames[static_cast<std::size_t>(r)]; }

inline std::optional<Relation> relation_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kRelationNames.size(); ++i) {
        if (kRelationNames[i] == name) return static_cast<Relation>(i);
    }
    return std::nullopt;
}

enum class EntityKind : std::uint8_t {
    Scene,
    Frame,
    Vehicle,
    Pedestrian,
    ClassPrototype,
    GenericScene,
    PedestrianSceneLabel,
    ZebraCrossing,
    SurroundingsValue,
    LaneCount,
    VehicleStateValue,
    BrakingLightsValue,
    DistanceValue,
    PositionValue,
    OcclusionLevel,
};

inline constexpr std::string_view kind_name(EntityKind k) {
    constexpr std::array<std::string_view, 15> names{
        "Scene",         "Frame",         "Vehicle",      "Pedestrian",        "ClassPrototype",
        "GenericScene",  "PedestrianSceneLabel", "ZebraCrossing", "Surroundings", "LaneCount",
        "VehicleState",  "BrakingLights", "Distance",     "Position",          "OcclusionLevel"};
    return names[static_cast<std::size_t>(k)];
}

// Domain and range of one relation, as bit sets over EntityKind.
struct RelationSignature {
    std::uint32_t domain = 0;
    std::uint32_t range = 0;

    bool accepts(EntityKind subject, EntityKind object) const {
        return (domain >> static_cast<unsigned>(subject) & 1u) && (range >> static_cast<unsigned>(object) & 1u);
    }
};

namespace detail {
constexpr std::uint32_t kinds(std::initializer_list<EntityKind> ks) {
    std::uint32_t bits = 0;
    for (auto k : ks) bits |= 1u << static_cast<unsigned>(k);
    return bits;
}
}  // namespace detail

inline const RelationSignature& relation_signature(Relation r) {
    using detail::kinds;
    using K = EntityKind;
    // Subjects that carry scene-level evidence.
    constexpr auto evidence_subjects = kinds({K::Scene, K::Frame, K::ClassPrototype, K::GenericScene});
    constexpr auto frame_like = kinds({K::Frame, K::ClassPrototype, K::GenericScene});
    static const std::array<RelationSignature, 13> table{{
        {frame_like, kinds({K::PedestrianSceneLabel})},                                      // contains
        {evidence_subjects, kinds({K::ZebraCrossing})},                                      // thereIs
        {evidence_subjects, kinds({K::Frame, K::Vehicle, K::Pedestrian, K::VehicleStateValue})},  // includes
        {evidence_subjects, kinds({K::SurroundingsValue})},                                  // hasSurroundings
        {evidence_subjects, kinds({K::LaneCount})},                                          // hasLanes
        {kinds({K::Frame}), kinds({K::Frame})},                                              // nextFrame
        {kinds({K::Frame}), kinds({K::Frame})},                                              // prevFrame
        {kinds({K::Pedestrian}), kinds({K::OcclusionLevel})},                                // hasOcclusionLevel
        {kinds({K::Vehicle}), kinds({K::VehicleStateValue})},                                // hasState
        {frame_like, kinds({K::BrakingLightsValue})},                                        // hasBrakingLights
        {frame_like, kinds({K::DistanceValue})},                                             // hasDistance
        {frame_like, kinds({K::PositionValue})},                                             // hasPosition
        {kinds({K::Frame}), kinds({K::ClassPrototype})},                                     // instanceOfSceneClass
    }};
    return table[static_cast<std::size_t>(r)];
}

// Relations whose frame-subject triples count as evidence and are lifted
// onto class prototypes.
inline bool is_evidence_relation(Relation r) {
    switch (r) {
        case Relation::ThereIs:
        case Relation::HasSurroundings:
        case Relation::HasLanes:
        case Relation::HasBrakingLights:
        case Relation::HasDistance:
        case Relation::HasPosition:
        case Relation::Includes:  // only when the object is a vehicle-state value
            return true;
        default:
            return false;
    }
}

// ---- value entity names ----

inline constexpr std::string_view kRoadScene = "RoadScene";
inline constexpr std::string_view kZebraCrossing = "ZebraCrossing";

inline constexpr std::string_view prototype_entity(PedestriansScene label) {
    switch (label) {
        case PedestriansScene::PedestrianOccluded: return "SceneWithOccludedPed";
        case PedestriansScene::PedestrianNotOccluded: return "SceneWithVisiblePed";
        case PedestriansScene::NonePedestrian: break;
    }
    return "SceneWithNoPed";
}

inline constexpr std::string_view label_entity(PedestriansScene label) { return to_string(label); }
inline constexpr std::string_view surroundings_entity(Surroundings s) { return to_string(s); }
inline constexpr std::string_view braking_lights_entity(BrakingLights b) { return to_string(b); }
inline constexpr std::string_view distance_entity(Distance d) { return to_string(d); }
inline constexpr std::string_view position_entity(Position p) { return to_string(p); }

inline constexpr std::string_view vehicle_state_entity(VehicleState s) {
    constexpr std::array<std::string_view, 4> names{"VehContinuousMovement", "VehStopped", "VehAccelerating",
                                                    "VehDecelerating"};
    return names[static_cast<std::size_t>(s)];
}

inline constexpr std::string_view occlusion_entity(Occlusion o) {
    constexpr std::array<std::string_view, 3> names{"OcclusionNone", "OcclusionPartial", "OcclusionFull"};
    return names[static_cast<std::size_t>(o)];
}

// Lane counts are categorical, clamped to 1..6.
inline std::string lane_entity(int lanes) {
    return "LaneCount_" + std::to_string(std::clamp(lanes, 1, kMaxLaneEntity));
}

// Kind of a reserved vocabulary name, if `name` is one.
inline std::optional<EntityKind> vocabulary_kind(std::string_view name) {
    if (name == kRoadScene) return EntityKind::GenericScene;
    if (name == kZebraCrossing) return EntityKind::ZebraCrossing;
    for (auto l : enum_values<PedestriansScene>()) {
        if (name == prototype_entity(l)) return EntityKind::ClassPrototype;
        if (name == label_entity(l)) return EntityKind::PedestrianSceneLabel;
    }
    for (auto s : enum_values<Surroundings>())
        if (name == surroundings_entity(s)) return EntityKind::SurroundingsValue;
    for (auto s : enum_values<VehicleState>())
        if (name == vehicle_state_entity(s)) return EntityKind::VehicleStateValue;
    for (auto b : enum_values<BrakingLights>())
        if (name == braking_lights_entity(b)) return EntityKind::BrakingLightsValue;
    for (auto d : enum_values<Distance>())
        if (name == distance_entity(d)) return EntityKind::DistanceValue;
    for (auto p : enum_values<Position>())
        if (name == position_entity(p)) return EntityKind::PositionValue;
    for (auto o : enum_values<Occlusion>())
        if (name == occlusion_entity(o)) return EntityKind::OcclusionLevel;
    for (int n = 1; n <= kMaxLaneEntity; ++n)
        if (name == lane_entity(n)) return EntityKind::LaneCount;
    return std::nullopt;
}

// Instance entity names: "<scene>/frame_<n>", "<frame>/veh_<id>", "<frame>/ped_<id>".
inline std::string frame_entity(std::string_view scene_id, std::int64_t frame_number) {
    return std::string(scene_id) + "/frame_" + std::to_string(frame_number);
}
inline std::string vehicle_entity(std::string_view frame, std::string_view vehicle_id) {
    return std::string(frame) + "/veh_" + std::string(vehicle_id);
}
inline std::string pedestrian_entity(std::string_view frame, std::string_view pedestrian_id) {
    return std::string(frame) + "/ped_" + std::string(pedestrian_id);
}

// Recovers the kind of any entity name produced by the builder.
inline EntityKind infer_entity_kind(std::string_view name) {
    if (auto k = vocabulary_kind(name)) return *k;
    const auto slash = name.find('/');
    if (slash == std::string_view::npos) return EntityKind::Scene;
    const auto last = name.rfind('/');
    const auto tail = name.substr(last + 1);
    if (last == slash) return EntityKind::Frame;
    if (tail.starts_with("veh_")) return EntityKind::Vehicle;
    return EntityKind::Pedestrian;
}

}  // namespace occlukg
