#pragma once

// Annotated road scenes: context labels plus per-frame pedestrian and
// vehicle records, and the labeling rules used to produce them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "occlukg/error.hpp"

namespace occlukg {

enum class Environment : std::uint8_t { Real, Virtual };
enum class Surroundings : std::uint8_t { Vegetation, Clear };
enum class PedestriansScene : std::uint8_t { NonePedestrian, PedestrianOccluded, PedestrianNotOccluded };
enum class Occlusion : std::uint8_t { None, Partial, Full };
enum class VehicleState : std::uint8_t { ContinuousMovement, Stopped, Accelerating, Decelerating };
enum class BrakingLights : std::uint8_t { On, Off };
enum class Distance : std::uint8_t { NearToEgoVeh, MiddleDisToEgoVeh, FarToEgoVeh };
enum class Position : std::uint8_t { Front, FrontLeft, FrontRight, Left, Right };

// Spellings are normative: they appear verbatim in annotation files.
template <typename E>
struct EnumNames;

template <>
struct EnumNames<Environment> {
    static constexpr std::array<std::string_view, 2> values{"Real", "Virtual"};
};
template <>
struct EnumNames<Surroundings> {
    static constexpr std::array<std::string_view, 2> values{"Vegetation", "Clear"};
};
template <>
struct EnumNames<PedestriansScene> {
    static constexpr std::array<std::string_view, 3> values{
        "NonePedestrian", "PedestrianOccluded", "PedestrianNotOccluded"};
};
template <>
struct EnumNames<Occlusion> {
    static constexpr std::array<std::string_view, 3> values{"None", "Partial", "Full"};
};
template <>
struct EnumNames<VehicleState> {
    static constexpr std::array<std::string_view, 4> values{
        "ContinuousMovement", "Stopped", "Accelerating", "Decelerating"};
};
template <>
struct EnumNames<BrakingLights> {
    static constexpr std::array<std::string_view, 2> values{"On", "Off"};
};
template <>
struct EnumNames<Distance> {
    static constexpr std::array<std::string_view, 3> values{
        "NearToEgoVeh", "MiddleDisToEgoVeh", "FarToEgoVeh"};
};
template <>
struct EnumNames<Position> {
    static constexpr std::array<std::string_view, 5> values{
        "Front", "FrontLeft", "FrontRight", "Left", "Right"};
};

template <typename E>
constexpr std::size_t enum_count() {
    return EnumNames<E>::values.size();
}

template <typename E>
constexpr std::string_view to_string(E value) {
    return EnumNames<E>::values[static_cast<std::size_t>(value)];
}

template <typename E>
constexpr std::array<E, enum_count<E>()> enum_values() {
    std::array<E, enum_count<E>()> out{};
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<E>(i);
    return out;
}

// Exact, case-sensitive match.
template <typename E>
std::optional<E> enum_from_string(std::string_view text) {
    const auto& names = EnumNames<E>::values;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == text) return static_cast<E>(i);
    }
    return std::nullopt;
}

struct SceneContext {
    std::string scene_id;
    Environment environment = Environment::Real;
    bool zebra_crossing = false;
    int lanes = 1;
    Surroundings surroundings = Surroundings::Clear;

    friend bool operator==(const SceneContext&, const SceneContext&) = default;
};

struct PedestrianRecord {
    std::string pedestrian_id;
    Occlusion occlusion = Occlusion::None;
    std::optional<double> visible_fraction;

    friend bool operator==(const PedestrianRecord&, const PedestrianRecord&) = default;
};

struct VehicleRecord {
    std::string vehicle_id;
    VehicleState state = VehicleState::ContinuousMovement;
    BrakingLights braking_lights = BrakingLights::Off;
    Distance distance = Distance::FarToEgoVeh;
    Position position = Position::Front;

    friend bool operator==(const VehicleRecord&, const VehicleRecord&) = default;
};

struct FrameAnnotation {
    std::int64_t frame_number = 0;
    PedestriansScene pedestrians_scene = PedestriansScene::NonePedestrian;
    std::vector<PedestrianRecord> pedestrians;
    std::vector<VehicleRecord> vehicles;

    friend bool operator==(const FrameAnnotation&, const FrameAnnotation&) = default;
};

struct RoadSceneDocument {
    SceneContext context;
    std::vector<FrameAnnotation> frames;

    friend bool operator==(const RoadSceneDocument&, const RoadSceneDocument&) = default;
};

struct CameraIntrinsics {
    double focal_length = 1000.0;          // pixels
    double known_pedestrian_width = 0.5;   // meters

    CameraIntrinsics() = default;
    CameraIntrinsics(double focal, double width) : focal_length(focal), known_pedestrian_width(width) {
        if (!(focal > 0.0) || !(width > 0.0) || !std::isfinite(focal) || !std::isfinite(width)) {
            throw DomainError("camera intrinsics must be finite and strictly positive");
        }
    }
};

struct DistanceThresholds {
    double near = 10.0;  // meters
    double far = 30.0;
};

inline constexpr double kFullOcclusionVisibility = 0.25;

// Triangle similarity: D = W * F / P.
inline double estimate_distance(double known_width, double focal_length, double pixel_width) {
    const bool finite = std::isfinite(known_width) && std::isfinite(focal_length) && std::isfinite(pixel_width);
    if (!finite || known_width <= 0.0 || focal_length <= 0.0 || pixel_width <= 0.0) {
        throw DomainError("estimate_distance: inputs must be finite and > 0");
    }
    return known_width * focal_length / pixel_width;
}

inline double estimate_distance(const CameraIntrinsics& camera, double pixel_width) {
    return estimate_distance(camera.known_pedestrian_width, camera.focal_length, pixel_width);
}

// Boundaries go to the upper bucket.
inline Distance quantize_distance(double distance, DistanceThresholds thresholds = {}) {
    if (!std::isfinite(distance)) throw DomainError("quantize_distance: distance is not finite");
    if (!(thresholds.near > 0.0) || !(thresholds.near < thresholds.far) || !std::isfinite(thresholds.far)) {
        throw DomainError("quantize_distance: thresholds must satisfy 0 < near < far");
    }
    if (distance < thresholds.near) return Distance::NearToEgoVeh;
    if (distance < thresholds.far) return Distance::MiddleDisToEgoVeh;
    return Distance::FarToEgoVeh;
}

// A detected pedestrian is unoccluded; otherwise < 25% visible is Full.
inline Occlusion occlusion_level_from_visibility(bool detector_detected, double visible_fraction) {
    if (!(visible_fraction >= 0.0 && visible_fraction <= 1.0)) {
        throw DomainError("occlusion_level_from_visibility: visible_fraction outside [0,1]");
    }
    if (detector_detected) return Occlusion::None;
    return visible_fraction < kFullOcclusionVisibility ? Occlusion::Full : Occlusion::Partial;
}

// Identifiers become knowledge-graph entity names and file names, so they
// are restricted to a conservative character set.
inline bool is_valid_identifier(std::string_view id) {
    if (id.empty()) return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
               c == '-' || c == '.';
    });
}

inline constexpr int kMaxLaneEntity = 6;

// Returns one human-readable line per violated rule; empty means valid.
inline std::vector<std::string> validate_document(const RoadSceneDocument& doc) {
    std::vector<std::string> out;
    const auto& ctx = doc.context;
    if (!is_valid_identifier(ctx.scene_id)) {
        out.push_back("scene id '" + ctx.scene_id + "' must be non-empty and use only [A-Za-z0-9_.-]");
    }
    if (ctx.lanes < 1) out.push_back("lanes must be >= 1");
    if (doc.frames.empty()) out.push_back("document must contain at least one frame");

    for (std::size_t i = 0; i < doc.frames.size(); ++i) {
        const auto& frame = doc.frames[i];
        const std::string where = "frame " + std::to_string(frame.frame_number) + ": ";
        if (frame.frame_number < 0) out.push_back(where + "frame number must be non-negative");
        if (i > 0 && frame.frame_number <= doc.frames[i - 1].frame_number) {
            out.push_back(where + "frames not strictly increasing");
        }
        if (frame.pedestrians_scene == PedestriansScene::NonePedestrian && !frame.pedestrians.empty()) {
            out.push_back(where + "NonePedestrian frame lists pedestrians");
        }
        if (frame.pedestrians_scene == PedestriansScene::PedestrianOccluded &&
            std::none_of(frame.pedestrians.begin(), frame.pedestrians.end(),
                         [](const PedestrianRecord& p) { return p.occlusion != Occlusion::None; })) {
            out.push_back(where + "PedestrianOccluded frame has no occluded pedestrian");
        }
        std::set<std::string> ped_ids;
        for (const auto& ped : frame.pedestrians) {
            if (!is_valid_identifier(ped.pedestrian_id)) {
                out.push_back(where + "invalid pedestrian id '" + ped.pedestrian_id + "'");
            } else if (!ped_ids.insert(ped.pedestrian_id).second) {
                out.push_back(where + "duplicate pedestrian id '" + ped.pedestrian_id + "'");
            }
            if (!ped.visible_fraction) continue;
            const double v = *ped.visible_fraction;
            if (!(v >= 0.0 && v <= 1.0)) {
                out.push_back(where + "pedestrian '" + ped.pedestrian_id + "' visibleFraction outside [0,1]");
                continue;
            }
            // Consistency with the labeling rule; a detected pedestrian
            // (occlusion None) may have any visibility.
            if (ped.occlusion == Occlusion::Partial && v < kFullOcclusionVisibility) {
                out.push_back(where + "pedestrian '" + ped.pedestrian_id +
                              "' is Partial but less than 25% visible");
            } else if (ped.occlusion == Occlusion::Full && v >= kFullOcclusionVisibility) {
                out.push_back(where + "pedestrian '" + ped.pedestrian_id +
                              "' is Full but at least 25% visible");
            }
        }
        std::set<std::string> veh_ids;
        for (const auto& veh : frame.vehicles) {
            if (!is_valid_identifier(veh.vehicle_id)) {
                out.push_back(where + "invalid vehicle id '" + veh.vehicle_id + "'");
            } else if (!veh_ids.insert(veh.vehicle_id).second) {
                out.push_back(where + "duplicate vehicle id '" + veh.vehicle_id + "'");
            }
        }
    }
    return out;
}

}  // namespace occlukg
