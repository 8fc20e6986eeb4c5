#pragma once

// Synthetic annotation corpora drawn from per-environment conditional
// probability tables.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "occlukg/config_file.hpp"
#include "occlukg/error.hpp"
#include "occlukg/scene.hpp"
#include "occlukg/scene_xml.hpp"

namespace occlukg {

inline constexpr std::size_t kLabels = enum_count<PedestriansScene>();

template <std::size_t N>
using Row = std::array<double, N>;

// Rows conditioned on the scene label are indexed by PedestriansScene.
struct EnvironmentTables {
    Row<kLabels> label_prior{};
    std::array<Row<enum_count<VehicleState>()>, kLabels> state{};
    std::array<Row<enum_count<BrakingLights>()>, enum_count<VehicleState>()> lights{};  // [state][On, Off]
    std::array<Row<enum_count<Distance>()>, kLabels> distance{};
    std::array<Row<enum_count<Position>()>, kLabels> position{};
    std::array<Row<enum_count<Surroundings>()>, kLabels> surroundings{};
    Row<kLabels> zebra{};  // P(zebra crossing | label)
    // Occlusion level of each pedestrian. In occluded scenes the first
    // pedestrian is drawn from the occluded part of the row.
    std::array<Row<enum_count<Occlusion>()>, kLabels> occlusion{};
    std::vector<double> lanes;     // P(lanes = i + 1)
    std::vector<double> vehicles;  // P(i vehicles in a frame)
    std::vector<double> pedestrians{0.0, 0.7, 0.3};  // P(i pedestrians) in scenes with pedestrians; i >= 1

    friend bool operator==(const EnvironmentTables&, const EnvironmentTables&) = default;
};

struct GeneratorConfig {
    std::array<std::size_t, 2> scenes{40, 59};  // indexed by Environment
    std::size_t min_frames = 20;
    std::size_t max_frames = 40;
    std::array<EnvironmentTables, 2> tables;

    EnvironmentTables& env(Environment e) { return tables[static_cast<std::size_t>(e)]; }
    const EnvironmentTables& env(Environment e) const { return tables[static_cast<std::size_t>(e)]; }

    friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

namespace detail {

template <typename Container>
void check_row(const Container& row, const std::string& name) {
    double sum = 0.0;
    for (double p : row) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw ConfigError(name + ": probabilities must be finite and >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError(name + ": row sums to " + format_config_real(sum) + ", not 1");
}

template <typename E>
std::string row_name(std::string_view table, E value) {
    return std::string(table) + "." + std::string(to_string(value));
}

}  // namespace detail

inline void validate_tables(const EnvironmentTables& t, const std::string& prefix) {
    using detail::check_row;
    check_row(t.label_prior, prefix + "label_prior");
    for (auto l : enum_values<PedestriansScene>()) {
        const auto i = static_cast<std::size_t>(l);
        check_row(t.state[i], prefix + detail::row_name("state", l));
        check_row(t.distance[i], prefix + detail::row_name("distance", l));
        check_row(t.position[i], prefix + detail::row_name("position", l));
        check_row(t.surroundings[i], prefix + detail::row_name("surroundings", l));
        check_row(t.occlusion[i], prefix + detail::row_name("occlusion", l));
        check_row(Row<2>{t.zebra[i], 1.0 - t.zebra[i]}, prefix + detail::row_name("zebra", l));
    }
    for (auto s : enum_values<VehicleState>())
        check_row(t.lights[static_cast<std::size_t>(s)], prefix + detail::row_name("lights", s));
    if (t.lanes.empty()) throw ConfigError(prefix + "lanes: row is empty");
    check_row(t.lanes, prefix + "lanes");
    if (t.vehicles.empty()) throw ConfigError(prefix + "vehicles: row is empty");
    check_row(t.vehicles, prefix + "vehicles");
    if (t.pedestrians.size() < 2) throw ConfigError(prefix + "pedestrians: row needs at least two entries");
    check_row(t.pedestrians, prefix + "pedestrians");
    if (t.pedestrians[0] != 0.0) throw ConfigError(prefix + "pedestrians: P(0 pedestrians) must be 0");
    const auto& occ = t.occlusion[static_cast<std::size_t>(PedestriansScene::PedestrianOccluded)];
    if (occ[1] + occ[2] <= 0.0) throw ConfigError(prefix + "occlusion.PedestrianOccluded: needs Partial or Full mass");
}

inline void validate_config(const GeneratorConfig& c) {
    if (c.min_frames < 1) throw ConfigError("frames.min must be >= 1");
    if (c.max_frames < c.min_frames) throw ConfigError("frames.max must be >= frames.min");
    for (auto e : enum_values<Environment>()) {
        std::string prefix(to_string(e));
        std::transform(prefix.begin(), prefix.end(), prefix.begin(), [](unsigned char ch) { return std::tolower(ch); });
        validate_tables(c.env(e), prefix + ".");
    }
}

// Label prior from the frame counts 8459 : 9735 : 21520 (occluded, visible,
// none); CPT magnitudes follow the direction of the published distribution.
inline EnvironmentTables default_tables() {
    constexpr auto None = static_cast<std::size_t>(PedestriansScene::NonePedestrian);
    constexpr auto Occ = static_cast<std::size_t>(PedestriansScene::PedestrianOccluded);
    constexpr auto Vis = static_cast<std::size_t>(PedestriansScene::PedestrianNotOccluded);
    EnvironmentTables t;
    const double total = 8459.0 + 9735.0 + 21520.0;
    t.label_prior[None] = 21520.0 / total;
    t.label_prior[Occ] = 8459.0 / total;
    t.label_prior[Vis] = 9735.0 / total;

    // ContinuousMovement, Stopped, Accelerating, Decelerating
    t.state[Occ] = {0.05, 0.1, 0.15, 0.7};
    t.state[Vis] = {0.05, 0.8, 0.1, 0.05};
    t.state[None] = {0.8, 0.05, 0.1, 0.05};
    // On, Off per state
    t.lights = {{{0.1, 0.9}, {0.5, 0.5}, {0.05, 0.95}, {0.9, 0.1}}};
    // Near, Middle, Far
    t.distance[Occ] = {0.85, 0.1, 0.05};
    t.distance[Vis] = {0.1, 0.8, 0.1};
    t.distance[None] = {0.1, 0.3, 0.6};
    // Front, FrontLeft, FrontRight, Left, Right
    t.position[Occ] = {0.04, 0.46, 0.46, 0.02, 0.02};
    t.position[Vis] = {0.7, 0.05, 0.05, 0.1, 0.1};
    t.position[None] = {0.4, 0.05, 0.05, 0.25, 0.25};
    // Vegetation, Clear
    t.surroundings[Occ] = {0.7, 0.3};
    t.surroundings[Vis] = {0.15, 0.85};
    t.surroundings[None] = {0.1, 0.9};
    t.zebra[Occ] = 0.5;
    t.zebra[Vis] = 0.35;
    t.zebra[None] = 0.6;
    // None, Partial, Full
    t.occlusion[Occ] = {0.0, 0.55, 0.45};
    t.occlusion[Vis] = {1.0, 0.0, 0.0};
    t.occlusion[None] = {1.0, 0.0, 0.0};
    t.lanes = {0.2, 0.5, 0.2, 0.1};
    t.vehicles = {0.0, 0.2, 0.3, 0.5};
    return t;
}

inline GeneratorConfig default_config() {
    GeneratorConfig c;
    c.tables = {default_tables(), default_tables()};
    return c;
}

// Replaces every label-conditioned feature row with its prior-weighted
// average, so features carry no information about the label. Occlusion rows
// are kept: they define what the labels mean.
inline EnvironmentTables uninformative(const EnvironmentTables& t) {
    EnvironmentTables u = t;
    auto flatten = [&](auto& rows) {
        auto mix = rows[0];
        for (auto& p : mix) p = 0.0;
        for (std::size_t l = 0; l < kLabels; ++l)
            for (std::size_t j = 0; j < mix.size(); ++j) mix[j] += t.label_prior[l] * rows[l][j];
        for (auto& row : rows) row = mix;
    };
    flatten(u.state);
    flatten(u.distance);
    flatten(u.position);
    flatten(u.surroundings);
    double z = 0.0;
    for (std::size_t l = 0; l < kLabels; ++l) z += t.label_prior[l] * t.zebra[l];
    u.zebra.fill(z);
    return u;
}

namespace detail {

template <typename Container, typename Rng>
std::size_t draw(const Container& row, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double x = u(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] > 0.0) last_positive = i;
        acc += row[i];
        if (x < acc && row[i] > 0.0) return i;
    }
    return last_positive;  // rounding slack
}

inline std::string scene_name(Environment env, std::size_t index) {
    std::string prefix = env == Environment::Real ? "real_" : "virtual_";
    std::string digits = std::to_string(index);
    if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
    return prefix + digits;
}

template <typename Rng>
double visible_fraction_for(Occlusion level, Rng& rng) {
    auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    switch (level) {
        case Occlusion::None: return uniform(0.6, 1.0);
        case Occlusion::Partial: return uniform(kFullOcclusionVisibility, 0.6);
        case Occlusion::Full: break;
    }
    return uniform(0.0, 0.2);
}

}  // namespace detail

inline RoadSceneDocument generate_scene(const GeneratorConfig& config, Environment env, std::size_t index,
                                        std::uint64_t seed) {
    const auto& t = config.env(env);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(env), static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);

    RoadSceneDocument doc;
    auto& ctx = doc.context;
    ctx.scene_id = detail::scene_name(env, index);
    ctx.environment = env;
    const auto label = static_cast<PedestriansScene>(detail::draw(t.label_prior, rng));
    const auto li = static_cast<std::size_t>(label);
    ctx.surroundings = static_cast<Surroundings>(detail::draw(t.surroundings[li], rng));
    ctx.zebra_crossing = std::bernoulli_distribution(t.zebra[li])(rng);
    ctx.lanes = static_cast<int>(detail::draw(t.lanes, rng)) + 1;

    const auto n_frames =
        std::uniform_int_distribution<std::size_t>(config.min_frames, config.max_frames)(rng);
    std::size_t n_peds = 0;
    std::vector<Occlusion> levels;
    if (label != PedestriansScene::NonePedestrian) {
        n_peds = detail::draw(t.pedestrians, rng);
        const auto& occ = t.occlusion[li];
        for (std::size_t p = 0; p < n_peds; ++p) {
            if (p == 0 && label == PedestriansScene::PedestrianOccluded) {
                const Row<3> occluded{0.0, occ[1] / (occ[1] + occ[2]), occ[2] / (occ[1] + occ[2])};
                levels.push_back(static_cast<Occlusion>(detail::draw(occluded, rng)));
            } else {
                levels.push_back(static_cast<Occlusion>(detail::draw(occ, rng)));
            }
        }
    }

    doc.frames.reserve(n_frames);
    for (std::size_t f = 0; f < n_frames; ++f) {
        FrameAnnotation frame;
        frame.frame_number = static_cast<std::int64_t>(f);
        frame.pedestrians_scene = label;
        for (std::size_t p = 0; p < n_peds; ++p) {
            frame.pedestrians.push_back(
                {"p" + std::to_string(p + 1), levels[p], detail::visible_fraction_for(levels[p], rng)});
        }
        const std::size_t n_veh = detail::draw(t.vehicles, rng);
        for (std::size_t v = 0; v < n_veh; ++v) {
            VehicleRecord rec;
            rec.vehicle_id = "v" + std::to_string(v + 1);
            rec.state = static_cast<VehicleState>(detail::draw(t.state[li], rng));
            rec.braking_lights =
                static_cast<BrakingLights>(detail::draw(t.lights[static_cast<std::size_t>(rec.state)], rng));
            rec.distance = static_cast<Distance>(detail::draw(t.distance[li], rng));
            rec.position = static_cast<Position>(detail::draw(t.position[li], rng));
            frame.vehicles.push_back(std::move(rec));
        }
        doc.frames.push_back(std::move(frame));
    }
    return doc;
}

// Real scenes first, then Virtual; each scene has its own derived stream.
inline std::vector<RoadSceneDocument> generate_corpus(const GeneratorConfig& config, std::uint64_t seed) {
    validate_config(config);
    std::vector<RoadSceneDocument> corpus;
    for (auto env : enum_values<Environment>())
        for (std::size_t i = 0; i < config.scenes[static_cast<std::size_t>(env)]; ++i)
            corpus.push_back(generate_scene(config, env, i, seed));
    return corpus;
}

// Header line, then scene_id, environment, label (the first frame's), frame count.
inline std::string corpus_manifest(const std::vector<RoadSceneDocument>& corpus) {
    std::string out = "scene_id\tenvironment\tlabel\tframes\n";
    for (const auto& doc : corpus) {
        out += doc.context.scene_id;
        out += '\t';
        out += to_string(doc.context.environment);
        out += '\t';
        out += doc.frames.empty() ? std::string_view("-") : to_string(doc.frames.front().pedestrians_scene);
        out += '\t';
        out += std::to_string(doc.frames.size());
        out += '\n';
    }
    return out;
}

// ---- config text ----
//
// Keys: real.scenes, virtual.scenes, frames.min, frames.max, and the table
// keys label_prior, state.<label>, lights.<state>, distance.<label>,
// position.<label>, surroundings.<label>, zebra.<label>, occlusion.<label>,
// lanes, vehicles, pedestrians. A table key applies to both environments
// unless prefixed with "real." or "virtual."; prefixed keys win.

namespace detail {

template <std::size_t N>
void assign_row(Row<N>& row, const ConfigEntry& e) {
    const auto values = parse_real_list(e);
    if (values.size() != N) {
        throw config_error(e, "expected " + std::to_string(N) + " values, got " + std::to_string(values.size()));
    }
    std::copy(values.begin(), values.end(), row.begin());
}

template <typename E, typename Rows>
bool assign_enum_row(Rows& rows, std::string_view suffix, const ConfigEntry& e) {
    auto value = enum_from_string<E>(suffix);
    if (!value) throw config_error(e, "unknown row '" + std::string(suffix) + "'");
    assign_row(rows[static_cast<std::size_t>(*value)], e);
    return true;
}

inline bool apply_table_key(EnvironmentTables& t, std::string_view key, const ConfigEntry& e) {
    auto starts = [&](std::string_view p) { return key.substr(0, p.size()) == p; };
    if (key == "label_prior") {
        assign_row(t.label_prior, e);
        return true;
    }
    if (key == "lanes") return t.lanes = parse_real_list(e), true;
    if (key == "vehicles") return t.vehicles = parse_real_list(e), true;
    if (key == "pedestrians") return t.pedestrians = parse_real_list(e), true;
    if (starts("state.")) return assign_enum_row<PedestriansScene>(t.state, key.substr(6), e);
    if (starts("lights.")) return assign_enum_row<VehicleState>(t.lights, key.substr(7), e);
    if (starts("distance.")) return assign_enum_row<PedestriansScene>(t.distance, key.substr(9), e);
    if (starts("position.")) return assign_enum_row<PedestriansScene>(t.position, key.substr(9), e);
    if (starts("surroundings.")) return assign_enum_row<PedestriansScene>(t.surroundings, key.substr(13), e);
    if (starts("occlusion.")) return assign_enum_row<PedestriansScene>(t.occlusion, key.substr(10), e);
    if (starts("zebra.")) {
        auto label = enum_from_string<PedestriansScene>(key.substr(6));
        if (!label) throw config_error(e, "unknown row '" + std::string(key.substr(6)) + "'");
        t.zebra[static_cast<std::size_t>(*label)] = parse_real(e);
        return true;
    }
    return false;
}

}  // namespace detail

// Starts from default_config() and applies the entries; unknown keys throw.
inline GeneratorConfig parse_generator_config(std::string_view text) {
    GeneratorConfig c = default_config();
    const auto entries = parse_config_text(text);
    // Shared table keys first so that prefixed keys override them.
    for (const auto& e : entries) {
        std::string_view key = e.key;
        if (key == "real.scenes") c.scenes[0] = parse_unsigned(e);
        else if (key == "virtual.scenes") c.scenes[1] = parse_unsigned(e);
        else if (key == "frames.min") c.min_frames = parse_unsigned(e);
        else if (key == "frames.max") c.max_frames = parse_unsigned(e);
        else if (key.starts_with("real.") || key.starts_with("virtual.")) continue;
        else {
            bool known = false;
            for (auto& t : c.tables) known = detail::apply_table_key(t, key, e);
            if (!known) throw unknown_key(e);
        }
    }
    for (const auto& e : entries) {
        std::string_view key = e.key;
        if (key == "real.scenes" || key == "virtual.scenes") continue;
        Environment env;
        if (key.starts_with("real.")) {
            env = Environment::Real;
            key.remove_prefix(5);
        } else if (key.starts_with("virtual.")) {
            env = Environment::Virtual;
            key.remove_prefix(8);
        } else {
            continue;
        }
        if (!detail::apply_table_key(c.env(env), key, e)) throw unknown_key(e);
    }
    validate_config(c);
    return c;
}

// Full, explicit rendering; parse_generator_config reads it back unchanged.
inline std::string format_generator_config(const GeneratorConfig& c) {
    std::ostringstream out;
    auto list = [](const auto& row) {
        std::string s;
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s += ' ';
            s += format_config_real(row[i]);
        }
        return s;
    };
    out << "real.scenes = " << c.scenes[0] << '\n';
    out << "virtual.scenes = " << c.scenes[1] << '\n';
    out << "frames.min = " << c.min_frames << '\n';
    out << "frames.max = " << c.max_frames << '\n';
    for (auto env : enum_values<Environment>()) {
        const auto& t = c.env(env);
        const std::string p = env == Environment::Real ? "real." : "virtual.";
        out << p << "label_prior = " << list(t.label_prior) << '\n';
        for (auto l : enum_values<PedestriansScene>()) {
            const auto i = static_cast<std::size_t>(l);
            out << p << "state." << to_string(l) << " = " << list(t.state[i]) << '\n';
            out << p << "distance." << to_string(l) << " = " << list(t.distance[i]) << '\n';
            out << p << "position." << to_string(l) << " = " << list(t.position[i]) << '\n';
            out << p << "surroundings." << to_string(l) << " = " << list(t.surroundings[i]) << '\n';
            out << p << "zebra." << to_string(l) << " = " << format_config_real(t.zebra[i]) << '\n';
            out << p << "occlusion." << to_string(l) << " = " << list(t.occlusion[i]) << '\n';
        }
        for (auto s : enum_values<VehicleState>())
            out << p << "lights." << to_string(s) << " = " << list(t.lights[static_cast<std::size_t>(s)]) << '\n';
        out << p << "lanes = " << list(t.lanes) << '\n';
        out << p << "vehicles = " << list(t.vehicles) << '\n';
        out << p << "pedestrians = " << list(t.pedestrians) << '\n';
    }
    return out.str();
}

}  // namespace occlukg
