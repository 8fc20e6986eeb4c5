#pragma once

// Knowledge graph compiled from annotated road scenes.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "occlukg/error.hpp"
#include "occlukg/ontology.hpp"
#include "occlukg/scene.hpp"

namespace occlukg {

struct Triple {
    std::string subject;
    Relation relation = Relation::Contains;
    std::string object;

    friend bool operator==(const Triple&, const Triple&) = default;
    // Same order as the exported text lines.
    friend bool operator<(const Triple& a, const Triple& b) {
        if (a.subject != b.subject) return a.subject < b.subject;
        if (a.relation != b.relation) return relation_name(a.relation) < relation_name(b.relation);
        return a.object < b.object;
    }
};

// Dense indices into a graph's (or model's) entity and relation tables.
struct IndexedTriple {
    std::uint32_t subject = 0;
    std::uint32_t relation = 0;
    std::uint32_t object = 0;

    friend bool operator==(const IndexedTriple&, const IndexedTriple&) = default;
    friend auto operator<=>(const IndexedTriple&, const IndexedTriple&) = default;
};

using TripleKey = std::uint64_t;

// 24 bits subject, 8 bits relation, 32 bits object.
inline TripleKey pack(const IndexedTriple& t) {
    return (static_cast<std::uint64_t>(t.subject) << 40) | (static_cast<std::uint64_t>(t.relation) << 32) |
           static_cast<std::uint64_t>(t.object);
}

inline constexpr std::size_t kMaxEntities = std::size_t{1} << 24;

class TripleSet {
public:
    TripleSet() = default;
    template <typename Range>
    explicit TripleSet(const Range& triples) {
        insert(triples);
    }

    void insert(const IndexedTriple& t) { keys_.insert(pack(t)); }
    template <typename Range>
    void insert(const Range& triples) {
        for (const auto& t : triples) insert(t);
    }
    bool contains(const IndexedTriple& t) const { return keys_.count(pack(t)) != 0; }
    std::size_t size() const { return keys_.size(); }

private:
    std::unordered_set<TripleKey> keys_;
};

struct PrototypeOptions {
    // Fraction of a class's member frames that must hold an evidence triple
    // before it is copied onto the class prototype.
    double min_support = 0.0;
    // Minimum ratio between the in-class frequency and the frequency over all
    // frames. Zero disables the filter.
    double min_lift = 0.0;
};

struct BuildOptions {
    bool link_prototypes = true;
    PrototypeOptions prototypes;
};

class KnowledgeGraph {
public:
    KnowledgeGraph() = default;

    const std::vector<std::string>& entities() const { return entities_; }
    const std::vector<Relation>& relations() const { return relations_; }
    const std::vector<Triple>& triples() const { return triples_; }
    const std::vector<IndexedTriple>& indexed_triples() const { return indexed_; }

    std::size_t num_entities() const { return entities_.size(); }
    std::size_t num_relations() const { return relations_.size(); }
    std::size_t num_triples() const { return triples_.size(); }
    bool empty() const { return triples_.empty(); }

    EntityKind kind(std::uint32_t entity) const { return kinds_.at(entity); }
    std::optional<EntityKind> kind(std::string_view entity) const {
        auto idx = entity_index(entity);
        if (!idx) return std::nullopt;
        return kinds_[*idx];
    }

    std::optional<std::uint32_t> entity_index(std::string_view name) const {
        auto it = entity_lookup_.find(std::string(name));
        if (it == entity_lookup_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<std::uint32_t> relation_index(Relation r) const {
        for (std::size_t i = 0; i < relations_.size(); ++i)
            if (relations_[i] == r) return static_cast<std::uint32_t>(i);
        return std::nullopt;
    }

    std::optional<IndexedTriple> index(const Triple& t) const {
        auto s = entity_index(t.subject);
        auto r = relation_index(t.relation);
        auto o = entity_index(t.object);
        if (!s || !r || !o) return std::nullopt;
        return IndexedTriple{*s, *r, *o};
    }
    Triple resolve(const IndexedTriple& t) const {
        return Triple{entities_.at(t.subject), relations_.at(t.relation), entities_.at(t.object)};
    }

    bool contains(const IndexedTriple& t) const { return known_.contains(t); }
    bool contains(const Triple& t) const {
        auto idx = index(t);
        return idx && known_.contains(*idx);
    }
    const TripleSet& known() const { return known_; }

    bool has_prototypes() const { return relation_index(Relation::InstanceOfSceneClass).has_value(); }

    friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
        return a.entities_ == b.entities_ && a.kinds_ == b.kinds_ && a.relations_ == b.relations_ &&
               a.triples_ == b.triples_;
    }

private:
    friend class KgBuilder;

    std::vector<std::string> entities_;  // sorted
    std::vector<EntityKind> kinds_;
    std::unordered_map<std::string, std::uint32_t> entity_lookup_;
    std::vector<Relation> relations_;  // ontology order, used relations only
    std::vector<Triple> triples_;      // sorted, unique
    std::vector<IndexedTriple> indexed_;
    TripleSet known_;
};

// Accumulates typed entities and triples; finish() canonicalizes indices so
// the result does not depend on insertion order.
class KgBuilder {
public:
    KgBuilder() = default;
    explicit KgBuilder(const KnowledgeGraph& kg) {
        for (std::size_t i = 0; i < kg.entities_.size(); ++i) kinds_.emplace(kg.entities_[i], kg.kinds_[i]);
        triples_.insert(kg.triples_.begin(), kg.triples_.end());
    }

    void add_entity(const std::string& name, EntityKind kind) {
        auto [it, inserted] = kinds_.emplace(name, kind);
        if (!inserted && it->second != kind) {
            throw GraphError("entity '" + name + "' registered as both " + std::string(kind_name(it->second)) +
                             " and " + std::string(kind_name(kind)));
        }
    }

    // Both endpoints must already be registered; the triple must type-check.
    void add(const std::string& subject, Relation relation, const std::string& object) {
        auto s = kinds_.find(subject);
        auto o = kinds_.find(object);
        if (s == kinds_.end()) throw GraphError("unregistered subject '" + subject + "'");
        if (o == kinds_.end()) throw GraphError("unregistered object '" + object + "'");
        if (!relation_signature(relation).accepts(s->second, o->second)) {
            throw GraphError("ontology type-check failed: <" + subject + ", " + std::string(relation_name(relation)) +
                             ", " + object + "> (" + std::string(kind_name(s->second)) + " -> " +
                             std::string(kind_name(o->second)) + ")");
        }
        triples_.insert(Triple{subject, relation, object});
    }

    void add_vocabulary(std::string_view name) {
        auto kind = vocabulary_kind(name);
        if (!kind) throw GraphError("not a vocabulary entity: '" + std::string(name) + "'");
        add_entity(std::string(name), *kind);
    }

    KnowledgeGraph finish() && {
        if (kinds_.size() >= kMaxEntities) throw GraphError("too many entities");
        KnowledgeGraph kg;
        kg.entities_.reserve(kinds_.size());
        for (auto& [name, kind] : kinds_) {
            kg.entity_lookup_.emplace(name, static_cast<std::uint32_t>(kg.entities_.size()));
            kg.entities_.push_back(name);
            kg.kinds_.push_back(kind);
        }
        std::array<bool, kRelationNames.size()> used{};
        for (const auto& t : triples_) used[static_cast<std::size_t>(t.relation)] = true;
        for (std::size_t r = 0; r < used.size(); ++r)
            if (used[r]) kg.relations_.push_back(static_cast<Relation>(r));
        kg.triples_.assign(triples_.begin(), triples_.end());
        kg.indexed_.reserve(kg.triples_.size());
        for (const auto& t : kg.triples_) kg.indexed_.push_back(*kg.index(t));
        kg.known_ = TripleSet(kg.indexed_);
        return kg;
    }

private:
    std::map<std::string, EntityKind> kinds_;
    std::set<Triple> triples_;
};

namespace detail {

inline void add_scene(KgBuilder& b, const RoadSceneDocument& doc) {
    const auto& ctx = doc.context;
    const std::string& scene = ctx.scene_id;
    b.add_entity(scene, EntityKind::Scene);

    std::vector<std::pair<Relation, std::string>> context;
    if (ctx.zebra_crossing) context.emplace_back(Relation::ThereIs, std::string(kZebraCrossing));
    context.emplace_back(Relation::HasSurroundings, std::string(surroundings_entity(ctx.surroundings)));
    context.emplace_back(Relation::HasLanes, lane_entity(ctx.lanes));
    for (const auto& [rel, value] : context) {
        b.add_vocabulary(value);
        b.add(scene, rel, value);
    }

    std::string previous;
    for (const auto& frame : doc.frames) {
        const std::string f = frame_entity(scene, frame.frame_number);
        b.add_entity(f, EntityKind::Frame);
        b.add(scene, Relation::Includes, f);

        const std::string label(label_entity(frame.pedestrians_scene));
        b.add_vocabulary(label);
        b.add(f, Relation::Contains, label);

        if (!previous.empty()) {
            b.add(previous, Relation::NextFrame, f);
            b.add(f, Relation::PrevFrame, previous);
        }
        previous = f;

        for (const auto& [rel, value] : context) b.add(f, rel, value);

        for (const auto& ped : frame.pedestrians) {
            const std::string p = pedestrian_entity(f, ped.pedestrian_id);
            const std::string level(occlusion_entity(ped.occlusion));
            b.add_entity(p, EntityKind::Pedestrian);
            b.add_vocabulary(level);
            b.add(f, Relation::Includes, p);
            b.add(p, Relation::HasOcclusionLevel, level);
        }
        for (const auto& veh : frame.vehicles) {
            const std::string v = vehicle_entity(f, veh.vehicle_id);
            const std::string state(vehicle_state_entity(veh.state));
            const std::string lights(braking_lights_entity(veh.braking_lights));
            const std::string dist(distance_entity(veh.distance));
            const std::string pos(position_entity(veh.position));
            b.add_entity(v, EntityKind::Vehicle);
            for (const auto& value : {state, lights, dist, pos}) b.add_vocabulary(value);
            b.add(f, Relation::Includes, v);
            b.add(v, Relation::HasState, state);
            b.add(f, Relation::Includes, state);
            b.add(f, Relation::HasBrakingLights, lights);
            b.add(f, Relation::HasDistance, dist);
            b.add(f, Relation::HasPosition, pos);
        }
    }
}

}  // namespace detail

// Evidence triples held by one frame: context copies plus condensed vehicle
// state, braking lights, distance and position.
inline std::vector<Triple> frame_evidence(const KnowledgeGraph& kg, std::string_view frame) {
    std::vector<Triple> out;
    const auto& triples = kg.triples();
    auto it = std::lower_bound(triples.begin(), triples.end(), std::string(frame),
                               [](const Triple& t, const std::string& s) { return t.subject < s; });
    for (; it != triples.end() && it->subject == frame; ++it) {
        if (!is_evidence_relation(it->relation)) continue;
        if (it->relation == Relation::Includes && kg.kind(it->object) != EntityKind::VehicleStateValue) continue;
        out.push_back(*it);
    }
    return out;
}

inline std::optional<PedestriansScene> frame_label(const KnowledgeGraph& kg, std::string_view frame) {
    const auto& triples = kg.triples();
    auto it = std::lower_bound(triples.begin(), triples.end(), std::string(frame),
                               [](const Triple& t, const std::string& s) { return t.subject < s; });
    for (; it != triples.end() && it->subject == frame; ++it) {
        if (it->relation == Relation::Contains) return enum_from_string<PedestriansScene>(it->object);
    }
    return std::nullopt;
}

// Adds class prototypes and the generic RoadScene entity. Every frame is
// linked to the prototype of its label; each prototype receives its members'
// evidence (filtered by `options`) with itself as subject, and RoadScene
// receives the unfiltered union over all frames.
inline KnowledgeGraph link_prototypes(const KnowledgeGraph& kg, const PrototypeOptions& options = {}) {
    if (kg.has_prototypes()) throw GraphError("link_prototypes: graph already has prototype links");
    std::vector<std::uint32_t> frames;
    for (std::uint32_t e = 0; e < kg.num_entities(); ++e)
        if (kg.kind(e) == EntityKind::Frame) frames.push_back(e);
    if (frames.empty()) return kg;

    KgBuilder b(kg);
    b.add_vocabulary(kRoadScene);
    for (auto label : enum_values<PedestriansScene>()) {
        b.add_vocabulary(prototype_entity(label));
        b.add_vocabulary(label_entity(label));
        b.add(std::string(prototype_entity(label)), Relation::Contains, std::string(label_entity(label)));
    }

    constexpr std::size_t kLabels = enum_count<PedestriansScene>();
    std::array<std::size_t, kLabels> members{};
    std::map<std::pair<Relation, std::string>, std::array<std::size_t, kLabels>> support;

    for (auto f : frames) {
        const auto& name = kg.entities()[f];
        auto label = frame_label(kg, name);
        if (!label) throw GraphError("frame '" + name + "' has no pedestrians_scene triple");
        const auto li = static_cast<std::size_t>(*label);
        ++members[li];
        b.add(name, Relation::InstanceOfSceneClass, std::string(prototype_entity(*label)));
        for (const auto& t : frame_evidence(kg, name)) ++support[{t.relation, t.object}][li];
    }

    const std::string generic(kRoadScene);
    for (auto label : enum_values<PedestriansScene>()) {
        if (members[static_cast<std::size_t>(label)] > 0)
            b.add(generic, Relation::Contains, std::string(label_entity(label)));
    }

    const double total_frames = static_cast<double>(frames.size());
    for (const auto& [item, counts] : support) {
        const auto& [rel, object] = item;
        b.add(generic, rel, object);
        std::size_t total = 0;
        for (auto c : counts) total += c;
        const double overall = static_cast<double>(total) / total_frames;
        for (auto label : enum_values<PedestriansScene>()) {
            const auto li = static_cast<std::size_t>(label);
            if (counts[li] == 0) continue;
            const double in_class = static_cast<double>(counts[li]) / static_cast<double>(members[li]);
            if (in_class < options.min_support) continue;
            if (options.min_lift > 0.0 && in_class < options.min_lift * overall) continue;
            b.add(std::string(prototype_entity(label)), rel, object);
        }
    }
    return std::move(b).finish();
}

inline KnowledgeGraph build_kg(const std::vector<RoadSceneDocument>& corpus, const BuildOptions& options = {}) {
    KgBuilder b;
    std::set<std::string> seen;
    for (const auto& doc : corpus) {
        const auto& id = doc.context.scene_id;
        auto violations = validate_document(doc);
        if (!violations.empty()) throw GraphError("scene '" + id + "' is invalid: " + violations.front());
        if (vocabulary_kind(id)) throw GraphError("scene '" + id + "' collides with a vocabulary entity name");
        if (!seen.insert(id).second) throw GraphError("duplicate scene id '" + id + "'");
        detail::add_scene(b, doc);
    }
    auto kg = std::move(b).finish();
    if (options.link_prototypes) return link_prototypes(kg, options.prototypes);
    return kg;
}

struct KgStats {
    std::size_t entities = 0;
    std::size_t relations = 0;
    std::size_t triples = 0;
    std::map<std::string, std::size_t> per_relation;
    std::map<std::string, std::size_t> frames_per_label;

    friend bool operator==(const KgStats&, const KgStats&) = default;
};

inline KgStats kg_stats(const KnowledgeGraph& kg) {
    KgStats s;
    s.entities = kg.num_entities();
    s.relations = kg.num_relations();
    s.triples = kg.num_triples();
    for (const auto& t : kg.triples()) {
        ++s.per_relation[std::string(relation_name(t.relation))];
        if (t.relation == Relation::Contains && kg.kind(t.subject) == EntityKind::Frame) ++s.frames_per_label[t.object];
    }
    return s;
}

inline std::string format_stats(const KgStats& s) {
    std::ostringstream out;
    out << "entities\t" << s.entities << "\nrelations\t" << s.relations << "\ntriples\t" << s.triples << '\n';
    for (const auto& [rel, n] : s.per_relation) out << "relation\t" << rel << '\t' << n << '\n';
    for (const auto& [label, n] : s.frames_per_label) out << "frames\t" << label << '\t' << n << '\n';
    return out.str();
}

// subject<TAB>relation<TAB>object per line, sorted, newline-terminated.
inline std::string export_tsv(const KnowledgeGraph& kg) {
    std::string out;
    for (const auto& t : kg.triples()) {
        out += t.subject;
        out += '\t';
        out += relation_name(t.relation);
        out += '\t';
        out += t.object;
        out += '\n';
    }
    return out;
}

// Entity kinds are recovered from the naming scheme used by build_kg.
inline KnowledgeGraph import_tsv(std::string_view text) {
    KgBuilder b;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string_view::npos || line.find('\t', t2 + 1) != std::string_view::npos) {
            throw GraphError("triple file line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
        }
        const std::string subject(line.substr(0, t1));
        const auto rel = relation_from_name(line.substr(t1 + 1, t2 - t1 - 1));
        const std::string object(line.substr(t2 + 1));
        if (!rel) throw GraphError("triple file line " + std::to_string(line_no) + ": unknown relation");
        b.add_entity(subject, infer_entity_kind(subject));
        b.add_entity(object, infer_entity_kind(object));
        b.add(subject, *rel, object);
    }
    return std::move(b).finish();
}

}  // namespace occlukg
