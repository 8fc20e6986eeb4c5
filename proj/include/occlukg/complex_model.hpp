#pragma once

// ComplEx embeddings: complex-valued entity and relation vectors scored by
// Re(<e_s, w_r, conj(e_o)>).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "occlukg/error.hpp"
#include "occlukg/knowledge_graph.hpp"

namespace occlukg {

// Dense index <-> name tables carried with a model.
class Vocabulary {
public:
    Vocabulary() = default;
    Vocabulary(std::vector<std::string> entities, std::vector<std::string> relations)
        : entities_(std::move(entities)), relations_(std::move(relations)) {
        for (std::size_t i = 0; i < entities_.size(); ++i) entity_lookup_.emplace(entities_[i], static_cast<std::uint32_t>(i));
        for (std::size_t i = 0; i < relations_.size(); ++i) relation_lookup_.emplace(relations_[i], static_cast<std::uint32_t>(i));
    }
    static Vocabulary from_graph(const KnowledgeGraph& kg) {
        std::vector<std::string> rels;
        for (auto r : kg.relations()) rels.emplace_back(relation_name(r));
        return Vocabulary(kg.entities(), std::move(rels));
    }

    const std::vector<std::string>& entities() const { return entities_; }
    const std::vector<std::string>& relations() const { return relations_; }

    std::optional<std::uint32_t> entity(std::string_view name) const {
        auto it = entity_lookup_.find(std::string(name));
        return it == entity_lookup_.end() ? std::nullopt : std::optional<std::uint32_t>(it->second);
    }
    std::optional<std::uint32_t> relation(std::string_view name) const {
        auto it = relation_lookup_.find(std::string(name));
        return it == relation_lookup_.end() ? std::nullopt : std::optional<std::uint32_t>(it->second);
    }
    std::optional<IndexedTriple> index(std::string_view s, std::string_view r, std::string_view o) const {
        auto si = entity(s);
        auto ri = relation(r);
        auto oi = entity(o);
        if (!si || !ri || !oi) return std::nullopt;
        return IndexedTriple{*si, *ri, *oi};
    }

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.entities_ == b.entities_ && a.relations_ == b.relations_;
    }

private:
    std::vector<std::string> entities_;
    std::vector<std::string> relations_;
    std::unordered_map<std::string, std::uint32_t> entity_lookup_;
    std::unordered_map<std::string, std::uint32_t> relation_lookup_;
};

// Platt parameters: p = sigmoid(a * score + b).
struct Calibration {
    double a = 1.0;
    double b = 0.0;
    bool fitted = false;
    bool degenerate = false;  // fit fell back to the identity mapping

    friend bool operator==(const Calibration&, const Calibration&) = default;
};

// Row i of a table holds 2k doubles: k real parts followed by k imaginary parts.
class ComplexModel {
public:
    ComplexModel() = default;
    ComplexModel(std::size_t num_entities, std::size_t num_relations, std::size_t k)
        : k_(k), entities_(num_entities * 2 * k, 0.0), relations_(num_relations * 2 * k, 0.0) {}

    std::size_t dim() const { return k_; }
    std::size_t num_entities() const { return k_ == 0 ? 0 : entities_.size() / (2 * k_); }
    std::size_t num_relations() const { return k_ == 0 ? 0 : relations_.size() / (2 * k_); }

    std::span<double> entity(std::size_t i) { return {entities_.data() + i * 2 * k_, 2 * k_}; }
    std::span<const double> entity(std::size_t i) const { return {entities_.data() + i * 2 * k_, 2 * k_}; }
    std::span<double> relation(std::size_t i) { return {relations_.data() + i * 2 * k_, 2 * k_}; }
    std::span<const double> relation(std::size_t i) const { return {relations_.data() + i * 2 * k_, 2 * k_}; }

    std::vector<double>& entity_table() { return entities_; }
    const std::vector<double>& entity_table() const { return entities_; }
    std::vector<double>& relation_table() { return relations_; }
    const std::vector<double>& relation_table() const { return relations_; }

    Calibration calibration;
    Vocabulary vocabulary;

    bool valid(const IndexedTriple& t) const {
        return t.subject < num_entities() && t.object < num_entities() && t.relation < num_relations();
    }
    void check(const IndexedTriple& t) const {
        if (!valid(t)) {
            throw Error("triple index out of range: (" + std::to_string(t.subject) + ", " + std::to_string(t.relation) +
                        ", " + std::to_string(t.object) + ")");
        }
    }

    bool all_finite() const {
        for (double v : entities_) if (!std::isfinite(v)) return false;
        for (double v : relations_) if (!std::isfinite(v)) return false;
        return std::isfinite(calibration.a) && std::isfinite(calibration.b);
    }

    friend bool operator==(const ComplexModel& a, const ComplexModel& b) {
        return a.k_ == b.k_ && a.entities_ == b.entities_ && a.relations_ == b.relations_ &&
               a.calibration.a == b.calibration.a && a.calibration.b == b.calibration.b &&
               a.vocabulary == b.vocabulary;
    }

private:
    std::size_t k_ = 0;
    std::vector<double> entities_;
    std::vector<double> relations_;
};

inline double init_bound(std::size_t k) { return std::sqrt(6.0 / (2.0 * static_cast<double>(k))); }

// Uniform in [-sqrt(6/2k), +sqrt(6/2k)]; entity table first, then relations.
inline ComplexModel init_embeddings(std::size_t num_entities, std::size_t num_relations, std::size_t k,
                                    std::uint64_t seed) {
    if (k < 1) throw Error("init_embeddings: k must be >= 1");
    if (num_entities == 0) throw Error("init_embeddings: graph has no entities");
    ComplexModel model(num_entities, num_relations, k);
    const double bound = init_bound(k);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-bound, bound);
    for (double& v : model.entity_table()) v = uniform(rng);
    for (double& v : model.relation_table()) v = uniform(rng);
    return model;
}

inline ComplexModel init_embeddings(const KnowledgeGraph& kg, std::size_t k, std::uint64_t seed) {
    ComplexModel model = init_embeddings(kg.num_entities(), kg.num_relations(), k, seed);
    model.vocabulary = Vocabulary::from_graph(kg);
    return model;
}

// Re(sum_j s_j * r_j * conj(o_j)), spelled out over real/imaginary parts.
inline double complex_score(std::span<const double> s, std::span<const double> r, std::span<const double> o) {
    const std::size_t k = s.size() / 2;
    const double* sr = s.data();
    const double* si = s.data() + k;
    const double* rr = r.data();
    const double* ri = r.data() + k;
    const double* orr = o.data();
    const double* oi = o.data() + k;
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double pr = sr[j] * rr[j] - si[j] * ri[j];
        const double pi = sr[j] * ri[j] + si[j] * rr[j];
        acc += pr * orr[j] + pi * oi[j];
    }
    return acc;
}

inline double score_triple(const ComplexModel& model, const IndexedTriple& t) {
    model.check(t);
    return complex_score(model.entity(t.subject), model.relation(t.relation), model.entity(t.object));
}

struct TripleGradient {
    std::vector<double> subject;   // d score / d e_s, [re..., im...]
    std::vector<double> relation;  // d score / d w_r
    std::vector<double> object;    // d score / d e_o
};

// Accumulates `scale * d score / d (s, r, o)` into the given buffers.
inline void accumulate_score_gradient(std::span<const double> s, std::span<const double> r, std::span<const double> o,
                                      double scale, std::span<double> gs, std::span<double> gr, std::span<double> go) {
    const std::size_t k = s.size() / 2;
    for (std::size_t j = 0; j < k; ++j) {
        const double a = s[j], b = s[k + j];
        const double c = r[j], d = r[k + j];
        const double e = o[j], f = o[k + j];
        // score_j = (ac - bd) e + (ad + bc) f
        gs[j] += scale * (c * e + d * f);
        gs[k + j] += scale * (c * f - d * e);
        gr[j] += scale * (a * e + b * f);
        gr[k + j] += scale * (a * f - b * e);
        go[j] += scale * (a * c - b * d);
        go[k + j] += scale * (a * d + b * c);
    }
}

inline TripleGradient score_gradient(const ComplexModel& model, const IndexedTriple& t) {
    model.check(t);
    const std::size_t n = 2 * model.dim();
    TripleGradient g{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
    accumulate_score_gradient(model.entity(t.subject), model.relation(t.relation), model.entity(t.object), 1.0,
                              g.subject, g.relation, g.object);
    if (t.subject == t.object) {
        // Same row in both slots: the total derivative is the sum.
        for (std::size_t i = 0; i < n; ++i) g.subject[i] = g.object[i] = g.subject[i] + g.object[i];
    }
    return g;
}

// ---- checkpoint ----
//
// "OCKG", u32 version, u32 k, u32 |E|, u32 |R|, f64 a, f64 b, then the entity
// table (all real parts row-major, then all imaginary parts) and the relation
// table in the same layout. Little-endian throughout. The sidecar
// "<path>.ids" lists "entity<TAB>index<TAB>id" and "relation<TAB>index<TAB>id".

inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::string_view& in) {
    if (in.size() < sizeof(T)) throw Error("checkpoint truncated");
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, in.data(), sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    in.remove_prefix(sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

inline void put_table(std::string& out, const std::vector<double>& table, std::size_t k) {
    const std::size_t rows = k == 0 ? 0 : table.size() / (2 * k);
    for (std::size_t part = 0; part < 2; ++part)
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < k; ++j) put_le<double>(out, table[i * 2 * k + part * k + j]);
}

inline void get_table(std::string_view& in, std::vector<double>& table, std::size_t k) {
    const std::size_t rows = k == 0 ? 0 : table.size() / (2 * k);
    for (std::size_t part = 0; part < 2; ++part)
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < k; ++j) table[i * 2 * k + part * k + j] = get_le<double>(in);
}

}  // namespace detail

inline std::string encode_checkpoint(const ComplexModel& model) {
    std::string out = "OCKG";
    detail::put_le<std::uint32_t>(out, kCheckpointVersion);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.dim()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.num_entities()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.num_relations()));
    detail::put_le<double>(out, model.calibration.a);
    detail::put_le<double>(out, model.calibration.b);
    detail::put_table(out, model.entity_table(), model.dim());
    detail::put_table(out, model.relation_table(), model.dim());
    return out;
}

inline std::string encode_vocabulary(const Vocabulary& vocab) {
    std::string out;
    for (std::size_t i = 0; i < vocab.entities().size(); ++i)
        out += "entity\t" + std::to_string(i) + '\t' + vocab.entities()[i] + '\n';
    for (std::size_t i = 0; i < vocab.relations().size(); ++i)
        out += "relation\t" + std::to_string(i) + '\t' + vocab.relations()[i] + '\n';
    return out;
}

inline Vocabulary decode_vocabulary(std::string_view text) {
    std::vector<std::string> entities, relations;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) throw Error("vocabulary sidecar: malformed line '" + line + "'");
        const auto kind = line.substr(0, t1);
        const auto index = std::stoul(line.substr(t1 + 1, t2 - t1 - 1));
        auto& target = kind == "entity" ? entities : kind == "relation" ? relations : throw Error("vocabulary sidecar: bad tag");
        if (index != target.size()) throw Error("vocabulary sidecar: indices must be dense and ordered");
        target.push_back(line.substr(t2 + 1));
    }
    return Vocabulary(std::move(entities), std::move(relations));
}

inline ComplexModel decode_checkpoint(std::string_view bytes, Vocabulary vocab = {}) {
    if (bytes.substr(0, 4) != "OCKG") throw Error("not an OCKG checkpoint");
    bytes.remove_prefix(4);
    const auto version = detail::get_le<std::uint32_t>(bytes);
    if (version != kCheckpointVersion) throw Error("unsupported checkpoint version " + std::to_string(version));
    const auto k = detail::get_le<std::uint32_t>(bytes);
    const auto ne = detail::get_le<std::uint32_t>(bytes);
    const auto nr = detail::get_le<std::uint32_t>(bytes);
    ComplexModel model(ne, nr, k);
    model.calibration.a = detail::get_le<double>(bytes);
    model.calibration.b = detail::get_le<double>(bytes);
    model.calibration.fitted = !(model.calibration.a == 1.0 && model.calibration.b == 0.0);
    detail::get_table(bytes, model.entity_table(), k);
    detail::get_table(bytes, model.relation_table(), k);
    if (!bytes.empty()) throw Error("checkpoint has trailing bytes");
    if (!vocab.entities().empty() || !vocab.relations().empty()) {
        if (vocab.entities().size() != ne || vocab.relations().size() != nr) {
            throw Error("vocabulary sidecar does not match checkpoint dimensions");
        }
    }
    model.vocabulary = std::move(vocab);
    return model;
}

inline std::filesystem::path vocabulary_path(const std::filesystem::path& checkpoint) {
    auto p = checkpoint;
    p += ".ids";
    return p;
}

inline void save_model(const ComplexModel& model, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto write = [](const std::filesystem::path& p, const std::string& bytes) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + p.string() + "' for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error("failed writing '" + p.string() + "'");
    };
    write(path, encode_checkpoint(model));
    write(vocabulary_path(path), encode_vocabulary(model.vocabulary));
}

// The sidecar is optional; without it the model has no names.
inline ComplexModel load_model(const std::filesystem::path& path) {
    auto read = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw Error("cannot open '" + p.string() + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    Vocabulary vocab;
    if (std::filesystem::exists(vocabulary_path(path))) vocab = decode_vocabulary(read(vocabulary_path(path)));
    return decode_checkpoint(read(path), std::move(vocab));
}

}  // namespace occlukg
