#include <catch_amalgamated.hpp>

#include <set>

#include "fixtures.hpp"

using namespace occlukg;

namespace {

std::vector<RoadSceneDocument> only(const std::vector<RoadSceneDocument>& corpus, Environment env) {
    std::vector<RoadSceneDocument> out;
    for (const auto& d : corpus)
        if (d.context.environment == env) out.push_back(d);
    return out;
}

std::set<std::string> scene_and_frame_entities(const KnowledgeGraph& kg) {
    std::set<std::string> out;
    for (const auto& e : kg.entities()) {
        const auto k = kg.kind(e);
        if (k == EntityKind::Scene || k == EntityKind::Frame) out.insert(e);
    }
    return out;
}

}  // namespace

TEST_CASE("fold sizes follow the dataset sampling table", "[split]") {
    const auto corpus = generate_corpus(default_config(), 0);
    SECTION("Real 40 = 32 train + 8 test") {
        const auto real = only(corpus, Environment::Real);
        REQUIRE(real.size() == 40);
        const auto folds = assign_folds(real, {{Environment::Real, {32, 8}}}, 1);
        CHECK(folds.train.size() + folds.validation.size() == 32);
        CHECK(folds.validation.size() == 3);
        CHECK(folds.test.size() == 8);
    }
    SECTION("Virtual 59 = 50 train + 9 test") {
        const auto folds = assign_folds(corpus, {{Environment::Virtual, {50, 9}}}, 1);
        CHECK(folds.train.size() + folds.validation.size() == 50);
        CHECK(folds.validation.size() == 5);
        CHECK(folds.test.size() == 9);
    }
}

TEST_CASE("folds are deterministic and disjoint", "[split]") {
    const auto corpus = generate_corpus(default_config(), 4);
    const std::map<Environment, SplitCounts> counts{{Environment::Real, {32, 8}}, {Environment::Virtual, {50, 9}}};
    const auto a = assign_folds(corpus, counts, 77);
    const auto b = assign_folds(corpus, counts, 77);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);

    std::set<std::string> all;
    for (const auto* fold : {&a.train, &a.validation, &a.test})
        for (const auto& id : *fold) CHECK(all.insert(id).second);
    CHECK(all.size() == 99);

    const auto c = assign_folds(corpus, counts, 78);
    CHECK((c.test != a.test || c.train != a.train));
}

TEST_CASE("requests beyond availability fail", "[split]") {
    const auto corpus = generate_corpus(default_config(), 0);
    CHECK_THROWS_AS(assign_folds(corpus, {{Environment::Real, {35, 8}}}, 0), SplitError);
    CHECK_THROWS_AS(assign_folds(corpus, {{Environment::Real, {32, 8}}}, 0, 1.0), SplitError);
}

TEST_CASE("triple split keeps scenes and frames in one fold", "[split]") {
    auto cfg = default_config();
    cfg.scenes = {10, 12};
    const auto corpus = generate_corpus(cfg, 9);
    const std::map<Environment, SplitCounts> counts{{Environment::Real, {7, 3}}, {Environment::Virtual, {9, 3}}};
    const auto split = split_corpus(corpus, counts, 5, SplitOptions{0.25, {}});

    const auto train_entities = scene_and_frame_entities(split.train);
    std::set<std::string> train_ids(split.scenes.train.begin(), split.scenes.train.end());
    for (const auto& id : split.scenes.test) CHECK_FALSE(train_entities.count(id));
    for (const auto& id : split.scenes.validation) CHECK_FALSE(train_entities.count(id));
    for (const auto& d : corpus) {
        const bool in_train = train_ids.count(d.context.scene_id) > 0;
        for (const auto& f : d.frames)
            CHECK(train_entities.count(frame_entity(d.context.scene_id, f.frame_number)) == (in_train ? 1u : 0u));
    }

    // Held-out triples are class level and index into the training graph.
    REQUIRE_FALSE(split.validation.empty());
    REQUIRE_FALSE(split.test.empty());
    for (const auto* fold : {&split.validation, &split.test}) {
        for (const auto& t : *fold) {
            REQUIRE(t.subject < split.train.num_entities());
            REQUIRE(t.object < split.train.num_entities());
            const auto k = split.train.kind(t.subject);
            CHECK((k == EntityKind::ClassPrototype || k == EntityKind::GenericScene));
        }
    }
}

TEST_CASE("dominant label breaks ties in enum order", "[split]") {
    auto doc = fixtures::occluded_example("s", 2);
    doc.frames.push_back(FrameAnnotation{5, PedestriansScene::NonePedestrian, {}, {}});
    doc.frames.push_back(FrameAnnotation{6, PedestriansScene::NonePedestrian, {}, {}});
    CHECK(dominant_label(doc) == PedestriansScene::NonePedestrian);
    doc.frames.pop_back();
    CHECK(dominant_label(doc) == PedestriansScene::PedestrianOccluded);
}
