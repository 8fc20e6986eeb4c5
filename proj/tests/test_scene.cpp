#include <catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace occlukg;
using Catch::Matchers::ContainsSubstring;

namespace {

const char* kMinimalXml = R"(<?xml version="1.0"?>
<roadScene id="s1" environment="Real">
  <context zebraCrossing="false" lanes="1" surroundings="Clear"/>
  <frame number="0" pedestriansScene="NonePedestrian"/>
</roadScene>
)";

const char* kOccludedXml = R"(<roadScene id="fig3" environment="Virtual">
  <context zebraCrossing="true" lanes="2" surroundings="Vegetation"/>
  <frame number="12" pedestriansScene="PedestrianOccluded">
    <pedestrian id="p1" occlusion="Partial" visibleFraction="0.4"/>
    <vehicle id="v1" state="Decelerating" brakingLights="On" distance="NearToEgoVeh" position="FrontLeft"/>
  </frame>
</roadScene>)";

std::string frames_xml(const std::string& body) {
    return R"(<roadScene id="s" environment="Real"><context zebraCrossing="false" lanes="1" surroundings="Clear"/>)" +
           body + "</roadScene>";
}

}  // namespace

TEST_CASE("minimal document parses to one frame", "[scene][xml]") {
    const auto doc = parse_scene_xml(kMinimalXml);
    REQUIRE(doc.frames.size() == 1);
    CHECK(doc.context.scene_id == "s1");
    CHECK(doc.context.environment == Environment::Real);
    CHECK(doc.frames[0].pedestrians_scene == PedestriansScene::NonePedestrian);
    CHECK(doc.frames[0].vehicles.empty());
    CHECK(validate_document(doc).empty());
}

TEST_CASE("occluded-pedestrian annotation echoes its labels", "[scene][xml]") {
    const auto doc = parse_scene_xml(kOccludedXml);
    CHECK(doc.context.zebra_crossing);
    CHECK(doc.context.surroundings == Surroundings::Vegetation);
    CHECK(doc.context.lanes == 2);
    REQUIRE(doc.frames.size() == 1);
    const auto& f = doc.frames[0];
    CHECK(f.frame_number == 12);
    CHECK(f.pedestrians_scene == PedestriansScene::PedestrianOccluded);
    REQUIRE(f.pedestrians.size() == 1);
    CHECK(f.pedestrians[0].occlusion == Occlusion::Partial);
    CHECK(f.pedestrians[0].visible_fraction == 0.4);
    REQUIRE(f.vehicles.size() == 1);
    CHECK(f.vehicles[0].state == VehicleState::Decelerating);
    CHECK(f.vehicles[0].braking_lights == BrakingLights::On);
    CHECK(f.vehicles[0].distance == Distance::NearToEgoVeh);
    CHECK(f.vehicles[0].position == Position::FrontLeft);
}

TEST_CASE("decreasing frame numbers are rejected", "[scene][xml]") {
    const auto xml = frames_xml(R"(<frame number="3" pedestriansScene="NonePedestrian"/>
<frame number="1" pedestriansScene="NonePedestrian"/>)");
    CHECK_THROWS_WITH(parse_scene_xml(xml), ContainsSubstring("frames not strictly increasing"));
    CHECK_THROWS_AS(parse_scene_xml(xml), ValidationError);
}

TEST_CASE("malformed XML reports line and column", "[scene][xml]") {
    try {
        parse_scene_xml("<roadScene id=\"s\" environment=\"Real\">\n  <context\n</roadScene>");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() >= 2);
        CHECK(e.column() >= 1);
    }
}

TEST_CASE("schema violations name the element", "[scene][xml]") {
    SECTION("unknown element") {
        try {
            parse_scene_xml(frames_xml(R"(<frame number="0" pedestriansScene="NonePedestrian"><bicycle/></frame>)"));
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(e.element() == "bicycle");
        }
    }
    SECTION("bad enum spelling is case-sensitive") {
        CHECK_THROWS_AS(parse_scene_xml(frames_xml(R"(<frame number="0" pedestriansScene="nonepedestrian"/>)")),
                        ValidationError);
    }
    SECTION("missing context") {
        CHECK_THROWS_AS(parse_scene_xml(R"(<roadScene id="s" environment="Real">
<frame number="0" pedestriansScene="NonePedestrian"/></roadScene>)"),
                        ValidationError);
    }
    SECTION("unknown attribute") {
        CHECK_THROWS_AS(
            parse_scene_xml(frames_xml(R"(<frame number="0" pedestriansScene="NonePedestrian" weather="rain"/>)")),
            ValidationError);
    }
    SECTION("no frames") {
        CHECK_THROWS_AS(parse_scene_xml(frames_xml("")), ValidationError);
    }
}

TEST_CASE("serialize then parse is the identity", "[scene][xml]") {
    SECTION("minimal") {
        const auto doc = fixtures::minimal_document();
        CHECK(parse_scene_xml(serialize_scene_xml(doc)) == doc);
    }
    SECTION("every enum value") {
        RoadSceneDocument doc;
        doc.context = SceneContext{"all_enums", Environment::Virtual, true, 6, Surroundings::Vegetation};
        std::int64_t n = 0;
        for (auto label : enum_values<PedestriansScene>()) {
            for (auto occ : enum_values<Occlusion>()) {
                FrameAnnotation f;
                f.frame_number = n += 7;
                f.pedestrians_scene = label;
                if (label != PedestriansScene::NonePedestrian) {
                    const double vis = occ == Occlusion::Full ? 0.125 : 0.5;
                    f.pedestrians.push_back({"p1", occ, vis});
                    f.pedestrians.push_back({"p2", Occlusion::Partial, std::nullopt});
                }
                std::size_t v = 0;
                for (auto st : enum_values<VehicleState>())
                    for (auto bl : enum_values<BrakingLights>())
                        for (auto d : enum_values<Distance>())
                            for (auto p : enum_values<Position>())
                                f.vehicles.push_back({"v" + std::to_string(v++), st, bl, d, p});
                doc.frames.push_back(f);
            }
        }
        CHECK(parse_scene_xml(serialize_scene_xml(doc)) == doc);
    }
    SECTION("awkward visible fractions survive") {
        auto doc = fixtures::occluded_example();
        doc.frames[0].pedestrians[0].visible_fraction = 0.1 + 0.2 + 0.3;  // not exactly 0.6
        CHECK(parse_scene_xml(serialize_scene_xml(doc)) == doc);
    }
}

TEST_CASE("estimate_distance follows triangle similarity", "[scene][distance]") {
    CHECK(estimate_distance(0.5, 1000, 500) == Catch::Approx(1.0));
    CHECK(estimate_distance(0.5, 800, 8) == Catch::Approx(50.0));
    CHECK_THROWS_AS(estimate_distance(0.5, 1000, 0), DomainError);
    CHECK_THROWS_AS(estimate_distance(-0.5, 1000, 10), DomainError);
    CHECK_THROWS_AS(CameraIntrinsics(0.0, 0.5), DomainError);

    const CameraIntrinsics cam;
    CHECK(cam.known_pedestrian_width == 0.5);
    const double d = estimate_distance(cam, 40);
    CHECK(estimate_distance(0.5, 2 * cam.focal_length, 40) == Catch::Approx(2 * d));
    CHECK(estimate_distance(cam, 80) == Catch::Approx(d / 2));
}

TEST_CASE("quantize_distance buckets with upper-bucket boundaries", "[scene][distance]") {
    const DistanceThresholds t{10, 30};
    CHECK(quantize_distance(5, t) == Distance::NearToEgoVeh);
    CHECK(quantize_distance(10, t) == Distance::MiddleDisToEgoVeh);
    CHECK(quantize_distance(30, t) == Distance::FarToEgoVeh);
    CHECK_THROWS_AS(quantize_distance(std::nan(""), t), DomainError);
    CHECK_THROWS_AS(quantize_distance(5, DistanceThresholds{30, 10}), DomainError);

    int last = 0;
    for (double d = 0; d < 60; d += 0.25) {
        const int bucket = static_cast<int>(quantize_distance(d));
        CHECK(bucket >= last);
        last = bucket;
    }
}

TEST_CASE("occlusion level from visibility", "[scene][occlusion]") {
    CHECK(occlusion_level_from_visibility(true, 1.0) == Occlusion::None);
    CHECK(occlusion_level_from_visibility(false, 0.20) == Occlusion::Full);
    CHECK(occlusion_level_from_visibility(false, 0.50) == Occlusion::Partial);
    CHECK(occlusion_level_from_visibility(false, 0.25) == Occlusion::Partial);
    CHECK(occlusion_level_from_visibility(true, 0.0) == Occlusion::None);
    CHECK_THROWS_AS(occlusion_level_from_visibility(false, 1.5), DomainError);
    CHECK_THROWS_AS(occlusion_level_from_visibility(false, -0.1), DomainError);
}

TEST_CASE("validate_document reports each violation", "[scene][validate]") {
    CHECK(validate_document(fixtures::minimal_document()).empty());

    auto no_ped = fixtures::minimal_document();
    no_ped.frames[0].pedestrians_scene = PedestriansScene::PedestrianOccluded;
    CHECK(validate_document(no_ped).size() == 1);

    auto inconsistent = fixtures::occluded_example();
    inconsistent.frames[0].pedestrians[0].visible_fraction = 0.1;
    CHECK(validate_document(inconsistent).size() == 1);

    auto none_with_ped = fixtures::minimal_document();
    none_with_ped.frames[0].pedestrians.push_back({"p1", Occlusion::None, std::nullopt});
    CHECK(validate_document(none_with_ped).size() == 1);

    auto zero_lanes = fixtures::minimal_document();
    zero_lanes.context.lanes = 0;
    CHECK(validate_document(zero_lanes).size() == 1);
}

TEST_CASE("corpus directory round trip", "[scene][xml]") {
    const auto dir = std::filesystem::temp_directory_path() / "occlukg_test_scene_corpus";
    std::filesystem::remove_all(dir);
    const std::vector<RoadSceneDocument> corpus{fixtures::minimal_document("a"), fixtures::occluded_example("b", 3)};
    write_corpus(dir, corpus);
    CHECK(load_corpus(dir) == corpus);
    write_file(dir / "broken.xml", "<roadScene");
    CHECK_THROWS_WITH(load_corpus(dir), ContainsSubstring("broken.xml"));
    std::filesystem::remove_all(dir);
}
