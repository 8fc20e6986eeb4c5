#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <json.hpp>

#include "fixtures.hpp"

using namespace occlukg;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(OCCLUKG_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "occlukg_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

std::map<std::string, std::string> directory_bytes(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    return out;
}

std::vector<RoadSceneDocument> planted() {
    std::vector<RoadSceneDocument> out;
    for (int i = 0; i < 5; ++i)
        out.push_back(fixtures::labelled_scene("occ_" + std::to_string(i), PedestriansScene::PedestrianOccluded,
                                               VehicleState::Decelerating, true, Surroundings::Vegetation, 4));
    for (int i = 0; i < 5; ++i)
        out.push_back(fixtures::labelled_scene("none_" + std::to_string(i), PedestriansScene::NonePedestrian,
                                               VehicleState::ContinuousMovement, false, Surroundings::Clear, 4));
    return out;
}

const char* kFastTraining = "--k 16 --lr 0.01 --batch 200 --max-epochs 200 --check-interval 10 --patience 10";

}  // namespace

TEST_CASE("gen", "[cli]") {
    const auto dir = scratch("gen");
    auto r = run("gen --out " + q(dir / "a") + " --seed 4");
    REQUIRE(r.code == 0);
    CHECK(corpus_files(dir / "a").size() == 99);
    CHECK(fs::exists(dir / "a" / "manifest.tsv"));
    CHECK(read_file(dir / "a" / "effective-config.txt").find("seed = 4") != std::string::npos);

    REQUIRE(run("gen --out " + q(dir / "b") + " --seed 4").code == 0);
    CHECK(directory_bytes(dir / "a") == directory_bytes(dir / "b"));

    CHECK(run("gen --seed 1").code == 2);
    write_file(dir / "bad.cfg", "state.PedestrianOccluded = 1 1 1 1\n");
    CHECK(run("gen --out " + q(dir / "c") + " --config " + q(dir / "bad.cfg")).code == 2);
    write_file(dir / "small.cfg", "real.scenes = 2\nvirtual.scenes = 1\n");
    REQUIRE(run("gen --out " + q(dir / "d") + " --config " + q(dir / "small.cfg")).code == 0);
    CHECK(corpus_files(dir / "d").size() == 3);
}

TEST_CASE("build-kg", "[cli]") {
    const auto dir = scratch("build");
    write_corpus(dir / "min", {fixtures::minimal_document("m")});
    auto r = run("build-kg --corpus " + q(dir / "min") + " --out " + q(dir / "min.tsv"));
    REQUIRE(r.code == 0);
    CHECK(r.out.find("triples\t") != std::string::npos);
    const auto text = read_file(dir / "min.tsv");
    CHECK(export_tsv(import_tsv(text)) == text);
    CHECK(import_tsv(text) == build_kg({fixtures::minimal_document("m")}));
    CHECK(fs::exists(dir / "effective-config.txt"));
    REQUIRE(run("build-kg --corpus " + q(dir / "min") + " --out " + q(dir / "deep" / "er" / "min.tsv")).code == 0);
    CHECK(read_file(dir / "deep" / "er" / "min.tsv") == text);

    write_corpus(dir / "fig", {fixtures::occluded_example("fig")});
    REQUIRE(run("build-kg --corpus " + q(dir / "fig") + " --out " + q(dir / "fig.tsv")).code == 0);
    CHECK(read_file(dir / "fig.tsv").find("SceneWithOccludedPed\tthereIs\tZebraCrossing\n") != std::string::npos);

    auto bad = fixtures::minimal_document("bad_scene");
    bad.frames[0].pedestrians_scene = PedestriansScene::PedestrianOccluded;
    fs::create_directories(dir / "broken");
    write_file(dir / "broken" / "bad_scene.xml", serialize_scene_xml(bad));
    write_file(dir / "broken" / "ok.xml", serialize_scene_xml(fixtures::minimal_document("ok")));
    CHECK(run("build-kg --corpus " + q(dir / "broken") + " --out " + q(dir / "x.tsv")).code == 3);
    const std::string cmd = std::string(OCCLUKG_CLI) + " build-kg --corpus " + q(dir / "broken") + " --out " +
                            q(dir / "x.tsv") + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    std::string err;
    char buf[512];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) err.append(buf, n);
    pclose(pipe);
    CHECK(err.find("bad_scene") != std::string::npos);
}

TEST_CASE("train and predict", "[cli]") {
    const auto dir = scratch("train");
    write_corpus(dir / "corpus", planted());
    REQUIRE(run("build-kg --corpus " + q(dir / "corpus") + " --out " + q(dir / "kg.tsv") + " --min-lift 1").code == 0);

    auto r = run("train --kg " + q(dir / "kg.tsv") + " --out " + q(dir / "m" / "model.bin") + " " + kFastTraining);
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "m" / "model.bin"));
    CHECK(fs::exists(dir / "m" / "model.bin.ids"));
    CHECK(fs::exists(dir / "m" / "effective-config.txt"));
    const auto history = read_file(dir / "m" / "model.bin.history.tsv");
    CHECK(history.rfind("check\t0\t", 0) == 0);
    CHECK(history.find("\ncheck\t10\t") != std::string::npos);

    CHECK(run("train --kg " + q(dir / "kg.tsv") + " --out " + q(dir / "x.bin") + " --bogus").code == 2);
    CHECK(run("train --kg " + q(dir / "kg.tsv") + " --out " + q(dir / "x.bin") + " --k 0").code == 2);
    CHECK(run("train --kg " + q(dir / "kg.tsv") + " --out " + q(dir / "x.bin") + " --lr 1e300 --batch 10").code == 4);

    SECTION("three hypothesis records") {
        const auto scene = dir / "corpus" / "occ_0.xml";
        auto p = run("predict --model " + q(dir / "m" / "model.bin") + " --scene " + q(scene) + " --frame 0");
        REQUIRE(p.code == 0);
        std::vector<nlohmann::json> lines;
        std::istringstream in(p.out);
        std::string line;
        while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
        REQUIRE(lines.size() == 3);
        CHECK(lines[0]["hypothesis"] == "PedestrianOccluded");
        CHECK(lines[1]["hypothesis"] == "PedestrianNotOccluded");
        CHECK(lines[2]["hypothesis"] == "NonePedestrian");
        CHECK(lines[0]["predicted"] == "PedestrianOccluded");
        CHECK(lines[0]["truncated"] == true);
        CHECK(lines[0]["horizon"] == 30);
        CHECK(run("predict --model " + q(dir / "m" / "model.bin") + " --scene " + q(scene) + " --frame 99").code == 2);
    }
    SECTION("planted quiet frame") {
        const auto scene = dir / "corpus" / "none_0.xml";
        auto p = run("predict --model " + q(dir / "m" / "model.bin") + " --scene " + q(scene) + " --frame 1");
        REQUIRE(p.code == 0);
        CHECK(p.out.find("\"predicted\":\"NonePedestrian\"") != std::string::npos);
    }
    SECTION("frame without usable evidence keeps the prior") {
        std::vector<RoadSceneDocument> wooded;
        for (auto label : kHypothesisOrder)
            wooded.push_back(fixtures::labelled_scene("w_" + std::string(to_string(label)), label,
                                                      VehicleState::Decelerating, true, Surroundings::Vegetation, 3));
        write_corpus(dir / "wooded", wooded);
        REQUIRE(run("build-kg --corpus " + q(dir / "wooded") + " --out " + q(dir / "wooded.tsv")).code == 0);
        REQUIRE(run("train --kg " + q(dir / "wooded.tsv") + " --out " + q(dir / "w" / "model.bin") + " " +
                    kFastTraining)
                    .code == 0);

        auto doc = fixtures::minimal_document("novel");
        doc.context.lanes = 5;
        write_file(dir / "novel.xml", serialize_scene_xml(doc));
        auto p = run("predict --model " + q(dir / "w" / "model.bin") + " --scene " + q(dir / "novel.xml") +
                     " --frame 0 --horizon 0");
        REQUIRE(p.code == 0);
        std::istringstream in(p.out);
        std::string line;
        std::size_t records = 0;
        while (std::getline(in, line)) {
            const auto j = nlohmann::json::parse(line);
            ++records;
            CHECK(j["factors"].empty());
            CHECK(j["skipped"].size() == 2);
            CHECK(j["posterior"].get<double>() == j["prior"].get<double>());
        }
        CHECK(records == 3);
    }
}

TEST_CASE("experiment", "[cli]") {
    const auto dir = scratch("experiment");
    write_file(dir / "gen.cfg", "real.scenes = 6\nvirtual.scenes = 8\n");
    REQUIRE(run("gen --out " + q(dir / "corpus") + " --config " + q(dir / "gen.cfg") + " --seed 2").code == 0);
    write_file(dir / "spec.txt", R"(name = tiny
train = Virtual
test = Real Virtual
real.train = 4
real.test = 2
virtual.train = 6
virtual.test = 2
k = 8
batch_size = 500
learning_rate = 0.01
max_epochs = 10
check_interval = 5
)");
    auto r = run("experiment --corpus " + q(dir / "corpus") + " --spec " + q(dir / "spec.txt") + " --out " +
                 q(dir / "out"));
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("Train    Test     F1", 0) == 0);
    CHECK(fs::exists(dir / "out" / "tiny.txt"));
    const auto records = parse_report_records(read_file(dir / "out" / "tiny.jsonl"));
    REQUIRE(records.size() == 3);
    CHECK(records[2].test == "All");
    CHECK(read_file(dir / "out" / "effective-config.txt").find("horizon = 30\n") != std::string::npos);

    write_file(dir / "notest.txt", "name = notest\ntest =\n");
    CHECK(run("experiment --corpus " + q(dir / "corpus") + " --spec " + q(dir / "notest.txt") + " --out " +
              q(dir / "out2"))
              .code == 2);
    write_file(dir / "toomany.txt", "virtual.train = 50\n");
    CHECK(run("experiment --corpus " + q(dir / "corpus") + " --spec " + q(dir / "toomany.txt") + " --out " +
              q(dir / "out3"))
              .code == 2);
}

TEST_CASE("usage errors", "[cli]") {
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("--help").code == 0);
    CHECK(run("build-kg --corpus /nonexistent/dir --out x.tsv").code == 2);
}
