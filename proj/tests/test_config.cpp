#include <catch_amalgamated.hpp>

#include "fixtures.hpp"

using namespace occlukg;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("config text parsing", "[config]") {
    const auto entries = parse_config_text("# header\n a = 1 \n\nb=two words # trailing\n");
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].key == "a");
    CHECK(entries[0].value == "1");
    CHECK(entries[0].line == 2);
    CHECK(entries[1].value == "two words");
    CHECK(entries[1].line == 4);

    CHECK_THROWS_WITH(parse_config_text("a = 1\na = 2\n"), ContainsSubstring("line 2") && ContainsSubstring("duplicate"));
    CHECK_THROWS_WITH(parse_config_text("just words\n"), ContainsSubstring("line 1"));
    CHECK_THROWS_AS(parse_config_text(" = 3\n"), ConfigError);
}

TEST_CASE("typed values", "[config]") {
    const ConfigEntry e{"x", "0.1, 0.2 0.7", 3};
    CHECK(parse_real_list(e) == std::vector<double>{0.1, 0.2, 0.7});
    CHECK_THROWS_WITH(parse_real(ConfigEntry{"x", "abc", 4}), ContainsSubstring("line 4"));
    CHECK_THROWS_AS(parse_real(ConfigEntry{"x", "inf", 1}), ConfigError);
    CHECK_THROWS_AS(parse_unsigned(ConfigEntry{"x", "-3", 1}), ConfigError);
    CHECK_THROWS_AS(parse_unsigned(ConfigEntry{"x", "3.5", 1}), ConfigError);
    CHECK(parse_bool(ConfigEntry{"x", "yes", 1}));
    CHECK_FALSE(parse_bool(ConfigEntry{"x", "false", 1}));
    CHECK_THROWS_AS(parse_bool(ConfigEntry{"x", "maybe", 1}), ConfigError);
    for (double v : {0.1, 1.0 / 3.0, 8459.0 / 39714.0, 5e-4, 1e300})
        CHECK(parse_real(ConfigEntry{"x", format_config_real(v), 1}) == v);
}

TEST_CASE("experiment spec text", "[config][spec]") {
    const ExperimentSpec defaults;
    CHECK(defaults.horizon == 30);
    CHECK(defaults.counts.at(Environment::Real).train == 32);
    CHECK(defaults.counts.at(Environment::Real).test == 8);
    CHECK(defaults.counts.at(Environment::Virtual).train == 50);
    CHECK(defaults.counts.at(Environment::Virtual).test == 9);
    CHECK(defaults.training == TrainingConfig{});

    const auto s = parse_spec(R"(name = virtual_only
train = Virtual
test = Virtual
horizon = 12
denominator = mixture
calibration_source = validation
k = 50
learning_rate = 0.005
batch_size = 1000
prototype.min_lift = 1.5
)");
    CHECK(s.name == "virtual_only");
    CHECK(s.train == TrainData::Virtual);
    CHECK(s.test == std::vector<Environment>{Environment::Virtual});
    CHECK(s.horizon == 12);
    CHECK(s.denominator == Denominator::Mixture);
    CHECK(s.calibration == CalibrationSource::Validation);
    CHECK(s.training.k == 50);
    CHECK(s.training.learning_rate == 0.005);
    CHECK(s.prototypes.min_lift == 1.5);

    const auto again = parse_spec(format_spec(s));
    CHECK(format_spec(again) == format_spec(s));

    CHECK_THROWS_AS(parse_spec("train = Martian"), ConfigError);
    CHECK_THROWS_AS(parse_spec("test = Real Moon"), ConfigError);
    CHECK_THROWS_AS(parse_spec("name = has space"), ConfigError);
    CHECK_THROWS_AS(parse_spec("flux = 1"), ConfigError);
}

TEST_CASE("spec checks against a corpus", "[config][spec]") {
    auto cfg = default_config();
    cfg.scenes = {4, 4};
    const auto corpus = generate_corpus(cfg, 1);
    ExperimentSpec s;
    s.counts = {{Environment::Real, {3, 1}}, {Environment::Virtual, {3, 1}}};
    CHECK_NOTHROW(check_spec(s, corpus));
    s.counts[Environment::Virtual].test = 0;
    CHECK_THROWS_AS(check_spec(s, corpus), ConfigError);
    s.counts[Environment::Virtual].test = 1;
    s.test.clear();
    CHECK_THROWS_AS(check_spec(s, corpus), ConfigError);

    std::vector<RoadSceneDocument> real_only(corpus.begin(), corpus.begin() + 4);
    ExperimentSpec v;
    CHECK_THROWS_WITH(check_spec(v, real_only), ContainsSubstring("no Virtual scenes"));
}
