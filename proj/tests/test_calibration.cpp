#include <catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"

using namespace occlukg;

namespace {

double log_loss(const std::vector<double>& pos, const std::vector<double>& neg, double a, double b) {
    double acc = 0.0;
    for (double s : pos) acc -= std::log(1.0 / (1.0 + std::exp(-(a * s + b))));
    for (double s : neg) acc -= std::log(1.0 - 1.0 / (1.0 + std::exp(-(a * s + b))));
    return acc;
}

}  // namespace

TEST_CASE("Platt fit on separated scores", "[calibration]") {
    const std::vector<double> pos(20, 10.0), neg(20, -10.0);
    const auto c = fit_platt(pos, neg);
    CHECK(c.fitted);
    CHECK_FALSE(c.degenerate);
    CHECK(calibrated_probability(c, 10.0) >= 0.99);
    CHECK(calibrated_probability(c, -10.0) <= 0.01);
}

TEST_CASE("Platt fit on identical distributions returns the base rate", "[calibration]") {
    std::vector<double> pos, neg;
    for (int rep = 0; rep < 10; ++rep)
        for (double s : {-1.0, 0.0, 1.0}) pos.push_back(s);
    for (int rep = 0; rep < 30; ++rep)
        for (double s : {-1.0, 0.0, 1.0}) neg.push_back(s);
    const auto c = fit_platt(pos, neg);
    for (double s : {-1.0, 0.0, 1.0}) CHECK(calibrated_probability(c, s) == Catch::Approx(0.25).margin(1e-3));
}

TEST_CASE("Platt fit reaches the grid-search optimum", "[calibration]") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> p(1.0, 1.0), n(-0.5, 1.5);
    std::vector<double> pos(200), neg(300);
    for (auto& s : pos) s = p(rng);
    for (auto& s : neg) s = n(rng);
    const auto c = fit_platt(pos, neg);
    double best = std::numeric_limits<double>::infinity();
    for (double a = 0.02; a <= 4.0; a += 0.02)
        for (double b = -3.0; b <= 3.0; b += 0.02) best = std::min(best, log_loss(pos, neg, a, b));
    CHECK(log_loss(pos, neg, c.a, c.b) <= best + 1e-9);
}

TEST_CASE("degenerate and invalid calibration inputs", "[calibration]") {
    const std::vector<double> same(5, 0.3);
    const auto c = fit_platt(same, same);
    CHECK(c.degenerate);
    CHECK(c.a == 1.0);
    CHECK(c.b == 0.0);

    ComplexModel m(3, 1, 2);
    const std::vector<IndexedTriple> positives{{0, 0, 1}};
    CHECK_THROWS_AS(calibrate(m, positives, std::vector<IndexedTriple>{}), Error);
}

TEST_CASE("triple_probability midpoint and cap", "[calibration]") {
    ComplexModel m(2, 1, 1);
    CHECK(triple_probability(m, {0, 0, 1}) == 0.5);
    m.entity(0)[0] = 1e3;
    m.entity(1)[0] = 1e3;
    m.relation(0)[0] = 1.0;
    CHECK(triple_probability(m, {0, 0, 1}) == 1.0 - kProbabilityFloor);
    m.relation(0)[0] = -1.0;
    CHECK(triple_probability(m, {0, 0, 1}) == kProbabilityFloor);
}

TEST_CASE("named triple probabilities need a known vocabulary", "[calibration]") {
    const auto kg = build_kg({fixtures::occluded_example("s")});
    const auto m = init_embeddings(kg, 4, 1);
    CHECK_NOTHROW(triple_probability(m, "RoadScene", "contains", "PedestrianOccluded"));
    CHECK_THROWS_AS(triple_probability(m, "RoadScene", "contains", "Unicorn"), Error);
}

TEST_CASE("calibration negatives avoid known triples", "[calibration]") {
    const auto kg = build_kg({fixtures::occluded_example("s", 2), fixtures::minimal_document("t")});
    const auto& pos = kg.indexed_triples();
    const auto negs = calibration_negatives(pos, kg.num_entities(), kg.known(), 9);
    CHECK(negs.size() == pos.size());
    for (const auto& n : negs) CHECK_FALSE(kg.contains(n));
    CHECK(calibration_negatives(pos, kg.num_entities(), kg.known(), 9) == negs);
}
