#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "fri/compress.hpp"
#include "fri/error.hpp"
#include "helpers.hpp"

using namespace fri;
using fri::testing::MeanAccumulator;

namespace {

const SparseVector kThree = SparseVector::from_pairs({{0, 0.6}, {1, 0.25}, {2, 0.15}});

constexpr RuleKind kStochastic[] = {RuleKind::FloorCeil, RuleKind::IndependentUniform, RuleKind::Systematic,
                                    RuleKind::Stratified};

bool close(const SparseVector& a, const SparseVector& b, double tol)
{
    if (a.nnz() != b.nnz()) return false;
    for (std::size_t i = 0; i < a.nnz(); ++i) {
        if (a.entries()[i].index != b.entries()[i].index) return false;
        if (std::abs(a.entries()[i].value - b.entries()[i].value) > tol) return false;
    }
    return true;
}

// 5-sigma agreement between a Monte Carlo frequency and its exact value.
void check_frequency(std::size_t hits, std::size_t reps, double p)
{
    const double freq = static_cast<double>(hits) / static_cast<double>(reps);
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(reps));
    CHECK(std::abs(freq - p) <= 5 * se);
}

}  // namespace

TEST_CASE("rule names")
{
    for (auto k : {RuleKind::FloorCeil, RuleKind::IndependentUniform, RuleKind::Systematic, RuleKind::Stratified,
                   RuleKind::TbS})
        CHECK(parse_rule_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_rule_kind("multinomial"), Error);
    CHECK(parse_stochastic_order("magdesc") == StochasticOrder::MagnitudeDescending);
    CHECK_THROWS_AS(parse_stochastic_order("random"), Error);
}

TEST_CASE("exact preservation split follows the strict stopping rule")
{
    // l = 0: 2 * 0.6 > 1.0 keeps entry 0; l = 1: 1 * 0.25 < 0.4 stops
    auto split = exact_preservation_split(kThree, 2);
    CHECK(split.tau == 1);
    CHECK(split.preserved.to_pairs() == std::vector<Entry>{{0, 0.6}});
    CHECK(split.remainder.to_pairs() == std::vector<Entry>{{1, 0.25}, {2, 0.15}});

    // 2 * 0.5 == 1.0 is a tie and therefore not preserved
    auto tie = exact_preservation_split(SparseVector::from_pairs({{0, 0.5}, {1, 0.5}}), 2);
    CHECK(tie.tau == 0);
    CHECK(tie.remainder.nnz() == 2);

    CHECK_THROWS_AS(exact_preservation_split(SparseVector{}, 2), Error);
    CHECK_THROWS_AS(exact_preservation_split(kThree, 0), Error);
}

TEST_CASE("nnz <= m leaves only unit weights after the split (exhaustive)")
{
    // Every vector over magnitudes {1, 2, 3} (with signs) of length <= 4 and
    // every m >= nnz: the remainder weights budget |v_j| / S are all one.
    const double mags[] = {1.0, 2.0, 3.0};
    std::size_t cases = 0;
    for (std::size_t n = 1; n <= 4; ++n) {
        std::size_t combos = 1;
        for (std::size_t i = 0; i < n; ++i) combos *= 6;
        for (std::size_t code = 0; code < combos; ++code) {
            std::vector<Entry> pairs;
            std::size_t c = code;
            for (std::size_t i = 0; i < n; ++i, c /= 6)
                pairs.push_back({i, (c % 6 < 3 ? 1.0 : -1.0) * mags[c % 3]});
            const auto v = SparseVector::from_pairs(pairs);
            for (std::size_t m = n; m <= 5; ++m) {
                auto split = exact_preservation_split(v, m);
                const double s = l1_norm(split.remainder);
                const auto budget = static_cast<double>(m - split.tau);
                for (const auto& e : split.remainder) CHECK(budget * std::abs(e.value) / s == doctest::Approx(1.0));
                CHECK((split.remainder.nnz() == m - split.tau || split.remainder.empty()));
                ++cases;
            }
        }
    }
    CHECK(cases > 1000);
}

TEST_CASE("exactness: nnz <= m returns the input for every kind")
{
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 300; ++trial) {
        const auto v = testing::random_vector(gen, 1 + gen() % 20);
        const std::size_t m = v.nnz() + gen() % 5;
        for (auto kind : kStochastic) {
            RngStream rng(trial, 0);
            CHECK(compress({kind, m}, v, rng) == v);
        }
        RngStream rng(trial, 0);
        CHECK(compress({RuleKind::TbS, m, true}, v, rng) == v);
    }
}

TEST_CASE("compress rejects a zero vector and m == 0")
{
    RngStream rng(1, 1);
    CHECK_THROWS_WITH_AS(compress({RuleKind::Systematic, 3}, SparseVector{}, rng), "zero vector", Error);
    CHECK_THROWS_AS(compress({RuleKind::Systematic, 0}, kThree, rng), Error);
}

TEST_CASE("systematic on the three-entry example")
{
    // remainder {1: 0.25, 2: 0.15}, budget 1: the single threshold 0.4 U picks
    // index 1 when U < 0.625
    const std::size_t reps = 100000;
    std::size_t picked_one = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        RngStream rng(5, r);
        auto out = compress({RuleKind::Systematic, 2}, kThree, rng);
        REQUIRE(out.nnz() == 2);
        CHECK(out.at(0) == 0.6);
        const bool one = out.at(1) != 0.0;
        CHECK(std::abs(out.at(one ? 1 : 2) - 0.4) < 1e-15);
        picked_one += one;
    }
    check_frequency(picked_one, reps, 0.625);
}

TEST_CASE("systematic rounding of a remainder")
{
    const auto rem = SparseVector::from_pairs({{1, 0.25}, {2, 0.15}});
    RngStream rng(3, 9);
    auto out = stochastic_round_systematic(rem, 1, rng);
    REQUIRE(out.nnz() == 1);
    CHECK(std::abs(l1_norm(out) - 0.4) < 1e-15);

    // k equal entries with budget k reproduce themselves
    auto flat = SparseVector::from_pairs({{0, 0.1}, {3, -0.1}, {5, Complex(0, 0.1)}, {9, 0.1}});
    for (int r = 0; r < 50; ++r) {
        RngStream g(r, 1);
        CHECK(close(stochastic_round_systematic(flat, 4, g), flat, 1e-16));
    }

    // one selection per stratum: counts sum to the budget and l1 is exact
    std::mt19937_64 gen(2);
    for (int r = 0; r < 200; ++r) {
        auto v = testing::random_vector(gen, 5 + gen() % 50);
        const std::size_t budget = 1 + gen() % 30;
        RngStream g(r, 2);
        auto out = stochastic_round_systematic(v, budget, g);
        const double unit = l1_norm(v) / static_cast<double>(budget);
        double selections = 0;
        for (const auto& e : out) selections += std::abs(e.value) / unit;
        CHECK(selections == doctest::Approx(static_cast<double>(budget)).epsilon(1e-10));
        CHECK(out.nnz() <= budget);
        CHECK(std::abs(l1_norm(out) - l1_norm(v)) <= 1e-12 * l1_norm(v));
    }
}

TEST_CASE("stratified rounding")
{
    auto single = SparseVector::from_pairs({{4, Complex(0.3, -0.4)}});
    for (std::size_t budget : {1u, 2u, 7u}) {
        RngStream g(budget, 3);
        CHECK(close(stochastic_round_stratified(single, budget, g), single, 1e-15));
    }
    std::mt19937_64 gen(4);
    for (int r = 0; r < 200; ++r) {
        auto v = testing::random_vector(gen, 5 + gen() % 50);
        const std::size_t budget = 1 + gen() % 30;
        RngStream g(r, 4);
        auto out = stochastic_round_stratified(v, budget, g, r % 2 ? StochasticOrder::MagnitudeDescending
                                                                    : StochasticOrder::InputOrder);
        CHECK(out.nnz() <= budget);
        CHECK(std::abs(l1_norm(out) - l1_norm(v)) <= 1e-12 * l1_norm(v));
    }
}

TEST_CASE("floor/ceil rounding: integral weights are deterministic")
{
    // budget |v_j| / S = {2, 1, 1}
    auto v = SparseVector::from_pairs({{0, 0.5}, {1, Complex(0, -0.25)}, {2, 0.25}});
    RngStream g(1, 1);
    CHECK(close(stochastic_round_floor_ceil(v, 4, g), v, 1e-16));
}

TEST_CASE("floor/ceil rounding law including the oversize thinning")
{
    // remainder {1: .25, 2: .15}, budget 1, S = .4: entry 1 rounds up with
    // probability .625, entry 2 with .375, independently.  When both round up
    // the pair {.4, .4} is thinned systematically to a single 0.8.
    const auto rem = SparseVector::from_pairs({{1, 0.25}, {2, 0.15}});
    const std::size_t reps = 100000;
    std::map<std::string, std::size_t> hist;
    MeanAccumulator e1, e2;
    for (std::size_t r = 0; r < reps; ++r) {
        RngStream g(77, r);
        auto out = stochastic_round_floor_ceil(rem, 1, g);
        std::string key;
        for (const auto& e : out) key += std::to_string(e.index) + ":" + std::to_string(std::lround(e.value.real() * 10)) + " ";
        ++hist[key];
        e1.add(out.at(1));
        e2.add(out.at(2));
    }
    check_frequency(hist["1:4 "], reps, 0.625 * 0.625);
    check_frequency(hist["2:4 "], reps, 0.375 * 0.375);
    check_frequency(hist[""], reps, 0.375 * 0.625);
    check_frequency(hist["1:8 "] + hist["2:8 "], reps, 0.625 * 0.375);
    CHECK(hist.size() == 5);
    CHECK(std::abs(e1.mean() - 0.25) <= 5 * e1.standard_error());
    CHECK(std::abs(e2.mean() - 0.15) <= 5 * e2.standard_error());
}

TEST_CASE("independent-uniform rounding")
{
    auto single = SparseVector::from_pairs({{8, -0.7}});
    RngStream g(1, 2);
    CHECK(close(stochastic_round_independent_uniform(single, 1, g), single, 1e-16));

    // many small entries: the all-zero event is rejected, never returned
    std::vector<Entry> pairs;
    for (Index i = 0; i < 40; ++i) pairs.push_back({i, 1.0});
    auto flat = SparseVector::from_pairs(pairs);
    for (int r = 0; r < 2000; ++r) {
        RngStream gg(r, 5);
        auto out = stochastic_round_independent_uniform(flat, 1, gg);
        // k >= 1 survivors of weight 40, thinned onto one entry of weight 40 k
        CHECK(out.nnz() == 1);
        const double k = l1_norm(out) / 40.0;
        CHECK(k >= 1.0);
        CHECK(std::abs(k - std::round(k)) < 1e-12);
    }
}

TEST_CASE("all-zero probability stays below (|w| / |v + w|)^m")
{
    // v has m equal entries; w spreads 0.3 of mass over its support and 40
    // further indices.  The floor/ceil law carries no rejection, so an empty
    // output is exactly the all-zero event.
    const std::size_t m = 2;
    std::vector<Entry> pairs{{0, 0.5}, {1, 0.5}, {0, 0.02}, {1, -0.01}};
    double w_norm = 0.03;
    for (Index i = 0; i < 40; ++i) {
        pairs.push_back({10 + i, 0.27 / 40});
        w_norm += 0.27 / 40;
    }
    const auto vw = SparseVector::from_pairs(pairs);
    const double bound = std::pow(w_norm / l1_norm(vw), static_cast<double>(m));
    const std::size_t reps = 100000;
    std::size_t zeros = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        RngStream g(3, r);
        zeros += stochastic_round_floor_ceil(vw, m, g).empty();
    }
    const double p = static_cast<double>(zeros) / reps;
    CHECK(p < bound);
}

TEST_CASE("TbS truncation")
{
    auto v = SparseVector::from_pairs({{0, 0.5}, {1, 0.3}, {2, 0.2}});
    CHECK(tbs_truncate(v, 2, false).to_pairs() == std::vector<Entry>{{0, 0.5}, {1, 0.3}});
    CHECK(tbs_truncate(v, 3, true) == v);
    auto r = tbs_truncate(v, 2, true);
    CHECK(r.at(0).real() == doctest::Approx(0.625));
    CHECK(r.at(1).real() == doctest::Approx(0.375));

    auto tie = SparseVector::from_pairs({{0, 0.5}, {1, 0.25}, {2, -0.25}});
    CHECK(tbs_truncate(tie, 2, false).to_pairs() == std::vector<Entry>{{0, 0.5}, {1, 0.25}});

    RngStream g(1, 1);
    CHECK(compress({RuleKind::TbS, 2}, v, g).to_pairs() == std::vector<Entry>{{0, 0.5}, {1, 0.3}});
}

TEST_CASE("budget, passthrough and determinism on random inputs")
{
    std::mt19937_64 gen(21);
    for (int trial = 0; trial < 300; ++trial) {
        // a few dominant entries so that some are preserved
        auto v = testing::random_vector(gen, 20 + gen() % 100, true, 1000);
        auto pairs = v.to_pairs();
        for (int k = 0; k < 3; ++k) pairs[gen() % pairs.size()].value *= 30.0;
        v = SparseVector::from_pairs(pairs);
        const std::size_t m = 1 + gen() % 40;
        for (auto kind : kStochastic) {
            CompressionRule rule{kind, m, false,
                                 trial % 2 ? StochasticOrder::MagnitudeDescending : StochasticOrder::InputOrder};
            RngStream g1(trial, 7), g2(trial, 7);
            auto out = compress(rule, v, g1);
            CHECK(out.nnz() <= m);
            CHECK(out == compress(rule, v, g2));
            auto split = exact_preservation_split(v, m);
            for (const auto& e : split.preserved) CHECK(out.at(e.index) == e.value);
        }
    }
}

TEST_CASE("unbiasedness against fixed functionals")
{
    std::mt19937_64 gen(31);
    const auto v = testing::random_vector(gen, 30, true);
    const DenseFunctional fs[] = {DenseFunctional::all_ones(), DenseFunctional::indicator_at_least(15),
                                  DenseFunctional(testing::random_vector(gen, 30, true))};
    for (auto kind : kStochastic) {
        for (auto order : {StochasticOrder::InputOrder, StochasticOrder::MagnitudeDescending}) {
            if (order == StochasticOrder::MagnitudeDescending &&
                (kind == RuleKind::FloorCeil || kind == RuleKind::IndependentUniform))
                continue;
            MeanAccumulator acc[3];
            for (std::size_t r = 0; r < 20000; ++r) {
                RngStream g(static_cast<std::uint64_t>(kind), r);
                auto out = compress({kind, 6, false, order}, v, g);
                for (int i = 0; i < 3; ++i) acc[i].add(fs[i].dot(out));
            }
            for (int i = 0; i < 3; ++i) {
                CAPTURE(to_string(kind));
                CHECK(std::abs(acc[i].mean() - fs[i].dot(v)) <= 5 * acc[i].standard_error());
            }
        }
    }
}
