#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "popsynth/chi2.hpp"
#include "popsynth/errors.hpp"
#include "popsynth/fbsco.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <cmath>
#include <functional>

using namespace popsynth;
using namespace testsupport;

namespace {

SchemaPtr sex_schema() {
    return std::make_shared<const Schema>(
        std::vector<AttributeDef>{{"SEX", {"f", "m"}, false}});
}

MarginalTable sex_target(SchemaPtr schema, std::int64_t f, std::int64_t m,
                         const std::string &zone = "z") {
    MarginalTable t(schema, zone, {"SEX"});
    t.set_count({0}, f);
    t.set_count({1}, m);
    return t;
}

// exhaustive minimum of rssz over all selections with the target sum
double enumeration_minimum(const Population &pool, const std::vector<MarginalTable> &targets) {
    const auto A = AttributeMatrix::build(pool, targets);
    const std::int64_t n_target = targets.front().total();
    SelectionVector sel;
    sel.x.assign(pool.size(), 0);
    sel.total = n_target;
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t pos, std::int64_t left) {
        if (pos + 1 == sel.x.size()) {
            sel.x[pos] = left;
            best = std::min(best, rssz(sel, A, targets));
            return;
        }
        for (std::int64_t v = 0; v <= left; ++v) {
            sel.x[pos] = v;
            rec(pos + 1, left - v);
        }
    };
    rec(0, n_target);
    return best;
}

} // namespace

TEST_CASE("rssz exact match scores zero") {
    auto schema = sex_schema();
    auto pool = population_from_labels(schema, {{"f"}, {"m"}});
    auto target = sex_target(schema, 3, 2);
    auto A = AttributeMatrix::build(pool, {target});
    SelectionVector sel{{3, 2}, 5};
    CHECK(rssz(sel, A, {target}) == doctest::Approx(0.0));
}

TEST_CASE("rssz hand fixture: N=10, Ax=(6,4), E=(5,5)") {
    auto schema = sex_schema();
    auto pool = population_from_labels(schema, {{"f"}, {"m"}});
    auto target = sex_target(schema, 5, 5);
    auto A = AttributeMatrix::build(pool, {target});
    SelectionVector sel{{6, 4}, 10};
    CHECK(rssz(sel, A, {target}) == doctest::Approx(0.2170).epsilon(1e-3 / 0.217));
}

TEST_CASE("rssz zero-count branch") {
    // one cell at Ax=0 with E=2 contributes E^2/C
    auto schema = sex_schema();
    auto pool = population_from_labels(schema, {{"f"}, {"m"}});
    auto target = sex_target(schema, 0, 2); // E = (0, 2), N = 2
    auto A = AttributeMatrix::build(pool, {target});
    SelectionVector sel{{2, 0}, 2}; // Ax = (2, 0): cell m has Ax=0, E=2
    // cell f: Ax=2=N -> (1/C)*(2-0)^2 ; cell m: Ax=0 -> (1/C)*(0-2)^2
    const double c = chi2_critical(1);
    CHECK(rssz(sel, A, {target}) == doctest::Approx(8.0 / c).epsilon(1e-9));
    CHECK(4.0 / c == doctest::Approx(1.0414).epsilon(1e-3));
}

TEST_CASE("attribute matrix invariant: one cell per tabulation per candidate") {
    Rng rng(5);
    auto schema = age_sex_work_schema();
    auto pool = random_population(schema, 40, rng, Provenance::candidate_pool);
    auto t1 = aggregate_marginals(pool, {"AGE", "SEX"}, "z");
    auto t2 = aggregate_marginals(pool, {"WORK"}, "z");
    auto A = AttributeMatrix::build(pool, {t1, t2});
    for (std::size_t k = 0; k < A.tabulation_count(); ++k)
        for (std::size_t i = 0; i < pool.size(); ++i) {
            std::size_t hits = 0;
            for (std::size_t cell = 0; cell < A.tabulation(k).expected.size(); ++cell)
                if (A.indicator(k, cell, i)) ++hits;
            CHECK(hits == 1);
        }
}

TEST_CASE("initialize") {
    auto schema = sex_schema();
    SUBCASE("zero target yields all-zero selection") {
        auto pool = population_from_labels(schema, {{"f"}});
        auto sel = initialize(pool, {sex_target(schema, 0, 0)}, 1);
        CHECK(sel.total == 0);
        CHECK(sel.x == std::vector<std::int64_t>{0});
    }
    SUBCASE("single candidate takes everything") {
        auto pool = population_from_labels(schema, {{"f"}});
        auto sel = initialize(pool, {sex_target(schema, 3, 2)}, 1);
        CHECK(sel.x == std::vector<std::int64_t>{5});
    }
    SUBCASE("sum matches target and draw is seed-stable") {
        Rng rng(9);
        auto pool = random_population(schema, 50, rng, Provenance::candidate_pool);
        auto sel = initialize(pool, {sex_target(schema, 60, 40)}, 1234);
        std::int64_t sum = 0;
        for (auto v : sel.x) sum += v;
        CHECK(sum == 100);
        auto sel2 = initialize(pool, {sex_target(schema, 60, 40)}, 1234);
        CHECK(sel.x == sel2.x);
    }
    SUBCASE("positive target with empty pool is an error") {
        auto pool = Population::empty(schema, Provenance::candidate_pool);
        CHECK_THROWS_AS(initialize(pool, {sex_target(schema, 1, 0)}, 1), DataError);
    }
}

TEST_CASE("materialize") {
    auto schema = sex_schema();
    auto pool = population_from_labels(schema, {{"f"}, {"m"}, {"f"}});
    SUBCASE("repeats adjacent in pool order") {
        auto out = materialize({{2, 0, 1}, 3}, pool);
        REQUIRE(out.size() == 3);
        CHECK(out.row(0) == pool.row(0));
        CHECK(out.row(1) == pool.row(0));
        CHECK(out.row(2) == pool.row(2));
    }
    SUBCASE("all zero yields empty") {
        CHECK(materialize({{0, 0, 0}, 0}, pool).is_empty());
    }
}

TEST_CASE("optimize finds an exactly feasible pool") {
    auto schema = age_sex_schema();
    auto pool = population_from_labels(
        schema, {{"0-6", "f"}, {"0-6", "m"}, {"65+", "f"}, {"65+", "m"}});
    MarginalTable target(schema, "z", {"AGE", "SEX"});
    target.set_count({0, 0}, 7);
    target.set_count({0, 1}, 3);
    target.set_count({6, 0}, 2);
    target.set_count({6, 1}, 8);

    FbscoConfig config;
    config.seed = 42;
    config.rssz_threshold = 1e-9;
    const auto result = optimize(pool, {target}, config);
    CHECK(result.rssz == doctest::Approx(0.0));
    CHECK(result.converged);
    // cross-module consistency: aggregated materialization equals the target
    auto synth = materialize(result.selection, pool);
    auto realized = aggregate_marginals(synth, {"AGE", "SEX"});
    for (std::size_t flat = 0; flat < target.n_cells(); ++flat)
        CHECK(realized.count_at(flat) == target.count_at(flat));
}

TEST_CASE("optimize two-candidate enumeration example") {
    auto schema = sex_schema();
    auto pool = population_from_labels(schema, {{"f"}, {"m"}});
    auto target = sex_target(schema, 3, 1);
    FbscoConfig config;
    config.seed = 7;
    config.rssz_threshold = 1e-9;
    const auto result = optimize(pool, {target}, config);
    const double best = enumeration_minimum(pool, {target});
    CHECK(result.rssz == doctest::Approx(best));
    CHECK(result.rssz == doctest::Approx(0.0)); // x=(3,1) realizes the target
}

TEST_CASE("optimize zero-total targets report no population") {
    auto schema = sex_schema();
    auto pool = population_from_labels(schema, {{"f"}});
    FbscoConfig config;
    config.seed = 1;
    const auto result = optimize(pool, {sex_target(schema, 0, 0)}, config);
    CHECK(result.no_population);
    CHECK(result.converged);
    CHECK(materialize(result.selection, pool).is_empty());
}

TEST_CASE("optimize is deterministic") {
    Rng rng(77);
    auto schema = age_sex_work_schema();
    auto pool = random_population(schema, 30, rng, Provenance::candidate_pool);
    Rng rng2(78);
    auto world = random_population(schema, 120, rng2);
    auto t1 = aggregate_marginals(world, {"AGE", "SEX"}, "z");
    auto t2 = aggregate_marginals(world, {"WORK"}, "z");
    FbscoConfig config;
    config.seed = 9;
    const auto a = optimize(pool, {t1, t2}, config);
    const auto b = optimize(pool, {t1, t2}, config);
    CHECK(a.selection.x == b.selection.x);
    CHECK(a.rssz == b.rssz);
    CHECK(a.iterations_used == b.iterations_used);
}

TEST_CASE("trace mode preserves the sum constraint and never climbs") {
    Rng rng(123);
    auto schema = age_sex_work_schema();
    auto pool = random_population(schema, 60, rng, Provenance::candidate_pool);
    Rng rng2(124);
    auto world = random_population(schema, 500, rng2);
    auto t1 = aggregate_marginals(world, {"AGE", "SEX"}, "z");
    auto t2 = aggregate_marginals(world, {"WORK"}, "z");

    FbscoConfig config;
    config.seed = 5;
    config.record_trace = true;
    config.rssz_threshold = 1e-9;
    config.restarts = 1;
    const auto result = optimize(pool, {t1, t2}, config);
    REQUIRE(!result.trace.empty());
    for (std::size_t i = 1; i < result.trace.size(); ++i)
        CHECK(result.trace[i].second <= result.trace[i - 1].second);
    std::int64_t sum = 0;
    for (auto v : result.selection.x) sum += v;
    CHECK(sum == 500);
}

TEST_CASE("desk-scale optimality against enumeration") {
    Rng rng(2024);
    auto schema = age_sex_schema();
    int optimal = 0;
    const int trials = 25;
    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t pool_size = 2 + rng() % 4; // 2..5
        auto pool = random_population(schema, pool_size, rng, Provenance::candidate_pool);
        const std::int64_t n_target = 2 + static_cast<std::int64_t>(rng() % 5); // 2..6
        auto ref = random_population(schema, static_cast<std::size_t>(n_target), rng);
        auto target = aggregate_marginals(ref, {"AGE", "SEX"}, "z");

        FbscoConfig config;
        config.seed = 4000 + static_cast<std::uint64_t>(trial);
        config.rssz_threshold = 1e-12;
        const auto result = optimize(pool, {target}, config);
        const double best = enumeration_minimum(pool, {target});
        CHECK(result.rssz >= best - 1e-9); // never undercuts the true minimum
        if (result.rssz <= best + 1e-9) ++optimal;
    }
    CHECK(optimal >= trials - 1);
}

TEST_CASE("optimizer rssz matches the independent formula on the materialized rows") {
    Rng rng(31);
    auto schema = age_sex_work_schema();
    auto pool = random_population(schema, 25, rng, Provenance::candidate_pool);
    Rng rng2(32);
    auto world = random_population(schema, 200, rng2);
    auto t1 = aggregate_marginals(world, {"AGE", "SEX"}, "z");
    auto t2 = aggregate_marginals(world, {"WORK"}, "z");
    FbscoConfig config;
    config.seed = 6;
    const auto result = optimize(pool, {t1, t2}, config);
    auto synth = materialize(result.selection, pool);
    const double check = oracle::rssz(synth, {t1, t2}, &chi2_critical);
    CHECK(result.rssz == doctest::Approx(check).epsilon(1e-9));
}

TEST_CASE("config validation") {
    auto schema = sex_schema();
    auto pool = population_from_labels(schema, {{"f"}});
    FbscoConfig config;
    config.rssz_threshold = 0.0;
    CHECK_THROWS_AS(optimize(pool, {sex_target(schema, 1, 0)}, config), DataError);
    config.rssz_threshold = 1.0;
    config.max_iterations = 0;
    CHECK_THROWS_AS(optimize(pool, {sex_target(schema, 1, 0)}, config), DataError);
}

TEST_CASE("inconsistent target totals rejected") {
    auto schema = age_sex_schema();
    auto pool = population_from_labels(schema, {{"0-6", "f"}});
    MarginalTable t1(schema, "z", {"AGE"});
    t1.set_count({0}, 5);
    MarginalTable t2(schema, "z", {"SEX"});
    t2.set_count({0}, 4);
    FbscoConfig config;
    CHECK_THROWS_AS(optimize(pool, {t1, t2}, config), DataError);
}
