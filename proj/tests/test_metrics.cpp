#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "popsynth/errors.hpp"
#include "popsynth/metrics.hpp"

#include "oracles.hpp"
#include "test_support.hpp"

#include <cmath>
#include <sstream>

using namespace popsynth;
using namespace testsupport;

namespace {

SchemaPtr tiny_schema(std::size_t cats) {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < cats; ++i) labels.push_back("c" + std::to_string(i));
    return std::make_shared<const Schema>(std::vector<AttributeDef>{{"A", labels, false}});
}

Population counts_population(SchemaPtr schema, const std::vector<std::int64_t> &counts) {
    std::vector<Population::Row> rows;
    for (std::size_t c = 0; c < counts.size(); ++c)
        for (std::int64_t i = 0; i < counts[c]; ++i)
            rows.push_back({static_cast<std::uint16_t>(c)});
    return Population(std::move(schema), std::move(rows), Provenance::synthetic);
}

CategoricalHistogram hist_of(const Population &pop) {
    return CategoricalHistogram::from_population(pop, {"A"});
}

} // namespace

TEST_CASE("tvc hand values") {
    auto schema = tiny_schema(3);
    SUBCASE("identical distributions give 1") {
        auto r = counts_population(schema, {5, 5, 0});
        CHECK(tvc(hist_of(r), hist_of(r)) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("symmetric swap gives 0.5") {
        auto r = counts_population(schema, {3, 1, 0});
        auto s = counts_population(schema, {1, 3, 0});
        CHECK(tvc(hist_of(r), hist_of(s)) == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("(0.2,0.3,0.5) vs (0.4,0.4,0.2) gives 0.7") {
        auto r = counts_population(schema, {2, 3, 5});
        auto s = counts_population(schema, {4, 4, 2});
        CHECK(tvc(hist_of(r), hist_of(s)) == doctest::Approx(0.7).epsilon(1e-12));
    }
}

TEST_CASE("tvc pre-conditions") {
    auto schema = tiny_schema(3);
    auto r = counts_population(schema, {1, 1, 0});
    auto empty = counts_population(schema, {0, 0, 0});
    CHECK_THROWS_AS(tvc(hist_of(r), hist_of(empty)), DataError);

    auto other = std::make_shared<const Schema>(
        std::vector<AttributeDef>{{"B", {"x", "y"}, false}});
    auto s = counts_population(other, {1, 1});
    CHECK_THROWS_AS(tvc(hist_of(r), CategoricalHistogram::from_population(s, {"B"})), DataError);
}

TEST_CASE("tvc symmetry and scale invariance") {
    Rng rng(21);
    auto schema = tiny_schema(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::int64_t> a(4), b(4);
        for (auto &v : a) v = static_cast<std::int64_t>(rng() % 20);
        for (auto &v : b) v = static_cast<std::int64_t>(rng() % 20);
        a[0] += 1;
        b[0] += 1;
        auto pa = counts_population(schema, a);
        auto pb = counts_population(schema, b);
        const double ab = tvc(hist_of(pa), hist_of(pb));
        CHECK(tvc(hist_of(pb), hist_of(pa)) == doctest::Approx(ab).epsilon(1e-15));
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);

        // scaling one side leaves the statistic unchanged
        std::vector<std::int64_t> a3(4);
        for (std::size_t i = 0; i < 4; ++i) a3[i] = a[i] * 3;
        CHECK(tvc(hist_of(counts_population(schema, a3)), hist_of(pb)) ==
              doctest::Approx(ab).epsilon(1e-12));
    }
}

TEST_CASE("tvc equals 1 iff normalized histograms match") {
    auto schema = tiny_schema(3);
    auto a = counts_population(schema, {2, 4, 6});
    auto b = counts_population(schema, {1, 2, 3});
    CHECK(tvc(hist_of(a), hist_of(b)) == doctest::Approx(1.0).epsilon(1e-15));
    auto c = counts_population(schema, {1, 2, 4});
    CHECK(tvc(hist_of(a), hist_of(c)) < 1.0);
}

TEST_CASE("category adherence") {
    auto schema = tiny_schema(4);
    SUBCASE("full adherence") {
        auto real = counts_population(schema, {3, 2, 0, 0});
        auto synth = counts_population(schema, {10, 5, 0, 0});
        CHECK(category_adherence(real, synth, "A") == doctest::Approx(1.0));
    }
    SUBCASE("half novel") {
        auto real = counts_population(schema, {1, 1, 0, 0});
        auto synth = counts_population(schema, {1, 1, 1, 1});
        CHECK(category_adherence(real, synth, "A") == doctest::Approx(0.5));
    }
    SUBCASE("empty synthetic column rejected") {
        auto real = counts_population(schema, {1, 0, 0, 0});
        auto synth = counts_population(schema, {0, 0, 0, 0});
        CHECK_THROWS_AS(category_adherence(real, synth, "A"), DataError);
    }
}

TEST_CASE("ca invariant: subset implies 1, row order irrelevant") {
    Rng rng(31);
    auto schema = tiny_schema(5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::int64_t> rc(5, 0), sc(5, 0);
        for (auto &v : rc) v = static_cast<std::int64_t>(rng() % 5);
        if (rc == std::vector<std::int64_t>(5, 0)) rc[0] = 1;
        for (std::size_t i = 0; i < 5; ++i)
            if (rc[i] > 0) sc[i] = static_cast<std::int64_t>(rng() % 5);
        std::int64_t total = 0;
        for (auto v : sc) total += v;
        if (total == 0) {
            for (std::size_t i = 0; i < 5; ++i)
                if (rc[i] > 0) { sc[i] = 1; break; }
        }
        auto real = counts_population(schema, rc);
        auto synth = counts_population(schema, sc);
        CHECK(category_adherence(real, synth, "A") == doctest::Approx(1.0));
    }
}

TEST_CASE("srmse hand values") {
    auto schema = tiny_schema(2);
    SUBCASE("identical histograms give 0") {
        auto r = counts_population(schema, {4, 6});
        CHECK(srmse(hist_of(r), hist_of(r), 2) == doctest::Approx(0.0));
    }
    SUBCASE("(0.5,0.5) vs (1,0) over 2 bins gives 1") {
        auto r = counts_population(schema, {5, 5});
        auto s = counts_population(schema, {7, 0});
        CHECK(srmse(hist_of(r), hist_of(s), 2) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("srmse invariants") {
    auto schema = tiny_schema(3);
    auto r = counts_population(schema, {4, 4, 0});
    SUBCASE("joint rescale invariance") {
        auto s = counts_population(schema, {2, 6, 0});
        auto r2 = counts_population(schema, {8, 8, 0});
        auto s2 = counts_population(schema, {4, 12, 0});
        CHECK(srmse(hist_of(r), hist_of(s), 3) ==
              doctest::Approx(srmse(hist_of(r2), hist_of(s2), 3)).epsilon(1e-12));
    }
    SUBCASE("mass moved into an empty real cell strictly increases the error") {
        auto matched = counts_population(schema, {4, 4, 0});
        auto moved = counts_population(schema, {3, 4, 1});
        CHECK(srmse(hist_of(r), hist_of(moved), 3) > srmse(hist_of(r), hist_of(matched), 3));
    }
    SUBCASE("n_bins below observed tuples rejected") {
        auto s = counts_population(schema, {1, 1, 1});
        CHECK_THROWS_AS(srmse(hist_of(r), hist_of(s), 2), DataError);
    }
}

TEST_CASE("r_squared hand values") {
    CHECK(r_squared({{1, 1}, {2, 2}, {5, 5}}) == doctest::Approx(1.0));
    CHECK(r_squared({{0, 10}, {10, 0}}) == doctest::Approx(-3.0));
    CHECK(r_squared({{2, 2}, {4, 5}, {6, 5}}) == doctest::Approx(0.75));
    CHECK_THROWS_AS(r_squared({{1, 2}}), DataError);
    CHECK_THROWS_AS(r_squared({{3, 1}, {3, 2}}), DataError);
}

TEST_CASE("brute-force equivalence on random populations") {
    Rng rng(101);
    auto schema = age_sex_work_schema(); // 3 attributes
    int done = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 50 + rng() % 950;
        auto real = random_population(schema, n, rng);
        auto synth = random_population(schema, 50 + rng() % 950, rng);

        for (auto attrs : std::vector<std::vector<std::string>>{{"AGE"}, {"SEX"}, {"WORK"}}) {
            auto rh = CategoricalHistogram::from_population(real, attrs);
            auto sh = CategoricalHistogram::from_population(synth, attrs);
            CHECK(std::abs(tvc(rh, sh) - oracle::tvc(real, synth, attrs)) < 1e-12);
        }
        auto rj = CategoricalHistogram::from_population(real, {"AGE", "SEX", "WORK"});
        auto sj = CategoricalHistogram::from_population(synth, {"AGE", "SEX", "WORK"});
        const std::uint64_t n_bins = schema->total_combinations();
        CHECK(std::abs(srmse(rj, sj, n_bins) -
                       oracle::srmse(real, synth, {"AGE", "SEX", "WORK"}, n_bins)) < 1e-12);
        CHECK(std::abs(category_adherence(real, synth, "AGE") -
                       oracle::category_adherence(real, synth, "AGE")) < 1e-12);
        ++done;
    }
    CHECK(done == 60);
}

TEST_CASE("evaluate self comparison") {
    Rng rng(55);
    auto schema = age_sex_work_schema();
    auto pop = random_population(schema, 400, rng);
    auto report = evaluate(pop, pop, {"AGE", "SEX"}, {"AGE", "SEX", "WORK"});
    for (const auto &[name, scores] : report.per_attribute) {
        CHECK(scores.tvc == doctest::Approx(1.0));
        CHECK(scores.ca == doctest::Approx(1.0));
    }
    CHECK(report.srmse == doctest::Approx(0.0));
    CHECK(report.k == 3);
    CHECK(report.n_bins == schema->total_combinations());
}

TEST_CASE("evaluate: conditioned attrs exact, permuted column imperfect") {
    Rng rng(77);
    auto schema = age_sex_work_schema();
    auto real = random_population(schema, 600, rng);

    // permute the WORK column only; AGE and SEX histograms stay exact
    std::vector<Population::Row> rows = real.rows();
    std::vector<std::uint16_t> work_col(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) work_col[r] = rows[r][2];
    std::rotate(work_col.begin(), work_col.begin() + 1, work_col.end());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r][2] = work_col[r];
    Population synth(schema, std::move(rows), Provenance::synthetic);

    auto report = evaluate(real, synth, {"AGE", "SEX"}, {"AGE", "SEX", "WORK"});
    CHECK(report.scores("AGE").tvc == 1.0);
    CHECK(report.scores("SEX").tvc == 1.0);
    CHECK(report.scores("WORK").tvc == 1.0); // marginal preserved by permutation
    CHECK(report.srmse > 0.0);               // joint is not
}

TEST_CASE("evaluate reports 4116 bins for the survey joint") {
    Rng rng(13);
    auto schema = survey_schema();
    auto pop = random_population(schema, 200, rng);
    std::vector<std::string> all;
    for (const auto &attr : schema->attributes()) all.push_back(attr.name);
    auto report = evaluate(pop, pop, {"AGE", "SEX"}, all);
    CHECK(report.n_bins == 4116);
    CHECK(report.extras.at("srmse_bins_used") ==
          doctest::Approx(7.0 * 2 * 3 * 8 * 8 * 4)); // NA slots participate by default
}

TEST_CASE("evaluate pct_na reflects the reference column") {
    auto schema = survey_schema();
    const std::size_t edu = schema->index_of("EDULEVEL");
    std::vector<Population::Row> rows;
    for (int i = 0; i < 10; ++i) {
        Population::Row row(schema->attribute_count(), 0);
        if (i < 4) row[edu] = static_cast<std::uint16_t>(schema->cardinality(edu) - 1);
        rows.push_back(row);
    }
    Population real(schema, rows, Provenance::ground_truth);
    Population synth(schema, {rows[9]}, Provenance::synthetic);
    auto report = evaluate(real, synth, {}, {});
    CHECK(report.scores("EDULEVEL").pct_na == doctest::Approx(0.4));
}

TEST_CASE("na exclusion mode drops NA rows per attribute") {
    auto schema = survey_schema();
    const std::size_t edu = schema->index_of("EDULEVEL");
    const auto na_code = static_cast<std::uint16_t>(schema->cardinality(edu) - 1);
    std::vector<Population::Row> real_rows, synth_rows;
    for (int i = 0; i < 8; ++i) {
        Population::Row row(schema->attribute_count(), 0);
        real_rows.push_back(row);
    }
    for (int i = 0; i < 8; ++i) {
        Population::Row row(schema->attribute_count(), 0);
        if (i < 4) row[edu] = na_code; // half the synthetic rows are NA
        synth_rows.push_back(row);
    }
    Population real(schema, real_rows, Provenance::ground_truth);
    Population synth(schema, synth_rows, Provenance::synthetic);

    auto rh = CategoricalHistogram::from_population(real, {"EDULEVEL"}, NaMode::exclude);
    auto sh = CategoricalHistogram::from_population(synth, {"EDULEVEL"}, NaMode::exclude);
    CHECK(tvc(rh, sh) == doctest::Approx(1.0));

    auto rh2 = CategoricalHistogram::from_population(real, {"EDULEVEL"}, NaMode::include);
    auto sh2 = CategoricalHistogram::from_population(synth, {"EDULEVEL"}, NaMode::include);
    CHECK(tvc(rh2, sh2) == doctest::Approx(0.5));
}

TEST_CASE("metric report csv layout") {
    Rng rng(1);
    auto schema = age_sex_schema();
    auto pop = random_population(schema, 50, rng);
    auto report = evaluate(pop, pop, {"AGE"}, {"AGE", "SEX"});
    std::ostringstream out;
    report.to_csv(out);
    const std::string text = out.str();
    CHECK(text.find("name,tvc,ca,pct_na,srmse,k,n_bins") != std::string::npos);
    CHECK(text.find("AGE,") != std::string::npos);
    CHECK(text.find("(joint),") != std::string::npos);
}
