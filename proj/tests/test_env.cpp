#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <vector>

#include "trapwalk/env.hpp"
#include "trapwalk/errors.hpp"
#include "trapwalk/rng.hpp"

using namespace trapwalk;

TEST_CASE("gap law constructors fix the tail constants") {
    GapLaw pareto = discrete_pareto_law(2.0);
    CHECK(pareto.gamma == 2.0);
    CHECK(pareto.c_tau == 2.0);  // P(T = k) ~ gamma * k^(-(1+gamma))
    CHECK(pareto.limit_tail_constant() == doctest::Approx(1.0).epsilon(1e-15));

    GapLaw zeta = zeta_gap_law(1.0);
    double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;
    CHECK(zeta.c_tau == doctest::Approx(1.0 / zeta2).epsilon(1e-12));
    CHECK(zeta.limit_tail_constant() == doctest::Approx(1.0 / zeta2).epsilon(1e-12));

    CHECK_THROWS_AS(discrete_pareto_law(0.0), ValidationError);
    CHECK_THROWS_AS(discrete_pareto_law(-1.0), ValidationError);
    CHECK_THROWS_AS(zeta_gap_law(0.0), ValidationError);
}

TEST_CASE("discrete pareto quantile inverts the tail exactly") {
    // U = 0.5, gamma = 1: x = 1/0.5 = 2, and 0.5 <= 2^-1 holds, so T = 2.
    CHECK(discrete_pareto_quantile(1.0, 0.5) == 2);
    CHECK(discrete_pareto_quantile(1.0, 1.0) == 1);

    // Acceptance regions: {T >= k} iff {u <= k^(-gamma)}, including the
    // boundary u = k^(-gamma) itself and the first double above it.
    for (double gamma : {0.5, 1.0, 2.0}) {
        for (std::uint64_t k = 2; k <= 60; ++k) {
            double tail = std::pow(static_cast<double>(k), -gamma);
            CHECK(discrete_pareto_quantile(gamma, tail) >= k);
            double above = std::nextafter(tail, 2.0);
            if (above <= 1.0) CHECK(discrete_pareto_quantile(gamma, above) < k);
        }
    }

    // Rational-u grid: consistency of the whole region, not just boundaries.
    for (double gamma : {0.7, 1.0, 3.0}) {
        for (int j = 1; j <= 64; ++j) {
            double u = static_cast<double>(j) / 64.0;
            std::uint64_t t = discrete_pareto_quantile(gamma, u);
            for (std::uint64_t k = 1; k <= t + 2; ++k) {
                bool in_region = u <= std::pow(static_cast<double>(k), -gamma);
                CHECK(in_region == (t >= k));
            }
        }
    }

    CHECK_THROWS_AS(discrete_pareto_quantile(1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(discrete_pareto_quantile(1.0, 1.5), ValidationError);
    // Tail so heavy the draw would overflow 2^63 - 1.
    CHECK_THROWS_AS(discrete_pareto_quantile(0.1, 1e-200), ValidationError);
}

TEST_CASE("sampled tail frequencies match the law") {
    for (double gamma : {1.0, 2.0}) {
        GapLaw law = discrete_pareto_law(gamma);
        std::mt19937_64 rng = make_rng(12345, "env", 0);
        const int draws = 1000000;
        int hits = 0;
        for (int i = 0; i < draws; ++i)
            if (sample_gap(law, rng) >= 10) ++hits;
        double p = std::pow(10.0, -gamma);
        double freq = static_cast<double>(hits) / draws;
        double band = 4.0 * std::sqrt(p * (1.0 - p) / draws);
        CHECK(std::fabs(freq - p) <= band);
    }
}

TEST_CASE("zeta sampler puts 6/pi^2 mass on T = 1 at gamma 1") {
    GapLaw law = zeta_gap_law(1.0);
    std::mt19937_64 rng = make_rng(777, "env", 0);
    const int draws = 1000000;
    int ones = 0;
    for (int i = 0; i < draws; ++i)
        if (sample_gap(law, rng) == 1) ++ones;
    double p = 6.0 / (std::numbers::pi * std::numbers::pi);  // 0.6079...
    double freq = static_cast<double>(ones) / draws;
    CHECK(std::fabs(freq - p) <= 4.0 * std::sqrt(p * (1.0 - p) / draws));
}

TEST_CASE("records follow the strict-maximum definition") {
    GapLaw law = discrete_pareto_law(1.0);

    Environment env = environment_from_gaps(law, {3, 1, 4, 1, 5});
    RecordSequence rec = compute_records(env);
    CHECK(rec.record_indexes == std::vector<std::size_t>{0, 2, 4});
    CHECK(rec.record_gaps == std::vector<std::uint64_t>{3, 4, 5});
    CHECK(rec.record_positions == std::vector<std::uint64_t>{0, 4, 9});

    Environment ties = environment_from_gaps(law, {2, 2, 2});
    CHECK(compute_records(ties).record_indexes == std::vector<std::size_t>{0});

    std::vector<std::uint64_t> increasing;
    for (std::uint64_t g = 1; g <= 12; ++g) increasing.push_back(g);
    Environment mono = environment_from_gaps(law, increasing);
    CHECK(compute_records(mono).record_indexes.size() == 12);
    for (std::size_t i = 0; i < 12; ++i)
        CHECK(compute_records(mono).record_indexes[i] == i);
}

TEST_CASE("records of a prefix are a prefix of the records") {
    GapLaw law = discrete_pareto_law(1.0);
    Environment full = sample_environment(law, 500, 42);
    RecordSequence all = compute_records(full);
    for (std::size_t cut : {std::size_t{1}, std::size_t{10}, std::size_t{100}, std::size_t{499}}) {
        Environment head = environment_from_gaps(
            law, std::vector<std::uint64_t>(full.gaps.begin(), full.gaps.begin() + cut));
        RecordSequence part = compute_records(head);
        REQUIRE(part.record_indexes.size() <= all.record_indexes.size());
        for (std::size_t k = 0; k < part.record_indexes.size(); ++k) {
            CHECK(part.record_indexes[k] == all.record_indexes[k]);
            CHECK(part.record_gaps[k] == all.record_gaps[k]);
        }
    }
}

TEST_CASE("rescaled point measure follows (i-1)/N, T_i N^(-1/gamma)") {
    GapLaw g1 = discrete_pareto_law(1.0);
    Environment single = environment_from_gaps(g1, {4});
    PointMeasure pm = rescaled_point_measure(single, 4.0);
    REQUIRE(pm.points.size() == 1);
    CHECK(pm.points[0].first == 0.0);
    CHECK(pm.points[0].second == doctest::Approx(1.0).epsilon(1e-15));

    GapLaw g2 = discrete_pareto_law(2.0);
    Environment two = environment_from_gaps(g2, {1, 2});
    PointMeasure pm2 = rescaled_point_measure(two, 1.0);
    REQUIRE(pm2.points.size() == 2);
    CHECK(pm2.points[0] == std::pair<double, double>(0.0, 1.0));
    CHECK(pm2.points[1].first == 1.0);
    CHECK(pm2.points[1].second == doctest::Approx(2.0).epsilon(1e-15));

    // Window arguments: x beyond x_max stops the scan, y below y_min drops.
    Environment window = environment_from_gaps(g1, {5, 1, 7, 1, 9});
    PointMeasure pw = rescaled_point_measure(window, 2.0, 1.0, 2.0);
    // x = (i-1)/2 <= 1 keeps i = 1,2,3; y = T/2 >= 2 keeps T in {5, 7}.
    REQUIRE(pw.points.size() == 2);
    CHECK(pw.points[0].second == doctest::Approx(2.5));
    CHECK(pw.points[1].second == doctest::Approx(3.5));
}

TEST_CASE("mean count of rescaled points in the unit tail box is c_tau") {
    // Intensity mass of [0,1] x [1,inf) is the tail constant (= 1 for the
    // exact-tail law at any gamma). N chosen non-integer so the discrete
    // count is exactly Binomial(floor(N)+1, 1/ceil(N)) with mean 1.
    GapLaw law = discrete_pareto_law(1.0);
    const double scale = 46.41;
    const int replicates = 4000;
    double total = 0.0;
    for (int r = 0; r < replicates; ++r) {
        Environment env = sample_environment(law, 48, derive_seed(99, "env", r));
        total += static_cast<double>(rescaled_point_measure(env, scale, 1.0, 1.0).points.size());
    }
    double mean = total / replicates;
    CHECK(std::fabs(mean - 1.0) <= 4.0 / std::sqrt(static_cast<double>(replicates)));
}

TEST_CASE("mean log gap matches brute-force series") {
    SUBCASE("discrete pareto gamma 1") {
        // Direct summation of (k^-1 - (k+1)^-1) log k is increasing in the
        // cutoff; the dropped tail is below (log K + 1)/K at K = 10^6.
        double brute = 0.0;
        const std::uint64_t cutoff = 1000000;
        for (std::uint64_t k = cutoff; k >= 2; --k) {
            double kk = static_cast<double>(k);
            brute += (1.0 / kk - 1.0 / (kk + 1.0)) * std::log(kk);
        }
        double value = mean_log_gap(discrete_pareto_law(1.0));
        CHECK(value >= brute - 1e-10);
        CHECK(value <= brute + 2e-5);
    }
    SUBCASE("discrete pareto heavy gamma concentrates on T = 1") {
        CHECK(mean_log_gap(discrete_pareto_law(50.0)) < 1e-12);
        CHECK(mean_log_gap(discrete_pareto_law(50.0)) >= 0.0);
    }
    SUBCASE("zeta gamma 1") {
        double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;
        double brute = 0.0;
        const std::uint64_t cutoff = 10000000;
        for (std::uint64_t k = cutoff; k >= 2; --k) {
            double kk = static_cast<double>(k);
            brute += std::log(kk) / (kk * kk);
        }
        brute /= zeta2;
        double value = mean_log_gap(zeta_gap_law(1.0));
        CHECK(value == doctest::Approx(brute).epsilon(1e-5));
        CHECK(value == doctest::Approx(0.5700).epsilon(3e-4));
    }
}

TEST_CASE("environment construction validates gaps and positions") {
    GapLaw law = discrete_pareto_law(1.0);
    CHECK_THROWS_AS(environment_from_gaps(law, {1, 0, 2}), ValidationError);

    const std::uint64_t big = std::uint64_t{1} << 62;
    CHECK_THROWS_AS(environment_from_gaps(law, {big, big, big}), ValidationError);

    Environment env = environment_from_gaps(law, {2, 5, 1});
    CHECK(env.positions == std::vector<std::uint64_t>{0, 2, 7, 8});
}

TEST_CASE("environment sampling is deterministic with prefix extension") {
    for (LawKind kind : {LawKind::DiscretePareto, LawKind::Zeta}) {
        GapLaw law = kind == LawKind::DiscretePareto ? discrete_pareto_law(1.5)
                                                     : zeta_gap_law(1.5);
        Environment a = sample_environment(law, 100, 2024);
        Environment b = sample_environment(law, 100, 2024);
        CHECK(a.gaps == b.gaps);
        Environment longer = sample_environment(law, 250, 2024);
        CHECK(std::equal(a.gaps.begin(), a.gaps.end(), longer.gaps.begin()));
        Environment other = sample_environment(law, 100, 2025);
        CHECK(a.gaps != other.gaps);
    }
}

TEST_CASE("environment serialization round-trips") {
    GapLaw law = zeta_gap_law(1.25);
    Environment env = sample_environment(law, 64, 7);

    std::stringstream text;
    write_env_text(text, env);
    Environment back = read_env_text(text);
    CHECK(back.gaps == env.gaps);
    CHECK(back.law.kind == env.law.kind);
    CHECK(back.law.gamma == doctest::Approx(env.law.gamma).epsilon(1e-15));
    CHECK(back.seed == env.seed);

    Environment jback = env_from_json(env_to_json(env));
    CHECK(jback.gaps == env.gaps);
    CHECK(jback.law.kind == env.law.kind);

    CHECK_THROWS_AS(env_from_json("{\"gamma\": 1.0}"), ValidationError);
    CHECK_THROWS_AS(env_from_json("not json at all"), ValidationError);
}
