#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "trapwalk/env.hpp"
#include "trapwalk/errors.hpp"
#include "trapwalk/limit.hpp"
#include "trapwalk/rng.hpp"
#include "trapwalk/stats.hpp"

using namespace trapwalk;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kPi = std::numbers::pi;

LimitParams params_of(double lambda, double gamma, double c_tau) {
    LimitParams p;
    p.lambda = lambda;
    p.gamma = gamma;
    p.c_tau = c_tau;
    return p;
}

} // namespace

TEST_CASE("psi closed forms, monotonicity and validation") {
    for (double lambda : {1.0, 7.0}) {
        LimitParams p = params_of(lambda, 2.0, 1.0);
        CHECK(psi_value(p, 0.0, kPi / std::sqrt(2.0)) == doctest::Approx(1.0).epsilon(1e-15));
    }
    LimitParams p2 = params_of(2.0, 2.0, 1.0);
    CHECK(psi_value(p2, 3.0, 1.0) ==
          doctest::Approx(6.0 + kPi * kPi / 2.0).epsilon(1e-15));

    LimitParams p = params_of(1.3, 1.0, 1.0);
    double prev = -kInf;
    for (double x : {0.0, 0.5, 1.0, 2.0, 9.0}) {
        const double v = psi_value(p, x, 2.0);
        CHECK(v > prev);
        prev = v;
    }
    prev = kInf;
    for (double y : {0.5, 1.0, 2.0, 8.0}) {
        const double v = psi_value(p, 1.0, y);
        CHECK(v < prev);
        prev = v;
    }

    CHECK_THROWS_AS(psi_value(p, 1.0, 0.0), ValidationError);
    CHECK_THROWS_AS(psi_value(p, 1.0, -2.0), ValidationError);
    CHECK_THROWS_AS(psi_value(params_of(0.0, 1.0, 1.0), 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(psi_value(params_of(1.0, -1.0, 1.0), 1.0, 1.0), ValidationError);
    CHECK_THROWS_AS(psi_value(params_of(1.0, 1.0, 0.0), 1.0, 1.0), ValidationError);
}

TEST_CASE("infimum over finite point measures") {
    LimitParams p = params_of(1.0, 2.0, 1.0);

    PointMeasure single;
    single.points = {{0.0, 1.0}};
    LimitSample s = infimum_over_measure(p, single);
    CHECK(s.f_value == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-15));
    CHECK(s.x_star == 0.0);
    CHECK(s.y_star == 1.0);
    CHECK(s.points_examined == 1);
    CHECK(s.tie_count == 0);

    // Equal y: the smaller x wins outright.
    PointMeasure pair;
    pair.points = {{2.0, 10.0}, {1.0, 10.0}};
    s = infimum_over_measure(p, pair);
    CHECK(s.x_star == 1.0);
    CHECK(s.tie_count == 0);

    // Duplicated points are an exact tie; the report says so.
    PointMeasure dup;
    dup.points = {{2.0, 3.0}, {1.0, 5.0}, {2.0, 3.0}, {1.0, 5.0}};
    s = infimum_over_measure(p, dup);
    CHECK(s.tie_count == 1);
    CHECK(s.x_star == 1.0);
    CHECK(s.y_star == 5.0);

    CHECK_THROWS_AS(infimum_over_measure(p, PointMeasure{}), EmptyMeasure);
}

TEST_CASE("infimum of a rescaled environment equals the linear scan") {
    Environment env = sample_environment(discrete_pareto_law(1.0), 2000, 31);
    const double scale = 123.4;
    LimitParams p = params_of(2.2, env.law.gamma, env.law.limit_tail_constant());

    PointMeasure mu = rescaled_point_measure(env, scale);
    LimitSample s = infimum_over_measure(p, mu);

    double best = kInf, bx = 0.0, by = 0.0;
    for (std::size_t i = 0; i < env.gaps.size(); ++i) {
        const double x = static_cast<double>(i) / scale;
        const double y = static_cast<double>(env.gaps[i]) *
                         std::pow(scale, -1.0 / env.law.gamma);
        const double v = p.lambda * x + kPi * kPi / (2.0 * y * y);
        if (v < best) {
            best = v;
            bx = x;
            by = y;
        }
    }
    CHECK(s.f_value == best);
    CHECK(s.x_star == bx);
    CHECK(s.y_star == by);

    // Windowed measure: scan with the same filter.
    PointMeasure cut = rescaled_point_measure(env, scale, 1.0, 0.03);
    REQUIRE(!cut.points.empty());
    double best_cut = kInf;
    for (std::size_t i = 0; i < env.gaps.size(); ++i) {
        const double x = static_cast<double>(i) / scale;
        const double y = static_cast<double>(env.gaps[i]) *
                         std::pow(scale, -1.0 / env.law.gamma);
        if (x > 1.0 || y < 0.03) continue;
        best_cut = std::min(best_cut, p.lambda * x + kPi * kPi / (2.0 * y * y));
    }
    CHECK(infimum_over_measure(p, cut).f_value == best_cut);
}

TEST_CASE("structural sampler: invariants, determinism, window sufficiency") {
    const LimitParams sets[] = {
        params_of(1.0, 2.0, 2.0),
        params_of(2.9, 2.0, 1.0),
        params_of(1.7, 1.0, 1.0),
        params_of(0.3, 0.5, 0.25),
    };
    for (const LimitParams& p : sets) {
        for (std::uint64_t seed = 0; seed < 400; ++seed) {
            LimitSample s = sample_limit_F(p, seed);
            CHECK(s.f_value > 0.0);
            CHECK(s.f_value == psi_value(p, s.x_star, s.y_star));
            CHECK(s.points_examined >= 1);

            LimitSample again = sample_limit_F(p, seed);
            CHECK(again.f_value == s.f_value);
            CHECK(again.points_examined == s.points_examined);

            for (double margin : {0.0, 0.5, 2.0}) {
                LimitSample ext = sample_limit_F_extended(p, seed, margin);
                CHECK(ext.f_value == s.f_value);
                CHECK(ext.x_star == s.x_star);
                CHECK(ext.y_star == s.y_star);
                CHECK(ext.points_examined >= s.points_examined);
            }
        }
    }
    CHECK_THROWS_AS(sample_limit_F(params_of(1.0, 1.0, -1.0), 3), ValidationError);
    CHECK_THROWS_AS(sample_limit_F_extended(params_of(1.0, 1.0, 1.0), 3, -0.5),
                    ValidationError);
}

TEST_CASE("rectangle point counts and marginals follow the intensity") {
    LimitParams p = params_of(1.0, 1.3, 0.8);
    const double x1 = 0.3, x2 = 1.7, y1 = 0.8, y2 = 5.0;
    const double t1 = std::pow(y1, -p.gamma), t2 = std::pow(y2, -p.gamma);
    const double mass = (x2 - x1) * p.c_tau * (t1 - t2);

    std::mt19937_64 rng(2026);
    const std::size_t reps = 10000;
    std::vector<double> counts(reps);
    std::vector<double> xs, ys;
    for (std::size_t r = 0; r < reps; ++r) {
        PointMeasure pts = sample_intensity_rectangle(p, rng, x1, x2, y1, y2);
        counts[r] = static_cast<double>(pts.points.size());
        for (const auto& [x, y] : pts.points) {
            xs.push_back(x);
            ys.push_back(y);
            CHECK(x >= x1);
            CHECK(x < x2);
            CHECK(y >= y1);
            CHECK(y <= y2);
        }
    }
    double mean = 0.0;
    for (double c : counts) mean += c;
    mean /= static_cast<double>(reps);
    double var = 0.0, m4 = 0.0;
    for (double c : counts) {
        const double d = c - mean;
        var += d * d;
        m4 += d * d * d * d;
    }
    var /= static_cast<double>(reps - 1);
    m4 /= static_cast<double>(reps);
    const double se_mean = std::sqrt(var / static_cast<double>(reps));
    const double se_var = std::sqrt((m4 - var * var) / static_cast<double>(reps));
    CHECK(std::abs(mean - mass) <= 3.0 * se_mean);
    CHECK(std::abs(var - mass) <= 3.0 * se_var);

    // Marginals inside the rectangle: x uniform, y truncated Pareto.
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    KsResult kx = ks_distance(xs, [&](double x) { return (x - x1) / (x2 - x1); });
    CHECK(kx.statistic <= kx.dkw_band);
    KsResult ky = ks_distance(
        ys, [&](double y) { return (t1 - std::pow(y, -p.gamma)) / (t1 - t2); });
    CHECK(ky.statistic <= ky.dkw_band);

    // Unbounded-in-y rectangle: mass (x2 - x1) * c_tau * y1^-gamma.
    std::vector<double> strip_counts(reps);
    for (std::size_t r = 0; r < reps; ++r)
        strip_counts[r] = static_cast<double>(
            sample_intensity_rectangle(p, rng, 0.0, 2.0, 1.0, kInf).points.size());
    double strip_mean = 0.0;
    for (double c : strip_counts) strip_mean += c;
    strip_mean /= static_cast<double>(reps);
    const double strip_mass = 2.0 * p.c_tau;
    CHECK(std::abs(strip_mean - strip_mass) <=
          3.0 * std::sqrt(strip_mass / static_cast<double>(reps)) + 1e-9);

    // Degenerate boxes are empty; malformed boxes are rejected.
    std::mt19937_64 r2(1);
    CHECK(sample_intensity_rectangle(p, r2, 1.0, 1.0, 1.0, 2.0).points.empty());
    CHECK(sample_intensity_rectangle(p, r2, 1.0, 2.0, 3.0, 3.0).points.empty());
    CHECK_THROWS_AS(sample_intensity_rectangle(p, r2, 2.0, 1.0, 1.0, 2.0), ValidationError);
    CHECK_THROWS_AS(sample_intensity_rectangle(p, r2, 1.0, 2.0, -1.0, 2.0), ValidationError);
    CHECK_THROWS_AS(sample_intensity_rectangle(p, r2, 1.0, 2.0, 2.0, 1.0), ValidationError);
}

TEST_CASE("closed form tail anchors and quantile round trip") {
    LimitParams p = params_of(1.0, 2.0, 2.0);
    CHECK(limit_tail_cdf(p, 0.0) == 1.0);
    const double u = kPi / std::sqrt(2.0);
    CHECK(limit_tail_cdf(p, u) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK_THROWS_AS(limit_tail_cdf(p, -0.1), ValidationError);

    double prev = 2.0;
    for (double v : {0.0, 0.3, 1.0, 2.5, 7.0}) {
        const double tail = limit_tail_cdf(p, v);
        CHECK(tail <= prev);
        CHECK(tail > 0.0);
        prev = tail;
    }

    // Larger lambda makes crossings dearer and F stochastically larger.
    for (double v : {0.5, 1.5, 4.0}) {
        CHECK(limit_tail_cdf(params_of(0.7, 2.0, 2.0), v) <=
              limit_tail_cdf(params_of(1.9, 2.0, 2.0), v));
    }

    for (const LimitParams& q :
         {params_of(1.0, 2.0, 2.0), params_of(2.9, 2.0, 1.0), params_of(0.4, 0.8, 3.0)}) {
        for (double level : {0.01, 0.2, 0.5, 0.8, 0.99}) {
            const double uu = limit_quantile(q, level);
            CHECK(1.0 - limit_tail_cdf(q, uu) == doctest::Approx(level).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(limit_quantile(p, 0.0), ValidationError);
    CHECK_THROWS_AS(limit_quantile(p, 1.0), ValidationError);
}

TEST_CASE("larger lambda never lowers the infimum of a fixed measure") {
    std::mt19937_64 rng(7);
    LimitParams gen = params_of(1.0, 1.5, 1.0);
    for (int rep = 0; rep < 30; ++rep) {
        PointMeasure mu = sample_intensity_rectangle(gen, rng, 0.0, 4.0, 0.3, kInf);
        if (mu.points.empty()) continue;
        const double lo = infimum_over_measure(params_of(0.7, 1.5, 1.0), mu).f_value;
        const double hi = infimum_over_measure(params_of(1.9, 1.5, 1.0), mu).f_value;
        CHECK(lo <= hi);
    }
}

TEST_CASE("structural and inverse samplers both match the closed form") {
    LimitParams p = params_of(1.0, 2.0, 2.0);
    auto cdf = [&](double v) { return v <= 0.0 ? 0.0 : 1.0 - limit_tail_cdf(p, v); };

    const std::size_t m = 20000;
    std::vector<double> ppp(m), inv(m);
    std::size_t ties = 0;
    for (std::size_t i = 0; i < m; ++i) {
        LimitSample s = sample_limit_F(p, derive_seed(7, "limit", i));
        ppp[i] = s.f_value;
        ties += s.tie_count;
    }
    std::mt19937_64 rng = make_rng(401, "limit", 0);
    for (std::size_t i = 0; i < m; ++i) inv[i] = sample_limit_F_inverse(p, rng);
    CHECK(ties == 0);

    std::vector<double> ppp_sorted = ppp, inv_sorted = inv;
    std::sort(ppp_sorted.begin(), ppp_sorted.end());
    std::sort(inv_sorted.begin(), inv_sorted.end());
    KsResult k1 = ks_distance(ppp_sorted, cdf);
    CHECK(k1.statistic <= k1.dkw_band);
    KsResult k2 = ks_distance(inv_sorted, cdf);
    CHECK(k2.statistic <= k2.dkw_band);

    KsTwoSampleResult two = ks_two_sample(ppp, inv, 0.01);
    CHECK_FALSE(two.reject);
}
