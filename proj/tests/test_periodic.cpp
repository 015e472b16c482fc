#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "trapwalk/errors.hpp"
#include "trapwalk/periodic.hpp"

using namespace trapwalk;

namespace {

const double kPi = std::numbers::pi;

double g_of(std::uint64_t t) { return -std::log(std::cos(kPi / static_cast<double>(t))); }

// Series oracle for one arm of a transfer-matrix entry: the walk leaves a
// trap into the open stretch of length T next to it, every step is tilted by
// e^phi, and the absorbed flux at the far end (the neighboring trap) and the
// near end (the trap it left) is accumulated term by term.
struct ArmSeries {
    double to_far = 0.0;
    double to_near = 0.0;
};

ArmSeries arm_series(std::uint64_t T, double phi, std::uint64_t n_max) {
    const double tilt = std::exp(phi);
    ArmSeries out;
    if (T == 1) {
        out.to_far = 0.5 * tilt;  // the first step lands on the neighbor
        return out;
    }
    const std::size_t width = static_cast<std::size_t>(T - 1);
    std::vector<double> u(width, 0.0), u2(width, 0.0);
    u[0] = 0.5 * tilt;  // site 1 at time 1
    for (std::uint64_t k = 2; k <= n_max; ++k) {
        out.to_near += 0.5 * tilt * u[0];
        out.to_far += 0.5 * tilt * u[width - 1];
        u2[0] = 0.5 * tilt * (width > 1 ? u[1] : 0.0);
        for (std::size_t x = 1; x + 1 < width; ++x)
            u2[x] = 0.5 * tilt * (u[x - 1] + u[x + 1]);
        if (width > 1) u2[width - 1] = 0.5 * tilt * u[width - 2];
        std::swap(u, u2);
    }
    return out;
}

// Full transfer-matrix oracle from the arm series.
std::vector<std::vector<double>> series_matrix(const PeriodicSpec& spec, double phi,
                                               std::uint64_t n_max) {
    const std::size_t p = spec.gaps.size();
    std::vector<std::vector<double>> q(p, std::vector<double>(p, 0.0));
    for (std::size_t i = 0; i < p; ++i) {
        const std::uint64_t t_right = spec.gaps[i];
        const std::uint64_t t_left = spec.gaps[(i + p - 1) % p];
        ArmSeries right = arm_series(t_right, phi, n_max);
        ArmSeries left = arm_series(t_left, phi, n_max);
        q[i][(i + 1) % p] += right.to_far;
        q[i][(i + p - 1) % p] += left.to_far;
        q[i][i] += right.to_near + left.to_near;
    }
    return q;
}

PeriodicSpec random_pattern(std::mt19937_64& rng, std::size_t max_p,
                            std::uint64_t max_gap) {
    std::uniform_int_distribution<std::size_t> dp(1, max_p);
    std::uniform_int_distribution<std::uint64_t> dg(1, max_gap);
    std::vector<std::uint64_t> gaps(dp(rng));
    for (auto& g : gaps) g = dg(rng);
    return make_periodic_spec(std::move(gaps));
}

} // namespace

TEST_CASE("pattern constructor and the tilt angle") {
    PeriodicSpec spec = make_periodic_spec({2, 3, 10});
    CHECK(spec.period == 15);
    CHECK(spec.t_max == 10);
    CHECK(spec.gaps.size() == 3);
    CHECK_THROWS_AS(make_periodic_spec({}), ValidationError);
    CHECK_THROWS_AS(make_periodic_spec({2, 0, 3}), ValidationError);

    CHECK(delta_of_phi(0.0) == 0.0);
    for (double phi : {0.01, 0.2, 1.0, 3.0})
        CHECK(std::cos(delta_of_phi(phi)) == doctest::Approx(std::exp(-phi)).epsilon(1e-15));
    // The pole identity: Delta(g(t)) = pi / t.
    for (std::uint64_t t : {3, 5, 10, 100})
        CHECK(delta_of_phi(g_of(t)) ==
              doctest::Approx(kPi / static_cast<double>(t)).epsilon(1e-12));
    CHECK_THROWS_AS(delta_of_phi(-0.1), ValidationError);
}

TEST_CASE("transfer matrix is stochastic at phi zero") {
    for (const auto& gaps : {std::vector<std::uint64_t>{1}, {2}, {5}, {1, 1}, {2, 3},
                             {1, 4, 2}, {3, 3, 3}, {7, 1, 2, 9}}) {
        PeriodicSpec spec = make_periodic_spec(gaps);
        LaplaceMatrix q = laplace_matrix(spec, 0.0);
        CHECK(q.delta == 0.0);
        for (const auto& row : q.entries) {
            double sum = 0.0;
            for (double v : row) {
                sum += v;
                CHECK(v >= 0.0);
            }
            CHECK(std::abs(sum - 1.0) <= 1e-14);
        }
    }
    // Single gap of 2: both half-steps aggregate into the scalar entry 1.
    LaplaceMatrix one = laplace_matrix(make_periodic_spec({2}), 0.0);
    CHECK(one.entries[0][0] == 1.0);
}

TEST_CASE("transfer matrix matches the tilted series oracle") {
    PeriodicSpec spec = make_periodic_spec({2, 3});
    for (double phi : {0.0, 0.01, 0.3}) {
        LaplaceMatrix q = laplace_matrix(spec, phi);
        auto oracle = series_matrix(spec, phi, 10000);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                CHECK(q.entries[i][j] == doctest::Approx(oracle[i][j]).epsilon(1e-10));
    }
    // A pattern with a long gap and tilts through the awkward branch where
    // T Delta crosses pi/2 for the longest stretch.
    PeriodicSpec wide = make_periodic_spec({1, 6});
    for (double phi : {0.05, 0.9 * g_of(6)}) {
        LaplaceMatrix q = laplace_matrix(wide, phi);
        auto oracle = series_matrix(wide, phi, 40000);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j)
                CHECK(q.entries[i][j] == doctest::Approx(oracle[i][j]).epsilon(1e-9));
    }
}

TEST_CASE("transfer matrix symmetry, positivity and pole behavior") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 40; ++rep) {
        PeriodicSpec spec = random_pattern(rng, 6, 9);
        const double top = spec.t_max >= 3 ? g_of(spec.t_max) : 1.5;
        for (double frac : {0.1, 0.5, 0.9, 0.999}) {
            LaplaceMatrix q = laplace_matrix(spec, frac * top);
            const std::size_t p = q.entries.size();
            for (std::size_t i = 0; i < p; ++i) {
                for (std::size_t j = 0; j < p; ++j) {
                    CHECK(q.entries[i][j] >= 0.0);
                    CHECK(std::isfinite(q.entries[i][j]));
                    CHECK(std::abs(q.entries[i][j] - q.entries[j][i]) <= 1e-14);
                }
            }
        }
    }
    PeriodicSpec spec = make_periodic_spec({2, 10});
    CHECK_THROWS_AS(laplace_matrix(spec, g_of(10)), PhiOutOfRange);
    CHECK_THROWS_AS(laplace_matrix(spec, g_of(10) + 0.1), PhiOutOfRange);
    CHECK_NOTHROW(laplace_matrix(spec, g_of(10) * 0.9999));
    CHECK_THROWS_AS(laplace_matrix(spec, -0.01), ValidationError);
}

TEST_CASE("power iteration agrees with a dense symmetric eigensolver") {
    std::mt19937_64 rng(123);
    for (int rep = 0; rep < 30; ++rep) {
        PeriodicSpec spec = random_pattern(rng, 8, 9);
        const double top = spec.t_max >= 3 ? g_of(spec.t_max) : 1.5;
        std::uniform_real_distribution<double> df(0.05, 0.95);
        LaplaceMatrix q = laplace_matrix(spec, df(rng) * top);
        const std::size_t p = q.entries.size();
        Eigen::MatrixXd m(p, p);
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j)
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    q.entries[i][j];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
        const double dense = es.eigenvalues().maxCoeff();
        double residual = 0.0;
        const double power = perron_root(q, &residual);
        CHECK(std::abs(power - dense) <= 1e-12 * std::max(1.0, std::abs(dense)));
        CHECK(residual <= 1e-12 * std::max(1.0, std::abs(power) + 1.0));
    }
}

TEST_CASE("row sums at most one force a Perron root at most one") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> du(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t p = 2 + rep % 6;
        LaplaceMatrix q;
        q.entries.assign(p, std::vector<double>(p, 0.0));
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i; j < p; ++j)
                q.entries[i][j] = q.entries[j][i] = du(rng);
        double worst = 0.0;
        for (const auto& row : q.entries) {
            double s = 0.0;
            for (double v : row) s += v;
            worst = std::max(worst, s);
        }
        const double scale = du(rng) / worst;  // row sums now <= 1
        for (auto& row : q.entries)
            for (double& v : row) v *= scale;
        CHECK(perron_root(q) <= 1.0 + 1e-12);
    }
}

TEST_CASE("Perron root grows strictly with the tilt") {
    PeriodicSpec spec = make_periodic_spec({2, 5});
    double prev = 0.0;
    for (int k = 0; k <= 12; ++k) {
        const double phi = g_of(5) * 0.999 * static_cast<double>(k) / 12.0;
        const double lam = perron_root(laplace_matrix(spec, phi));
        if (k == 0) {
            CHECK(lam == doctest::Approx(1.0).epsilon(1e-14));
        } else {
            CHECK(lam > prev);
        }
        prev = lam;
    }
}

TEST_CASE("all-trap and alternating patterns have closed form rates") {
    for (double beta : {0.3, 1.0, 2.7}) {
        // Gap 1 everywhere: every site kills, so the rate is exactly beta.
        PhiResult all = phi_periodic(make_periodic_spec({1}), beta);
        CHECK(std::abs(all.phi - beta) <= 1e-11);
        // Gap 2: kills on every second step, rate beta / 2.
        PhiResult alt = phi_periodic(make_periodic_spec({2}), beta);
        CHECK(std::abs(alt.phi - 0.5 * beta) <= 1e-11);
    }
}

TEST_CASE("rate solver brackets, sandwich and cyclic invariance") {
    CHECK(phi_periodic(make_periodic_spec({2, 3}), 0.0).phi == 0.0);

    std::mt19937_64 rng(2024);
    for (int rep = 0; rep < 20; ++rep) {
        PeriodicSpec spec = random_pattern(rng, 5, 15);
        PhiResult r = phi_periodic(spec, 1.0);
        CHECK(r.bracket_hi - r.bracket_lo <= 1e-12);
        CHECK(r.phi > 0.0);
        if (spec.t_max >= 3) {
            CHECK(r.phi < g_of(spec.t_max));
            // The homogeneous rate of the widest gap is a lower bound, and
            // at that tilt the pattern's Perron root cannot exceed e^beta.
            const double floor_phi = phi_homogeneous(spec.t_max, 1.0).phi;
            CHECK(r.phi >= floor_phi - 1e-9);
            CHECK(perron_root(laplace_matrix(spec, floor_phi)) <= std::exp(1.0) + 1e-9);
        }
    }

    PhiResult a = phi_periodic(make_periodic_spec({2, 3, 7}), 1.0);
    PhiResult b = phi_periodic(make_periodic_spec({3, 7, 2}), 1.0);
    PhiResult c = phi_periodic(make_periodic_spec({7, 2, 3}), 1.0);
    CHECK(std::abs(a.phi - b.phi) <= 5e-12);
    CHECK(std::abs(a.phi - c.phi) <= 5e-12);

    // Single-gap pattern reduces to the scalar solver.
    for (std::uint64_t t : {2, 3, 5, 12}) {
        for (double beta : {0.5, 2.0}) {
            CHECK(std::abs(phi_periodic(make_periodic_spec({t}), beta).phi -
                           phi_homogeneous(t, beta).phi) <= 1e-10);
        }
    }
    CHECK_THROWS_AS(phi_homogeneous(1, 1.0), ValidationError);
    CHECK_THROWS_AS(phi_periodic(make_periodic_spec({2, 3}), -1.0), ValidationError);
    // Absurd killing strength pushes the root past what the bisection can
    // resolve next to the pole; the solver refuses rather than rounding.
    CHECK_THROWS_AS(phi_homogeneous(3, 30.0), GuaranteeError);
}

TEST_CASE("strong killing saturates the rate at the confinement constant") {
    const double phi20 = phi_homogeneous(10, 20.0).phi;
    const double phi5 = phi_homogeneous(10, 5.0).phi;
    const double phi1 = phi_homogeneous(10, 1.0).phi;
    CHECK(phi1 < phi5);
    CHECK(phi5 < phi20);
    CHECK(phi20 < g_of(10));
    CHECK(g_of(10) - phi20 <= 1e-6);
}

TEST_CASE("first order expansion error shrinks with the gap") {
    const double beta = 1.0;
    auto scaled_residual = [&](std::uint64_t t) {
        const double td = static_cast<double>(t);
        const double first = 1.0 - 4.0 / (std::expm1(beta) * td);
        return phi_homogeneous(t, beta).phi * 2.0 * td * td / (kPi * kPi) - first;
    };
    double prev = scaled_residual(20);
    for (std::uint64_t t : {40, 80, 160}) {
        const double cur = scaled_residual(t);
        CHECK(std::abs(cur) < std::abs(prev));
        prev = cur;
    }
}

TEST_CASE("residue walk rate matches the transfer matrix rate") {
    // Homogeneous columns.
    for (std::uint64_t t : {5, 10}) {
        for (double beta : {0.5, 1.0}) {
            const double dp = periodic_decay_rate(make_periodic_spec({t}), beta, 100000);
            CHECK(std::abs(dp - phi_homogeneous(t, beta).phi) <= 1e-6);
        }
    }
    // Genuinely periodic patterns, including one with t_max = 2 where the
    // transfer matrix has no pole and the bracket grows on demand.
    for (const auto& gaps :
         {std::vector<std::uint64_t>{3, 7}, {2, 3, 10}, {1, 2}}) {
        PeriodicSpec spec = make_periodic_spec(gaps);
        const double dp = periodic_decay_rate(spec, 1.0, 200000);
        CHECK(std::abs(dp - phi_periodic(spec, 1.0).phi) <= 1e-6);
    }

    // No killing, no decay.
    CHECK(std::abs(periodic_decay_rate(make_periodic_spec({2, 3}), 0.0, 1000)) <= 1e-12);

    // Strong killing on a single wide gap: between the matrix rate and the
    // hard-wall constant.
    const double rate = periodic_decay_rate(make_periodic_spec({4}), 5.0, 200000);
    CHECK(rate >= phi_homogeneous(4, 5.0).phi - 1e-9);
    CHECK(rate <= g_of(4) + 1e-9);

    CHECK_THROWS_AS(periodic_decay_rate(make_periodic_spec({1}), 1.0, 100000),
                    ValidationError);
    CHECK_THROWS_AS(periodic_decay_rate(make_periodic_spec({2, 3}), 1.0, 49),
                    ValidationError);
    CHECK_THROWS_AS(periodic_decay_rate(make_periodic_spec({2, 3}), -1.0, 1000),
                    ValidationError);
}
