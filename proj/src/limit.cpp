#include "trapwalk/limit.hpp"
#include "trapwalk/errors.hpp"
#include "trapwalk/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace trapwalk {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_params(const LimitParams& p) {
    if (!(p.lambda > 0.0) || !std::isfinite(p.lambda))
        throw ValidationError("limit law needs lambda > 0");
    if (!(p.gamma > 0.0) || !std::isfinite(p.gamma))
        throw ValidationError("limit law needs gamma > 0");
    if (!(p.c_tau > 0.0) || !std::isfinite(p.c_tau))
        throw ValidationError("limit law needs c_tau > 0");
}

struct Best {
    double f = std::numeric_limits<double>::infinity();
    double x = 0.0;
    double y = 0.0;
    std::size_t ties = 0;

    void offer(double f_new, double x_new, double y_new) {
        if (f_new < f) {
            f = f_new;
            x = x_new;
            y = y_new;
            ties = 0;
        } else if (f_new == f) {
            ++ties;
            if (x_new < x || (x_new == x && y_new < y)) {
                x = x_new;
                y = y_new;
            }
        }
    }
};

// Poisson points in [x1, x2) x [y1, y2), offered to `best`.
std::size_t reveal_rectangle(const LimitParams& p, std::mt19937_64& rng, double x1, double x2,
                             double y1, double y2, Best& best) {
    PointMeasure pts = sample_intensity_rectangle(p, rng, x1, x2, y1, y2);
    for (const auto& [x, y] : pts.points)
        best.offer(p.lambda * x + kPi * kPi / (2.0 * y * y), x, y);
    return pts.points.size();
}

struct Revelation {
    Best best;
    double u0 = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;
    std::size_t examined = 0;
};

Revelation reveal_standard(const LimitParams& p, std::mt19937_64& rng) {
    Revelation r;
    // Stage one: the leftmost point of the strip y >= 1. Points with y >= 1
    // arrive at rate c_tau along x, and the y-coordinate has tail y^(-gamma).
    r.x0 = -std::log(uniform_pos(rng)) / p.c_tau;
    r.y0 = std::pow(uniform_pos(rng), -1.0 / p.gamma);
    r.u0 = psi_value(p, r.x0, r.y0);
    r.best.offer(r.u0, r.x0, r.y0);
    r.examined = 1;

    // Stage two: anything beating u0 lies in
    //   A = { x < u0 / lambda, y > pi / sqrt(2 (u0 - lambda x)) },
    // and stage one already certified {y >= 1, x < x0} empty. Cover the rest
    // of A with rectangles; points of the covering that fall outside A simply
    // lose the minimization, so over-coverage is harmless.
    const double x2 = r.u0 / p.lambda;  // > x0, since psi(x0, y0) > lambda x0
    const double b = kPi / std::sqrt(2.0 * r.u0);
    if (b >= 1.0) {
        r.examined += reveal_rectangle(p, rng, r.x0, x2, b, kInf, r.best);
    } else {
        r.examined += reveal_rectangle(p, rng, 0.0, r.x0, b, 1.0, r.best);
        r.examined += reveal_rectangle(p, rng, r.x0, x2, b, kInf, r.best);
    }
    return r;
}

LimitSample to_sample(const Revelation& r) {
    LimitSample s;
    s.f_value = r.best.f;
    s.x_star = r.best.x;
    s.y_star = r.best.y;
    s.points_examined = r.examined;
    s.tie_count = r.best.ties;
    return s;
}

} // namespace

double psi_value(const LimitParams& params, double x, double y) {
    check_params(params);
    if (!(y > 0.0)) throw ValidationError("psi needs y > 0");
    return params.lambda * x + kPi * kPi / (2.0 * y * y);
}

PointMeasure sample_intensity_rectangle(const LimitParams& p, std::mt19937_64& rng, double x1,
                                        double x2, double y1, double y2) {
    check_params(p);
    if (!(x2 >= x1) || !(y1 > 0.0) || !(y2 >= y1))
        throw ValidationError("rectangle needs x1 <= x2 and 0 < y1 <= y2");
    PointMeasure out;
    if (!(x2 > x1) || !(y2 > y1)) return out;
    const double t1 = std::pow(y1, -p.gamma);
    const double t2 = std::isinf(y2) ? 0.0 : std::pow(y2, -p.gamma);
    const double mean = (x2 - x1) * p.c_tau * (t1 - t2);
    if (!(mean > 0.0)) return out;
    std::poisson_distribution<long long> pois(mean);
    const long long count = pois(rng);
    out.points.reserve(static_cast<std::size_t>(count));
    for (long long i = 0; i < count; ++i) {
        double x = x1 + (x2 - x1) * uniform01(rng);
        double v = uniform01(rng);
        double y = std::pow(t1 - v * (t1 - t2), -1.0 / p.gamma);
        out.points.emplace_back(x, y);
    }
    return out;
}

LimitSample infimum_over_measure(const LimitParams& params, const PointMeasure& measure) {
    check_params(params);
    if (measure.points.empty())
        throw EmptyMeasure("cannot take an infimum over an empty point measure");
    Best best;
    for (const auto& [x, y] : measure.points) best.offer(psi_value(params, x, y), x, y);
    LimitSample s;
    s.f_value = best.f;
    s.x_star = best.x;
    s.y_star = best.y;
    s.points_examined = measure.points.size();
    s.tie_count = best.ties;
    return s;
}

LimitSample sample_limit_F(const LimitParams& params, std::uint64_t seed) {
    check_params(params);
    std::mt19937_64 rng(seed);
    return to_sample(reveal_standard(params, rng));
}

LimitSample sample_limit_F_extended(const LimitParams& params, std::uint64_t seed,
                                    double margin) {
    check_params(params);
    if (!(margin >= 0.0) || !std::isfinite(margin))
        throw ValidationError("margin must be finite and >= 0");
    std::mt19937_64 rng(seed);
    Revelation r = reveal_standard(params, rng);

    // Pretend the bound were u' = u0 (1 + margin) and reveal the extra
    // territory A(u') \ (what the standard pass already knows). Everything
    // found here has psi >= u0 >= f, so the minimum cannot move.
    const double u1 = r.u0 * (1.0 + margin);
    const double x2_old = r.u0 / params.lambda;
    const double x2_new = u1 / params.lambda;
    const double b_old = kPi / std::sqrt(2.0 * r.u0);
    const double b_new = kPi / std::sqrt(2.0 * u1);
    r.examined += reveal_rectangle(params, rng, x2_old, x2_new, b_new, kInf, r.best);
    if (b_old >= 1.0 && b_new >= 1.0) {
        r.examined += reveal_rectangle(params, rng, r.x0, x2_old, b_new, b_old, r.best);
    } else if (b_old >= 1.0) {  // b_new < 1 <= b_old
        r.examined += reveal_rectangle(params, rng, 0.0, x2_old, b_new, 1.0, r.best);
        r.examined += reveal_rectangle(params, rng, r.x0, x2_old, 1.0, b_old, r.best);
    } else {  // both strips below 1: the standard pass covered y >= b_old
        r.examined += reveal_rectangle(params, rng, 0.0, x2_old, b_new, b_old, r.best);
    }
    return to_sample(r);
}

double limit_tail_cdf(const LimitParams& params, double u) {
    check_params(params);
    if (u < 0.0) throw ValidationError("tail is defined for u >= 0");
    const double g = params.gamma;
    double expo = params.c_tau * std::pow(2.0 * u, 0.5 * g + 1.0) /
                  (params.lambda * std::pow(kPi, g) * (g + 2.0));
    return std::exp(-expo);
}

double limit_quantile(const LimitParams& params, double q) {
    check_params(params);
    if (!(q > 0.0) || !(q < 1.0)) throw ValidationError("quantile level must lie in (0, 1)");
    const double g = params.gamma;
    double w = -std::log1p(-q) * params.lambda * std::pow(kPi, g) * (g + 2.0) / params.c_tau;
    return 0.5 * std::pow(w, 2.0 / (g + 2.0));
}

double sample_limit_F_inverse(const LimitParams& params, std::mt19937_64& rng) {
    check_params(params);
    const double g = params.gamma;
    double w = -std::log(uniform_pos(rng)) * params.lambda * std::pow(kPi, g) * (g + 2.0) /
               params.c_tau;
    return 0.5 * std::pow(w, 2.0 / (g + 2.0));
}

} // namespace trapwalk
