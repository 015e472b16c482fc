#ifndef TRAPWALK_LIMIT_HPP
#define TRAPWALK_LIMIT_HPP

#include <cstdint>
#include <random>

#include "trapwalk/env.hpp"

namespace trapwalk {

// Parameters of the limiting minimization problem. The rescaled gap process
// converges to a Poisson point process on [0,inf) x (0,inf) with intensity
// dx (x) c_tau * gamma * y^(-gamma-1) dy; c_tau here is the tail constant,
// i.e. the limit of n P(T > y n^(1/gamma)) * y^gamma (GapLaw exposes it as
// limit_tail_constant()). The limit variable is
//   F = inf over points (x, y) of psi(x, y) = lambda x + pi^2 / (2 y^2).
struct LimitParams {
    double lambda = 1.0;
    double gamma = 1.0;
    double c_tau = 1.0;
};

struct LimitSample {
    double f_value = 0.0;
    double x_star = 0.0;
    double y_star = 0.0;
    std::size_t points_examined = 0;
    std::size_t tie_count = 0;  // further points attaining f_value exactly
};

// psi(x, y) = lambda x + pi^2 / (2 y^2); rejects y <= 0.
double psi_value(const LimitParams& params, double x, double y);

// Poisson points of the limiting intensity dx (x) c_tau gamma y^(-gamma-1) dy
// inside [x1, x2) x [y1, y2); y2 may be infinite. The revelation sampler is
// built on this; it is public so the intensity itself can be checked against
// closed-form rectangle masses.
PointMeasure sample_intensity_rectangle(const LimitParams& params, std::mt19937_64& rng,
                                        double x1, double x2, double y1, double y2);

// Minimum of psi over a finite point set, ties resolved toward the smallest
// x and then the smallest y. Throws EmptyMeasure on an empty set.
LimitSample infimum_over_measure(const LimitParams& params, const PointMeasure& measure);

// Draws F by structural two-stage revelation of the Poisson process: first
// the leftmost point of the strip y >= 1 (giving an a.s. finite upper bound
// u0), then Poisson counts in rectangles covering everything that could
// still beat u0. No use of the closed-form law.
LimitSample sample_limit_F(const LimitParams& params, std::uint64_t seed);

// Same, but after the standard pass additionally reveals the region that
// would matter if the bound were u0 * (1 + margin). The standard coverage
// is already exhaustive, so the extra points can never win: the returned
// sample must equal sample_limit_F(params, seed) exactly.
LimitSample sample_limit_F_extended(const LimitParams& params, std::uint64_t seed,
                                    double margin);

// P(F >= u) in closed form; rejects u < 0.
double limit_tail_cdf(const LimitParams& params, double u);

// Quantile of F: the u with P(F <= u) = q, for q in (0, 1).
double limit_quantile(const LimitParams& params, double q);

// One draw of F by inverting the closed-form tail; the reference sampler
// the structural one is tested against.
double sample_limit_F_inverse(const LimitParams& params, std::mt19937_64& rng);

} // namespace trapwalk

#endif
