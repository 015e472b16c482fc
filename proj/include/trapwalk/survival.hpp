#ifndef TRAPWALK_SURVIVAL_HPP
#define TRAPWALK_SURVIVAL_HPP

#include <cstdint>
#include <vector>

#include "trapwalk/env.hpp"

namespace trapwalk {

struct SurvivalParams {
    double beta = 1.0;
    std::uint64_t n = 0;
    // Relative pruning threshold for the dynamic program. 0 means exact:
    // the full reachable window is kept and log_error_bound comes out 0.
    // A value in (0, 1) lets the DP drop edge mass below threshold * max,
    // with everything dropped accounted into log_error_bound.
    double drop_threshold = 0.0;
    // Optional absorbing boundary at trap index cap (0 = none). Mass
    // arriving at tau_cap is absorbed into the error accumulator instead
    // of evolving further; every such path has crossed cap traps, so the
    // absorbed total is at most e^(-beta*(cap-1)). This keeps the window
    // narrow on long runs without giving up the rigorous bound.
    std::size_t right_trap_cap = 0;

    static double default_drop_threshold(std::uint64_t n) {
        return n <= 100000 ? 0.0 : 1e-280;
    }
};

struct SurvivalResult {
    double log_z = 0.0;           // log of the quenched survival weight, <= 0
    double free_energy = 0.0;     // -log_z / scale_n
    double scale_n = 1.0;         // n^(gamma/(gamma+2))
    double log_error_bound = 0.0; // rigorous bound on |log_z - exact|, 0 when exact
};

// Survival weight of the walk killed at rate beta on the traps and killed
// on hitting Z_{<=0}, after n steps:
//   Z_n = E[ exp(-beta * #{1<=k<=n : S_k in tau}) 1{S_k >= 1 for all k<=n} ].
// Exact dynamic program over site weights with per-block floating scales,
// so arbitrarily deep weight profiles are representable.
SurvivalResult log_survival_probability(const Environment& env, const SurvivalParams& params);

struct CrossingResult {
    double log_p = 0.0;                 // always <= -beta * (j - i)
    std::vector<double> per_trap_cost;  // increments, sums to -log_p
};

// P(tau_i -> tau_j): the walk starts at tau_i, must reach tau_j before
// returning to tau_i, surviving every trap visit including the landing.
// per_trap_cost[0] = -log P(tau_i -> tau_{i+1}) and per_trap_cost[m] =
// log P(tau_i -> tau_{i+m}) - log P(tau_i -> tau_{i+m+1}).
CrossingResult crossing_probability(const Environment& env, std::size_t i, std::size_t j,
                                    double beta);

// One environment sampled from the law; entry ell-1 holds
// -log P(tau_0 -> tau_ell) / ell, the per-trap crossing cost over the
// first ell gaps. Computed in a single sweep.
std::vector<double> lambda_sequence(const GapLaw& law, double beta, std::size_t ell_max,
                                    std::uint64_t seed);

// P_{x0}(hit x_target before 0, surviving all trap visits including the
// landing at x_target; a trap at x0 does not charge at time 0).
double log_hit_before_zero(const Environment& env, std::int64_t x0, std::int64_t x_target,
                           double beta);

// log P(simple walk started at x0 stays strictly inside (0, t) for n steps).
double log_confined_survival_probability(std::uint64_t t, std::uint64_t n,
                                         std::uint64_t x0 = 1);

// Exponential decay rate of confinement in a gap of length t:
// g(t) = -log cos(pi / t), finite for t >= 3.
double small_ball_rate(std::uint64_t t);

struct FkgResult {
    std::vector<double> cdf_killed;  // P(H_x <= m | hit x before 0, survive), m = 1..n
    std::vector<double> cdf_free;    // same with beta = 0
    double log_denominator_killed = 0.0;
    double log_denominator_free = 0.0;
};

// Conditional arrival-time law at x with and without killing. The killed
// walk, conditioned to make it, arrives stochastically earlier, so
// cdf_killed[m] >= cdf_free[m] up to rounding.
FkgResult fkg_compare(const Environment& env, std::int64_t x, std::uint64_t n, double beta);

struct TwoSidedParams {
    double beta = 1.0;
    std::size_t samples = 1000;
    std::uint64_t left_truncation = 50;  // absorb the walk this far below 0
    std::uint64_t seed = 0;
    // Kill conventions for the crossing cost seen from a trap. Defaults
    // match the one-sided per-trap cost: the origin is itself a trap and
    // the arrival at the next trap charges a kill factor.
    bool kill_at_origin = true;
    bool kill_on_arrival = true;
};

struct TwoSidedResult {
    double lambda_hat = 0.0;
    double std_error = 0.0;
    double truncation_bound = 0.0;  // bound on the truncation bias of lambda_hat
    std::size_t samples = 0;
};

// Monte Carlo estimate of the crossing cost seen from a typical trap with
// the environment extending both ways: the walk may roam below the origin
// among freshly sampled traps. Throws TruncationTooCoarse when the
// left-truncation bias is not far below the statistical error.
TwoSidedResult lambda_two_sided(const GapLaw& law, const TwoSidedParams& params);

// Per-sample evaluator behind lambda_two_sided, exposed for testing.
// neg_traps lists killing sites <= 0 in decreasing order (0 itself may be
// included), all > -left_limit; the target trap sits at t1 > 0.
double log_two_sided_crossing(const std::vector<std::int64_t>& neg_traps, std::int64_t t1,
                              double beta, std::uint64_t left_limit, bool kill_on_arrival);

} // namespace trapwalk

#endif
