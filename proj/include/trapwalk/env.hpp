#ifndef TRAPWALK_ENV_HPP
#define TRAPWALK_ENV_HPP

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace trapwalk {

enum class LawKind { DiscretePareto, Zeta };

// Heavy-tailed law of a single gap T >= 1 between consecutive traps.
//
//   DiscretePareto: P(T >= k) = k^(-gamma) exactly, for every integer k >= 1.
//   Zeta:           P(T = k)  = k^(-(1+gamma)) / zeta(1+gamma).
//
// c_tau is the constant in the tail of the probability mass function,
// P(T = k) ~ c_tau * k^(-(1+gamma)). The rescaled point process of gaps
// converges to a Poisson process whose intensity carries c_tau / gamma
// (see limit_tail_constant), not c_tau itself; keeping both spellings
// explicit avoids a silent factor-gamma mistake downstream.
struct GapLaw {
    double gamma = 1.0;
    LawKind kind = LawKind::DiscretePareto;
    double c_tau = 1.0;

    // Constant c with n * P(T > y n^(1/gamma)) -> c / y^gamma; equals
    // c_tau / gamma and is what the limit law consumes.
    double limit_tail_constant() const { return c_tau / gamma; }
};

GapLaw discrete_pareto_law(double gamma);
GapLaw zeta_gap_law(double gamma);

const char* law_kind_name(LawKind kind);
LawKind law_kind_from_name(const std::string& name);

// One draw from the gap law. DiscretePareto inverts the tail exactly:
// the returned T satisfies {T >= k} iff {u <= k^(-gamma)} for the uniform
// u consumed. Zeta uses Devroye's rejection sampler.
std::uint64_t sample_gap(const GapLaw& law, std::mt19937_64& rng);

// Quantile behind the DiscretePareto draw, exposed so the exactness of the
// acceptance regions {T >= k} <=> {u <= k^(-gamma)} is testable directly.
// Requires u in (0, 1].
std::uint64_t discrete_pareto_quantile(double gamma, double u);

// Trap positions tau_0 = 0 < tau_1 < ... built from i.i.d. gaps.
struct Environment {
    GapLaw law;
    std::uint64_t seed = 0;                // generator seed used, 0 if handmade
    std::vector<std::uint64_t> gaps;       // gaps[i] = tau_{i+1} - tau_i >= 1
    std::vector<std::uint64_t> positions;  // positions[i] = tau_i, positions[0] = 0
};

// Builds positions from gaps, checking every gap >= 1 and that no position
// exceeds 2^63 - 1.
Environment environment_from_gaps(const GapLaw& law, std::vector<std::uint64_t> gaps,
                                  std::uint64_t seed = 0);

Environment sample_environment(const GapLaw& law, std::size_t gap_count,
                               std::uint64_t seed);

// Strict running-maximum records of the gap sequence. The first gap is
// always a record. Indexes are 0-based positions into env.gaps;
// record_positions[k] is the left trap tau_{i(k)} of the record gap.
struct RecordSequence {
    std::vector<std::size_t> record_indexes;
    std::vector<std::uint64_t> record_gaps;
    std::vector<std::uint64_t> record_positions;
};

RecordSequence compute_records(const Environment& env);

// Gap sequence rescaled to points ((i-1)/N, T_i * N^(-1/gamma)), i >= 1.
struct PointMeasure {
    std::vector<std::pair<double, double>> points;
};

PointMeasure rescaled_point_measure(const Environment& env, double scale_n);

// Same, keeping only points with x <= x_max and y >= y_min.
PointMeasure rescaled_point_measure(const Environment& env, double scale_n,
                                    double x_max, double y_min);

// E[log T] under the law, accurate to 1e-10 absolute.
double mean_log_gap(const GapLaw& law);

// Text format: header "gamma=<g> law=<kind> seed=<s>", one gap per line.
void write_env_text(std::ostream& out, const Environment& env);
Environment read_env_text(std::istream& in);

// JSON object with the same fields and the gaps as an array.
std::string env_to_json(const Environment& env);
Environment env_from_json(const std::string& text);

} // namespace trapwalk

#endif
