#ifndef TRAPWALK_STATS_HPP
#define TRAPWALK_STATS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "trapwalk/env.hpp"
#include "trapwalk/limit.hpp"

namespace trapwalk {

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov machinery
// ---------------------------------------------------------------------------

struct KsResult {
    double statistic = 0.0;   // sup-norm distance between empirical and model CDF
    double dkw_band = 0.0;    // sqrt(log(2/alpha) / (2M))
    std::size_t sample_size = 0;
};

// One-sample KS statistic of a sorted sample against a model CDF, with the
// distribution-free DKW band at level alpha. Rejects empty or unsorted input.
KsResult ks_distance(const std::vector<double>& sorted_sample,
                     const std::function<double(double)>& cdf,
                     double alpha = 0.01);

struct KsTwoSampleResult {
    double statistic = 0.0;
    double critical_value = 0.0;  // sqrt(-log(alpha/2)/2) * sqrt((n+m)/(n m))
    bool reject = false;
};

// Two-sample KS test; symmetric in its arguments (samples are copied and
// sorted internally). reject is true when statistic > critical_value.
KsTwoSampleResult ks_two_sample(std::vector<double> first, std::vector<double> second,
                                double alpha = 0.01);

// ---------------------------------------------------------------------------
// Crossing-cost estimation
// ---------------------------------------------------------------------------

struct LambdaEstimate {
    double value = 0.0;       // mean of per-environment estimates at index ell
    double spread = 0.0;      // max - min across environments
    double std_error = 0.0;   // sample standard deviation / sqrt(env_count)
    std::size_t ell = 0;
    std::vector<double> per_env;
};

// Estimates the per-trap crossing cost lambda(beta) as the exact finite-ell
// cost lambda(ell, beta) averaged over env_count independent environments
// (seed streams "mc" 0..env_count-1). The spread across environments is the
// honest error indicator; there is no closed form to compare against.
LambdaEstimate estimate_lambda(const GapLaw& law, double beta, std::size_t ell,
                               std::size_t env_count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Gap-score profile over records
// ---------------------------------------------------------------------------

// Score of the strategy "cross the first ell-1 traps, then sit confined in
// the gap T_ell for the remaining time":
//
//   G(ell) = cost(0 -> tau_{ell-1}) / N + g(T_ell) * n / N,  N = n^(gamma/(gamma+2)).
//
// The minimum over record indexes upper-bounds the finite-volume free energy
// up to o(1). Gaps of width <= 2 cannot confine the walk, so their score is
// +infinity.
struct GapScore {
    std::size_t ell = 0;      // 1-based gap index; T_ell is a record gap
    double score = 0.0;
    bool is_argmin = false;
};

// Profile over all records of the environment. The crossing cost is computed
// exactly from the environment's own trap positions by one harmonic sweep;
// pass lambda_fn to substitute a model cost per trap (lambda_fn(ell-1) is
// multiplied by ell-1).
std::vector<GapScore> gap_score_profile(const Environment& env, double beta,
                                        std::int64_t n,
                                        const std::function<double(std::size_t)>& lambda_fn = {});

// ---------------------------------------------------------------------------
// Record statistics
// ---------------------------------------------------------------------------

struct RecordTailRow {
    double b = 0.0;           // threshold multiplier: count >= b * log n
    double threshold = 0.0;   // b * log n
    std::size_t exceed_count = 0;
    double frequency = 0.0;
    double bound = 0.0;       // n^(-c(b)) with c(b) = 1 + b(log b - 1)
};

struct RecordRatioRow {
    double u = 0.0;           // tail parameter: ratio >= 1 - u
    std::size_t exceed_count = 0;
    std::size_t pair_count = 0;
    double frequency = 0.0;   // exceed_count / pair_count; O(u) as u -> 0
};

struct RecordsReport {
    GapLaw law;
    std::int64_t n = 0;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> count_histogram;  // histogram of R_n; index = count
    double mean_count = 0.0;
    double harmonic_sum = 0.0;                 // sum_{k<=n} 1/k; E[R_n] never exceeds it
    std::vector<RecordTailRow> tail_rows;      // b in {2, 3}
    std::vector<RecordRatioRow> ratio_rows;    // consecutive record ratios T*_k / T*_{k+1}
};

// Monte Carlo law of the record count R_n among n i.i.d. gaps, the deviation
// frequencies P(R_n >= b log n) against the n^(-c(b)) bound, and the tail
// table of consecutive record ratios (whose tail P(ratio >= 1-u) is linear
// in u). Requires replicates >= 100.
RecordsReport records_statistics(const GapLaw& law, std::int64_t n,
                                 std::size_t replicates, std::uint64_t seed,
                                 int jobs = 1);

std::string records_report_to_json(const RecordsReport& report);
std::string records_report_to_csv(const RecordsReport& report);

// ---------------------------------------------------------------------------
// Convergence experiment
// ---------------------------------------------------------------------------

enum class LambdaSource { estimated, provided };

const char* lambda_source_name(LambdaSource source);
LambdaSource lambda_source_from_name(const std::string& name);

struct ExperimentConfig {
    double gamma = 1.0;
    double beta = 1.0;
    LawKind law_kind = LawKind::DiscretePareto;
    std::vector<std::int64_t> n_grid;          // strictly increasing horizons
    std::size_t env_count = 2;                 // M >= 2 environments per horizon
    std::uint64_t seed = 0;                    // master seed
    LambdaSource lambda_source = LambdaSource::estimated;
    double lambda_value = 0.0;                 // consumed when lambda_source == provided
    std::size_t lambda_ell = 10000;            // ell* for the estimated route
    std::size_t lambda_env_count = 8;          // environments averaged for lambda
    int jobs = 1;                              // worker threads; results independent of it
};

struct ConvergenceRow {
    std::int64_t n = 0;
    double scale_n = 0.0;                      // N = n^(gamma/(gamma+2))
    std::vector<double> free_energies;         // F_n per environment, NaN where it failed
    std::vector<std::size_t> trap_caps;        // accepted absorbing cap per environment
    double ks_statistic = 0.0;
    double dkw_band = 0.0;
    double median = 0.0;
    double mean = 0.0;
    std::size_t failures = 0;
};

struct ConvergenceReport {
    ExperimentConfig config;
    LimitParams limit_params;                  // lambda actually used, gamma, tail constant
    double lambda_spread = 0.0;                // 0 when lambda was provided
    double lambda_std_error = 0.0;
    std::vector<ConvergenceRow> rows;          // one per n, in grid order
    std::size_t total_failures = 0;
    std::string content_hash;                  // hash of config for replay bookkeeping
};

// Runs the full experiment: for every horizon n in the grid, M environments
// (seed streams "env" 0..M-1), exact survival DP per environment with an
// absorbing right cap grown until the truncation bias is below 1e-9, then the
// KS distance between the empirical law of F_n and the closed-form limit CDF
// with lambda from lambda_source. beta = 0 is rejected. Per-environment
// failures are counted and the remaining results kept.
ConvergenceReport convergence_experiment(const ExperimentConfig& config);

std::string convergence_report_to_json(const ConvergenceReport& report);
std::string convergence_report_to_csv(const ConvergenceReport& report);

}  // namespace trapwalk

#endif  // TRAPWALK_STATS_HPP
