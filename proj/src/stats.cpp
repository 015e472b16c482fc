#include "trapwalk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "trapwalk/errors.hpp"
#include "trapwalk/parallel.hpp"
#include "trapwalk/rng.hpp"
#include "trapwalk/survival.hpp"

namespace trapwalk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Truncation bias accepted for the capped survival DP inside the experiment.
constexpr double kCapBiasTarget = 1e-9;
constexpr std::size_t kInitialCap = 128;

double sample_mean(const std::vector<double>& values) {
    if (values.empty()) return kNaN;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double sorted_median(const std::vector<double>& sorted) {
    if (sorted.empty()) return kNaN;
    std::size_t m = sorted.size();
    return 0.5 * (sorted[(m - 1) / 2] + sorted[m / 2]);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov machinery
// ---------------------------------------------------------------------------

KsResult ks_distance(const std::vector<double>& sorted_sample,
                     const std::function<double(double)>& cdf, double alpha) {
    if (sorted_sample.empty())
        throw ValidationError("ks_distance: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("ks_distance: alpha must lie in (0, 1)");
    const std::size_t m = sorted_sample.size();
    double d = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (i > 0 && sorted_sample[i] < sorted_sample[i - 1])
            throw ValidationError("ks_distance: sample is not sorted");
        double f = cdf(sorted_sample[i]);
        double hi = static_cast<double>(i + 1) / static_cast<double>(m);
        double lo = static_cast<double>(i) / static_cast<double>(m);
        d = std::max(d, std::max(std::fabs(f - hi), std::fabs(f - lo)));
    }
    KsResult out;
    out.statistic = d;
    out.dkw_band = std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(m)));
    out.sample_size = m;
    return out;
}

KsTwoSampleResult ks_two_sample(std::vector<double> first, std::vector<double> second,
                                double alpha) {
    if (first.empty() || second.empty())
        throw ValidationError("ks_two_sample: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ValidationError("ks_two_sample: alpha must lie in (0, 1)");
    std::sort(first.begin(), first.end());
    std::sort(second.begin(), second.end());
    const double n = static_cast<double>(first.size());
    const double m = static_cast<double>(second.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    // Step through the pooled sample; ties advance both sides before the
    // empirical CDFs are compared, which keeps the statistic symmetric.
    while (i < first.size() || j < second.size()) {
        double x;
        if (i == first.size()) x = second[j];
        else if (j == second.size()) x = first[i];
        else x = std::min(first[i], second[j]);
        while (i < first.size() && first[i] == x) ++i;
        while (j < second.size() && second[j] == x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    KsTwoSampleResult out;
    out.statistic = d;
    out.critical_value = std::sqrt(-std::log(alpha / 2.0) / 2.0) * std::sqrt((n + m) / (n * m));
    out.reject = out.statistic > out.critical_value;
    return out;
}

// ---------------------------------------------------------------------------
// Crossing-cost estimation
// ---------------------------------------------------------------------------

LambdaEstimate estimate_lambda(const GapLaw& law, double beta, std::size_t ell,
                               std::size_t env_count, std::uint64_t seed) {
    if (ell < 1)
        throw ValidationError("estimate_lambda: ell must be >= 1");
    if (env_count < 1)
        throw ValidationError("estimate_lambda: need at least one environment");
    LambdaEstimate out;
    out.ell = ell;
    out.per_env.reserve(env_count);
    for (std::size_t j = 0; j < env_count; ++j) {
        auto seq = lambda_sequence(law, beta, ell, derive_seed(seed, "mc", j));
        out.per_env.push_back(seq.back());
    }
    out.value = sample_mean(out.per_env);
    auto [lo, hi] = std::minmax_element(out.per_env.begin(), out.per_env.end());
    out.spread = *hi - *lo;
    if (env_count > 1) {
        double ss = 0.0;
        for (double v : out.per_env) ss += (v - out.value) * (v - out.value);
        out.std_error = std::sqrt(ss / static_cast<double>(env_count - 1)) /
                        std::sqrt(static_cast<double>(env_count));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gap-score profile over records
// ---------------------------------------------------------------------------

std::vector<GapScore> gap_score_profile(const Environment& env, double beta, std::int64_t n,
                                        const std::function<double(std::size_t)>& lambda_fn) {
    if (n < 1)
        throw ValidationError("gap_score_profile: n must be >= 1");
    if (env.gaps.empty())
        throw ValidationError("gap_score_profile: environment has no gaps");
    RecordSequence records = compute_records(env);
    const double nn = static_cast<double>(n);
    const double scale_n = std::pow(nn, env.law.gamma / (env.law.gamma + 2.0));

    // Exact crossing costs come from one sweep up to the last record trap;
    // cost_to[r] = -log P(tau_0 -> tau_r).
    std::vector<double> cost_to;
    std::size_t last = records.record_indexes.back();
    if (!lambda_fn && last >= 1) {
        CrossingResult crossing = crossing_probability(env, 0, last, beta);
        cost_to.resize(last + 1, 0.0);
        for (std::size_t r = 1; r <= last; ++r)
            cost_to[r] = cost_to[r - 1] + crossing.per_trap_cost[r - 1];
    }

    std::vector<GapScore> out;
    out.reserve(records.record_indexes.size());
    std::size_t best = 0;
    for (std::size_t k = 0; k < records.record_indexes.size(); ++k) {
        std::size_t r = records.record_indexes[k];  // traps crossed before sitting
        std::uint64_t gap = records.record_gaps[k];
        double cost = 0.0;
        if (r >= 1)
            cost = lambda_fn ? lambda_fn(r) * static_cast<double>(r) : cost_to[r];
        double rate = gap >= 3 ? small_ball_rate(gap) : kInf;
        GapScore score;
        score.ell = r + 1;
        score.score = cost / scale_n + rate * nn / scale_n;
        out.push_back(score);
        if (score.score < out[best].score) best = k;
    }
    out[best].is_argmin = true;
    return out;
}

// ---------------------------------------------------------------------------
// Record statistics
// ---------------------------------------------------------------------------

namespace {

struct RecordsDraw {
    std::size_t count = 0;
    std::vector<std::uint64_t> record_gaps;
};

const double kRatioGrid[] = {0.05, 0.1, 0.2, 0.4};

} // namespace

RecordsReport records_statistics(const GapLaw& law, std::int64_t n, std::size_t replicates,
                                 std::uint64_t seed, int jobs) {
    if (n < 1)
        throw ValidationError("records_statistics: n must be >= 1");
    if (replicates < 100)
        throw ValidationError("records_statistics: need at least 100 replicates");

    unsigned workers = jobs < 0 ? 1u : static_cast<unsigned>(jobs);
    auto draws = parallel_map<RecordsDraw>(replicates, workers, [&](std::size_t r) {
        std::mt19937_64 rng = make_rng(seed, "env", r);
        RecordsDraw draw;
        std::uint64_t running_max = 0;
        for (std::int64_t k = 0; k < n; ++k) {
            std::uint64_t gap = sample_gap(law, rng);
            if (gap > running_max) {
                running_max = gap;
                ++draw.count;
                draw.record_gaps.push_back(gap);
            }
        }
        return draw;
    });

    RecordsReport report;
    report.law = law;
    report.n = n;
    report.replicates = replicates;
    report.seed = seed;

    std::size_t max_count = 0;
    for (const auto& d : draws) max_count = std::max(max_count, d.count);
    report.count_histogram.assign(max_count + 1, 0);
    double total = 0.0;
    for (const auto& d : draws) {
        report.count_histogram[d.count] += 1;
        total += static_cast<double>(d.count);
    }
    report.mean_count = total / static_cast<double>(replicates);
    report.harmonic_sum = 0.0;
    for (std::int64_t k = n; k >= 1; --k) report.harmonic_sum += 1.0 / static_cast<double>(k);

    for (double b : {2.0, 3.0}) {
        RecordTailRow row;
        row.b = b;
        row.threshold = b * std::log(static_cast<double>(n));
        for (const auto& d : draws)
            if (static_cast<double>(d.count) >= row.threshold) ++row.exceed_count;
        row.frequency = static_cast<double>(row.exceed_count) / static_cast<double>(replicates);
        double c = 1.0 + b * (std::log(b) - 1.0);
        row.bound = std::pow(static_cast<double>(n), -c);
        report.tail_rows.push_back(row);
    }

    for (double u : kRatioGrid) {
        RecordRatioRow row;
        row.u = u;
        for (const auto& d : draws) {
            for (std::size_t k = 0; k + 1 < d.record_gaps.size(); ++k) {
                ++row.pair_count;
                double ratio = static_cast<double>(d.record_gaps[k]) /
                               static_cast<double>(d.record_gaps[k + 1]);
                if (ratio >= 1.0 - u) ++row.exceed_count;
            }
        }
        row.frequency = row.pair_count == 0
                            ? 0.0
                            : static_cast<double>(row.exceed_count) /
                                  static_cast<double>(row.pair_count);
        report.ratio_rows.push_back(row);
    }
    return report;
}

std::string records_report_to_json(const RecordsReport& report) {
    nlohmann::json j;
    j["law"] = law_kind_name(report.law.kind);
    j["gamma"] = report.law.gamma;
    j["n"] = report.n;
    j["replicates"] = report.replicates;
    j["seed"] = report.seed;
    j["mean_count"] = report.mean_count;
    j["harmonic_sum"] = report.harmonic_sum;
    j["count_histogram"] = report.count_histogram;
    j["tail"] = nlohmann::json::array();
    for (const auto& row : report.tail_rows)
        j["tail"].push_back({{"b", row.b},
                             {"threshold", row.threshold},
                             {"exceed_count", row.exceed_count},
                             {"frequency", row.frequency},
                             {"bound", row.bound}});
    j["ratio_tail"] = nlohmann::json::array();
    for (const auto& row : report.ratio_rows)
        j["ratio_tail"].push_back({{"u", row.u},
                                   {"exceed_count", row.exceed_count},
                                   {"pair_count", row.pair_count},
                                   {"frequency", row.frequency}});
    return j.dump(2);
}

std::string records_report_to_csv(const RecordsReport& report) {
    std::ostringstream out;
    out << "# law=" << law_kind_name(report.law.kind) << " gamma=" << format_double(report.law.gamma)
        << " n=" << report.n << " replicates=" << report.replicates << " seed=" << report.seed
        << "\n";
    out << "# mean_count=" << format_double(report.mean_count)
        << " harmonic_sum=" << format_double(report.harmonic_sum) << "\n";
    for (const auto& row : report.tail_rows)
        out << "# tail b=" << format_double(row.b) << " threshold=" << format_double(row.threshold)
            << " frequency=" << format_double(row.frequency)
            << " bound=" << format_double(row.bound) << "\n";
    for (const auto& row : report.ratio_rows)
        out << "# ratio u=" << format_double(row.u) << " frequency=" << format_double(row.frequency)
            << " pairs=" << row.pair_count << "\n";
    out << "record_count,frequency\n";
    for (std::size_t c = 0; c < report.count_histogram.size(); ++c)
        out << c << ","
            << format_double(static_cast<double>(report.count_histogram[c]) /
                             static_cast<double>(report.replicates))
            << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Convergence experiment
// ---------------------------------------------------------------------------

const char* lambda_source_name(LambdaSource source) {
    return source == LambdaSource::estimated ? "estimated" : "provided";
}

LambdaSource lambda_source_from_name(const std::string& name) {
    if (name == "estimated") return LambdaSource::estimated;
    if (name == "provided") return LambdaSource::provided;
    throw ValidationError("unknown lambda source '" + name + "'");
}

namespace {

struct EnvOutcome {
    std::vector<double> f;          // one slot per grid entry, NaN on failure
    std::vector<std::size_t> caps;  // accepted absorbing cap, 0 on failure
    std::size_t failures = 0;
};

std::string config_fingerprint(const ExperimentConfig& config) {
    std::ostringstream s;
    s << "gamma=" << format_double(config.gamma) << ";beta=" << format_double(config.beta)
      << ";law=" << law_kind_name(config.law_kind) << ";n=";
    for (std::int64_t n : config.n_grid) s << n << ",";
    s << ";M=" << config.env_count << ";seed=" << config.seed
      << ";lambda_source=" << lambda_source_name(config.lambda_source)
      << ";lambda_value=" << format_double(config.lambda_value) << ";ell=" << config.lambda_ell
      << ";lambda_envs=" << config.lambda_env_count;
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(s.str())));
    return buf;
}

EnvOutcome run_environment(const GapLaw& law, const ExperimentConfig& config,
                           std::size_t env_index) {
    const std::uint64_t env_seed = derive_seed(config.seed, "env", env_index);
    EnvOutcome out;
    out.f.assign(config.n_grid.size(), kNaN);
    out.caps.assign(config.n_grid.size(), 0);

    std::size_t cap = kInitialCap;
    Environment env;
    bool have_env = false;
    for (std::size_t gi = 0; gi < config.n_grid.size(); ++gi) {
        const std::uint64_t n = static_cast<std::uint64_t>(config.n_grid[gi]);
        try {
            for (;;) {
                if (!have_env || env.gaps.size() < cap) {
                    // Re-sampling with the same seed extends the gap sequence:
                    // draws are consumed in order, so the prefix is unchanged.
                    env = sample_environment(law, cap, env_seed);
                    have_env = true;
                }
                SurvivalParams params;
                params.beta = config.beta;
                params.n = n;
                params.drop_threshold = SurvivalParams::default_drop_threshold(n);
                params.right_trap_cap = cap;
                SurvivalResult res = log_survival_probability(env, params);
                if (res.log_error_bound <= kCapBiasTarget) {
                    out.f[gi] = res.free_energy;
                    out.caps[gi] = cap;
                    break;
                }
                // Once the cap sits beyond reach of n steps the absorbed mass
                // is exactly zero, so the doubling always terminates.
                if (cap > 4 * (n + 2))
                    throw GuaranteeError("survival cap grew past the reachable window");
                cap *= 2;
            }
        } catch (const std::exception&) {
            ++out.failures;
        }
    }
    return out;
}

} // namespace

ConvergenceReport convergence_experiment(const ExperimentConfig& config) {
    if (!(config.beta > 0.0) || !std::isfinite(config.beta))
        throw ValidationError("convergence_experiment: beta must be positive");
    if (config.n_grid.empty())
        throw ValidationError("convergence_experiment: empty n grid");
    for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
        if (config.n_grid[i] < 1)
            throw ValidationError("convergence_experiment: horizons must be >= 1");
        if (i > 0 && config.n_grid[i] <= config.n_grid[i - 1])
            throw ValidationError("convergence_experiment: n grid must be strictly increasing");
    }
    if (config.env_count < 2)
        throw ValidationError("convergence_experiment: need at least 2 environments");

    const GapLaw law = config.law_kind == LawKind::DiscretePareto
                           ? discrete_pareto_law(config.gamma)
                           : zeta_gap_law(config.gamma);

    ConvergenceReport report;
    report.config = config;
    report.content_hash = config_fingerprint(config);

    double lambda = config.lambda_value;
    if (config.lambda_source == LambdaSource::estimated) {
        LambdaEstimate est = estimate_lambda(law, config.beta, config.lambda_ell,
                                             config.lambda_env_count, config.seed);
        lambda = est.value;
        report.lambda_spread = est.spread;
        report.lambda_std_error = est.std_error;
    } else if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw ValidationError("convergence_experiment: provided lambda must be positive");
    }
    report.limit_params = LimitParams{lambda, config.gamma, law.limit_tail_constant()};

    unsigned workers = config.jobs < 0 ? 1u : static_cast<unsigned>(config.jobs);
    auto outcomes = parallel_map<EnvOutcome>(config.env_count, workers, [&](std::size_t e) {
        return run_environment(law, config, e);
    });

    const LimitParams limit = report.limit_params;
    auto cdf = [&limit](double u) {
        return u <= 0.0 ? 0.0 : 1.0 - limit_tail_cdf(limit, u);
    };

    for (std::size_t gi = 0; gi < config.n_grid.size(); ++gi) {
        ConvergenceRow row;
        row.n = config.n_grid[gi];
        row.scale_n = std::pow(static_cast<double>(row.n),
                               config.gamma / (config.gamma + 2.0));
        std::vector<double> good;
        for (const auto& o : outcomes) {
            row.free_energies.push_back(o.f[gi]);
            row.trap_caps.push_back(o.caps[gi]);
            if (std::isfinite(o.f[gi])) good.push_back(o.f[gi]);
        }
        row.failures = config.env_count - good.size();
        report.total_failures += row.failures;
        if (!good.empty()) {
            std::sort(good.begin(), good.end());
            KsResult ks = ks_distance(good, cdf);
            row.ks_statistic = ks.statistic;
            row.dkw_band = ks.dkw_band;
            row.median = sorted_median(good);
            row.mean = sample_mean(good);
        } else {
            row.ks_statistic = kNaN;
            row.dkw_band = kNaN;
            row.median = kNaN;
            row.mean = kNaN;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string convergence_report_to_json(const ConvergenceReport& report) {
    nlohmann::json j;
    j["config"] = {{"gamma", report.config.gamma},
                   {"beta", report.config.beta},
                   {"law", law_kind_name(report.config.law_kind)},
                   {"n_grid", report.config.n_grid},
                   {"env_count", report.config.env_count},
                   {"seed", report.config.seed},
                   {"lambda_source", lambda_source_name(report.config.lambda_source)},
                   {"lambda_ell", report.config.lambda_ell},
                   {"lambda_env_count", report.config.lambda_env_count}};
    j["lambda"] = {{"value", report.limit_params.lambda},
                   {"spread", report.lambda_spread},
                   {"std_error", report.lambda_std_error}};
    j["c_tau"] = report.limit_params.c_tau;
    j["content_hash"] = report.content_hash;
    j["total_failures"] = report.total_failures;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : report.rows) {
        nlohmann::json r;
        r["n"] = row.n;
        r["scale_n"] = row.scale_n;
        r["free_energies"] = row.free_energies;
        r["trap_caps"] = row.trap_caps;
        r["ks_statistic"] = row.ks_statistic;
        r["dkw_band"] = row.dkw_band;
        r["median"] = row.median;
        r["mean"] = row.mean;
        r["failures"] = row.failures;
        j["rows"].push_back(std::move(r));
    }
    return j.dump(2);
}

std::string convergence_report_to_csv(const ConvergenceReport& report) {
    std::ostringstream out;
    out << "# content_hash=" << report.content_hash << " gamma=" << format_double(report.config.gamma)
        << " beta=" << format_double(report.config.beta)
        << " law=" << law_kind_name(report.config.law_kind) << " env_count=" << report.config.env_count
        << " seed=" << report.config.seed << "\n";
    out << "# lambda=" << format_double(report.limit_params.lambda)
        << " lambda_spread=" << format_double(report.lambda_spread)
        << " lambda_source=" << lambda_source_name(report.config.lambda_source)
        << " c_tau=" << format_double(report.limit_params.c_tau) << "\n";
    out << "n,scale_n,env_index,free_energy,trap_cap,ks_statistic,dkw_band,median,failures\n";
    for (const auto& row : report.rows) {
        for (std::size_t e = 0; e < row.free_energies.size(); ++e)
            out << row.n << "," << format_double(row.scale_n) << "," << e << ","
                << format_double(row.free_energies[e]) << "," << row.trap_caps[e] << ","
                << format_double(row.ks_statistic) << "," << format_double(row.dkw_band) << ","
                << format_double(row.median) << "," << row.failures << "\n";
    }
    return out.str();
}

} // namespace trapwalk
