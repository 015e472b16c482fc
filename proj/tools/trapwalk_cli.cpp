// Command-line front end: one subcommand per operation, reproducible seeds,
// JSON or CSV records on stdout (or --output), diagnostics on stderr.
// Exit codes: 0 success, 2 validation error, 3 numerical-guarantee violation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "trapwalk/env.hpp"
#include "trapwalk/errors.hpp"
#include "trapwalk/limit.hpp"
#include "trapwalk/periodic.hpp"
#include "trapwalk/rng.hpp"
#include "trapwalk/stats.hpp"
#include "trapwalk/survival.hpp"

namespace {

using nlohmann::json;
using namespace trapwalk;

// --- flag parsing ----------------------------------------------------------

// Integer flags accept plain and scientific notation: "1000", "1e5", "2.5e3"
// is rejected (not integral).
std::int64_t parse_scalar_int(const std::string& text) {
    if (text.empty()) throw ValidationError("empty integer flag");
    errno = 0;
    char* end = nullptr;
    long long plain = std::strtoll(text.c_str(), &end, 10);
    if (errno == 0 && end && *end == '\0') return plain;
    end = nullptr;
    double real = std::strtod(text.c_str(), &end);
    if (!end || *end != '\0' || !std::isfinite(real) || std::nearbyint(real) != real ||
        std::fabs(real) > 9.0e18)
        throw ValidationError("expected an integer (plain or scientific), got '" + text + "'");
    return static_cast<std::int64_t>(std::llround(real));
}

std::uint64_t parse_scalar_uint(const std::string& text) {
    std::int64_t v = parse_scalar_int(text);
    if (v < 0) throw ValidationError("expected a non-negative integer, got '" + text + "'");
    return static_cast<std::uint64_t>(v);
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) parts.push_back(item);
    return parts;
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> out;
    for (const auto& part : split_commas(text)) out.push_back(parse_scalar_int(part));
    if (out.empty()) throw ValidationError("empty integer list");
    return out;
}

std::vector<double> parse_real_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& part : split_commas(text)) {
        char* end = nullptr;
        double v = std::strtod(part.c_str(), &end);
        if (part.empty() || !end || *end != '\0')
            throw ValidationError("expected a real number, got '" + part + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError("empty real list");
    return out;
}

// --- output plumbing -------------------------------------------------------

struct OutputSink {
    std::string path;  // empty = stdout

    void write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text;
            if (!text.empty() && text.back() != '\n') std::cout << '\n';
            return;
        }
        std::ofstream file(path);
        if (!file) throw ValidationError("cannot open output file '" + path + "'");
        file << text;
        if (!text.empty() && text.back() != '\n') file << '\n';
    }
};

std::string format_param_header(const json& params) {
    std::ostringstream out;
    out << "#";
    for (auto it = params.begin(); it != params.end(); ++it) {
        out << " " << it.key() << "=";
        if (it.value().is_string())
            out << it.value().get<std::string>();
        else
            out << it.value().dump();
    }
    out << "\n";
    return out.str();
}

void check_format(const std::string& format) {
    if (format != "json" && format != "csv")
        throw ValidationError("unknown format '" + format + "' (expected json or csv)");
}

// Samples an environment long enough that the last trap sits at or beyond
// `reach` (re-sampling with the same seed only extends the gap sequence).
Environment sample_environment_reaching(const GapLaw& law, std::uint64_t reach,
                                        std::uint64_t seed) {
    std::size_t count = 1024;
    Environment env = sample_environment(law, count, seed);
    while (env.positions.back() < reach) {
        count *= 2;
        env = sample_environment(law, count, seed);
    }
    return env;
}

Environment load_environment(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ValidationError("cannot open environment file '" + path + "'");
    std::stringstream buffer;
    buffer << file.rdbuf();
    std::string text = buffer.str();
    // Accept either a bare environment object or the wrapped record that
    // `sample-env --format json` emits.
    json j = json::parse(text, nullptr, false);
    if (!j.is_discarded() && j.contains("environment"))
        return env_from_json(j["environment"].dump());
    return env_from_json(text);
}

// --- subcommand state ------------------------------------------------------

struct CommonFlags {
    std::string format;
    std::string output;
    std::string seed_text = "0";
    std::string jobs_text = "1";
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags, const std::string& default_format,
                      bool with_seed = true, bool with_jobs = false) {
    flags.format = default_format;
    cmd->add_option("--format", flags.format, "Output format: json or csv")
        ->envname("TRAPWALK_FORMAT");
    cmd->add_option("--output", flags.output, "Write records to this file instead of stdout");
    if (with_seed)
        cmd->add_option("--seed", flags.seed_text, "Master seed (named streams derive from it)")
            ->envname("TRAPWALK_SEED");
    if (with_jobs)
        cmd->add_option("--jobs", flags.jobs_text, "Worker threads (0 = all cores)")
            ->envname("TRAPWALK_JOBS");
}

GapLaw law_from_flags(double gamma, const std::string& law_name) {
    LawKind kind = law_kind_from_name(law_name);
    return kind == LawKind::DiscretePareto ? discrete_pareto_law(gamma) : zeta_gap_law(gamma);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Survival of a random walk among heavy-tailed soft traps: "
                 "sampling, exact dynamic programs, limit law, experiments"};
    app.require_subcommand(1);

    std::string result_text;

    // ---- sample-env ----
    auto* cmd_env = app.add_subcommand("sample-env", "Sample a trap environment");
    {
        static CommonFlags flags;
        static double gamma = 1.0;
        static std::string law_name = "discrete_pareto";
        static std::string count_text = "100";
        add_common_flags(cmd_env, flags, "json");
        cmd_env->add_option("--gamma", gamma, "Tail exponent of the gap law");
        cmd_env->add_option("--law", law_name, "Gap law: discrete-pareto or zeta");
        cmd_env->add_option("--count", count_text, "Number of gaps to draw");
        cmd_env->callback([&]() {
            check_format(flags.format);
            GapLaw law = law_from_flags(gamma, law_name);
            std::uint64_t master = parse_scalar_uint(flags.seed_text);
            std::uint64_t count = parse_scalar_uint(count_text);
            Environment env = sample_environment(law, count, derive_seed(master, "env", 0));
            json params = {{"subcommand", "sample-env"}, {"gamma", gamma},
                           {"law", law_kind_name(law.kind)}, {"count", count},
                           {"seed", master},              {"format", flags.format}};
            if (flags.format == "json") {
                json record = {{"params", params}, {"environment", json::parse(env_to_json(env))}};
                result_text = record.dump(2);
            } else {
                std::ostringstream out;
                out << format_param_header(params);
                out << "index,gap,position\n";
                for (std::size_t i = 0; i < env.gaps.size(); ++i)
                    out << (i + 1) << "," << env.gaps[i] << "," << env.positions[i + 1] << "\n";
                result_text = out.str();
            }
            OutputSink{flags.output}.write(result_text);
        });
    }

    // ---- survival ----
    auto* cmd_surv = app.add_subcommand("survival", "Quenched survival weight by exact DP");
    {
        static CommonFlags flags;
        static double gamma = 1.0, beta = 1.0;
        static std::string law_name = "discrete_pareto";
        static std::string n_text = "1000", cap_text = "0", drop_text = "auto";
        static std::string env_file;
        add_common_flags(cmd_surv, flags, "json");
        cmd_surv->add_option("--gamma", gamma, "Tail exponent of the gap law");
        cmd_surv->add_option("--law", law_name, "Gap law: discrete-pareto or zeta");
        cmd_surv->add_option("--beta", beta, "Killing strength per trap visit");
        cmd_surv->add_option("--n", n_text, "Horizon(s), comma-separated, scientific ok");
        cmd_surv->add_option("--cap", cap_text, "Absorbing right cap in trap index (0 = exact)");
        cmd_surv->add_option("--drop-threshold", drop_text,
                             "Relative pruning threshold, or 'auto'");
        cmd_surv->add_option("--env", env_file, "Read the environment from this JSON file");
        cmd_surv->callback([&]() {
            check_format(flags.format);
            std::uint64_t master = parse_scalar_uint(flags.seed_text);
            auto horizons = parse_int_list(n_text);
            std::uint64_t cap = parse_scalar_uint(cap_text);
            std::int64_t max_n = *std::max_element(horizons.begin(), horizons.end());
            Environment env;
            if (!env_file.empty()) {
                env = load_environment(env_file);
            } else {
                GapLaw law = law_from_flags(gamma, law_name);
                std::uint64_t env_seed = derive_seed(master, "env", 0);
                env = cap > 0 ? sample_environment(law, cap, env_seed)
                              : sample_environment_reaching(
                                    law, static_cast<std::uint64_t>(max_n), env_seed);
            }
            std::ostringstream out;
            if (flags.format == "csv")
                out << "gamma,beta,n,N,log_z,free_energy,log_error_bound,seed\n";
            for (std::int64_t n : horizons) {
                SurvivalParams params;
                params.beta = beta;
                params.n = static_cast<std::uint64_t>(n);
                params.drop_threshold = drop_text == "auto"
                                            ? SurvivalParams::default_drop_threshold(params.n)
                                            : std::stod(drop_text);
                params.right_trap_cap = cap;
                SurvivalResult res = log_survival_probability(env, params);
                if (flags.format == "json") {
                    json record = {{"gamma", env.law.gamma},
                                   {"beta", beta},
                                   {"n", n},
                                   {"N", res.scale_n},
                                   {"log_z", res.log_z},
                                   {"free_energy", res.free_energy},
                                   {"log_error_bound", res.log_error_bound},
                                   {"seed", master},
                                   {"law", law_kind_name(env.law.kind)},
                                   {"cap", cap}};
                    out << record.dump() << "\n";
                } else {
                    out << env.law.gamma << "," << beta << "," << n << "," << res.scale_n << ","
                        << res.log_z << "," << res.free_energy << "," << res.log_error_bound
                        << "," << master << "\n";
                }
            }
            OutputSink{flags.output}.write(out.str());
        });
    }

    // ---- lambda ----
    auto* cmd_lambda = app.add_subcommand("lambda", "Crossing-cost estimate with error bars");
    {
        static CommonFlags flags;
        static double gamma = 1.0, beta = 1.0;
        static std::string law_name = "discrete_pareto";
        static std::string ell_text = "1e4", envs_text = "8";
        add_common_flags(cmd_lambda, flags, "json");
        cmd_lambda->add_option("--gamma", gamma, "Tail exponent of the gap law");
        cmd_lambda->add_option("--law", law_name, "Gap law: discrete-pareto or zeta");
        cmd_lambda->add_option("--beta", beta, "Killing strength per trap visit");
        cmd_lambda->add_option("--ell", ell_text, "Number of traps crossed per environment");
        cmd_lambda->add_option("--envs", envs_text, "Environments averaged");
        cmd_lambda->callback([&]() {
            check_format(flags.format);
            GapLaw law = law_from_flags(gamma, law_name);
            std::uint64_t master = parse_scalar_uint(flags.seed_text);
            std::size_t ell = static_cast<std::size_t>(parse_scalar_uint(ell_text));
            std::size_t envs = static_cast<std::size_t>(parse_scalar_uint(envs_text));
            LambdaEstimate est = estimate_lambda(law, beta, ell, envs, master);
            double lower = beta;
            double upper = beta + mean_log_gap(law) + std::numbers::ln2;
            json params = {{"subcommand", "lambda"}, {"gamma", gamma},
                           {"law", law_kind_name(law.kind)}, {"beta", beta},
                           {"ell", ell},             {"envs", envs},
                           {"seed", master},         {"format", flags.format}};
            if (flags.format == "json") {
                json record = {{"params", params},       {"lambda", est.value},
                               {"spread", est.spread},   {"std_error", est.std_error},
                               {"per_env", est.per_env}, {"lower_bound", lower},
                               {"upper_bound", upper}};
                result_text = record.dump(2);
            } else {
                std::ostringstream out;
                out << format_param_header(params);
                out << "lambda,spread,std_error,lower_bound,upper_bound\n";
                out << est.value << "," << est.spread << "," << est.std_error << "," << lower
                    << "," << upper << "\n";
                result_text = out.str();
            }
            OutputSink{flags.output}.write(result_text);
        });
    }

    // ---- confine ----
    auto* cmd_confine = app.add_subcommand("confine", "Survival confined to a gap of width t");
    {
        static CommonFlags flags;
        static std::string t_text = "10", n_text = "1000", x0_text = "1";
        add_common_flags(cmd_confine, flags, "json", /*with_seed=*/false);
        cmd_confine->add_option("--t", t_text, "Gap length (interval (0, t))");
        cmd_confine->add_option("--n", n_text, "Number of steps");
        cmd_confine->add_option("--x0", x0_text, "Starting site in (0, t)");
        cmd_confine->callback([&]() {
            check_format(flags.format);
            std::uint64_t t = parse_scalar_uint(t_text);
            std::uint64_t n = parse_scalar_uint(n_text);
            std::uint64_t x0 = parse_scalar_uint(x0_text);
            double log_p = log_confined_survival_probability(t, n, x0);
            double rate_estimate = std::numeric_limits<double>::quiet_NaN();
            if (n >= 3)
                rate_estimate =
                    -0.5 * (log_p - log_confined_survival_probability(t, n - 2, x0));
            double rate_exact = t >= 3 ? small_ball_rate(t)
                                       : std::numeric_limits<double>::infinity();
            json params = {{"subcommand", "confine"}, {"t", t},  {"n", n},
                           {"x0", x0},                {"format", flags.format}};
            if (flags.format == "json") {
                json record = {{"params", params},
                               {"log_p", log_p},
                               {"rate_estimate", rate_estimate},
                               {"small_ball_rate", rate_exact}};
                result_text = record.dump(2);
            } else {
                std::ostringstream out;
                out << format_param_header(params);
                out << "t,n,x0,log_p,rate_estimate,small_ball_rate\n";
                out << t << "," << n << "," << x0 << "," << log_p << "," << rate_estimate << ","
                    << rate_exact << "\n";
                result_text = out.str();
            }
            OutputSink{flags.output}.write(result_text);
        });
    }

    // ---- fkg ----
    auto* cmd_fkg = app.add_subcommand(
        "fkg", "Arrival-time CDFs at a target, killed vs free, on one environment");
    {
        static CommonFlags flags;
        static double gamma = 1.0, beta = 1.0;
        static std::string law_name = "discrete_pareto";
        static std::string x_text = "20", n_text = "400";
        static std::string env_file;
        add_common_flags(cmd_fkg, flags, "json");
        cmd_fkg->add_option("--gamma", gamma, "Tail exponent of the gap law");
        cmd_fkg->add_option("--law", law_name, "Gap law: discrete-pareto or zeta");
        cmd_fkg->add_option("--beta", beta, "Killing strength per trap visit");
        cmd_fkg->add_option("--x", x_text, "Target site");
        cmd_fkg->add_option("--n", n_text, "Horizon for the arrival-time CDF");
        cmd_fkg->add_option("--env", env_file, "Read the environment from this JSON file");
        cmd_fkg->callback([&]() {
            check_format(flags.format);
            std::uint64_t master = parse_scalar_uint(flags.seed_text);
            std::int64_t x = parse_scalar_int(x_text);
            std::uint64_t n = parse_scalar_uint(n_text);
            Environment env;
            if (!env_file.empty()) {
                env = load_environment(env_file);
            } else {
                GapLaw law = law_from_flags(gamma, law_name);
                env = sample_environment_reaching(law, static_cast<std::uint64_t>(x),
                                                  derive_seed(master, "env", 0));
            }
            FkgResult res = fkg_compare(env, x, n, beta);
            json params = {{"subcommand", "fkg"}, {"gamma", env.law.gamma},
                           {"law", law_kind_name(env.law.kind)}, {"beta", beta},
                           {"x", x},             {"n", n},
                           {"seed", master},     {"format", flags.format}};
            if (flags.format == "json") {
                json record = {{"params", params},
                               {"log_denominator_killed", res.log_denominator_killed},
                               {"log_denominator_free", res.log_denominator_free},
                               {"cdf_killed", res.cdf_killed},
                               {"cdf_free", res.cdf_free}};
                result_text = record.dump(2);
            } else {
                std::ostringstream out;
                out << format_param_header(params);
                out << "m,cdf_killed,cdf_free\n";
                for (std::size_t m = 0; m < res.cdf_killed.size(); ++m)
                    out << (m + 1) << "," << res.cdf_killed[m] << "," << res.cdf_free[m] << "\n";
                result_text = out.str();
            }
            OutputSink{flags.output}.write(result_text);
        });
    }

    // ---- limit-sample ----
    auto* cmd_lsample = app.add_subcommand("limit-sample", "Draw from the limit law F");
    {
        static CommonFlags flags;
        static double lambda = 1.0, gamma = 1.0, c_tau = 1.0;
        static std::string count_text = "1", method = "ppp";
        add_common_flags(cmd_lsample, flags, "json");
        cmd_lsample->add_option("--lambda", lambda, "Crossing cost per trap");
        cmd_lsample->add_option("--gamma", gamma, "Tail exponent");
        cmd_lsample->add_option("--c-tau", c_tau, "Tail constant of the rescaled gap law");
        cmd_lsample->add_option("--count", count_text, "Number of draws");
        cmd_lsample->add_option("--method", method, "Sampler: ppp (structural) or inverse");
        cmd_lsample->callback([&]() {
            check_format(flags.format);
            if (method != "ppp" && method != "inverse")
                throw ValidationError("unknown method '" + method + "' (expected ppp or inverse)");
            LimitParams params{lambda, gamma, c_tau};
            std::uint64_t master = parse_scalar_uint(flags.seed_text);
            std::uint64_t count = parse_scalar_uint(count_text);
            std::ostringstream out;
            json meta = {{"subcommand", "limit-sample"}, {"lambda", lambda},
                         {"gamma", gamma},               {"c_tau", c_tau},
                         {"count", count},               {"method", method},
                         {"seed", master},               {"format", flags.format}};
            if (flags.format == "csv") {
                out << format_param_header(meta);
                out << (method == "ppp" ? "f,x_star,y_star,points_examined,tie_count\n" : "f\n");
            }
            if (method == "ppp") {
                for (std::uint64_t i = 0; i < count; ++i) {
                    LimitSample s = sample_limit_F(params, derive_seed(master, "limit", i));
                    if (flags.format == "json") {
                        json record = {{"f", s.f_value},
                                       {"x_star", s.x_star},
                                       {"y_star", s.y_star},
                                       {"points_examined", s.points_examined},
                                       {"tie_count", s.tie_count},
                                       {"params", meta}};
                        out << record.dump() << "\n";
                    } else {
                        out << s.f_value << "," << s.x_star << "," << s.y_star << ","
                            << s.points_examined << "," << s.tie_count << "\n";
                    }
                }
            } else {
                std::mt19937_64 rng = make_rng(master, "limit", 0);
                for (std::uint64_t i = 0; i < count; ++i) {
                    double f = sample_limit_F_inverse(params, rng);
                    if (flags.format == "json") {
                        json record = {{"f", f}, {"params", meta}};
                        out << record.dump() << "\n";
                    } else {
                        out << f << "\n";
                    }
                }
            }
            OutputSink{flags.output}.write(out.str());
        });
    }

    // ---- limit-cdf ----
    auto* cmd_lcdf = app.add_subcommand("limit-cdf", "Closed-form limit CDF and quantiles");
    {
        static CommonFlags flags;
        static double lambda = 1.0, gamma = 1.0, c_tau = 1.0;
        static std::string u_text, q_text;
        add_common_flags(cmd_lcdf, flags, "json", /*with_seed=*/false);
        cmd_lcdf->add_option("--lambda", lambda, "Crossing cost per trap");
        cmd_lcdf->add_option("--gamma", gamma, "Tail exponent");
        cmd_lcdf->add_option("--c-tau", c_tau, "Tail constant of the rescaled gap law");
        cmd_lcdf->add_option("--u", u_text, "Evaluate P(F >= u) at these points (comma list)");
        cmd_lcdf->add_option("--q", q_text, "Evaluate quantiles at these levels (comma list)");
        cmd_lcdf->callback([&]() {
            check_format(flags.format);
            if (u_text.empty() && q_text.empty())
                throw ValidationError("limit-cdf: provide --u and/or --q");
            LimitParams params{lambda, gamma, c_tau};
            json meta = {{"subcommand", "limit-cdf"}, {"lambda", lambda},
                         {"gamma", gamma},            {"c_tau", c_tau},
                         {"format", flags.format}};
            std::ostringstream out;
            json cdf_rows = json::array(), quantile_rows = json::array();
            if (flags.format == "csv") out << format_param_header(meta);
            if (!u_text.empty()) {
                if (flags.format == "csv") out << "u,tail_probability,cdf\n";
                for (double u : parse_real_list(u_text)) {
                    double tail = limit_tail_cdf(params, u);
                    if (flags.format == "csv")
                        out << u << "," << tail << "," << (1.0 - tail) << "\n";
                    else
                        cdf_rows.push_back({{"u", u}, {"tail", tail}, {"cdf", 1.0 - tail}});
                }
            }
            if (!q_text.empty()) {
                if (flags.format == "csv") out << "q,quantile\n";
                for (double q : parse_real_list(q_text)) {
                    double value = limit_quantile(params, q);
                    if (flags.format == "csv")
                        out << q << "," << value << "\n";
                    else
                        quantile_rows.push_back({{"q", q}, {"quantile", value}});
                }
            }
            if (flags.format == "json") {
                json record = {{"params", meta}};
                if (!cdf_rows.empty()) record["cdf"] = cdf_rows;
                if (!quantile_rows.empty()) record["quantiles"] = quantile_rows;
                out << record.dump(2);
            }
            OutputSink{flags.output}.write(out.str());
        });
    }

    // ---- phi ----
    auto* cmd_phi = app.add_subcommand("phi", "Decay rate among equally spaced traps");
    {
        static CommonFlags flags;
        static double beta = 1.0;
        static std::string t_text = "10";
        add_common_flags(cmd_phi, flags, "csv", /*with_seed=*/false);
        cmd_phi->add_option("--t", t_text, "Trap spacing");
        cmd_phi->add_option("--beta", beta, "Killing strength per trap visit");
        cmd_phi->callback([&]() {
            check_format(flags.format);
            std::uint64_t t = parse_scalar_uint(t_text);
            PhiResult res = phi_homogeneous(t, beta);
            double g = t >= 3 ? small_ball_rate(t) : std::numeric_limits<double>::infinity();
            double td = static_cast<double>(t);
            double pi2 = std::numbers::pi * std::numbers::pi;
            double first_order =
                pi2 / (2.0 * td * td) * (1.0 - 4.0 / (std::expm1(beta) * td));
            json params = {{"subcommand", "phi"}, {"t", t}, {"beta", beta},
                           {"format", flags.format}};
            if (flags.format == "json") {
                json record = {{"params", params},
                               {"phi", res.phi},
                               {"small_ball_rate", g},
                               {"first_order", first_order},
                               {"bracket_lo", res.bracket_lo},
                               {"bracket_hi", res.bracket_hi},
                               {"perron_residual", res.perron_residual}};
                result_text = record.dump(2);
            } else {
                std::ostringstream out;
                out << format_param_header(params);
                out << "t,beta,phi,small_ball_rate,first_order\n";
                out << t << "," << beta << "," << res.phi << "," << g << "," << first_order
                    << "\n";
                result_text = out.str();
            }
            OutputSink{flags.output}.write(result_text);
        });
    }

    // ---- phi-periodic ----
    auto* cmd_phip = app.add_subcommand("phi-periodic", "Decay rate for a periodic trap pattern");
    {
        static CommonFlags flags;
        static double beta = 1.0;
        static std::string gaps_text;
        add_common_flags(cmd_phip, flags, "csv", /*with_seed=*/false);
        cmd_phip->add_option("--gaps", gaps_text, "Pattern gaps, comma-separated (e.g. 2,3,5)")
            ->required();
        cmd_phip->add_option("--beta", beta, "Killing strength per trap visit");
        cmd_phip->callback([&]() {
            check_format(flags.format);
            std::vector<std::uint64_t> gaps;
            for (std::int64_t g : parse_int_list(gaps_text)) {
                if (g < 1) throw ValidationError("pattern gaps must be >= 1");
                gaps.push_back(static_cast<std::uint64_t>(g));
            }
            PeriodicSpec spec = make_periodic_spec(gaps);
            PhiResult res = phi_periodic(spec, beta);
            std::ostringstream pattern;
            for (std::size_t i = 0; i < gaps.size(); ++i)
                pattern << (i ? ";" : "") << gaps[i];
            json params = {{"subcommand", "phi-periodic"},
                           {"gaps", gaps},
                           {"beta", beta},
                           {"format", flags.format}};
            if (flags.format == "json") {
                json record = {{"params", params},
                               {"phi", res.phi},
                               {"bracket_lo", res.bracket_lo},
                               {"bracket_hi", res.bracket_hi},
                               {"perron_residual", res.perron_residual}};
                result_text = record.dump(2);
            } else {
                std::ostringstream out;
                out << format_param_header(params);
                out << "pattern,beta,phi,bracket_lo,bracket_hi,perron_residual\n";
                out << pattern.str() << "," << beta << "," << res.phi << "," << res.bracket_lo
                    << "," << res.bracket_hi << "," << res.perron_residual << "\n";
                result_text = out.str();
            }
            OutputSink{flags.output}.write(result_text);
        });
    }

    // ---- records ----
    auto* cmd_records = app.add_subcommand("records", "Record-count statistics of the gap law");
    {
        static CommonFlags flags;
        static double gamma = 1.0;
        static std::string law_name = "discrete_pareto";
        static std::string n_text = "1000", reps_text = "1000";
        add_common_flags(cmd_records, flags, "json", /*with_seed=*/true, /*with_jobs=*/true);
        cmd_records->add_option("--gamma", gamma, "Tail exponent of the gap law");
        cmd_records->add_option("--law", law_name, "Gap law: discrete-pareto or zeta");
        cmd_records->add_option("--n", n_text, "Sequence length");
        cmd_records->add_option("--replicates", reps_text, "Monte Carlo replicates (>= 100)");
        cmd_records->callback([&]() {
            check_format(flags.format);
            GapLaw law = law_from_flags(gamma, law_name);
            RecordsReport report = records_statistics(
                law, parse_scalar_int(n_text),
                static_cast<std::size_t>(parse_scalar_uint(reps_text)),
                parse_scalar_uint(flags.seed_text),
                static_cast<int>(parse_scalar_int(flags.jobs_text)));
            result_text = flags.format == "json" ? records_report_to_json(report)
                                                 : records_report_to_csv(report);
            OutputSink{flags.output}.write(result_text);
        });
    }

    // ---- converge ----
    auto* cmd_conv = app.add_subcommand(
        "converge", "Free-energy convergence experiment against the limit law");
    {
        static CommonFlags flags;
        static double gamma = 1.0, beta = 1.0, lambda_value = 0.0;
        static std::string law_name = "discrete_pareto";
        static std::string n_text = "1e3,1e4", envs_text = "10";
        static std::string lambda_source = "estimated", ell_text = "1e4", lambda_envs_text = "8";
        add_common_flags(cmd_conv, flags, "json", /*with_seed=*/true, /*with_jobs=*/true);
        cmd_conv->add_option("--gamma", gamma, "Tail exponent of the gap law");
        cmd_conv->add_option("--law", law_name, "Gap law: discrete-pareto or zeta");
        cmd_conv->add_option("--beta", beta, "Killing strength per trap visit");
        cmd_conv->add_option("--n", n_text, "Horizon grid, comma-separated, increasing");
        cmd_conv->add_option("--envs", envs_text, "Environments per horizon (M >= 2)");
        cmd_conv->add_option("--lambda-source", lambda_source,
                             "Where lambda comes from: estimated or provided");
        cmd_conv->add_option("--lambda-value", lambda_value,
                             "Crossing cost when --lambda-source provided");
        cmd_conv->add_option("--ell", ell_text, "Traps crossed per lambda-estimation run");
        cmd_conv->add_option("--lambda-envs", lambda_envs_text,
                             "Environments averaged for lambda");
        cmd_conv->callback([&]() {
            check_format(flags.format);
            ExperimentConfig config;
            config.gamma = gamma;
            config.beta = beta;
            config.law_kind = law_kind_from_name(law_name);
            config.n_grid = parse_int_list(n_text);
            config.env_count = static_cast<std::size_t>(parse_scalar_uint(envs_text));
            config.seed = parse_scalar_uint(flags.seed_text);
            config.lambda_source = lambda_source_from_name(lambda_source);
            config.lambda_value = lambda_value;
            config.lambda_ell = static_cast<std::size_t>(parse_scalar_uint(ell_text));
            config.lambda_env_count =
                static_cast<std::size_t>(parse_scalar_uint(lambda_envs_text));
            config.jobs = static_cast<int>(parse_scalar_int(flags.jobs_text));
            ConvergenceReport report = convergence_experiment(config);
            result_text = flags.format == "json" ? convergence_report_to_json(report)
                                                 : convergence_report_to_csv(report);
            OutputSink{flags.output}.write(result_text);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const GuaranteeError& e) {
        std::cerr << "guarantee violation: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "invalid request: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
