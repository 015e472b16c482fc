#include "trapwalk/env.hpp"
#include "trapwalk/errors.hpp"
#include "trapwalk/rng.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace trapwalk {

namespace {

constexpr double kMaxPosition = 9223372036854775807.0; // 2^63 - 1

void check_gamma(double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ValidationError("gap law requires gamma > 0, got " + std::to_string(gamma));
}

} // namespace

GapLaw discrete_pareto_law(double gamma) {
    check_gamma(gamma);
    // P(T = k) = k^(-gamma) - (k+1)^(-gamma) ~ gamma * k^(-(1+gamma))
    return GapLaw{gamma, LawKind::DiscretePareto, gamma};
}

GapLaw zeta_gap_law(double gamma) {
    check_gamma(gamma);
    return GapLaw{gamma, LawKind::Zeta, 1.0 / std::riemann_zeta(1.0 + gamma)};
}

const char* law_kind_name(LawKind kind) {
    return kind == LawKind::DiscretePareto ? "discrete_pareto" : "zeta";
}

LawKind law_kind_from_name(const std::string& name) {
    if (name == "discrete_pareto" || name == "discrete-pareto") return LawKind::DiscretePareto;
    if (name == "zeta") return LawKind::Zeta;
    throw ValidationError("unknown gap law '" + name + "'");
}

namespace {

// Largest integer k with u <= k^(-gamma). pow() is not exactly monotone at
// the double level, so nudge the candidate until the defining inequality
// holds on both sides; this makes {T >= k} <=> {u <= k^(-gamma)} exact.
std::uint64_t pareto_quantile(double gamma, double u) {
    double x = std::pow(u, -1.0 / gamma);
    if (!(x < kMaxPosition))
        throw ValidationError("sampled gap exceeds 2^63 - 1; tail too heavy for this run");
    auto tail = [gamma](std::uint64_t k) { return std::pow(static_cast<double>(k), -gamma); };
    std::uint64_t k = x < 1.0 ? 1 : static_cast<std::uint64_t>(x);
    while (tail(k + 1) >= u) ++k;
    while (k > 1 && tail(k) < u) --k;
    return k;
}

// Devroye's rejection sampler for P(T = k) proportional to k^(-(1+gamma)).
std::uint64_t zeta_draw(double gamma, std::mt19937_64& rng) {
    const double b = std::pow(2.0, gamma);
    for (;;) {
        double u = uniform_pos(rng);
        double v = uniform01(rng);
        double x = std::floor(std::pow(u, -1.0 / gamma));
        if (!(x < kMaxPosition))
            throw ValidationError("sampled gap exceeds 2^63 - 1; tail too heavy for this run");
        double t = std::pow(1.0 + 1.0 / x, gamma);
        if (v * x * (t - 1.0) / (b - 1.0) <= t / b)
            return static_cast<std::uint64_t>(x);
    }
}

} // namespace

std::uint64_t sample_gap(const GapLaw& law, std::mt19937_64& rng) {
    if (law.kind == LawKind::DiscretePareto)
        return pareto_quantile(law.gamma, uniform_pos(rng));
    return zeta_draw(law.gamma, rng);
}

std::uint64_t discrete_pareto_quantile(double gamma, double u) {
    check_gamma(gamma);
    if (!(u > 0.0) || u > 1.0)
        throw ValidationError("quantile argument must lie in (0, 1]");
    return pareto_quantile(gamma, u);
}

Environment environment_from_gaps(const GapLaw& law, std::vector<std::uint64_t> gaps,
                                  std::uint64_t seed) {
    check_gamma(law.gamma);
    Environment env;
    env.law = law;
    env.seed = seed;
    env.positions.reserve(gaps.size() + 1);
    env.positions.push_back(0);
    std::uint64_t pos = 0;
    const std::uint64_t cap = std::numeric_limits<std::int64_t>::max();
    for (std::uint64_t g : gaps) {
        if (g == 0) throw ValidationError("gaps must be >= 1");
        if (g > cap - pos)
            throw ValidationError("trap position overflows 2^63 - 1");
        pos += g;
        env.positions.push_back(pos);
    }
    env.gaps = std::move(gaps);
    return env;
}

Environment sample_environment(const GapLaw& law, std::size_t gap_count,
                               std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::uint64_t> gaps;
    gaps.reserve(gap_count);
    for (std::size_t i = 0; i < gap_count; ++i) gaps.push_back(sample_gap(law, rng));
    return environment_from_gaps(law, std::move(gaps), seed);
}

RecordSequence compute_records(const Environment& env) {
    RecordSequence rec;
    std::uint64_t best = 0;
    for (std::size_t i = 0; i < env.gaps.size(); ++i) {
        if (env.gaps[i] > best) {
            best = env.gaps[i];
            rec.record_indexes.push_back(i);
            rec.record_gaps.push_back(env.gaps[i]);
            rec.record_positions.push_back(env.positions[i]);
        }
    }
    return rec;
}

PointMeasure rescaled_point_measure(const Environment& env, double scale_n) {
    return rescaled_point_measure(env, scale_n, std::numeric_limits<double>::infinity(), 0.0);
}

PointMeasure rescaled_point_measure(const Environment& env, double scale_n,
                                    double x_max, double y_min) {
    if (!(scale_n > 0.0) || !std::isfinite(scale_n))
        throw ValidationError("point measure scale must be positive and finite");
    PointMeasure pm;
    const double y_scale = std::pow(scale_n, -1.0 / env.law.gamma);
    for (std::size_t i = 0; i < env.gaps.size(); ++i) {
        double x = static_cast<double>(i) / scale_n;
        if (x > x_max) break;
        double y = static_cast<double>(env.gaps[i]) * y_scale;
        if (y >= y_min) pm.points.emplace_back(x, y);
    }
    return pm;
}

namespace {

// E[log T] for the exact-tail law: sum_{k>=2} k^(-gamma) log(k/(k-1)), which
// rearranges into sum_{j>=1} (zeta(gamma+j) - 1)/j with terms shrinking
// like 2^(-j).
double mean_log_gap_pareto(double gamma) {
    double total = 0.0;
    for (int j = 1; j < 400; ++j) {
        double term = (std::riemann_zeta(gamma + j) - 1.0) / j;
        total += term;
        if (term < 1e-14) break;
    }
    return total;
}

// E[log T] = -zeta'(s)/zeta(s) at s = 1 + gamma: direct sum of k^(-s) log k
// up to K, Euler-Maclaurin for the rest.
double mean_log_gap_zeta(double gamma) {
    const double s = 1.0 + gamma;
    const double K = 1e5;
    long double acc = 0.0L;
    for (double k = 2.0; k < K; k += 1.0)
        acc += static_cast<long double>(std::pow(k, -s) * std::log(k));
    double logK = std::log(K);
    double integral = std::pow(K, 1.0 - s) * (logK / (s - 1.0) + 1.0 / ((s - 1.0) * (s - 1.0)));
    double fK = std::pow(K, -s) * logK;
    double fpK = std::pow(K, -s - 1.0) * (1.0 - s * logK);
    double numerator = static_cast<double>(acc) + integral + 0.5 * fK - fpK / 12.0;
    return numerator / std::riemann_zeta(s);
}

} // namespace

double mean_log_gap(const GapLaw& law) {
    check_gamma(law.gamma);
    return law.kind == LawKind::DiscretePareto ? mean_log_gap_pareto(law.gamma)
                                               : mean_log_gap_zeta(law.gamma);
}

void write_env_text(std::ostream& out, const Environment& env) {
    char header[96];
    std::snprintf(header, sizeof header, "gamma=%.17g law=%s seed=%llu\n", env.law.gamma,
                  law_kind_name(env.law.kind),
                  static_cast<unsigned long long>(env.seed));
    out << header;
    for (std::uint64_t g : env.gaps) out << g << '\n';
}

Environment read_env_text(std::istream& in) {
    std::string header;
    if (!std::getline(in, header))
        throw ValidationError("environment text: missing header line");
    double gamma = 0.0;
    char law_name[32] = {0};
    unsigned long long seed = 0;
    if (std::sscanf(header.c_str(), "gamma=%lf law=%31s seed=%llu", &gamma, law_name, &seed) != 3)
        throw ValidationError("environment text: bad header '" + header + "'");
    LawKind kind = law_kind_from_name(law_name);
    GapLaw law = kind == LawKind::DiscretePareto ? discrete_pareto_law(gamma)
                                                 : zeta_gap_law(gamma);
    std::vector<std::uint64_t> gaps;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t used = 0;
        unsigned long long value = 0;
        try {
            value = std::stoull(line, &used);
        } catch (const std::exception&) {
            throw ValidationError("environment text: bad gap line '" + line + "'");
        }
        while (used < line.size() && std::isspace(static_cast<unsigned char>(line[used]))) ++used;
        if (used != line.size())
            throw ValidationError("environment text: bad gap line '" + line + "'");
        gaps.push_back(value);
    }
    return environment_from_gaps(law, std::move(gaps), seed);
}

std::string env_to_json(const Environment& env) {
    nlohmann::json j;
    j["gamma"] = env.law.gamma;
    j["law"] = law_kind_name(env.law.kind);
    j["seed"] = env.seed;
    j["gaps"] = env.gaps;
    return j.dump();
}

Environment env_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("environment json: ") + e.what());
    }
    if (!j.is_object() || !j.contains("gamma") || !j.contains("law") || !j.contains("gaps"))
        throw ValidationError("environment json: need gamma, law and gaps fields");
    double gamma = j.at("gamma").get<double>();
    LawKind kind = law_kind_from_name(j.at("law").get<std::string>());
    GapLaw law = kind == LawKind::DiscretePareto ? discrete_pareto_law(gamma)
                                                 : zeta_gap_law(gamma);
    std::uint64_t seed = j.value("seed", std::uint64_t{0});
    auto gaps = j.at("gaps").get<std::vector<std::uint64_t>>();
    return environment_from_gaps(law, std::move(gaps), seed);
}

} // namespace trapwalk
