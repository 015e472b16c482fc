#include "trapwalk/survival.hpp"
#include "trapwalk/errors.hpp"
#include "trapwalk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace trapwalk {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logaddexp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

void check_beta(double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw ValidationError("beta must be finite and >= 0");
}

// ---------------------------------------------------------------------------
// Survival dynamic program.
//
// Weights of surviving paths live on sites of one parity; u[j] is the weight
// of site lo + 2j, with true value u[j] * exp(lsc[j / kBlock]). The per-block
// log scales make the representable depth of the weight profile unbounded,
// which matters because the profile routinely spans thousands of nats between
// the current bulk and the advancing front. A single global scale would flush
// the front to zero and silently disconnect far minimizing gaps.
// ---------------------------------------------------------------------------

constexpr std::size_t kBlock = 64;   // entries per scale block
constexpr int kRenormEvery = 32;     // steps between renormalization passes

struct DpState {
    std::vector<double> u;    // size J + 1, trailing guard element == 0
    std::vector<double> lsc;  // per-block log scales, ceil(J / kBlock) entries
    std::size_t J = 0;        // number of live entries
    std::int64_t lo = 1;      // site of u[0]
};

std::size_t blocks_for(std::size_t J) { return (J + kBlock - 1) / kBlock; }

// out[j] = (in[j-1] + in[j]) / 2 with lo decreasing by one; J grows by one.
void step_expand_left(const DpState& in, DpState& out) {
    const std::size_t J = in.J;
    out.J = J + 1;
    out.lo = in.lo - 1;
    out.u.resize(out.J + 1);
    out.u[out.J] = 0.0;
    const std::size_t nb = blocks_for(out.J);
    out.lsc.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t s = b * kBlock;
        const std::size_t e = std::min(out.J, s + kBlock);
        const double scale_b = b < in.lsc.size() ? in.lsc[b] : in.lsc.back();
        out.lsc[b] = scale_b;
        std::size_t j = s;
        if (b == 0) {
            out.u[0] = 0.5 * in.u[0];
            j = 1;
        } else {
            const double f = std::exp(in.lsc[b - 1] - scale_b);
            out.u[j] = 0.5 * (in.u[j - 1] * f + in.u[j]);
            ++j;
        }
        for (; j < e; ++j) out.u[j] = 0.5 * (in.u[j - 1] + in.u[j]);
    }
}

// out[j] = (in[j] + in[j+1]) / 2 with lo increasing by one; J unchanged.
void step_shift_right(const DpState& in, DpState& out) {
    const std::size_t J = in.J;
    out.J = J;
    out.lo = in.lo + 1;
    out.u.resize(J + 1);
    out.u[J] = 0.0;
    const std::size_t nb = blocks_for(J);
    out.lsc.assign(in.lsc.begin(), in.lsc.begin() + static_cast<std::ptrdiff_t>(nb));
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t s = b * kBlock;
        const std::size_t e = std::min(J, s + kBlock);
        for (std::size_t j = s; j + 1 < e; ++j) out.u[j] = 0.5 * (in.u[j] + in.u[j + 1]);
        // Last element of the block: the right neighbor may live in the
        // next block and carry a different scale.
        const std::size_t j = e - 1;
        double right;
        if (j + 1 < J) {
            const std::size_t nb_right = (j + 1) / kBlock;
            right = nb_right == b ? in.u[j + 1]
                                  : in.u[j + 1] * std::exp(in.lsc[nb_right] - in.lsc[b]);
        } else {
            right = 0.0;
        }
        out.u[j] = 0.5 * (in.u[j] + right);
    }
}

} // namespace

SurvivalResult log_survival_probability(const Environment& env, const SurvivalParams& params) {
    check_beta(params.beta);
    if (params.n < 1) throw ValidationError("survival horizon n must be >= 1");
    if (params.drop_threshold < 0.0 || params.drop_threshold >= 1.0 ||
        !std::isfinite(params.drop_threshold))
        throw ValidationError("drop_threshold must lie in [0, 1)");
    const auto& pos = env.positions;
    std::uint64_t cap_pos = 0;
    if (params.right_trap_cap > 0) {
        if (params.right_trap_cap >= pos.size())
            throw EnvironmentTooShort("right_trap_cap exceeds the number of traps");
        cap_pos = pos[params.right_trap_cap];
    } else if (pos.back() < params.n) {
        throw EnvironmentTooShort(
            "environment ends at " + std::to_string(pos.back()) +
            " but the walk can reach site " + std::to_string(params.n));
    }

    const double eb = std::exp(-params.beta);
    const double log_theta =
        params.drop_threshold > 0.0 ? std::log(params.drop_threshold) : kNegInf;

    DpState cur, next;
    cur.lo = 1;
    cur.J = 1;
    cur.u = {0.0, 0.0};
    cur.lsc = {0.0};
    // First step: the walk moves to +1 (weight 1/2, killed there if 1 is a
    // trap) or to -1 and dies.
    cur.u[0] = 0.5 * (pos.size() > 1 && pos[1] == 1 ? eb : 1.0);

    double logD = kNegInf;  // absolute log of everything absorbed or pruned

    // Trap index range covering the current window, advanced incrementally.
    std::size_t t_lo = 1, t_hi = 1;

    for (std::uint64_t k = 2; k <= params.n; ++k) {
        if (cur.lo >= 2)
            step_expand_left(cur, next);
        else
            step_shift_right(cur, next);
        std::swap(cur, next);

        std::int64_t hi_site = cur.lo + 2 * static_cast<std::int64_t>(cur.J - 1);

        // Absorb mass at and beyond the cap trap. The window stops growing
        // there; every absorbed path crossed right_trap_cap traps.
        if (cap_pos > 0 && static_cast<std::uint64_t>(hi_site) >= cap_pos) {
            while (cur.J > 0) {
                std::int64_t site = cur.lo + 2 * static_cast<std::int64_t>(cur.J - 1);
                if (static_cast<std::uint64_t>(site) < cap_pos) break;
                double v = cur.u[cur.J - 1];
                if (v > 0.0)
                    logD = logaddexp(logD, std::log(v) + cur.lsc[(cur.J - 1) / kBlock]);
                cur.u[cur.J - 1] = 0.0;
                --cur.J;
            }
            cur.u.resize(cur.J + 1);
            cur.u[cur.J] = 0.0;
            cur.lsc.resize(blocks_for(cur.J));
            if (cur.J == 0) break;
            hi_site = cur.lo + 2 * static_cast<std::int64_t>(cur.J - 1);
        }

        // Multiply trap sites of the current parity by e^(-beta).
        if (params.beta != 0.0) {
            while (t_lo > 1 && pos[t_lo - 1] >= static_cast<std::uint64_t>(cur.lo)) --t_lo;
            while (t_lo < pos.size() && pos[t_lo] < static_cast<std::uint64_t>(cur.lo)) ++t_lo;
            if (t_hi < t_lo) t_hi = t_lo;
            while (t_hi < pos.size() && pos[t_hi] <= static_cast<std::uint64_t>(hi_site)) ++t_hi;
            for (std::size_t t = t_lo; t < t_hi; ++t) {
                std::int64_t d = static_cast<std::int64_t>(pos[t]) - cur.lo;
                if (d & 1) continue;
                std::size_t jj = static_cast<std::size_t>(d >> 1);
                if (jj < cur.J) cur.u[jj] *= eb;
            }
        }

        if (k % kRenormEvery == 0 || k == params.n) {
            const std::size_t nb = blocks_for(cur.J);
            double global_max = kNegInf;
            for (std::size_t b = 0; b < nb; ++b) {
                const std::size_t s = b * kBlock;
                const std::size_t e = std::min(cur.J, s + kBlock);
                double m = 0.0;
                for (std::size_t j = s; j < e; ++j) m = std::max(m, cur.u[j]);
                if (m > 0.0) {
                    const double inv = 1.0 / m;
                    for (std::size_t j = s; j < e; ++j) cur.u[j] *= inv;
                    cur.lsc[b] += std::log(m);
                }
                global_max = std::max(global_max, cur.lsc[b]);
            }
            // Rigorous edge pruning: drop whole leading blocks whose entire
            // content sits below threshold * global max, accounting the
            // dropped mass into logD.
            if (log_theta != kNegInf) {
                std::size_t drop_blocks = 0;
                while (drop_blocks < nb - 1 && cur.lsc[drop_blocks] < global_max + log_theta) {
                    const std::size_t s = drop_blocks * kBlock;
                    double sum = 0.0;
                    for (std::size_t j = s; j < s + kBlock; ++j) sum += cur.u[j];
                    if (sum > 0.0)
                        logD = logaddexp(logD, std::log(sum) + cur.lsc[drop_blocks]);
                    ++drop_blocks;
                }
                if (drop_blocks > 0) {
                    cur.u.erase(cur.u.begin(),
                                cur.u.begin() + static_cast<std::ptrdiff_t>(drop_blocks * kBlock));
                    cur.lsc.erase(cur.lsc.begin(),
                                  cur.lsc.begin() + static_cast<std::ptrdiff_t>(drop_blocks));
                    cur.J -= drop_blocks * kBlock;
                    cur.lo += 2 * static_cast<std::int64_t>(drop_blocks * kBlock);
                }
            }
        }
    }

    // Total weight: log-sum with the block scales.
    double max_scale = kNegInf;
    for (std::size_t b = 0; b < blocks_for(cur.J); ++b) max_scale = std::max(max_scale, cur.lsc[b]);
    double total = 0.0;
    for (std::size_t j = 0; j < cur.J; ++j)
        total += cur.u[j] * std::exp(cur.lsc[j / kBlock] - max_scale);

    SurvivalResult res;
    res.scale_n = std::pow(static_cast<double>(params.n),
                           env.law.gamma / (env.law.gamma + 2.0));
    if (total > 0.0) {
        res.log_z = std::log(total) + max_scale;
        double r = logD - res.log_z;
        double bound = r == kNegInf ? 0.0 : std::log1p(std::exp(r));
        if (bound == 0.0 && logD != kNegInf)
            bound = std::numeric_limits<double>::denorm_min();
        res.log_error_bound = bound;
    } else {
        res.log_z = kNegInf;
        res.log_error_bound = logD == kNegInf ? 0.0 : std::numeric_limits<double>::infinity();
    }
    res.free_energy = -res.log_z / res.scale_n;
    return res;
}

// ---------------------------------------------------------------------------
// Crossing probabilities via the harmonic sweep.
//
// For v(x) = P_x(hit the target before 0, surviving all kills including the
// landing), the function w(x) = e^(-beta 1{x kill}) v(x) satisfies
// w(x+1) = 2 w(x) e^(beta 1{x kill}) - w(x-1), so a single forward sweep from
// w(start) = 0, w(start+1) = 1 determines everything up to one multiplicative
// constant, fixed at the target. w is positive and nondecreasing, so the
// sweep is numerically benign; it only needs occasional rescaling.
// ---------------------------------------------------------------------------

namespace {

struct SweepQuery {
    std::int64_t position;
    double log_w = 0.0;
};

// Sweeps from start_pos to end_pos over the kill sites listed in `kills`
// (ascending, exclusive of both boundary roles; a kill at start_pos or
// end_pos only matters to the caller via the k-factors it applies itself).
// Fills log_w for every query position in (start_pos, end_pos]. Queries must
// be ascending.
void harmonic_sweep(std::int64_t start_pos, std::int64_t end_pos, double beta,
                    const std::uint64_t* kills_begin, const std::uint64_t* kills_end,
                    SweepQuery* q_begin, SweepQuery* q_end) {
    const double growth = std::exp(beta);
    double w_prev = 0.0, w_cur = 1.0, log_off = 0.0;
    const std::uint64_t* kill = kills_begin;
    SweepQuery* q = q_begin;
    std::int64_t x = start_pos + 1;
    while (kill < kills_end && *kill <= static_cast<std::uint64_t>(start_pos)) ++kill;
    for (;;) {
        while (q < q_end && q->position == x) {
            q->log_w = std::log(w_cur) + log_off;
            ++q;
        }
        if (x == end_pos) break;
        // Advance: w(x+1) = 2 w(x) e^(beta 1{x kill}) - w(x-1).
        double mid = w_cur;
        if (kill < kills_end && *kill == static_cast<std::uint64_t>(x)) {
            mid *= growth;
            ++kill;
        }
        double w_next = 2.0 * mid - w_prev;
        if (w_next > 1e280) {
            const double inv = 1.0 / w_next;
            log_off += std::log(w_next);
            w_prev = w_cur * inv;
            w_cur = 1.0;
        } else {
            w_prev = w_cur;
            w_cur = w_next;
        }
        ++x;
    }
}

bool is_trap(const Environment& env, std::int64_t x) {
    if (x <= 0) return false;
    const auto& pos = env.positions;
    return std::binary_search(pos.begin() + 1, pos.end(), static_cast<std::uint64_t>(x));
}

} // namespace

CrossingResult crossing_probability(const Environment& env, std::size_t i, std::size_t j,
                                    double beta) {
    check_beta(beta);
    if (i >= j)
        throw IndexOrderError("crossing needs trap indexes i < j, got i=" + std::to_string(i) +
                              " j=" + std::to_string(j));
    if (j >= env.positions.size())
        throw EnvironmentTooShort("crossing target trap " + std::to_string(j) +
                                  " is beyond the environment");
    const auto& pos = env.positions;
    std::vector<SweepQuery> queries(j - i);
    for (std::size_t m = 0; m < j - i; ++m)
        queries[m].position = static_cast<std::int64_t>(pos[i + 1 + m]);
    harmonic_sweep(static_cast<std::int64_t>(pos[i]), static_cast<std::int64_t>(pos[j]), beta,
                   pos.data() + i + 1, pos.data() + j, queries.data(),
                   queries.data() + queries.size());
    CrossingResult res;
    const double log2 = std::numbers::ln2;
    std::vector<double> log_p(j - i);
    for (std::size_t m = 0; m < j - i; ++m)
        log_p[m] = -beta - log2 - queries[m].log_w;
    res.log_p = log_p.back();
    res.per_trap_cost.resize(j - i);
    res.per_trap_cost[0] = -log_p[0];
    for (std::size_t m = 1; m < j - i; ++m)
        res.per_trap_cost[m] = log_p[m - 1] - log_p[m];
    return res;
}

std::vector<double> lambda_sequence(const GapLaw& law, double beta, std::size_t ell_max,
                                    std::uint64_t seed) {
    check_beta(beta);
    if (ell_max < 1) throw ValidationError("lambda_sequence needs ell_max >= 1");
    Environment env = sample_environment(law, ell_max, seed);
    CrossingResult cr = crossing_probability(env, 0, ell_max, beta);
    std::vector<double> lambda(ell_max);
    double cum = 0.0;
    for (std::size_t m = 0; m < ell_max; ++m) {
        cum += cr.per_trap_cost[m];
        lambda[m] = cum / static_cast<double>(m + 1);
    }
    return lambda;
}

double log_hit_before_zero(const Environment& env, std::int64_t x0, std::int64_t x_target,
                           double beta) {
    check_beta(beta);
    if (x0 < 1) throw ValidationError("start site must be >= 1");
    if (x0 >= x_target)
        throw IndexOrderError("need start < target, got start=" + std::to_string(x0) +
                              " target=" + std::to_string(x_target));
    if (static_cast<std::uint64_t>(x_target) > env.positions.back())
        throw EnvironmentTooShort("target site is beyond the last known trap");
    const auto& pos = env.positions;
    SweepQuery queries[2] = {{x0, 0.0}, {x_target, 0.0}};
    harmonic_sweep(0, x_target, beta, pos.data() + 1, pos.data() + pos.size(), queries,
                   queries + 2);
    double log_p = queries[0].log_w - queries[1].log_w;
    if (is_trap(env, x_target)) log_p -= beta;
    if (is_trap(env, x0)) log_p += beta;
    return log_p;
}

// ---------------------------------------------------------------------------
// Confinement in (0, t).
// ---------------------------------------------------------------------------

double log_confined_survival_probability(std::uint64_t t, std::uint64_t n, std::uint64_t x0) {
    if (t < 2) throw ValidationError("confinement needs an interval of length t >= 2");
    if (x0 < 1 || x0 >= t) throw ValidationError("confinement start must satisfy 0 < x0 < t");
    if (n == 0) return 0.0;
    if (t == 2) return kNegInf;  // the single interior site dies in one step
    const std::size_t width = static_cast<std::size_t>(t - 1);
    std::vector<double> w(width, 0.0), w2(width, 0.0);
    w[static_cast<std::size_t>(x0 - 1)] = 1.0;
    double log_off = 0.0;
    for (std::uint64_t k = 1; k <= n; ++k) {
        w2[0] = 0.5 * (width > 1 ? w[1] : 0.0);
        for (std::size_t idx = 1; idx + 1 < width; ++idx)
            w2[idx] = 0.5 * (w[idx - 1] + w[idx + 1]);
        if (width > 1) w2[width - 1] = 0.5 * w[width - 2];
        std::swap(w, w2);
        if (k % 128 == 0) {
            double m = *std::max_element(w.begin(), w.end());
            if (m == 0.0) return kNegInf;
            const double inv = 1.0 / m;
            for (double& v : w) v *= inv;
            log_off += std::log(m);
        }
    }
    double total = 0.0;
    for (double v : w) total += v;
    if (total == 0.0) return kNegInf;
    return std::log(total) + log_off;
}

double small_ball_rate(std::uint64_t t) {
    if (t < 3)
        throw ValidationError("small-ball rate is finite only for gaps t >= 3");
    return -std::log(std::cos(std::numbers::pi / static_cast<double>(t)));
}

// ---------------------------------------------------------------------------
// Arrival-time comparison (killed versus free walk).
// ---------------------------------------------------------------------------

FkgResult fkg_compare(const Environment& env, std::int64_t x, std::uint64_t n, double beta) {
    check_beta(beta);
    if (x < 1) throw ValidationError("comparison site must be >= 1");
    if (n < 1) throw ValidationError("comparison horizon n must be >= 1");
    if (static_cast<std::uint64_t>(x) > env.positions.back())
        throw EnvironmentTooShort("comparison site is beyond the last known trap");

    const auto& pos = env.positions;
    const bool target_is_trap = is_trap(env, x);

    auto run = [&](double b) -> std::pair<std::vector<double>, double> {
        // Denominator: total conditional weight of reaching x before 0 from
        // the origin, with the walk charged on every kill-site visit.
        double log_den;
        {
            SweepQuery q[1] = {{x, 0.0}};
            harmonic_sweep(0, x, b, pos.data() + 1, pos.data() + pos.size(), q, q + 1);
            // From the origin: first step up carries 1/2; the sweep scale is
            // fixed by w(target) = e^(-b 1{target trap}).
            log_den = -std::numbers::ln2 - (target_is_trap ? b : 0.0) - q[0].log_w;
        }
        // Time-resolved numerator: weights on interior sites 1..x-1, flux
        // into x accumulated step by step.
        const double ebx = target_is_trap ? std::exp(-b) : 1.0;
        const std::size_t width = static_cast<std::size_t>(x - 1);
        std::vector<double> kill(width, 1.0);
        for (std::size_t idx = 0; idx < width; ++idx)
            if (is_trap(env, static_cast<std::int64_t>(idx + 1))) kill[idx] = std::exp(-b);
        std::vector<double> w(width, 0.0), w2(width, 0.0);
        double log_off = 0.0;
        double log_numer = kNegInf;
        std::vector<double> cdf(n);
        for (std::uint64_t m = 1; m <= n; ++m) {
            if (m == 1) {
                if (width > 0) w[0] = 0.5 * kill[0];
            } else {
                if (width > 0) {
                    w2[0] = 0.5 * (width > 1 ? w[1] : 0.0) * kill[0];
                    for (std::size_t idx = 1; idx + 1 < width; ++idx)
                        w2[idx] = 0.5 * (w[idx - 1] + w[idx + 1]) * kill[idx];
                    if (width > 1) w2[width - 1] = 0.5 * w[width - 2] * kill[width - 1];
                    std::swap(w, w2);
                }
            }
            // Arrival flux into x at time m.
            double flux;
            if (width == 0) {
                flux = m == 1 ? 0.5 * ebx : 0.0;
            } else {
                flux = 0.5 * w[width - 1] * ebx;
            }
            if (flux > 0.0) log_numer = logaddexp(log_numer, std::log(flux) + log_off);
            cdf[m - 1] = log_numer == kNegInf ? 0.0 : std::exp(log_numer - log_den);
            if (width > 0 && m % 512 == 0) {
                double mx = *std::max_element(w.begin(), w.end());
                if (mx > 0.0) {
                    const double inv = 1.0 / mx;
                    for (double& v : w) v *= inv;
                    log_off += std::log(mx);
                }
            }
        }
        return {std::move(cdf), log_den};
    };

    FkgResult res;
    auto killed = run(beta);
    auto free_walk = run(0.0);
    res.cdf_killed = std::move(killed.first);
    res.log_denominator_killed = killed.second;
    res.cdf_free = std::move(free_walk.first);
    res.log_denominator_free = free_walk.second;
    return res;
}

// ---------------------------------------------------------------------------
// Two-sided crossing cost.
// ---------------------------------------------------------------------------

double log_two_sided_crossing(const std::vector<std::int64_t>& neg_traps, std::int64_t t1,
                              double beta, std::uint64_t left_limit, bool kill_on_arrival) {
    check_beta(beta);
    if (t1 < 1) throw ValidationError("target trap must sit at t1 >= 1");
    if (left_limit < 1) throw ValidationError("left truncation must be >= 1");
    const std::int64_t left = -static_cast<std::int64_t>(left_limit);
    for (std::size_t i = 0; i < neg_traps.size(); ++i) {
        if (neg_traps[i] > 0 || neg_traps[i] <= left)
            throw ValidationError("negative kill sites must lie in (-left_truncation, 0]");
        if (i > 0 && neg_traps[i] >= neg_traps[i - 1])
            throw ValidationError("negative kill sites must be strictly decreasing");
    }
    // Sweep w(x+1) = 2 w(x) e^(beta 1{x kill}) - w(x-1) from the absorbing
    // truncation wall at `left` up to t1, then normalize at the target.
    const double growth = std::exp(beta);
    double w_prev = 0.0, w_cur = 1.0, log_off = 0.0;
    double log_w0 = kNegInf, log_w_t1 = kNegInf;
    bool origin_killed = !neg_traps.empty() && neg_traps.front() == 0;
    std::ptrdiff_t kill_idx = static_cast<std::ptrdiff_t>(neg_traps.size()) - 1;
    for (std::int64_t x = left + 1;; ++x) {
        if (x == 0) log_w0 = std::log(w_cur) + log_off;
        if (x == t1) {
            log_w_t1 = std::log(w_cur) + log_off;
            break;
        }
        double mid = w_cur;
        if (kill_idx >= 0 && neg_traps[static_cast<std::size_t>(kill_idx)] == x) {
            mid *= growth;
            --kill_idx;
        }
        double w_next = 2.0 * mid - w_prev;
        if (w_next > 1e280) {
            const double inv = 1.0 / w_next;
            log_off += std::log(w_next);
            w_prev = w_cur * inv;
            w_cur = 1.0;
        } else {
            w_prev = w_cur;
            w_cur = w_next;
        }
    }
    double log_p = log_w0 - log_w_t1;
    if (kill_on_arrival) log_p -= beta;
    if (origin_killed) log_p += beta;
    return log_p;
}

TwoSidedResult lambda_two_sided(const GapLaw& law, const TwoSidedParams& params) {
    check_beta(params.beta);
    if (params.samples < 2) throw ValidationError("two-sided estimate needs samples >= 2");
    if (params.left_truncation < 2)
        throw ValidationError("left truncation must be >= 2");

    std::vector<double> log_ps(params.samples);
    std::vector<double> bias_bounds(params.samples);
    for (std::size_t s = 0; s < params.samples; ++s) {
        auto rng = make_rng(params.seed, "mc", s);
        std::int64_t t1 = static_cast<std::int64_t>(sample_gap(law, rng));
        std::vector<std::int64_t> neg;
        if (params.kill_at_origin) neg.push_back(0);
        std::int64_t p = 0;
        std::size_t interior_kills = 0;
        for (;;) {
            std::int64_t g = static_cast<std::int64_t>(sample_gap(law, rng));
            if (p - g <= -static_cast<std::int64_t>(params.left_truncation)) break;
            p -= g;
            neg.push_back(p);
            ++interior_kills;
        }
        double lp = log_two_sided_crossing(neg, t1, params.beta, params.left_truncation,
                                           params.kill_on_arrival);
        log_ps[s] = lp;
        // Any path reaching the truncation wall alive crossed every interior
        // kill site, so the un-truncated probability exceeds the truncated
        // one by at most e^(-beta * interior_kills).
        bias_bounds[s] =
            std::log1p(std::exp(-params.beta * static_cast<double>(interior_kills) - lp));
    }
    double mean = 0.0;
    for (double v : log_ps) mean += v;
    mean /= static_cast<double>(params.samples);
    double var = 0.0;
    for (double v : log_ps) var += (v - mean) * (v - mean);
    var /= static_cast<double>(params.samples - 1);
    double se = std::sqrt(var / static_cast<double>(params.samples));
    double bias = 0.0;
    for (double v : bias_bounds) bias += v;
    bias /= static_cast<double>(params.samples);

    TwoSidedResult res;
    res.lambda_hat = -mean;
    res.std_error = se;
    res.truncation_bound = bias;
    res.samples = params.samples;
    if (bias > 0.5 * se)
        throw TruncationTooCoarse(
            "left truncation bias bound " + std::to_string(bias) +
            " is not small against the statistical error " + std::to_string(se) +
            "; increase left_truncation");
    return res;
}

} // namespace trapwalk
