#include "trapwalk/periodic.hpp"
#include "trapwalk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace trapwalk {

namespace {

constexpr double kPi = std::numbers::pi;

void check_phi(double phi) {
    if (!(phi >= 0.0) || !std::isfinite(phi))
        throw ValidationError("tilt phi must be finite and >= 0");
}

double pole(std::uint64_t t_max) {
    // Right end of the domain of Q: phi < -log cos(pi / t_max). Gaps of
    // length 1 or 2 impose no constraint.
    return -std::log(std::cos(kPi / static_cast<double>(t_max)));
}

} // namespace

PeriodicSpec make_periodic_spec(std::vector<std::uint64_t> gaps) {
    if (gaps.empty()) throw ValidationError("periodic pattern needs at least one gap");
    for (std::uint64_t g : gaps)
        if (g == 0) throw ValidationError("periodic pattern gaps must be >= 1");
    PeriodicSpec spec;
    spec.period = 0;
    for (std::uint64_t g : gaps) spec.period += g;
    spec.t_max = *std::max_element(gaps.begin(), gaps.end());
    spec.gaps = std::move(gaps);
    return spec;
}

double delta_of_phi(double phi) {
    check_phi(phi);
    return std::atan(std::sqrt(std::expm1(2.0 * phi)));
}

LaplaceMatrix laplace_matrix(const PeriodicSpec& spec, double phi) {
    check_phi(phi);
    const std::size_t p = spec.gaps.size();
    if (p == 0 || spec.period == 0)
        throw ValidationError("periodic pattern is not initialized");
    if (spec.t_max >= 3 && phi >= pole(spec.t_max))
        throw PhiOutOfRange("phi = " + std::to_string(phi) + " is at or beyond the pole " +
                            std::to_string(pole(spec.t_max)) + " of the gap-" +
                            std::to_string(spec.t_max) + " pattern");

    LaplaceMatrix q;
    q.phi = phi;
    q.delta = delta_of_phi(phi);
    q.entries.assign(p, std::vector<double>(p, 0.0));

    const double d = q.delta;
    for (std::size_t i = 0; i < p; ++i) {
        const double g_right = static_cast<double>(spec.gaps[i]);
        const double g_left = static_cast<double>(spec.gaps[(i + p - 1) % p]);
        double hop_right, hop_left, diag;
        if (phi == 0.0) {
            // Delta = 0: the walk merely splits between the two neighboring
            // traps with the gambler's-ruin weights.
            hop_right = 0.5 / g_right;
            hop_left = 0.5 / g_left;
            diag = 1.0 - 0.5 * (1.0 / g_left + 1.0 / g_right);
        } else {
            const double td = std::tan(d);
            hop_right = td / (2.0 * std::sin(g_right * d));
            hop_left = td / (2.0 * std::sin(g_left * d));
            diag = 1.0 - 0.5 * td * (std::cos(g_left * d) / std::sin(g_left * d) +
                                     std::cos(g_right * d) / std::sin(g_right * d));
            // The diagonal is a series with nonnegative terms; the closed
            // form can round a mathematically zero value (both gaps 1) to a
            // few ulps below zero.
            if (diag < 0.0 && diag >= -1e-12) diag = 0.0;
        }
        q.entries[i][(i + 1) % p] += hop_right;
        q.entries[i][(i + p - 1) % p] += hop_left;
        q.entries[i][i] += diag;
    }
    return q;
}

double perron_root(const LaplaceMatrix& q, double* residual) {
    const std::size_t p = q.entries.size();
    if (p == 1) {
        if (residual) *residual = 0.0;
        return q.entries[0][0];
    }
    // Power iteration on Q + I; the shift keeps bipartite patterns (all
    // off-diagonal, e.g. gaps (1,1)) from oscillating.
    std::vector<double> v(p, 1.0 / std::sqrt(static_cast<double>(p))), w(p);
    double shifted = 0.0, res = 0.0;
    for (int iter = 0; iter < 200000; ++iter) {
        for (std::size_t i = 0; i < p; ++i) {
            double s = v[i];
            for (std::size_t j = 0; j < p; ++j) s += q.entries[i][j] * v[j];
            w[i] = s;
        }
        double rayleigh = 0.0, norm2 = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            rayleigh += v[i] * w[i];
            norm2 += v[i] * v[i];
        }
        shifted = rayleigh / norm2;
        res = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            res = std::max(res, std::abs(w[i] - shifted * v[i]));
        double wnorm = 0.0;
        for (std::size_t i = 0; i < p; ++i) wnorm += w[i] * w[i];
        wnorm = std::sqrt(wnorm);
        for (std::size_t i = 0; i < p; ++i) v[i] = w[i] / wnorm;
        if (res <= 1e-14 * std::abs(shifted)) break;
    }
    if (residual) *residual = res;
    return shifted - 1.0;
}

PhiResult phi_periodic(const PeriodicSpec& spec, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw ValidationError("beta must be finite and >= 0");
    PhiResult out;
    if (beta == 0.0) return out;  // Perron(Q(0)) = 1, so phi = 0 exactly

    const double target = std::exp(beta);
    auto perron_at = [&](double phi, double* res) {
        return perron_root(laplace_matrix(spec, phi), res);
    };

    double lo = 0.0, hi;
    if (spec.t_max <= 2) {
        hi = 1.0;
        while (perron_at(hi, nullptr) < target) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e8)
                throw GuaranteeError("no bracket for phi: Perron root will not reach e^beta");
        }
    } else {
        hi = pole(spec.t_max) * (1.0 - 1e-10);
        if (perron_at(hi, nullptr) < target)
            throw GuaranteeError(
                "no bracket for phi: beta pushes the exponent closer to the pole than "
                "the bisection can resolve");
    }
    while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (perron_at(mid, nullptr) < target)
            lo = mid;
        else
            hi = mid;
    }
    out.phi = 0.5 * (lo + hi);
    out.bracket_lo = lo;
    out.bracket_hi = hi;
    perron_at(out.phi, &out.perron_residual);
    return out;
}

PhiResult phi_homogeneous(std::uint64_t t, double beta) {
    if (t < 2) throw ValidationError("homogeneous pattern needs gap t >= 2");
    return phi_periodic(make_periodic_spec({t}), beta);
}

double periodic_decay_rate(const PeriodicSpec& spec, double beta, std::uint64_t n) {
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw ValidationError("beta must be finite and >= 0");
    const std::size_t p = spec.gaps.size();
    if (p == 0 || spec.period == 0)
        throw ValidationError("periodic pattern is not initialized");
    const std::uint64_t length = spec.period;
    if (length < 2)
        throw ValidationError("spatial period must be >= 2; the all-trap gap-1 pattern "
                              "has no free sites to diffuse through");
    if (n < 2 * length * length)
        throw ValidationError("n must be at least twice the squared spatial period");

    const std::size_t L = static_cast<std::size_t>(length);
    std::vector<char> trap(L, 0);
    std::uint64_t pos = 0;
    trap[0] = 1;
    for (std::size_t i = 0; i + 1 < p; ++i) {
        pos += spec.gaps[i];
        trap[static_cast<std::size_t>(pos % length)] = 1;
    }
    const double eb = std::exp(-beta);

    std::vector<double> v(L, 0.0), v2(L, 0.0);
    v[0] = 1.0;
    // log Z_k - log Z_{k-1} for the last six steps: enough for the plain
    // ratio estimate at n, n-2 and n-4 plus one Aitken extrapolation.
    double incr[6] = {0, 0, 0, 0, 0, 0};
    for (std::uint64_t k = 1; k <= n; ++k) {
        for (std::size_t x = 0; x < L; ++x) {
            double left = v[(x + L - 1) % L];
            double right = v[(x + 1) % L];
            double m = 0.5 * (left + right);
            v2[x] = trap[x] ? m * eb : m;
        }
        std::swap(v, v2);
        double s = 0.0;
        for (double x : v) s += x;
        if (s <= 0.0)
            throw GuaranteeError("survival weight vanished before the horizon");
        const double inv = 1.0 / s;
        for (double& x : v) x *= inv;
        for (int i = 0; i + 1 < 6; ++i) incr[i] = incr[i + 1];
        incr[5] = std::log(s);
    }
    const double r_n = -0.5 * (incr[5] + incr[4]);
    const double r_n2 = -0.5 * (incr[3] + incr[2]);
    const double r_n4 = -0.5 * (incr[1] + incr[0]);
    const double d1 = r_n2 - r_n4;
    const double d2 = r_n - r_n2;
    const double denom = d2 - d1;
    if (std::abs(denom) < 1e-18 * std::max(1.0, std::abs(r_n))) return r_n;
    return r_n - d2 * d2 / denom;
}

} // namespace trapwalk
