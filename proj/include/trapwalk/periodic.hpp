#ifndef TRAPWALK_PERIODIC_HPP
#define TRAPWALK_PERIODIC_HPP

#include <cstdint>
#include <vector>

namespace trapwalk {

// Periodic trap pattern: gaps[i] separates trap i from trap i+1, cyclically,
// so there are gaps.size() traps per spatial period.
struct PeriodicSpec {
    std::vector<std::uint64_t> gaps;
    std::uint64_t period = 0;  // spatial period, the sum of the gaps
    std::uint64_t t_max = 0;   // largest gap
};

PeriodicSpec make_periodic_spec(std::vector<std::uint64_t> gaps);

// Angle Delta(phi) in [0, pi/2) with cos Delta = e^(-phi).
double delta_of_phi(double phi);

// Trap-to-trap transfer matrix at tilt phi: entry (i, j) collects
// e^(phi n) times the probability that the walk started at trap i makes its
// next trap visit at trap j after n steps. Symmetric with nonnegative
// entries; finite exactly when phi < -log cos(pi / t_max) for t_max >= 3
// (every phi >= 0 works when t_max <= 2).
struct LaplaceMatrix {
    double phi = 0.0;
    double delta = 0.0;
    std::vector<std::vector<double>> entries;
};

LaplaceMatrix laplace_matrix(const PeriodicSpec& spec, double phi);

// Perron root of the transfer matrix, by power iteration on Q + I.
double perron_root(const LaplaceMatrix& q, double* residual = nullptr);

struct PhiResult {
    double phi = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double perron_residual = 0.0;
};

// Decay-rate exponent of the killed walk on the periodic pattern: the phi
// with Perron(Q(phi)) = e^beta, found by bisection to a 1e-12 bracket.
PhiResult phi_periodic(const PeriodicSpec& spec, double beta);

// Same for the homogeneous pattern with a single gap t >= 2.
PhiResult phi_homogeneous(std::uint64_t t, double beta);

// Direct estimate of the same exponent from the survival weight of the
// walk on Z / (spatial period), killed at rate beta on the trap residues:
// -log(Z_n / Z_{n-2}) / 2, accelerated by one Aitken step. Needs
// n >= 2 * (spatial period)^2 and a pattern with spatial period >= 2.
double periodic_decay_rate(const PeriodicSpec& spec, double beta, std::uint64_t n);

} // namespace trapwalk

#endif
