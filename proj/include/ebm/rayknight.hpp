#pragma once

#include <cstdint>
#include <vector>

#include "ebm/profile.hpp"

namespace ebm {

// One sampled trajectory of the dual local-time diffusion
//   dZ_x = 2 sqrt(Z_x) dbeta_x + 2 (1 - h(Z_x)) dx,   Z_0 = 0,
// discretized on a grid of spacing dx. Nonhomogeneous profiles drive the
// x-dependent form with h(a - x, z).
struct ZPath {
    double dx = 0.0;
    double a = 0.0;             // right endpoint (hitting level of the primal)
    std::vector<double> z;      // z[k] ~ Z_{k*dx}, k = 0..n, all >= 0
    std::uint64_t seed = 0;
};

// Full-truncation explicit scheme:
//   Z_{k+1} = Z_k + 2 sqrt(Z_k^+) sqrt(dx) xi_k + 2 (1 - h(Z_k^+)) dx,
//   Z_{k+1} <- max(Z_{k+1}, 0).
ZPath simulate_z(const ExcitationProfile& p, double a, double dx, std::uint64_t seed);

// n_paths terminal values Z_a, one derived RNG stream per path
std::vector<double> terminal_samples(const ExcitationProfile& p, double a, std::size_t n_paths,
                                     double dx, std::uint64_t master_seed);

// primal hitting-time functional of the dual path: T_a = integral of Z dx
double hitting_time_functional(const ZPath& zp);

struct InvariantComparison {
    double ks_statistic = 0.0;
    double ks_p_value = 1.0;
    double sample_mean = 0.0;
    double pi_mean = 0.0;
};

// KS of terminal samples against the quadrature CDF of the invariant law pi.
// Requires a profile transient to the right (pi normalizable); throws
// infinite_measure_error otherwise.
InvariantComparison compare_invariant(const std::vector<double>& samples,
                                      const ExcitationProfile& p);

// Exact squared-Bessel(2) endpoint sampler started at 0: Z_x ~ 2x * Exp(1).
// Reference oracle for the zero-profile special case of simulate_z.
double besq2_endpoint(double x, std::uint64_t seed);

}
