#pragma once

#include <cstdint>
#include <vector>

#include "randfield/model.hpp"
#include "randfield/parallel.hpp"
#include "randfield/paths.hpp"

namespace randfield {

// Realized synaptic matrix: entry (i,j) ~ N(J(r_i,r_j)/N, sigma(r_i,r_j)^2/N)
// conditionally on positions, independent entries including the diagonal.
// An all-zero matrix (fully decoupled model) is stored without entries.
struct CouplingMatrix {
    std::size_t n = 0;
    std::vector<double> entries;  // n x n row-major, or empty when all-zero

    bool is_zero() const { return entries.empty(); }
    double at(std::size_t i, std::size_t j) const {
        return entries.empty() ? 0.0 : entries[i * n + j];
    }
};

// N i.i.d. draws from pi; deterministic given seed.
std::vector<Point> sample_positions(const ModelParams& params, std::size_t N, std::uint64_t seed);

CouplingMatrix sample_couplings(const ModelParams& params, const std::vector<Point>& positions,
                                std::uint64_t seed);

// Per-neuron initial history on [-tau_bar, 0]: x0_s(r_i) = psi(r_i) +
// noise_scale * eta_s with an independent Brownian eta per neuron
// (eta_{-tau_bar} = 0, increment variance dt). Each history has
// grid.n_hist + 1 values.
std::vector<std::vector<double>> build_initial(const InitialLaw& initial,
                                               const std::vector<Point>& positions,
                                               const TimeGrid& grid, std::uint64_t seed);

// Euler-Maruyama for the delayed network SDE:
//   x^i_{k+1} = x^i_k + dt*( f(r_i,t_k,x^i_k) + sum_j J_ij S(x^j_{k - d_ij}) )
//               + lambda(r_i) sqrt(dt) Z^i_k,
// with d_ij = tau(r_i,r_j)/dt rounded to the nearest grid index. Noise for
// neuron i at step k is addressed as (seed, noise_labels[i], k), so results
// are independent of scheduling; noise_labels defaults to 0..N-1.
Ensemble simulate_network(const ModelParams& params, const std::vector<Point>& positions,
                          const CouplingMatrix& couplings,
                          const std::vector<std::vector<double>>& initial_histories,
                          const TimeGrid& grid, std::uint64_t seed,
                          const Executor& ex = Executor{},
                          const std::vector<std::uint64_t>& noise_labels = {});

// Monte Carlo check of the Girsanov averaging identity at desk scale
// (N <= 4): the coupling-averaged network density against the product of
// per-neuron Gaussian-process averages. frozen_paths must have been
// simulated under the uncoupled dynamics. Returns |lhs - rhs| / |rhs|.
double girsanov_average_check(const ModelParams& params, const std::vector<Point>& positions,
                              const Ensemble& frozen_paths, std::size_t n_J, std::size_t n_G,
                              std::uint64_t seed, const Executor& ex = Executor{});

}  // namespace randfield
