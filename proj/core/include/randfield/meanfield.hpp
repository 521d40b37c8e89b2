#pragma once

#include <cstdint>
#include <vector>

#include "randfield/measure.hpp"
#include "randfield/model.hpp"
#include "randfield/parallel.hpp"
#include "randfield/paths.hpp"

namespace randfield {

struct PicardIterate {
    int iter = 0;
    double w2 = 0.0;
    double seconds = 0.0;
};

struct MeanFieldSolution {
    Ensemble ensemble;
    FieldStats stats;  // unscaled statistics of the final iterate
    std::vector<PicardIterate> iterates;
    bool converged = false;
};

// One application of the mean-field map mu -> Q_mu, realized as a mixture
// over Gaussian interaction paths: each particle draws r ~ pi, an initial
// history, one frozen Gaussian path G with the (unscaled) mean M_prev(.,r)
// and covariance Sigma_prev(.,.,r) estimated from prev, and integrates
//   dx_t = f(r,t,x_t) dt + G_t dt + lambda(r) dB_t.
// Covariance Cholesky factors are tabulated at m_nodes location nodes per
// axis (nearest node per particle); per-particle means are exact.
// When prev is empty and allow_uncoupled is used via uncoupled_ensemble,
// G == 0 reproduces the uncoupled law P.
Ensemble meanfield_map(const ModelParams& params, const Ensemble& prev, std::size_t n_particles,
                       const TimeGrid& grid, int m_nodes, std::uint64_t seed,
                       const Executor& ex = Executor{});

// Particles distributed per the uncoupled law P (the interaction term is
// identically zero). Shares the particle randomness layout of meanfield_map,
// so iterates stay coupled pathwise across Picard iterations.
Ensemble uncoupled_ensemble(const ModelParams& params, std::size_t n_particles,
                            const TimeGrid& grid, std::uint64_t seed,
                            const Executor& ex = Executor{});

// Picard iteration Q^{n+1} = meanfield_map(Q^n) from Q^0 = P, stopping when
// the exact-assignment w2 between successive iterates (fixed subsample,
// fixed comparison seed, common particle randomness) drops below tol.
// Reaching max_iter without tol is reported via converged=false, not thrown.
MeanFieldSolution picard_solve(const ModelParams& params, const TimeGrid& grid,
                               std::size_t n_particles, int m_nodes, double tol, int max_iter,
                               std::uint64_t seed, const Executor& ex = Executor{},
                               std::size_t w2_subsample = 256);

}  // namespace randfield
