#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "randfield/meanfield.hpp"
#include "randfield/model.hpp"
#include "randfield/parallel.hpp"

namespace randfield {

// One observation row. Aggregate rows (computed across replicates) carry
// replicate = -1.
struct SweepRow {
    int N = 0;
    int replicate = 0;
    std::string statistic;
    double value = 0.0;
    double stderr_or_tol = 0.0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
    std::uint64_t seed = 0;
};

// Finite-N convergence toward the mean-field law: per (N, replicate) a fresh
// environment and noise draw, recording
//   "D"  = max over probe (t, r) of |m_hat - m_Q| + |K_hat - K_Q| (diagonal),
//   "w2" = exact-assignment w2 between subsamples of mu_hat_N and Q.
SweepReport convergence_sweep(const ModelParams& params, const TimeGrid& grid,
                              const std::vector<int>& N_list, int replicates,
                              const MeanFieldSolution& meanfield,
                              const std::vector<double>& probe_times,
                              const std::vector<Point>& probe_nodes, std::uint64_t seed,
                              const Executor& ex = Executor{});

// Propagation-of-chaos diagnostic: rho(N) = mean over disjoint sampled pairs
// and probe times of |Corr(S(x^k1_t), S(x^k2_t))| across replicates (all
// randomness redrawn per replicate). Aggregate rows: "rho" (with its s.e.),
// "rho_floor" (the |corr| noise floor sqrt(2/(pi (R-1)))), "pair_count".
// Per-replicate bookkeeping rows: "mean_S".
SweepReport chaos_sweep(const ModelParams& params, const TimeGrid& grid,
                        const std::vector<int>& N_list, int replicates, int pair_count,
                        const std::vector<double>& probe_times, std::uint64_t seed,
                        const Executor& ex = Executor{});

// Battery of exact-identity Monte Carlo checks; one row per identity with
// value = measured relative error (or ratio) and stderr_or_tol = its pass
// tolerance. A row passes when value <= tolerance.
SweepReport identity_suite(const ModelParams& params, std::uint64_t seed,
                           const Executor& ex = Executor{});

// Jonckheere-Terpstra rank statistic for a decreasing trend across ordered
// groups; returns the one-sided normal z (positive favors decreasing).
double jonckheere_decreasing_z(const std::vector<std::vector<double>>& groups);

// One-sided p-value for the z statistic above.
double normal_upper_p(double z);

}  // namespace randfield
