#pragma once

#include <cstdint>
#include <vector>

#include "randfield/parallel.hpp"

namespace randfield {

// Covariance of a process sampled on a time grid, plus its mean.
struct CovMatrix {
    std::size_t n = 0;
    std::vector<double> entries;  // n x n, row-major, symmetric
    std::vector<double> mean;     // length n

    double at(std::size_t i, std::size_t j) const { return entries[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return entries[i * n + j]; }

    static CovMatrix zero(std::size_t n);
};

// m_samples independent realizations of a Gaussian process on the grid.
struct GaussianDraws {
    std::size_t m_samples = 0;
    std::size_t n = 0;
    std::vector<double> paths;  // m_samples x n, row-major

    const double* path(std::size_t s) const { return paths.data() + s * n; }
    double* path(std::size_t s) { return paths.data() + s * n; }
};

// Lower Cholesky factor with escalating jitter eps*max(diag)*I,
// eps = 1e-12 .. 1e-8. Throws NumericError beyond the jitter cap.
std::vector<double> cholesky_factor(const CovMatrix& cov);

// Samples N(mean, entries); deterministic given seed, independent of the
// worker count (per-sample substreams derived from (seed, sample index)).
GaussianDraws cholesky_sample(const CovMatrix& cov, std::size_t m_samples, std::uint64_t seed,
                              const Executor& ex = Executor{});

// Self-normalized reweighting Lambda_t(G) = exp{-1/2 int_0^t G^2 ds} divided
// by the sample mean of the numerator. Time integrals are left-endpoint
// Riemann sums with step dt; the returned weights average to 1 exactly.
// Plug-in estimator of the exact Gaussian expectation in the denominator,
// with O(1/sqrt(m_samples)) error.
std::vector<double> lambda_weight(const GaussianDraws& draws, std::size_t t_index, double dt);

// Tilted covariance K~^t(s,u): sample mean of G_u * G_s * Lambda_t(G).
double tilted_covariance(const GaussianDraws& draws, std::size_t t_index, std::size_t s_index,
                         std::size_t u_index, double dt);

// E[exp{ N(m,v)^2 / 2 }] = (1-v)^{-1/2} exp{ m^2 / (2(1-v)) }, for v < 1.
double exp_quadratic_moment(double m, double v);

// Consistency of the two routes to E[exp{-1/2 int_0^T G^2}] for the
// constant-in-time process G_t = Z, Z ~ N(0,v): direct Monte Carlo versus
// exp{-1/2 int K~^t(t,t) dt}. Returns |lhs - rhs| / truth with
// truth = (1+vT)^{-1/2}.
double check_ktilde_identity(double v, double T, std::size_t m_samples, std::size_t n_steps,
                             std::uint64_t seed);

}  // namespace randfield
