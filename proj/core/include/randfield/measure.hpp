#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "randfield/model.hpp"
#include "randfield/parallel.hpp"
#include "randfield/paths.hpp"

namespace randfield {

// Tabulated interaction statistics of a measure on path space, at query
// locations r_nodes and grid times in [0,T]:
//   M(t,r)     = mean of J(r,r') S(x_{t-tau(r,r')})           (unscaled mean)
//   Sigma(s,t,r) = mean of sigma(r,r')^2 S(x_{s-tau}) S(x_{t-tau})
// The scaled versions of the mean-field functionals are m = M/lambda(r) and
// K = Sigma/lambda(r)^2; scaling happens at the single conversion points
// scaled_mean / scaled_cov.
struct FieldStats {
    std::vector<Point> r_nodes;
    std::vector<double> times;
    std::vector<std::vector<double>> M;          // [node][time]
    std::vector<std::vector<double>> M_se;       // Monte Carlo s.e. of M
    std::vector<std::vector<double>> Sigma;      // [node][time*time], row-major
    std::vector<std::vector<double>> Sigma_diag_se;

    double sigma_at(std::size_t node, std::size_t s, std::size_t t) const {
        return Sigma[node][s * times.size() + t];
    }
    double scaled_mean(const ModelParams& p, std::size_t node, std::size_t t) const {
        return M[node][t] / p.lambda(r_nodes[node]);
    }
    double scaled_cov(const ModelParams& p, std::size_t node, std::size_t s, std::size_t t) const {
        const double l = p.lambda(r_nodes[node]);
        return sigma_at(node, s, t) / (l * l);
    }
};

struct DistanceReport {
    double value = 0.0;
    std::string method;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    std::size_t subsample = 0;
};

enum class CouplingMethod { exact_assignment, index_coupling };

// Empirical statistics of an ensemble; delays are rounded to the grid.
FieldStats field_stats(const Ensemble& ensemble, const ModelParams& params,
                       const std::vector<Point>& r_nodes, const std::vector<double>& times,
                       const Executor& ex = Executor{});

// Delay-aware path-space metric:
//   d_T^2 = |r-r'|^2 + sup over t in [0,T], a,b in [-tau_bar,0] with
//           |b-a| <= K_tau |r-r'| of |x_{t+a} - y_{t+b}|^2,
// the sup taken over grid points with the shift window rounded outward.
double path_distance(const PathSample& a, const PathSample& b, double K_tau,
                     const TimeGrid& grid);

// Empirical 2-Vaserstein distance between equal-size subsamples: cost
// c_ij = d_T(a_i, b_j)^2, matched either by an optimal assignment or by
// index. Returns sqrt(mean matched cost).
DistanceReport wasserstein2(const Ensemble& A, const Ensemble& B, double K_tau,
                            std::size_t subsample, CouplingMethod method, std::uint64_t seed,
                            const Executor& ex = Executor{});

// Exact solver for the square assignment problem (row -> column), O(n^3).
std::vector<int> solve_assignment(const std::vector<double>& cost, std::size_t n);

// Uniform per-axis location nodes (axis midpoint lattice), used to tabulate
// field statistics.
std::vector<Point> location_nodes(const SpatialDomain& domain, int per_axis);

}  // namespace randfield
