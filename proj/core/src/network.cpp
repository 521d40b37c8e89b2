#include "randfield/network.hpp"

#include <algorithm>
#include <cmath>

#include "randfield/errors.hpp"
#include "randfield/gaussian.hpp"
#include "randfield/measure.hpp"
#include "randfield/rng.hpp"

namespace randfield {

std::vector<Point> sample_positions(const ModelParams& params, std::size_t N,
                                    std::uint64_t seed) {
    if (N == 0) throw ConfigError("sample_positions: empty network");
    const auto& d = params.domain;
    RandomStream rs(seed, derive_stream(seed, {streams::kPositions}));
    std::vector<Point> out(N, Point(d.dim));
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < N; ++i) {
        for (int k = 0; k < d.dim; ++k) {
            const auto& b = d.bounds[k];
            out[i][k] = b[0] + rs.uniform(idx++) * (b[1] - b[0]);
        }
    }
    return out;
}

CouplingMatrix sample_couplings(const ModelParams& params, const std::vector<Point>& positions,
                                std::uint64_t seed) {
    if (positions.empty()) throw ConfigError("sample_couplings: empty positions");
    const std::size_t N = positions.size();
    CouplingMatrix M;
    M.n = N;
    if (params.lipschitz.J_inf == 0.0 && params.lipschitz.sigma_inf == 0.0) return M;
    M.entries.assign(N * N, 0.0);
    RandomStream rs(seed, derive_stream(seed, {streams::kCouplings}));
    const double invN = 1.0 / static_cast<double>(N);
    const double sqrtN = std::sqrt(static_cast<double>(N));
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            const double mean = params.J(positions[i], positions[j]) * invN;
            const double sd = params.sigma(positions[i], positions[j]) / sqrtN;
            M.entries[i * N + j] = mean + sd * rs.normal(i * N + j);
        }
    }
    return M;
}

std::vector<std::vector<double>> build_initial(const InitialLaw& initial,
                                               const std::vector<Point>& positions,
                                               const TimeGrid& grid, std::uint64_t seed) {
    const double sqdt = std::sqrt(grid.dt);
    std::vector<std::vector<double>> out(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        RandomStream rs(seed, derive_stream(seed, {streams::kInitialHistory, i}));
        const double base = initial.psi(positions[i]);
        auto& h = out[i];
        h.resize(grid.n_hist + 1);
        double eta = 0.0;
        h[0] = base;
        for (std::size_t m = 1; m <= grid.n_hist; ++m) {
            eta += sqdt * rs.normal(m - 1);
            h[m] = base + initial.noise_scale * eta;
        }
    }
    return out;
}

Ensemble simulate_network(const ModelParams& params, const std::vector<Point>& positions,
                          const CouplingMatrix& couplings,
                          const std::vector<std::vector<double>>& initial_histories,
                          const TimeGrid& grid, std::uint64_t seed, const Executor& ex,
                          const std::vector<std::uint64_t>& noise_labels) {
    const std::size_t N = positions.size();
    if (N == 0) throw ConfigError("simulate_network: empty network");
    if (couplings.n != N || initial_histories.size() != N)
        throw ConfigError("simulate_network: inconsistent input sizes");
    if (!noise_labels.empty() && noise_labels.size() != N)
        throw ConfigError("simulate_network: noise_labels size mismatch");

    const std::size_t n_total = grid.total_points();
    const std::size_t i0 = grid.index_of_time0();
    const bool decoupled = couplings.is_zero();

    // Per-pair delay indices, rounded to the nearest grid point.
    std::vector<int> delay;
    if (!decoupled) {
        delay.assign(N * N, 0);
        ex.parallel_for(N, [&](std::size_t i) {
            for (std::size_t j = 0; j < N; ++j) {
                const long d = std::lround(params.tau(positions[i], positions[j]) / grid.dt);
                if (d < 0 || d > static_cast<long>(grid.n_hist))
                    throw ConfigError("simulate_network: delay exceeds the history buffer");
                delay[i * N + j] = static_cast<int>(d);
            }
        });
    }

    Ensemble ens;
    ens.grid = grid;
    ens.members.resize(N);
    std::vector<double> sig(N * n_total, 0.0);  // S(x) history, member-major
    for (std::size_t i = 0; i < N; ++i) {
        ens.members[i].r = positions[i];
        auto& v = ens.members[i].values;
        v.assign(n_total, 0.0);
        if (initial_histories[i].size() != grid.n_hist + 1)
            throw ConfigError("simulate_network: history length mismatch");
        for (std::size_t m = 0; m <= grid.n_hist; ++m) {
            v[m] = initial_histories[i][m];
            sig[i * n_total + m] = params.S(v[m]);
        }
    }

    std::vector<RandomStream> noise;
    noise.reserve(N);
    for (std::size_t i = 0; i < N; ++i) {
        const std::uint64_t label = noise_labels.empty() ? i : noise_labels[i];
        noise.emplace_back(seed, derive_stream(seed, {streams::kNetworkNoise, label}));
    }

    // Interaction sums accumulate in label order (the canonical neuron
    // identity), so relabeling permutes output paths bit-exactly.
    std::vector<std::uint32_t> order(N);
    for (std::size_t i = 0; i < N; ++i) order[i] = static_cast<std::uint32_t>(i);
    if (!noise_labels.empty())
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return noise_labels[a] < noise_labels[b];
        });

    const double sqdt = std::sqrt(grid.dt);
    std::vector<double> lam(N);
    for (std::size_t i = 0; i < N; ++i) lam[i] = params.lambda(positions[i]);

    for (std::size_t k = i0; k + 1 <= i0 + grid.n_main; ++k) {
        const double t = grid.time(k);
        const std::size_t step = k - i0;
        ex.parallel_for(N, [&](std::size_t i) {
            const double x = ens.members[i].values[k];
            double drift = params.f(positions[i], t, x);
            if (!decoupled) {
                const double* Ji = couplings.entries.data() + i * N;
                const int* di = delay.data() + i * N;
                double inter = 0.0;
                for (std::size_t jj = 0; jj < N; ++jj) {
                    const std::size_t j = order[jj];
                    inter += Ji[j] * sig[j * n_total + (k - static_cast<std::size_t>(di[j]))];
                }
                drift += inter;
            }
            const double next = x + grid.dt * drift + lam[i] * sqdt * noise[i].normal(step);
            if (!std::isfinite(next) || std::abs(next) > 1e8)
                throw NumericError("simulate_network: state blow-up at step " +
                                   std::to_string(step));
            ens.members[i].values[k + 1] = next;
            sig[i * n_total + k + 1] = params.S(next);
        });
    }
    return ens;
}

double girsanov_average_check(const ModelParams& params, const std::vector<Point>& positions,
                              const Ensemble& frozen_paths, std::size_t n_J, std::size_t n_G,
                              std::uint64_t seed, const Executor& ex) {
    const std::size_t N = positions.size();
    if (N == 0 || frozen_paths.size() != N)
        throw ConfigError("girsanov_average_check: positions and paths must agree");
    if (N > 4)
        throw ConfigError(
            "girsanov_average_check: N must be <= 4 (estimator variance explodes beyond desk "
            "scale)");
    const TimeGrid& grid = frozen_paths.grid;
    const std::size_t i0 = grid.index_of_time0();
    const std::size_t n_steps = grid.n_main;

    // Reconstruct the P_r-Brownian increments of each frozen path:
    // dW_k = (x_{k+1} - x_k - dt f(r,t_k,x_k)) / lambda(r).
    std::vector<std::vector<double>> dW(N, std::vector<double>(n_steps));
    std::vector<double> lam(N);
    for (std::size_t i = 0; i < N; ++i) {
        lam[i] = params.lambda(positions[i]);
        const auto& x = frozen_paths.members[i].values;
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double t = grid.time(i0 + k);
            dW[i][k] =
                (x[i0 + k + 1] - x[i0 + k] - grid.dt * params.f(positions[i], t, x[i0 + k])) /
                lam[i];
        }
    }

    // Delayed sigmoid table: sdel[i][j][k] = S(x^j at t_k - tau(r_i, r_j)).
    std::vector<std::vector<double>> sdel(N * N, std::vector<double>(n_steps));
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) {
            const long d = std::lround(params.tau(positions[i], positions[j]) / grid.dt);
            if (d < 0 || d > static_cast<long>(grid.n_hist))
                throw ConfigError("girsanov_average_check: delay exceeds the history buffer");
            for (std::size_t k = 0; k < n_steps; ++k) {
                const std::size_t idx = i0 + k - static_cast<std::size_t>(d);
                sdel[i * N + j][k] = params.S(frozen_paths.members[j].values[idx]);
            }
        }
    }

    // LHS: average over coupling redraws of exp{sum_i int G^i dW_i - 1/2 int (G^i)^2 dt},
    // G^i_t = (1/lambda_i) sum_j J_ij S(x^j_{t-tau_ij}).
    const double invN = 1.0 / static_cast<double>(N);
    const double sqrtN = std::sqrt(static_cast<double>(N));
    std::vector<double> lhs_terms(n_J);
    ex.parallel_for(n_J, [&](std::size_t draw) {
        RandomStream rs(seed, derive_stream(seed, {streams::kCouplings, draw}));
        double expo = 0.0;
        std::size_t zi = 0;
        std::vector<double> J(N * N);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) {
                const double mean = params.J(positions[i], positions[j]) * invN;
                const double sd = params.sigma(positions[i], positions[j]) / sqrtN;
                J[i * N + j] = mean + sd * rs.normal(zi++);
            }
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t k = 0; k < n_steps; ++k) {
                double g = 0.0;
                for (std::size_t j = 0; j < N; ++j) g += J[i * N + j] * sdel[i * N + j][k];
                g /= lam[i];
                expo += g * dW[i][k] - 0.5 * g * g * grid.dt;
            }
        }
        lhs_terms[draw] = std::exp(expo);
    });
    double lhs = 0.0;
    for (double v : lhs_terms) lhs += v;
    lhs /= static_cast<double>(n_J);

    // RHS: product over neurons of E_gamma[ exp{ int (G+m) dW - 1/2 int (G+m)^2 dt } ]
    // with the scaled empirical-mean-field statistics at r_i.
    std::vector<double> times(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) times[k] = grid.time(i0 + k);
    const FieldStats stats = field_stats(frozen_paths, params, positions, times, ex);

    double rhs = 1.0;
    for (std::size_t i = 0; i < N; ++i) {
        CovMatrix cov;
        cov.n = n_steps;
        cov.entries.resize(n_steps * n_steps);
        cov.mean.assign(n_steps, 0.0);
        for (std::size_t a = 0; a < n_steps; ++a)
            for (std::size_t b = 0; b < n_steps; ++b)
                cov.entries[a * n_steps + b] = stats.scaled_cov(params, i, a, b);
        const GaussianDraws draws =
            cholesky_sample(cov, n_G, derive_stream(seed, {streams::kGaussianSample, i}), ex);
        std::vector<double> m(n_steps);
        for (std::size_t k = 0; k < n_steps; ++k) m[k] = stats.scaled_mean(params, i, k);
        std::vector<double> terms(n_G);
        ex.parallel_for(n_G, [&](std::size_t s) {
            const double* g = draws.path(s);
            double expo = 0.0;
            for (std::size_t k = 0; k < n_steps; ++k) {
                const double gm = g[k] + m[k];
                expo += gm * dW[i][k] - 0.5 * gm * gm * grid.dt;
            }
            terms[s] = std::exp(expo);
        });
        double factor = 0.0;
        for (double v : terms) factor += v;
        rhs *= factor / static_cast<double>(n_G);
    }

    return std::abs(lhs - rhs) / std::abs(rhs);
}

}  // namespace randfield
