#include "randfield/meanfield.hpp"

#include <chrono>
#include <cmath>

#include "randfield/errors.hpp"
#include "randfield/gaussian.hpp"
#include "randfield/network.hpp"
#include "randfield/rng.hpp"

namespace randfield {

namespace {

// Integrates all particles. gp_factors[node] is the Cholesky factor of the
// tabulated covariance (may be empty together with stats for the uncoupled
// law); per-particle Gaussian means are computed exactly at the particle's
// own location from prev.
Ensemble integrate_particles(const ModelParams& params, const Ensemble* prev,
                             const std::vector<std::vector<double>>* gp_factors,
                             const std::vector<Point>* nodes, std::size_t n_particles,
                             const TimeGrid& grid, std::uint64_t seed, const Executor& ex) {
    if (n_particles == 0) throw ConfigError("meanfield: need at least one particle");
    const std::size_t i0 = grid.index_of_time0();
    const std::size_t n_steps = grid.n_main;
    const double sqdt = std::sqrt(grid.dt);

    // Sigmoid paths of the previous iterate, shared by all particles.
    std::vector<std::vector<double>> prev_sig;
    if (prev) {
        prev_sig.resize(prev->size());
        ex.parallel_for(prev->size(), [&](std::size_t j) {
            const auto& v = prev->members[j].values;
            prev_sig[j].resize(v.size());
            for (std::size_t k = 0; k < v.size(); ++k) prev_sig[j][k] = params.S(v[k]);
        });
    }

    Ensemble out;
    out.grid = grid;
    out.members.resize(n_particles);

    ex.parallel_for(n_particles, [&](std::size_t p) {
        RandomStream pos_rs(seed, derive_stream(seed, {streams::kParticlePosition, p}));
        RandomStream gp_rs(seed, derive_stream(seed, {streams::kParticleProcess, p}));
        RandomStream bm_rs(seed, derive_stream(seed, {streams::kParticleBrownian, p}));
        RandomStream hist_rs(seed, derive_stream(seed, {streams::kParticleHistory, p}));

        Point r(params.domain.dim);
        for (int k = 0; k < params.domain.dim; ++k) {
            const auto& b = params.domain.bounds[k];
            r[k] = b[0] + pos_rs.uniform(k) * (b[1] - b[0]);
        }

        // Interaction path G: exact mean at r plus the nearest node's factor.
        std::vector<double> G;
        if (prev) {
            G.assign(n_steps, 0.0);
            const std::size_t m_prev = prev->size();
            for (std::size_t j = 0; j < m_prev; ++j) {
                const auto& member = prev->members[j];
                const double Jv = params.J(r, member.r);
                const long d = std::lround(params.tau(r, member.r) / grid.dt);
                const double* sj = prev_sig[j].data();
                for (std::size_t k = 0; k < n_steps; ++k)
                    G[k] += Jv * sj[i0 + k - static_cast<std::size_t>(d)];
            }
            const double inv = 1.0 / static_cast<double>(m_prev);
            for (double& g : G) g *= inv;

            std::size_t best = 0;
            double best_d = euclidean_distance(r, (*nodes)[0]);
            for (std::size_t nd = 1; nd < nodes->size(); ++nd) {
                const double dd = euclidean_distance(r, (*nodes)[nd]);
                if (dd < best_d) {
                    best_d = dd;
                    best = nd;
                }
            }
            const std::vector<double>& L = (*gp_factors)[best];
            std::vector<double> z(n_steps);
            for (std::size_t k = 0; k < n_steps; ++k) z[k] = gp_rs.normal(k);
            for (std::size_t i = 0; i < n_steps; ++i) {
                double acc = 0.0;
                const double* Li = L.data() + i * n_steps;
                for (std::size_t j = 0; j <= i; ++j) acc += Li[j] * z[j];
                G[i] += acc;
            }
        }

        auto& member = out.members[p];
        member.r = r;
        auto& v = member.values;
        v.assign(grid.total_points(), 0.0);
        const double base = params.initial.psi(r);
        double eta = 0.0;
        v[0] = base;
        for (std::size_t m = 1; m <= grid.n_hist; ++m) {
            eta += sqdt * hist_rs.normal(m - 1);
            v[m] = base + params.initial.noise_scale * eta;
        }

        const double lam = params.lambda(r);
        for (std::size_t k = 0; k < n_steps; ++k) {
            const double t = grid.time(i0 + k);
            const double x = v[i0 + k];
            double drift = params.f(r, t, x);
            if (prev) drift += G[k];
            const double next = x + grid.dt * drift + lam * sqdt * bm_rs.normal(k);
            if (!std::isfinite(next) || std::abs(next) > 1e8)
                throw NumericError("meanfield: particle blow-up at step " + std::to_string(k));
            v[i0 + k + 1] = next;
        }
    });
    return out;
}

}  // namespace

Ensemble uncoupled_ensemble(const ModelParams& params, std::size_t n_particles,
                            const TimeGrid& grid, std::uint64_t seed, const Executor& ex) {
    return integrate_particles(params, nullptr, nullptr, nullptr, n_particles, grid, seed, ex);
}

Ensemble meanfield_map(const ModelParams& params, const Ensemble& prev, std::size_t n_particles,
                       const TimeGrid& grid, int m_nodes, std::uint64_t seed,
                       const Executor& ex) {
    if (prev.members.empty()) throw ConfigError("meanfield_map: empty previous iterate");
    if (!(prev.grid == grid)) throw ConfigError("meanfield_map: grid mismatch");

    const std::size_t i0 = grid.index_of_time0();
    const std::size_t n_steps = grid.n_main;
    std::vector<double> times(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) times[k] = grid.time(i0 + k);

    const std::vector<Point> nodes = location_nodes(params.domain, m_nodes);
    const FieldStats stats = field_stats(prev, params, nodes, times, ex);

    std::vector<std::vector<double>> factors(nodes.size());
    ex.parallel_for(nodes.size(), [&](std::size_t nd) {
        CovMatrix cov;
        cov.n = n_steps;
        cov.mean.assign(n_steps, 0.0);
        cov.entries = stats.Sigma[nd];
        factors[nd] = cholesky_factor(cov);
    });

    return integrate_particles(params, &prev, &factors, &nodes, n_particles, grid, seed, ex);
}

MeanFieldSolution picard_solve(const ModelParams& params, const TimeGrid& grid,
                               std::size_t n_particles, int m_nodes, double tol, int max_iter,
                               std::uint64_t seed, const Executor& ex,
                               std::size_t w2_subsample) {
    if (!(tol > 0.0)) throw ConfigError("picard_solve: tol must be > 0");
    if (max_iter < 1) throw ConfigError("picard_solve: max_iter must be >= 1");

    // One particle seed reused across iterations: successive iterates share
    // position/history/Brownian/GP randomness, so the w2 between them tracks
    // the map's contraction instead of the independent-resampling floor.
    const std::uint64_t particle_seed = derive_stream(seed, {streams::kPicard, 1});
    const std::uint64_t compare_seed = derive_stream(seed, {streams::kCompare});

    // One fixed particle subsample for all iterate comparisons (paired
    // across iterations and across the two sides).
    const std::size_t nsub = std::min(w2_subsample, n_particles);
    std::vector<std::size_t> sub_idx(n_particles);
    for (std::size_t i = 0; i < n_particles; ++i) sub_idx[i] = i;
    if (nsub < n_particles) {
        RandomStream rs(compare_seed, derive_stream(compare_seed, {streams::kSubsample}));
        for (std::size_t i = 0; i < nsub; ++i) {
            const std::size_t j =
                i + static_cast<std::size_t>(rs.uniform(i) * (n_particles - i));
            std::swap(sub_idx[i], sub_idx[std::min(j, n_particles - 1)]);
        }
        sub_idx.resize(nsub);
    }
    auto subsampled = [&](const Ensemble& e) {
        Ensemble out;
        out.grid = e.grid;
        out.members.reserve(sub_idx.size());
        for (std::size_t i : sub_idx) out.members.push_back(e.members[i]);
        return out;
    };

    MeanFieldSolution sol;
    Ensemble current = uncoupled_ensemble(params, n_particles, grid, particle_seed, ex);
    using clock = std::chrono::steady_clock;
    for (int it = 1; it <= max_iter; ++it) {
        const auto tic = clock::now();
        Ensemble next = meanfield_map(params, current, n_particles, grid, m_nodes, particle_seed, ex);
        const DistanceReport rep =
            wasserstein2(subsampled(next), subsampled(current), params.lipschitz.K_tau, nsub,
                         CouplingMethod::exact_assignment, compare_seed, ex);
        const double secs = std::chrono::duration<double>(clock::now() - tic).count();
        sol.iterates.push_back({it, rep.value, secs});
        current = std::move(next);
        if (rep.value <= tol) {
            sol.converged = true;
            break;
        }
    }

    const std::size_t i0 = grid.index_of_time0();
    std::vector<double> times(grid.n_main);
    for (std::size_t k = 0; k < grid.n_main; ++k) times[k] = grid.time(i0 + k);
    sol.stats = field_stats(current, params, location_nodes(params.domain, m_nodes), times, ex);
    sol.ensemble = std::move(current);
    return sol;
}

}  // namespace randfield
