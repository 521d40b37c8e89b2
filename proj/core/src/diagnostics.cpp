#include "randfield/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "randfield/errors.hpp"
#include "randfield/gaussian.hpp"
#include "randfield/network.hpp"
#include "randfield/rng.hpp"

namespace randfield {

double normal_upper_p(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double jonckheere_decreasing_z(const std::vector<std::vector<double>>& groups) {
    double J = 0.0;
    std::size_t n = 0;
    double sum_sq = 0.0, sum_cube_term = 0.0;
    for (const auto& g : groups) {
        n += g.size();
        const double k = static_cast<double>(g.size());
        sum_sq += k * k;
        sum_cube_term += k * k * (2.0 * k + 3.0);
    }
    for (std::size_t a = 0; a < groups.size(); ++a) {
        for (std::size_t b = a + 1; b < groups.size(); ++b) {
            for (double x : groups[a]) {
                for (double y : groups[b]) {
                    if (y < x) J += 1.0;
                    else if (y == x) J += 0.5;
                }
            }
        }
    }
    const double nn = static_cast<double>(n);
    const double mean = (nn * nn - sum_sq) / 4.0;
    const double var = (nn * nn * (2.0 * nn + 3.0) - sum_cube_term) / 72.0;
    return (J - mean) / std::sqrt(var);
}

namespace {

void check_increasing(const std::vector<int>& N_list) {
    if (N_list.empty()) throw ConfigError("sweep: N_list must be non-empty");
    for (std::size_t i = 1; i < N_list.size(); ++i)
        if (N_list[i] <= N_list[i - 1]) throw ConfigError("sweep: N_list must be increasing");
}

Ensemble simulate_replicate(const ModelParams& params, const TimeGrid& grid, int N,
                            std::uint64_t rep_seed, const Executor& ex) {
    const auto positions = sample_positions(params, static_cast<std::size_t>(N), rep_seed);
    const auto couplings = sample_couplings(params, positions, rep_seed);
    const auto histories = build_initial(params.initial, positions, grid, rep_seed);
    return simulate_network(params, positions, couplings, histories, grid, rep_seed, ex);
}

}  // namespace

SweepReport convergence_sweep(const ModelParams& params, const TimeGrid& grid,
                              const std::vector<int>& N_list, int replicates,
                              const MeanFieldSolution& meanfield,
                              const std::vector<double>& probe_times,
                              const std::vector<Point>& probe_nodes, std::uint64_t seed,
                              const Executor& ex) {
    check_increasing(N_list);
    if (replicates < 1) throw ConfigError("sweep: replicates must be >= 1");
    if (!meanfield.converged)
        throw ConfigError("convergence_sweep: mean-field solution did not converge");

    const FieldStats q_stats =
        field_stats(meanfield.ensemble, params, probe_nodes, probe_times, ex);

    SweepReport report;
    report.seed = seed;
    for (int N : N_list) {
        for (int rep = 0; rep < replicates; ++rep) {
            const std::uint64_t rep_seed =
                derive_stream(seed, {streams::kSweep, static_cast<std::uint64_t>(N),
                                     static_cast<std::uint64_t>(rep)});
            const Ensemble ens = simulate_replicate(params, grid, N, rep_seed, ex);
            const FieldStats s = field_stats(ens, params, probe_nodes, probe_times, ex);
            double D = 0.0;
            for (std::size_t nd = 0; nd < probe_nodes.size(); ++nd) {
                for (std::size_t t = 0; t < probe_times.size(); ++t) {
                    const double dm = std::abs(s.scaled_mean(params, nd, t) -
                                               q_stats.scaled_mean(params, nd, t));
                    const double dk = std::abs(s.scaled_cov(params, nd, t, t) -
                                               q_stats.scaled_cov(params, nd, t, t));
                    D = std::max(D, dm + dk);
                }
            }
            const std::size_t nsub = std::min<std::size_t>(
                {static_cast<std::size_t>(256), ens.size(), meanfield.ensemble.size()});
            const DistanceReport w2 =
                wasserstein2(ens, meanfield.ensemble, params.lipschitz.K_tau, nsub,
                             CouplingMethod::exact_assignment, rep_seed, ex);
            report.rows.push_back({N, rep, "D", D, 0.0});
            report.rows.push_back({N, rep, "w2", w2.value, 0.0});
        }
    }
    return report;
}

SweepReport chaos_sweep(const ModelParams& params, const TimeGrid& grid,
                        const std::vector<int>& N_list, int replicates, int pair_count,
                        const std::vector<double>& probe_times, std::uint64_t seed,
                        const Executor& ex) {
    check_increasing(N_list);
    if (replicates < 2) throw ConfigError("chaos_sweep: need at least two replicates");
    if (pair_count < 1) throw ConfigError("chaos_sweep: pair_count must be >= 1");
    if (N_list.front() < 2) throw ConfigError("chaos_sweep: need at least two neurons");

    SweepReport report;
    report.seed = seed;
    const std::size_t nt = probe_times.size();
    for (int N : N_list) {
        // Disjoint pairs where possible; otherwise distinct pairs, capped.
        long used_pairs = pair_count;
        const long max_pairs = static_cast<long>(N) * (N - 1) / 2;
        if (used_pairs > max_pairs) {
            std::cerr << "chaos_sweep: pair_count " << pair_count << " capped to " << max_pairs
                      << " for N=" << N << "\n";
            used_pairs = max_pairs;
        }
        std::vector<std::pair<int, int>> pairs;
        if (2 * used_pairs <= N) {
            std::vector<int> perm(N);
            for (int i = 0; i < N; ++i) perm[i] = i;
            RandomStream rs(seed, derive_stream(seed, {streams::kPairs,
                                                       static_cast<std::uint64_t>(N)}));
            for (int i = 0; i < 2 * used_pairs; ++i) {
                const int j = i + static_cast<int>(rs.uniform(i) * (N - i));
                std::swap(perm[i], perm[std::min(j, N - 1)]);
            }
            for (long p = 0; p < used_pairs; ++p) pairs.emplace_back(perm[2 * p], perm[2 * p + 1]);
        } else {
            RandomStream rs(seed, derive_stream(seed, {streams::kPairs,
                                                       static_cast<std::uint64_t>(N)}));
            std::uint64_t draw = 0;
            while (static_cast<long>(pairs.size()) < used_pairs) {
                int a = static_cast<int>(rs.uniform(draw++) * N);
                int b = static_cast<int>(rs.uniform(draw++) * N);
                a = std::min(a, N - 1);
                b = std::min(b, N - 1);
                if (a == b) continue;
                auto pr = std::minmax(a, b);
                if (std::find(pairs.begin(), pairs.end(), std::make_pair(pr.first, pr.second)) ==
                    pairs.end())
                    pairs.emplace_back(pr.first, pr.second);
            }
        }

        // values[rep][time][pair][side]
        std::vector<double> values(static_cast<std::size_t>(replicates) * nt * pairs.size() * 2);
        auto slot = [&](int rep, std::size_t t, std::size_t p, int side) -> double& {
            return values[((static_cast<std::size_t>(rep) * nt + t) * pairs.size() + p) * 2 +
                          side];
        };
        for (int rep = 0; rep < replicates; ++rep) {
            const std::uint64_t rep_seed =
                derive_stream(seed, {streams::kSweep, static_cast<std::uint64_t>(N),
                                     static_cast<std::uint64_t>(rep)});
            const Ensemble ens = simulate_replicate(params, grid, N, rep_seed, ex);
            double mean_s = 0.0;
            for (std::size_t t = 0; t < nt; ++t) {
                const std::size_t idx = grid.index_of(probe_times[t]);
                for (std::size_t p = 0; p < pairs.size(); ++p) {
                    const double s1 = params.S(ens.members[pairs[p].first].values[idx]);
                    const double s2 = params.S(ens.members[pairs[p].second].values[idx]);
                    slot(rep, t, p, 0) = s1;
                    slot(rep, t, p, 1) = s2;
                    mean_s += s1 + s2;
                }
            }
            mean_s /= static_cast<double>(2 * pairs.size() * nt);
            report.rows.push_back({N, rep, "mean_S", mean_s, 0.0});
        }

        std::vector<double> abs_corr;
        abs_corr.reserve(nt * pairs.size());
        for (std::size_t t = 0; t < nt; ++t) {
            for (std::size_t p = 0; p < pairs.size(); ++p) {
                double m1 = 0, m2 = 0;
                for (int rep = 0; rep < replicates; ++rep) {
                    m1 += slot(rep, t, p, 0);
                    m2 += slot(rep, t, p, 1);
                }
                m1 /= replicates;
                m2 /= replicates;
                double c11 = 0, c22 = 0, c12 = 0;
                for (int rep = 0; rep < replicates; ++rep) {
                    const double a = slot(rep, t, p, 0) - m1;
                    const double b = slot(rep, t, p, 1) - m2;
                    c11 += a * a;
                    c22 += b * b;
                    c12 += a * b;
                }
                const double denom = std::sqrt(c11 * c22);
                abs_corr.push_back(denom > 0.0 ? std::abs(c12 / denom) : 0.0);
            }
        }
        for (std::size_t i = 0; i < abs_corr.size(); ++i)
            report.rows.push_back({N, -1, "abs_corr", abs_corr[i], 0.0});
        double rho = 0.0;
        for (double c : abs_corr) rho += c;
        rho /= static_cast<double>(abs_corr.size());
        double var = 0.0;
        for (double c : abs_corr) var += (c - rho) * (c - rho);
        const double se = abs_corr.size() > 1
                              ? std::sqrt(var / ((abs_corr.size() - 1.0) * abs_corr.size()))
                              : 0.0;
        report.rows.push_back({N, -1, "rho", rho, se});
        report.rows.push_back(
            {N, -1, "rho_floor",
             std::sqrt(2.0 / (3.14159265358979323846 * (replicates - 1.0))), 0.0});
        report.rows.push_back({N, -1, "pair_count", static_cast<double>(pairs.size()), 0.0});
    }
    return report;
}

namespace {

ModelConfig config_from_params(const ModelParams& p) {
    ModelConfig cfg;
    cfg.domain = p.domain;
    cfg.dynamics = p.dynamics;
    cfg.coupling = p.coupling;
    cfg.noise = p.noise;
    cfg.initial = p.initial;
    cfg.grid.dt = p.dt;
    cfg.grid.T = p.horizon_T;
    return cfg;
}

}  // namespace

SweepReport identity_suite(const ModelParams& params, std::uint64_t seed, const Executor& ex) {
    SweepReport report;
    report.seed = seed;
    auto add = [&](const std::string& name, double value, double tol) {
        report.rows.push_back({0, 0, name, value, tol});
    };

    // K~ expectation identity, constant process (closed form (1+vT)^{-1/2}).
    add("ktilde_v1_T1", check_ktilde_identity(1.0, 1.0, 100000, 200,
                                              derive_stream(seed, {streams::kIdentity, 1})),
        0.02);
    add("ktilde_v4_T2", check_ktilde_identity(4.0, 2.0, 100000, 200,
                                              derive_stream(seed, {streams::kIdentity, 2})),
        0.05);

    // Gaussian quadratic-exponential moment vs direct Monte Carlo.
    {
        const std::size_t n_draws = 1000000;
        int point = 0;
        for (double m : {0.0, 0.5, 1.0}) {
            for (double v : {0.0, 0.25, 0.5}) {
                RandomStream rs(seed, derive_stream(seed, {streams::kIdentity, 3,
                                                           static_cast<std::uint64_t>(point)}));
                const double sd = std::sqrt(v);
                double acc = 0.0, acc2 = 0.0;
                for (std::size_t i = 0; i < n_draws; ++i) {
                    const double x = m + sd * rs.normal(i);
                    const double e = std::exp(0.5 * x * x);
                    acc += e;
                    acc2 += e * e;
                }
                const double mc = acc / n_draws;
                const double var = std::max(0.0, acc2 / n_draws - mc * mc);
                const double se = std::sqrt(var / n_draws);
                const double closed = exp_quadratic_moment(m, v);
                const double value = se > 0.0 ? std::abs(mc - closed) / se : std::abs(mc - closed);
                char name[64];
                std::snprintf(name, sizeof(name), "expquad_m%.1f_v%.2f", m, v);
                add(name, value, 5.0);
                ++point;
            }
        }
    }

    // Lambda self-normalization and the reweighting bounds, with draws from
    // the model covariance of a decoupled ensemble.
    {
        const TimeGrid grid = params.grid();
        const Ensemble base = uncoupled_ensemble(
            params, 256, grid, derive_stream(seed, {streams::kIdentity, 4}), ex);
        const std::size_t i0 = grid.index_of_time0();
        std::vector<double> times(grid.n_main);
        for (std::size_t k = 0; k < grid.n_main; ++k) times[k] = grid.time(i0 + k);
        const std::vector<Point> nodes = location_nodes(params.domain, 1);
        const FieldStats stats = field_stats(base, params, nodes, times, ex);
        CovMatrix cov;
        cov.n = grid.n_main;
        cov.mean.assign(grid.n_main, 0.0);
        cov.entries.resize(grid.n_main * grid.n_main);
        for (std::size_t a = 0; a < grid.n_main; ++a)
            for (std::size_t b = 0; b < grid.n_main; ++b)
                cov.entries[a * grid.n_main + b] = stats.scaled_cov(params, 0, a, b);
        const GaussianDraws draws =
            cholesky_sample(cov, 20000, derive_stream(seed, {streams::kIdentity, 5}), ex);
        const std::size_t t_index = grid.n_main - 1;
        const std::vector<double> w = lambda_weight(draws, t_index, grid.dt);
        double mean_w = 0.0, max_w = 0.0;
        for (double x : w) {
            mean_w += x;
            max_w = std::max(max_w, x);
        }
        mean_w /= static_cast<double>(w.size());
        add("lambda_selfnorm", std::abs(mean_w - 1.0), 1e-12);

        // Sample-level Jensen bound: max weight <= exp{1/2 sum E_hat[G^2] dt}.
        double second_moment_integral = 0.0;
        for (std::size_t k = 0; k < t_index; ++k) {
            double m2 = 0.0;
            for (std::size_t s = 0; s < draws.m_samples; ++s) {
                const double g = draws.path(s)[k];
                m2 += g * g;
            }
            second_moment_integral += m2 / draws.m_samples * grid.dt;
        }
        add("lambda_jensen_bound", max_w / std::exp(0.5 * second_moment_integral), 1.0 + 1e-9);

        const double t = grid.time(i0 + t_index);
        const double sup_bound = std::exp(params.lipschitz.sigma_inf * params.lipschitz.sigma_inf *
                                            t / (2.0 * params.lambda_star * params.lambda_star));
        add("lambda_sup_bound", max_w / sup_bound, 1.05);

        const double ktilde_bound =
            (params.lipschitz.sigma_inf * params.lipschitz.sigma_inf /
             (params.lambda_star * params.lambda_star)) *
            sup_bound;
        double max_ktilde = 0.0;
        for (std::size_t u : {std::size_t{0}, t_index / 2, t_index})
            max_ktilde = std::max(
                max_ktilde, std::abs(tilted_covariance(draws, t_index, u, u, grid.dt)));
        add("ktilde_sup_bound", max_ktilde / ktilde_bound, 1.05);
    }

    // Tilted covariance of the constant process: K~^t(t,t) -> v/(1+vt).
    {
        const double v = 1.0, t = 1.0;
        const std::size_t n_steps = 100;
        const double dt = t / n_steps;
        GaussianDraws draws;
        draws.m_samples = 100000;
        draws.n = n_steps + 1;
        draws.paths.assign(draws.m_samples * draws.n, 0.0);
        RandomStream rs(seed, derive_stream(seed, {streams::kIdentity, 6}));
        for (std::size_t s = 0; s < draws.m_samples; ++s) {
            const double z = std::sqrt(v) * rs.normal(s);
            for (std::size_t k = 0; k < draws.n; ++k) draws.path(s)[k] = z;
        }
        const double est = tilted_covariance(draws, n_steps, n_steps, n_steps, dt);
        add("tilted_const_closed_form", std::abs(est - v / (1.0 + v * t)) / (v / (1.0 + v * t)),
            0.05);
    }

    // Girsanov averaging at desk scale.
    {
        ModelConfig cfg = config_from_params(params);
        cfg.coupling.J0 = 0.0;
        cfg.coupling.sigma0 = 0.5;
        cfg.grid.T = 0.5;
        const ModelParams sub = build_model(cfg);
        const TimeGrid grid = sub.grid();
        const std::uint64_t gseed = derive_stream(seed, {streams::kIdentity, 7});
        const auto positions = sample_positions(sub, 2, gseed);
        CouplingMatrix zero;
        zero.n = 2;
        const auto histories = build_initial(sub.initial, positions, grid, gseed);
        const Ensemble frozen = simulate_network(sub, positions, zero, histories, grid, gseed, ex);
        add("girsanov_n2",
            girsanov_average_check(sub, positions, frozen, 100000, 100000, gseed, ex), 0.05);

        ModelConfig det = config_from_params(params);
        det.coupling.J0 = 0.5;
        det.coupling.sigma0 = 0.0;
        det.grid.T = 0.5;
        const ModelParams sub2 = build_model(det);
        const TimeGrid grid2 = sub2.grid();
        const auto positions2 = sample_positions(sub2, 2, gseed);
        const auto histories2 = build_initial(sub2.initial, positions2, grid2, gseed);
        const Ensemble frozen2 =
            simulate_network(sub2, positions2, zero, histories2, grid2, gseed, ex);
        add("girsanov_sigma0",
            girsanov_average_check(sub2, positions2, frozen2, 100, 100, gseed, ex), 1e-10);
    }

    return report;
}

}  // namespace randfield
