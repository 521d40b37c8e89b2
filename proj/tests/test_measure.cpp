#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "randfield/errors.hpp"
#include "randfield/measure.hpp"
#include "randfield/model.hpp"
#include "randfield/rng.hpp"

using namespace randfield;

namespace {

ModelConfig base_config() {
    ModelConfig cfg;
    cfg.dynamics.I0 = 0.0;
    cfg.coupling.J0 = 1.0;
    cfg.coupling.ell_J = 0.5;
    cfg.coupling.sigma0 = 0.5;
    cfg.coupling.ell_sigma = 0.5;
    cfg.coupling.tau0 = 0.0;
    cfg.coupling.c_tau = 0.0;
    cfg.initial.slope = {0.0};
    cfg.grid.T = 1.0;
    return cfg;
}

Ensemble constant_ensemble(const TimeGrid& grid, const std::vector<double>& levels) {
    Ensemble e;
    e.grid = grid;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        PathSample p;
        p.r = {static_cast<double>(i) / std::max<std::size_t>(1, levels.size() - 1)};
        p.values.assign(grid.total_points(), levels[i]);
        e.members.push_back(std::move(p));
    }
    return e;
}

// Exhaustive d_T oracle: enumerate all admissible (t, a, b) grid triples.
double brute_force_distance(const PathSample& a, const PathSample& b, double K_tau,
                            const TimeGrid& grid) {
    const double dr = euclidean_distance(a.r, b.r);
    const long w = std::min<long>(static_cast<long>(grid.n_hist),
                                  static_cast<long>(std::ceil(K_tau * dr / grid.dt - 1e-12)));
    const long nh = static_cast<long>(grid.n_hist);
    const long nm = static_cast<long>(grid.n_main);
    double sup = 0.0;
    for (long t = 0; t <= nm; ++t) {
        for (long ai = -nh; ai <= 0; ++ai) {
            for (long bi = -nh; bi <= 0; ++bi) {
                if (std::labs(bi - ai) > w) continue;
                const double diff =
                    std::abs(a.values[static_cast<std::size_t>(nh + t + ai)] -
                             b.values[static_cast<std::size_t>(nh + t + bi)]);
                sup = std::max(sup, diff);
            }
        }
    }
    return std::sqrt(dr * dr + sup * sup);
}

PathSample random_path(const TimeGrid& grid, std::uint64_t seed, std::uint64_t id) {
    RandomStream rs(seed, derive_stream(seed, {id}));
    PathSample p;
    p.r = {rs.uniform(1000)};
    p.values.resize(grid.total_points());
    double x = rs.normal(0);
    for (std::size_t k = 0; k < p.values.size(); ++k) {
        x += 0.3 * rs.normal(k + 1);
        p.values[k] = x;
    }
    return p;
}

}  // namespace

TEST_CASE("field stats: zero kernels and constant-path closed form") {
    auto cfg = base_config();
    const ModelParams m = build_model(cfg);
    const TimeGrid grid = m.grid();

    // Ensemble of constant zero paths, constant kernels (evaluate at r' = r
    // so the exponential factor is 1): M = 0.5*J0, Sigma = 0.25*sigma0^2.
    Ensemble e = constant_ensemble(grid, std::vector<double>(8, 0.0));
    for (auto& mem : e.members) mem.r = {0.5};
    const std::vector<Point> nodes{{0.5}};
    const std::vector<double> times{0.0, 0.5, 1.0};
    const FieldStats s = field_stats(e, m, nodes, times);
    for (std::size_t t = 0; t < times.size(); ++t) {
        CHECK(s.M[0][t] == doctest::Approx(0.5 * 1.0).epsilon(1e-12));
        for (std::size_t u = 0; u < times.size(); ++u)
            CHECK(s.sigma_at(0, u, t) == doctest::Approx(0.25 * 0.25).epsilon(1e-12));
    }
    CHECK(s.scaled_mean(m, 0, 0) == doctest::Approx(0.5));

    auto cfg0 = base_config();
    cfg0.coupling.J0 = 0.0;
    cfg0.coupling.sigma0 = 0.0;
    const ModelParams m0 = build_model(cfg0);
    const FieldStats s0 = field_stats(e, m0, nodes, times);
    CHECK(s0.M[0][0] == 0.0);
    CHECK(s0.sigma_at(0, 0, 0) == 0.0);

    CHECK_THROWS_AS(field_stats(Ensemble{}, m, nodes, times), ConfigError);
}

TEST_CASE("field stats bounds |M| <= Jinf, Sigma(t,t) <= sigma_inf^2") {
    auto cfg = base_config();
    cfg.coupling.tau0 = 0.05;
    cfg.coupling.c_tau = 0.1;
    const ModelParams m = build_model(cfg);
    const TimeGrid grid = m.grid();
    Ensemble e;
    e.grid = grid;
    for (int i = 0; i < 32; ++i) e.members.push_back(random_path(grid, 5150, i));
    const auto nodes = location_nodes(m.domain, 8);
    const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
    const FieldStats s = field_stats(e, m, nodes, times);
    for (std::size_t nd = 0; nd < nodes.size(); ++nd) {
        for (std::size_t t = 0; t < times.size(); ++t) {
            CHECK(std::abs(s.M[nd][t]) <= m.lipschitz.J_inf + 1e-12);
            CHECK(s.sigma_at(nd, t, t) >= 0.0);
            CHECK(s.sigma_at(nd, t, t) <=
                  m.lipschitz.sigma_inf * m.lipschitz.sigma_inf + 1e-12);
        }
    }
}

TEST_CASE("path distance: separation, shared-location sup, grid toys") {
    TimeGrid grid;
    grid.dt = 1.0;
    grid.n_hist = 1;
    grid.n_main = 1;

    PathSample x{{0.0}, {0.0, 1.0, 0.0}};
    PathSample y{{0.0}, {0.0, 0.0, 1.0}};
    CHECK(path_distance(x, x, 1.0, grid) == 0.0);

    // Same location: window forces a=b and the sup runs over [-tau_bar, T].
    CHECK(path_distance(x, y, 5.0, grid) == doctest::Approx(1.0));

    // Distinct locations, window wide enough for a one-step shift; compare
    // with the exhaustive enumeration oracle.
    PathSample y2{{1.5}, {0.0, 0.0, 1.0}};
    CHECK_THROWS_AS(path_distance(x, PathSample{{0.0}, {0.0, 1.0}}, 1.0, grid), ConfigError);
    const double got = path_distance(x, y2, 1.0, grid);
    CHECK(got == doctest::Approx(brute_force_distance(x, y2, 1.0, grid)).epsilon(1e-14));
}

TEST_CASE("path distance equals the exhaustive oracle on random paths") {
    TimeGrid grid;
    grid.dt = 0.1;
    grid.n_hist = 7;
    grid.n_main = 15;
    for (std::uint64_t trial = 0; trial < 60; ++trial) {
        const PathSample a = random_path(grid, 2222, 2 * trial);
        const PathSample b = random_path(grid, 2222, 2 * trial + 1);
        const double K_tau = (trial % 3) * 0.7;
        CHECK(path_distance(a, b, K_tau, grid) ==
              doctest::Approx(brute_force_distance(a, b, K_tau, grid)).epsilon(1e-14));
    }
}

TEST_CASE("metric axioms on random triples") {
    TimeGrid grid;
    grid.dt = 0.1;
    grid.n_hist = 5;
    grid.n_main = 10;
    const double K_tau = 0.8;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const PathSample a = random_path(grid, 31337, 3 * trial);
        const PathSample b = random_path(grid, 31337, 3 * trial + 1);
        const PathSample c = random_path(grid, 31337, 3 * trial + 2);
        const double dab = path_distance(a, b, K_tau, grid);
        const double dba = path_distance(b, a, K_tau, grid);
        const double dac = path_distance(a, c, K_tau, grid);
        const double dcb = path_distance(c, b, K_tau, grid);
        CHECK(dab == dba);
        CHECK(path_distance(a, a, K_tau, grid) == 0.0);
        CHECK(dab <= dac + dcb + 1e-12);
    }
}

TEST_CASE("path distance is non-decreasing in K_tau") {
    TimeGrid grid;
    grid.dt = 0.1;
    grid.n_hist = 6;
    grid.n_main = 12;
    for (std::uint64_t trial = 0; trial < 30; ++trial) {
        const PathSample a = random_path(grid, 909, 2 * trial);
        const PathSample b = random_path(grid, 909, 2 * trial + 1);
        double prev = -1.0;
        for (double K : {0.0, 0.3, 0.6, 1.2, 2.4, 5.0}) {
            const double d = path_distance(a, b, K, grid);
            CHECK(d >= prev);
            prev = d;
        }
    }
}

TEST_CASE("assignment solver is optimal") {
    // Brute force over all permutations for n <= 6.
    RandomStream rs(4242, 1);
    std::uint64_t draw = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 2 + trial % 5;
        std::vector<double> cost(n * n);
        for (auto& c : cost) c = rs.uniform(draw++);
        const auto match = solve_assignment(cost, n);
        double got = 0.0;
        std::vector<char> used(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            REQUIRE(match[i] >= 0);
            REQUIRE(match[i] < static_cast<int>(n));
            CHECK(!used[match[i]]);
            used[match[i]] = 1;
            got += cost[i * n + match[i]];
        }
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        double best = 1e300;
        do {
            double tot = 0.0;
            for (std::size_t i = 0; i < n; ++i) tot += cost[i * n + perm[i]];
            best = std::min(best, tot);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(got == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("wasserstein2: trivial couplings and assignment optimality") {
    TimeGrid grid;
    grid.dt = 0.1;
    grid.n_hist = 3;
    grid.n_main = 10;
    Ensemble A;
    A.grid = grid;
    for (int i = 0; i < 24; ++i) A.members.push_back(random_path(grid, 66, i));

    const DistanceReport same =
        wasserstein2(A, A, 1.0, 24, CouplingMethod::index_coupling, 5);
    CHECK(same.value == 0.0);

    // Permuted copy: exact assignment recovers the permutation.
    Ensemble B = A;
    std::rotate(B.members.begin(), B.members.begin() + 7, B.members.end());
    const DistanceReport exact =
        wasserstein2(A, B, 1.0, 24, CouplingMethod::exact_assignment, 5);
    CHECK(exact.value == doctest::Approx(0.0).epsilon(1e-12));
    const DistanceReport index =
        wasserstein2(A, B, 1.0, 24, CouplingMethod::index_coupling, 5);
    CHECK(index.value > 0.0);

    // Single atoms: both methods give d_T of the atoms.
    Ensemble A1, B1;
    A1.grid = B1.grid = grid;
    A1.members.push_back(A.members[0]);
    B1.members.push_back(A.members[1]);
    const double d01 = path_distance(A.members[0], A.members[1], 1.0, grid);
    CHECK(wasserstein2(A1, B1, 1.0, 1, CouplingMethod::exact_assignment, 5).value ==
          doctest::Approx(d01));
    CHECK(wasserstein2(A1, B1, 1.0, 1, CouplingMethod::index_coupling, 5).value ==
          doctest::Approx(d01));

    CHECK_THROWS_AS(wasserstein2(A, B, 1.0, 0, CouplingMethod::index_coupling, 5), ConfigError);
    CHECK_THROWS_AS(wasserstein2(A, B, 1.0, 25, CouplingMethod::index_coupling, 5), ConfigError);
}

TEST_CASE("exact assignment never exceeds index coupling") {
    TimeGrid grid;
    grid.dt = 0.1;
    grid.n_hist = 2;
    grid.n_main = 8;
    for (std::uint64_t trial = 0; trial < 10; ++trial) {
        Ensemble A, B;
        A.grid = B.grid = grid;
        for (int i = 0; i < 16; ++i) {
            A.members.push_back(random_path(grid, 1000 + trial, 2 * i));
            B.members.push_back(random_path(grid, 2000 + trial, 2 * i + 1));
        }
        const double ex =
            wasserstein2(A, B, 0.5, 16, CouplingMethod::exact_assignment, trial).value;
        const double ic =
            wasserstein2(A, B, 0.5, 16, CouplingMethod::index_coupling, trial).value;
        CHECK(ex <= ic + 1e-12);
    }
}

TEST_CASE("stats regularity trend under sup-norm perturbations") {
    auto cfg = base_config();
    const ModelParams m = build_model(cfg);
    const TimeGrid grid = m.grid();
    Ensemble A;
    A.grid = grid;
    for (int i = 0; i < 64; ++i) A.members.push_back(random_path(grid, 33, i));
    const auto nodes = location_nodes(m.domain, 4);
    const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
    const FieldStats sA = field_stats(A, m, nodes, times);

    double prev_dm = 1e300;
    for (double eps : {0.4, 0.2, 0.1, 0.05}) {
        Ensemble B = A;
        for (auto& mem : B.members)
            for (auto& v : mem.values) v += eps;
        const FieldStats sB = field_stats(B, m, nodes, times);
        double dm = 0.0;
        for (std::size_t nd = 0; nd < nodes.size(); ++nd)
            for (std::size_t t = 0; t < times.size(); ++t)
                dm = std::max(dm, std::abs(sA.scaled_mean(m, nd, t) - sB.scaled_mean(m, nd, t)));
        const double w2 =
            wasserstein2(A, B, m.lipschitz.K_tau, 64, CouplingMethod::exact_assignment, 1).value;
        CHECK(dm <= prev_dm + 1e-12);  // shrinks with eps
        CHECK(w2 > 0.0);
        // Lipschitz trend: the ratio stays bounded (constant unspecified).
        CHECK(dm / w2 <= 2.0);
        prev_dm = dm;
    }
}
