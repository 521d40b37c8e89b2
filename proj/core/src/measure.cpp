#include "randfield/measure.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "randfield/errors.hpp"
#include "randfield/rng.hpp"

namespace randfield {

std::vector<Point> location_nodes(const SpatialDomain& domain, int per_axis) {
    if (per_axis < 1) throw ConfigError("location_nodes: need at least one node per axis");
    std::size_t total = 1;
    for (int k = 0; k < domain.dim; ++k) total *= static_cast<std::size_t>(per_axis);
    std::vector<Point> nodes;
    nodes.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        Point p(domain.dim);
        std::size_t rem = idx;
        for (int k = 0; k < domain.dim; ++k) {
            const std::size_t j = rem % per_axis;
            rem /= per_axis;
            const auto& b = domain.bounds[k];
            p[k] = b[0] + (static_cast<double>(j) + 0.5) * (b[1] - b[0]) / per_axis;
        }
        nodes.push_back(std::move(p));
    }
    return nodes;
}

FieldStats field_stats(const Ensemble& ensemble, const ModelParams& params,
                       const std::vector<Point>& r_nodes, const std::vector<double>& times,
                       const Executor& ex) {
    if (ensemble.members.empty()) throw ConfigError("field_stats: empty ensemble");
    const TimeGrid& grid = ensemble.grid;
    const std::size_t nt = times.size();
    const std::size_t m_ens = ensemble.members.size();

    std::vector<std::size_t> time_idx(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        if (times[t] < -1e-12 || times[t] > grid.time(grid.total_points() - 1) + 1e-12)
            throw ConfigError("field_stats: probe time outside [0,T]");
        time_idx[t] = grid.index_of(times[t]);
    }

    // Sigmoid paths, shared across nodes.
    std::vector<std::vector<double>> sig(m_ens);
    ex.parallel_for(m_ens, [&](std::size_t j) {
        const auto& v = ensemble.members[j].values;
        sig[j].resize(v.size());
        for (std::size_t k = 0; k < v.size(); ++k) sig[j][k] = params.S(v[k]);
    });

    FieldStats out;
    out.r_nodes = r_nodes;
    out.times = times;
    out.M.assign(r_nodes.size(), std::vector<double>(nt, 0.0));
    out.M_se.assign(r_nodes.size(), std::vector<double>(nt, 0.0));
    out.Sigma.assign(r_nodes.size(), std::vector<double>(nt * nt, 0.0));
    out.Sigma_diag_se.assign(r_nodes.size(), std::vector<double>(nt, 0.0));

    ex.parallel_for(r_nodes.size(), [&](std::size_t nd) {
        const Point& r = r_nodes[nd];
        auto& M = out.M[nd];
        auto& Mse = out.M_se[nd];
        auto& Sg = out.Sigma[nd];
        auto& Sse = out.Sigma_diag_se[nd];
        std::vector<double> m2(nt, 0.0), s2(nt, 0.0), sdel(nt);
        for (std::size_t j = 0; j < m_ens; ++j) {
            const auto& member = ensemble.members[j];
            const double Jv = params.J(r, member.r);
            const double sv = params.sigma(r, member.r);
            const double sv2 = sv * sv;
            const long delay = std::lround(params.tau(r, member.r) / grid.dt);
            for (std::size_t t = 0; t < nt; ++t) {
                const long idx = static_cast<long>(time_idx[t]) - delay;
                if (idx < 0) throw ConfigError("field_stats: delayed time before -tau_bar");
                sdel[t] = sig[j][static_cast<std::size_t>(idx)];
            }
            for (std::size_t t = 0; t < nt; ++t) {
                const double mc = Jv * sdel[t];
                M[t] += mc;
                m2[t] += mc * mc;
                for (std::size_t s = 0; s < nt; ++s) Sg[s * nt + t] += sv2 * sdel[s] * sdel[t];
                const double kc = sv2 * sdel[t] * sdel[t];
                s2[t] += kc * kc;
            }
        }
        const double inv = 1.0 / static_cast<double>(m_ens);
        for (auto& v : M) v *= inv;
        for (auto& v : Sg) v *= inv;
        for (std::size_t t = 0; t < nt; ++t) {
            const double varM = std::max(0.0, m2[t] * inv - M[t] * M[t]);
            Mse[t] = std::sqrt(varM * inv);
            const double diag = Sg[t * nt + t];
            const double varS = std::max(0.0, s2[t] * inv - diag * diag);
            Sse[t] = std::sqrt(varS * inv);
        }
    });
    return out;
}

namespace {

// max over grid pairs (i,j) with |i-j| <= w of |x_i - y_j|, via sliding
// window extrema of y. Exactly the grid supremum of the metric: the set of
// admissible (t,a,b) triples maps onto the banded index pairs.
double banded_sup_abs_diff(const std::vector<double>& x, const std::vector<double>& y, long w) {
    const long n = static_cast<long>(x.size());
    std::deque<long> qmax, qmin;
    long right = -1;
    double best = 0.0;
    for (long i = 0; i < n; ++i) {
        const long lo = std::max<long>(0, i - w);
        const long hi = std::min<long>(n - 1, i + w);
        while (right < hi) {
            ++right;
            while (!qmax.empty() && y[qmax.back()] <= y[right]) qmax.pop_back();
            qmax.push_back(right);
            while (!qmin.empty() && y[qmin.back()] >= y[right]) qmin.pop_back();
            qmin.push_back(right);
        }
        while (!qmax.empty() && qmax.front() < lo) qmax.pop_front();
        while (!qmin.empty() && qmin.front() < lo) qmin.pop_front();
        best = std::max(best, std::max(std::abs(x[i] - y[qmin.front()]),
                                       std::abs(x[i] - y[qmax.front()])));
    }
    return best;
}

}  // namespace

double path_distance(const PathSample& a, const PathSample& b, double K_tau,
                     const TimeGrid& grid) {
    if (a.values.size() != grid.total_points() || b.values.size() != grid.total_points())
        throw ConfigError("path_distance: paths do not match the grid");
    const double dr = euclidean_distance(a.r, b.r);
    // Shift window in index units, rounded outward; |b-a| <= n_hist*dt always.
    const long w_idx =
        std::min<long>(static_cast<long>(grid.n_hist),
                       static_cast<long>(std::ceil(K_tau * dr / grid.dt - 1e-12)));
    const double sup = banded_sup_abs_diff(a.values, b.values, std::max<long>(0, w_idx));
    return std::sqrt(dr * dr + sup * sup);
}

std::vector<int> solve_assignment(const std::vector<double>& cost, std::size_t n) {
    // Shortest augmenting path with potentials (Jonker-Volgenant style).
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = static_cast<int>(i);
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = static_cast<std::size_t>(p[j0]);
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = static_cast<int>(j0);
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[static_cast<std::size_t>(p[j])] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = static_cast<std::size_t>(way[j0]);
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (std::size_t j = 1; j <= n; ++j)
        if (p[j] > 0) row_to_col[static_cast<std::size_t>(p[j] - 1)] = static_cast<int>(j - 1);
    return row_to_col;
}

namespace {

std::vector<std::size_t> draw_subsample(std::size_t total, std::size_t want, std::uint64_t seed,
                                        std::uint64_t tag) {
    std::vector<std::size_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) idx[i] = i;
    if (want >= total) return idx;
    RandomStream rs(seed, derive_stream(seed, {streams::kSubsample, tag}));
    for (std::size_t i = 0; i < want; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rs.uniform(i) * (total - i));
        std::swap(idx[i], idx[std::min(j, total - 1)]);
    }
    idx.resize(want);
    return idx;
}

}  // namespace

DistanceReport wasserstein2(const Ensemble& A, const Ensemble& B, double K_tau,
                            std::size_t subsample, CouplingMethod method, std::uint64_t seed,
                            const Executor& ex) {
    if (A.members.empty() || B.members.empty()) throw ConfigError("wasserstein2: empty ensemble");
    if (!(A.grid == B.grid)) throw ConfigError("wasserstein2: ensembles on different grids");
    if (subsample == 0) throw ConfigError("wasserstein2: subsample must be >= 1");
    if (subsample > A.size() || subsample > B.size())
        throw ConfigError("wasserstein2: subsample exceeds ensemble size");

    const auto ia = draw_subsample(A.size(), subsample, seed, 0);
    const auto ib = draw_subsample(B.size(), subsample, seed, 1);
    const std::size_t n = subsample;

    DistanceReport rep;
    rep.n_a = A.size();
    rep.n_b = B.size();
    rep.subsample = n;

    if (method == CouplingMethod::index_coupling) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = path_distance(A.members[ia[i]], B.members[ib[i]], K_tau, A.grid);
            acc += d * d;
        }
        rep.value = std::sqrt(acc / static_cast<double>(n));
        rep.method = "index_coupling";
        return rep;
    }

    std::vector<double> cost(n * n);
    ex.parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = path_distance(A.members[ia[i]], B.members[ib[j]], K_tau, A.grid);
            cost[i * n + j] = d * d;
        }
    });
    const std::vector<int> match = solve_assignment(cost, n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += cost[i * n + static_cast<std::size_t>(match[i])];
    rep.value = std::sqrt(acc / static_cast<double>(n));
    rep.method = "exact_assignment";
    return rep;
}

}  // namespace randfield
