#include "randfield/gaussian.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "randfield/errors.hpp"
#include "randfield/rng.hpp"

namespace randfield {

CovMatrix CovMatrix::zero(std::size_t n) {
    CovMatrix c;
    c.n = n;
    c.entries.assign(n * n, 0.0);
    c.mean.assign(n, 0.0);
    return c;
}

namespace {

void check_symmetric(const CovMatrix& cov) {
    if (cov.entries.size() != cov.n * cov.n || cov.mean.size() != cov.n)
        throw ConfigError("covariance: inconsistent dimensions");
    double scale = 0.0;
    for (double v : cov.entries) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * std::max(1.0, scale);
    for (std::size_t i = 0; i < cov.n; ++i)
        for (std::size_t j = i + 1; j < cov.n; ++j)
            if (std::abs(cov.at(i, j) - cov.at(j, i)) > tol)
                throw NumericError("covariance: matrix is not symmetric");
}

}  // namespace

std::vector<double> cholesky_factor(const CovMatrix& cov) {
    check_symmetric(cov);
    const std::size_t n = cov.n;
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(cov.at(i, i)));
    if (max_diag == 0.0) {
        // Degenerate case: the zero matrix is a valid covariance.
        for (double v : cov.entries)
            if (v != 0.0) throw NumericError("covariance: zero diagonal with nonzero entries");
        return std::vector<double>(n * n, 0.0);
    }
    Eigen::MatrixXd A(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) A(i, j) = 0.5 * (cov.at(i, j) + cov.at(j, i));
    for (double eps = 0.0; eps <= 1.0000001e-8; eps = (eps == 0.0 ? 1e-12 : eps * 10.0)) {
        Eigen::MatrixXd jittered = A;
        if (eps > 0.0) jittered.diagonal().array() += eps * max_diag;
        Eigen::LLT<Eigen::MatrixXd> llt(jittered);
        if (llt.info() == Eigen::Success) {
            Eigen::MatrixXd L = llt.matrixL();
            std::vector<double> out(n * n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j <= i; ++j) out[i * n + j] = L(i, j);
            return out;
        }
    }
    throw NumericError("covariance: Cholesky failed after jitter cap (matrix not PSD)");
}

GaussianDraws cholesky_sample(const CovMatrix& cov, std::size_t m_samples, std::uint64_t seed,
                              const Executor& ex) {
    const std::vector<double> L = cholesky_factor(cov);
    const std::size_t n = cov.n;
    GaussianDraws out;
    out.m_samples = m_samples;
    out.n = n;
    out.paths.assign(m_samples * n, 0.0);
    ex.parallel_for(m_samples, [&](std::size_t s) {
        RandomStream rs(seed, derive_stream(seed, {streams::kGaussianSample, s}));
        std::vector<double> z(n);
        for (std::size_t i = 0; i < n; ++i) z[i] = rs.normal(i);
        double* p = out.path(s);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = cov.mean[i];
            const double* Li = L.data() + i * n;
            for (std::size_t j = 0; j <= i; ++j) acc += Li[j] * z[j];
            p[i] = acc;
        }
    });
    return out;
}

std::vector<double> lambda_weight(const GaussianDraws& draws, std::size_t t_index, double dt) {
    if (draws.m_samples == 0) throw ConfigError("lambda_weight: empty draws");
    if (t_index >= draws.n) throw ConfigError("lambda_weight: t_index out of range");
    std::vector<double> w(draws.m_samples);
    double sum = 0.0;
    for (std::size_t s = 0; s < draws.m_samples; ++s) {
        const double* p = draws.path(s);
        double integral = 0.0;
        for (std::size_t k = 0; k < t_index; ++k) integral += p[k] * p[k];
        w[s] = std::exp(-0.5 * integral * dt);
        sum += w[s];
    }
    const double mean = sum / static_cast<double>(draws.m_samples);
    for (double& x : w) x /= mean;
    return w;
}

double tilted_covariance(const GaussianDraws& draws, std::size_t t_index, std::size_t s_index,
                         std::size_t u_index, double dt) {
    if (s_index > t_index || u_index > t_index)
        throw ConfigError("tilted_covariance: s,u must not exceed t");
    const std::vector<double> w = lambda_weight(draws, t_index, dt);
    double acc = 0.0;
    for (std::size_t s = 0; s < draws.m_samples; ++s) {
        const double* p = draws.path(s);
        acc += p[u_index] * p[s_index] * w[s];
    }
    return acc / static_cast<double>(draws.m_samples);
}

double exp_quadratic_moment(double m, double v) {
    if (v >= 1.0) throw ConfigError("exp_quadratic_moment: moment diverges for v >= 1");
    return std::exp(m * m / (2.0 * (1.0 - v))) / std::sqrt(1.0 - v);
}

double check_ktilde_identity(double v, double T, std::size_t m_samples, std::size_t n_steps,
                             std::uint64_t seed) {
    if (v < 0.0) throw ConfigError("check_ktilde_identity: v must be >= 0");
    if (T <= 0.0) throw ConfigError("check_ktilde_identity: T must be > 0");
    const double dt = T / static_cast<double>(n_steps);
    const double sd = std::sqrt(v);

    // Constant-in-time process G_t = Z on n_steps+1 grid points.
    GaussianDraws draws;
    draws.m_samples = m_samples;
    draws.n = n_steps + 1;
    draws.paths.assign(m_samples * (n_steps + 1), 0.0);
    RandomStream rs(seed, derive_stream(seed, {streams::kGaussianSample}));
    for (std::size_t s = 0; s < m_samples; ++s) {
        const double z = sd * rs.normal(s);
        double* p = draws.path(s);
        for (std::size_t k = 0; k <= n_steps; ++k) p[k] = z;
    }

    double lhs = 0.0;
    for (std::size_t s = 0; s < m_samples; ++s) {
        const double z = draws.path(s)[0];
        lhs += std::exp(-0.5 * z * z * T);
    }
    lhs /= static_cast<double>(m_samples);

    // Same estimator as tilted_covariance(draws, k, k, k, dt) at each left
    // endpoint, evaluated incrementally so the sweep over k stays O(m*n).
    double integral = 0.0;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double tk = dt * static_cast<double>(k);
        double num = 0.0, den = 0.0;
        for (std::size_t s = 0; s < m_samples; ++s) {
            const double z2 = draws.path(s)[0] * draws.path(s)[0];
            const double e = std::exp(-0.5 * z2 * tk);
            num += z2 * e;
            den += e;
        }
        integral += num / den * dt;
    }
    const double rhs = std::exp(-0.5 * integral);

    const double truth = 1.0 / std::sqrt(1.0 + v * T);
    return std::abs(lhs - rhs) / truth;
}

}  // namespace randfield
