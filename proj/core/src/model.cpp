#include "randfield/model.hpp"

#include <algorithm>
#include <cmath>

#include "randfield/errors.hpp"

namespace randfield {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

double SpatialDomain::diameter() const {
    double s = 0.0;
    for (const auto& b : bounds) {
        const double w = b[1] - b[0];
        s += w * w;
    }
    return std::sqrt(s);
}

bool SpatialDomain::contains(const Point& r) const {
    if (static_cast<int>(r.size()) != dim) return false;
    for (int k = 0; k < dim; ++k) {
        if (r[k] < bounds[k][0] - 1e-12 || r[k] > bounds[k][1] + 1e-12) return false;
    }
    return true;
}

double InitialLaw::psi(const Point& r) const {
    double v = psi0;
    for (std::size_t k = 0; k < slope.size() && k < r.size(); ++k) v += slope[k] * r[k];
    return v;
}

double InitialLaw::psi_lipschitz() const {
    double s = 0.0;
    for (double c : slope) s += c * c;
    return std::sqrt(s);
}

double ModelParams::f(const Point& r, double t, double x) const {
    double phase = dynamics.omega * t;
    for (std::size_t k = 0; k < dynamics.wavevec.size() && k < r.size(); ++k)
        phase += dynamics.wavevec[k] * r[k];
    return -dynamics.a * x + dynamics.I0 * std::cos(kTwoPi * phase);
}

double ModelParams::S(double x) const { return 1.0 / (1.0 + std::exp(-dynamics.gain * x)); }

double ModelParams::J(const Point& r, const Point& r2) const {
    return coupling.J0 * std::exp(-euclidean_distance(r, r2) / coupling.ell_J);
}

double ModelParams::sigma(const Point& r, const Point& r2) const {
    return coupling.sigma0 * std::exp(-euclidean_distance(r, r2) / coupling.ell_sigma);
}

double ModelParams::tau(const Point& r, const Point& r2) const {
    return coupling.tau0 + coupling.c_tau * euclidean_distance(r, r2);
}

double ModelParams::lambda(const Point& /*r*/) const { return noise.lambda0; }

namespace {

// Grid of sample points used by the build-time assumption checks.
std::vector<Point> sample_points(const SpatialDomain& d, int per_axis) {
    std::vector<Point> pts;
    std::size_t total = 1;
    for (int k = 0; k < d.dim; ++k) total *= static_cast<std::size_t>(per_axis);
    pts.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        Point p(d.dim);
        std::size_t rem = idx;
        for (int k = 0; k < d.dim; ++k) {
            const std::size_t j = rem % per_axis;
            rem /= per_axis;
            const double frac = per_axis == 1 ? 0.5 : static_cast<double>(j) / (per_axis - 1);
            p[k] = d.bounds[k][0] + frac * (d.bounds[k][1] - d.bounds[k][0]);
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

void check_assumptions(const ModelParams& m) {
    // S maps into [0,1] and is non-decreasing, sampled on >= 1e3 points.
    double prev = -1.0;
    for (int i = 0; i <= 1200; ++i) {
        const double x = -60.0 + i * 0.1;
        const double s = m.S(x);
        if (s < 0.0 || s > 1.0)
            throw ConfigError("assumption (2): sigmoid must map into [0,1]");
        if (s < prev) throw ConfigError("assumption (2): sigmoid must be non-decreasing");
        prev = s;
    }
    const int per_axis = m.domain.dim == 1 ? 17 : 7;
    const auto pts = sample_points(m.domain, per_axis);
    for (const auto& r : pts) {
        if (m.lambda(r) < m.lambda_star - 1e-12)
            throw ConfigError("assumption (5): lambda lower bound violated on sampled domain");
    }
    for (const auto& r : pts) {
        for (const auto& r2 : pts) {
            const double Jv = m.J(r, r2);
            const double sv = m.sigma(r, r2);
            const double tv = m.tau(r, r2);
            if (std::abs(Jv) > m.lipschitz.J_inf + 1e-12)
                throw ConfigError("assumption (3): |J| exceeds declared sup-norm");
            if (sv < 0.0 || sv > m.lipschitz.sigma_inf + 1e-12)
                throw ConfigError("assumption (3): sigma outside [0, declared sup-norm]");
            if (tv < 0.0 || tv > m.tau_bar + 1e-12)
                throw ConfigError("assumption (4): tau outside [0, tau_bar]");
        }
    }
}

}  // namespace

ModelParams build_model(const ModelConfig& config) {
    const auto& d = config.domain;
    if (d.dim < 1) throw ConfigError("domain: dim must be >= 1");
    if (static_cast<int>(d.bounds.size()) != d.dim)
        throw ConfigError("domain: bounds must list one interval per axis");
    for (const auto& b : d.bounds) {
        if (!(b[0] < b[1])) throw ConfigError("domain: interval must satisfy lower < upper");
    }
    if (d.density != "uniform") throw ConfigError("domain: unknown density id '" + d.density + "'");

    const auto& dyn = config.dynamics;
    if (dyn.family != "decay_cosine")
        throw ConfigError("dynamics: unknown family id '" + dyn.family + "'");
    if (!(dyn.a > 0.0)) throw ConfigError("dynamics: decay rate a must be > 0");
    if (static_cast<int>(dyn.wavevec.size()) != d.dim)
        throw ConfigError("dynamics: wavevec must have one component per axis");
    if (dyn.sigmoid_family != "logistic")
        throw ConfigError("dynamics: unknown sigmoid family id '" + dyn.sigmoid_family + "'");
    if (!(dyn.gain > 0.0)) throw ConfigError("dynamics: sigmoid gain must be > 0");

    const auto& c = config.coupling;
    if (c.J_family != "exponential")
        throw ConfigError("coupling: unknown J family id '" + c.J_family + "'");
    if (c.sigma_family != "exponential")
        throw ConfigError("coupling: unknown sigma family id '" + c.sigma_family + "'");
    if (!(c.ell_J > 0.0)) throw ConfigError("coupling: J length scale must be > 0");
    if (!(c.ell_sigma > 0.0)) throw ConfigError("coupling: sigma length scale must be > 0");
    if (c.sigma0 < 0.0) throw ConfigError("coupling: sigma0 must be >= 0");
    if (c.tau0 < 0.0 || c.c_tau < 0.0)
        throw ConfigError("assumption (4): delay coefficients must be >= 0");

    const auto& n = config.noise;
    if (n.family != "constant") throw ConfigError("noise: unknown lambda family id '" + n.family + "'");
    if (!(n.lambda0 > 0.0))
        throw ConfigError("assumption (5): diffusion lower bound violated (lambda0 must be > 0)");

    InitialLaw init = config.initial;
    if (init.family != "affine")
        throw ConfigError("initial: unknown psi family id '" + init.family + "'");
    if (static_cast<int>(init.slope.size()) != d.dim)
        throw ConfigError("initial: psi slope must have one component per axis");
    if (init.noise_scale < 0.0) throw ConfigError("initial: noise_scale must be >= 0");
    const double Kpsi = init.psi_lipschitz();
    if (init.C0 <= 0.0) init.C0 = std::max(Kpsi * Kpsi, 1e-12);
    if (init.C0 + 1e-12 < Kpsi * Kpsi)
        throw ConfigError("initial: C0 must dominate the squared psi Lipschitz constant");

    if (!(config.grid.T > 0.0)) throw ConfigError("grid: horizon T must be > 0");
    if (!(config.grid.dt > 0.0)) throw ConfigError("grid: dt must be > 0");

    ModelParams m;
    m.domain = d;
    m.dynamics = dyn;
    m.coupling = c;
    m.noise = n;
    m.initial = init;
    m.horizon_T = config.grid.T;
    m.dt = config.grid.dt;
    m.tau_bar = c.tau0 + c.c_tau * d.diameter();
    m.lambda_star = n.lambda0;

    double knorm = 0.0;
    for (double k : dyn.wavevec) knorm += k * k;
    knorm = std::sqrt(knorm);
    m.lipschitz.K_f = std::max({dyn.a, kTwoPi * std::abs(dyn.I0) * std::abs(dyn.omega),
                                kTwoPi * std::abs(dyn.I0) * knorm});
    m.lipschitz.K_S = dyn.gain / 4.0;
    m.lipschitz.K_J = std::abs(c.J0) / c.ell_J;
    m.lipschitz.K_sigma = c.sigma0 / c.ell_sigma;
    m.lipschitz.K_tau = c.c_tau;
    m.lipschitz.K_lambda = 0.0;
    m.lipschitz.J_inf = std::abs(c.J0);
    m.lipschitz.sigma_inf = c.sigma0;

    check_assumptions(m);
    return m;
}

KernelValues eval_kernels(const ModelParams& params, const Point& r, const Point& r2) {
    if (!params.domain.contains(r) || !params.domain.contains(r2))
        throw ConfigError("eval_kernels: point outside the spatial domain");
    return {params.J(r, r2), params.sigma(r, r2), params.tau(r, r2)};
}

}  // namespace randfield
