#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "randfield/paths.hpp"

namespace randfield {

// Compact spatial domain D, a product of closed intervals with a sampling
// density pi (only "uniform" is built in).
struct SpatialDomain {
    int dim = 1;
    std::vector<std::array<double, 2>> bounds = {{0.0, 1.0}};
    std::string density = "uniform";

    double diameter() const;
    bool contains(const Point& r) const;
};

struct DynamicsConfig {
    std::string family = "decay_cosine";  // f(r,t,x) = -a*x + I0*cos(2*pi*(omega*t + <k,r>))
    double a = 1.0;
    double I0 = 0.0;
    double omega = 0.0;
    std::vector<double> wavevec = {0.0};
    std::string sigmoid_family = "logistic";  // S(x) = 1/(1+exp(-gain*x))
    double gain = 1.0;
};

struct CouplingConfig {
    std::string J_family = "exponential";  // J(r,r') = J0*exp(-|r-r'|/ell)
    double J0 = 0.5;
    double ell_J = 0.5;
    std::string sigma_family = "exponential";
    double sigma0 = 0.5;
    double ell_sigma = 0.5;
    double tau0 = 0.05;  // tau(r,r') = tau0 + c_tau*|r-r'|
    double c_tau = 0.1;
};

struct NoiseConfig {
    std::string family = "constant";  // lambda(r) = lambda0
    double lambda0 = 1.0;
};

// Initial law mu0(r): x0_s(r) = psi(r) + noise_scale * eta_s with eta a
// Brownian path on the history segment shared across locations.
struct InitialLaw {
    std::string family = "affine";  // psi(r) = psi0 + <slope, r>
    double psi0 = 0.0;
    std::vector<double> slope = {0.0};
    double noise_scale = 0.0;
    double C0 = 0.0;

    double psi(const Point& r) const;
    double psi_lipschitz() const;
};

struct GridConfig {
    double dt = 0.01;
    double T = 1.0;
};

struct SweepConfig {
    std::string kind = "convergence";  // convergence | chaos
    std::vector<int> N_list = {50, 100, 200, 400};
    int replicates = 20;
    int pair_count = 16;
    std::vector<double> probe_times = {0.2, 0.4, 0.6, 0.8, 1.0};
    int probe_nodes = 4;
};

struct RunConfig {
    int N = 100;
    int n_particles = 4096;
    int m_nodes = 8;
    double tol = 0.05;
    int max_iter = 10;
    int subsample = 256;
    int path_stride = 1;
    int particle_stride = 8;
    SweepConfig sweep;
};

struct ModelConfig {
    SpatialDomain domain;
    DynamicsConfig dynamics;
    CouplingConfig coupling;
    NoiseConfig noise;
    InitialLaw initial;
    GridConfig grid;
    RunConfig run;
};

// Declared regularity constants, derived from the built-in coefficients.
struct LipschitzConstants {
    double K_f = 0.0;
    double K_S = 0.0;
    double K_J = 0.0;
    double K_sigma = 0.0;
    double K_tau = 0.0;
    double K_lambda = 0.0;
    double J_inf = 0.0;
    double sigma_inf = 0.0;
};

// Validated model. Immutable after build_model; safe to share read-only
// across workers.
struct ModelParams {
    SpatialDomain domain;
    DynamicsConfig dynamics;
    CouplingConfig coupling;
    NoiseConfig noise;
    InitialLaw initial;
    double horizon_T = 1.0;
    double dt = 0.01;
    double tau_bar = 0.0;
    double lambda_star = 1.0;
    LipschitzConstants lipschitz;

    double f(const Point& r, double t, double x) const;
    double S(double x) const;
    double J(const Point& r, const Point& r2) const;
    double sigma(const Point& r, const Point& r2) const;
    double tau(const Point& r, const Point& r2) const;
    double lambda(const Point& r) const;

    TimeGrid grid() const { return make_grid(dt, tau_bar, horizon_T); }
};

struct KernelValues {
    double J = 0.0;
    double sigma = 0.0;
    double tau = 0.0;
};

// Validates the configuration and derives tau_bar, lambda_star and all
// Lipschitz constants. Throws ConfigError naming the violated assumption.
ModelParams build_model(const ModelConfig& config);

// Pointwise kernel values; throws ConfigError if a point is outside D.
KernelValues eval_kernels(const ModelParams& params, const Point& r, const Point& r2);

// --- configuration documents (JSON) ---

// Parses a configuration document; missing keys take the defaults above.
ModelConfig parse_config_json(const std::string& text);

// The shipped reference configuration (weak coupling, unit horizon).
std::string default_config_json();

// Applies dotted-path overrides ("coupling.J.J0=0.25") and returns the
// canonical serialized document used for hashing and the run manifest.
std::string apply_overrides(const std::string& config_text,
                            const std::vector<std::string>& sets);

}  // namespace randfield
