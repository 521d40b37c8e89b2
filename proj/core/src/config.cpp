#include <json.hpp>

#include "randfield/errors.hpp"
#include "randfield/model.hpp"

namespace randfield {

namespace {

using nlohmann::json;

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_domain(const json& j, SpatialDomain& d) {
    read_into(j, "dim", d.dim);
    if (j.contains("bounds")) {
        d.bounds.clear();
        for (const auto& b : j.at("bounds"))
            d.bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    }
    read_into(j, "density", d.density);
}

void parse_dynamics(const json& j, DynamicsConfig& dyn) {
    read_into(j, "family", dyn.family);
    read_into(j, "a", dyn.a);
    read_into(j, "I0", dyn.I0);
    read_into(j, "omega", dyn.omega);
    read_into(j, "wavevec", dyn.wavevec);
    if (j.contains("sigmoid")) {
        const auto& s = j.at("sigmoid");
        read_into(s, "family", dyn.sigmoid_family);
        read_into(s, "gain", dyn.gain);
    }
}

void parse_coupling(const json& j, CouplingConfig& c) {
    if (j.contains("J")) {
        const auto& jj = j.at("J");
        read_into(jj, "family", c.J_family);
        read_into(jj, "J0", c.J0);
        read_into(jj, "ell", c.ell_J);
    }
    if (j.contains("sigma")) {
        const auto& js = j.at("sigma");
        read_into(js, "family", c.sigma_family);
        read_into(js, "sigma0", c.sigma0);
        read_into(js, "ell", c.ell_sigma);
    }
    if (j.contains("tau")) {
        const auto& jt = j.at("tau");
        read_into(jt, "tau0", c.tau0);
        read_into(jt, "c_tau", c.c_tau);
    }
}

void parse_noise(const json& j, NoiseConfig& n) {
    if (j.contains("lambda")) {
        const auto& jl = j.at("lambda");
        read_into(jl, "family", n.family);
        read_into(jl, "lambda0", n.lambda0);
    }
}

void parse_initial(const json& j, InitialLaw& in) {
    if (j.contains("psi")) {
        const auto& jp = j.at("psi");
        read_into(jp, "family", in.family);
        read_into(jp, "psi0", in.psi0);
        read_into(jp, "slope", in.slope);
    }
    read_into(j, "noise_scale", in.noise_scale);
    if (j.contains("C0") && !j.at("C0").is_null()) in.C0 = j.at("C0").get<double>();
}

void parse_sweep(const json& j, SweepConfig& s) {
    read_into(j, "kind", s.kind);
    read_into(j, "N_list", s.N_list);
    read_into(j, "replicates", s.replicates);
    read_into(j, "pair_count", s.pair_count);
    read_into(j, "probe_times", s.probe_times);
    read_into(j, "probe_nodes", s.probe_nodes);
}

void parse_run(const json& j, RunConfig& r) {
    read_into(j, "N", r.N);
    read_into(j, "n_particles", r.n_particles);
    read_into(j, "m_nodes", r.m_nodes);
    read_into(j, "tol", r.tol);
    read_into(j, "max_iter", r.max_iter);
    read_into(j, "subsample", r.subsample);
    read_into(j, "path_stride", r.path_stride);
    read_into(j, "particle_stride", r.particle_stride);
    if (j.contains("sweep")) parse_sweep(j.at("sweep"), r.sweep);
}

}  // namespace

ModelConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    ModelConfig cfg;
    try {
        if (j.contains("domain")) parse_domain(j.at("domain"), cfg.domain);
        if (j.contains("dynamics")) parse_dynamics(j.at("dynamics"), cfg.dynamics);
        if (j.contains("coupling")) parse_coupling(j.at("coupling"), cfg.coupling);
        if (j.contains("noise")) parse_noise(j.at("noise"), cfg.noise);
        if (j.contains("initial")) parse_initial(j.at("initial"), cfg.initial);
        if (j.contains("grid")) {
            read_into(j.at("grid"), "dt", cfg.grid.dt);
            read_into(j.at("grid"), "T", cfg.grid.T);
        }
        if (j.contains("run")) parse_run(j.at("run"), cfg.run);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: malformed section: ") + e.what());
    }
    return cfg;
}

std::string default_config_json() {
    return R"({
  "domain": {"dim": 1, "bounds": [[0.0, 1.0]], "density": "uniform"},
  "dynamics": {"family": "decay_cosine", "a": 1.0, "I0": 0.5, "omega": 1.0, "wavevec": [0.5],
               "sigmoid": {"family": "logistic", "gain": 1.0}},
  "coupling": {"J": {"family": "exponential", "J0": 0.5, "ell": 0.5},
               "sigma": {"family": "exponential", "sigma0": 0.5, "ell": 0.5},
               "tau": {"tau0": 0.05, "c_tau": 0.1}},
  "noise": {"lambda": {"family": "constant", "lambda0": 1.0}},
  "initial": {"psi": {"family": "affine", "psi0": 0.0, "slope": [0.5]}, "noise_scale": 0.2, "C0": null},
  "grid": {"dt": 0.01, "T": 1.0},
  "run": {"N": 100, "n_particles": 4096, "m_nodes": 8, "tol": 0.05, "max_iter": 10,
          "subsample": 256, "path_stride": 1, "particle_stride": 8,
          "sweep": {"kind": "convergence", "N_list": [50, 100, 200, 400], "replicates": 20,
                    "pair_count": 16, "probe_times": [0.2, 0.4, 0.6, 0.8, 1.0], "probe_nodes": 4}}
})";
}

std::string apply_overrides(const std::string& config_text, const std::vector<std::string>& sets) {
    json j;
    try {
        j = json::parse(config_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    for (const std::string& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must have the form key.path=value: " + s);
        std::string path = s.substr(0, eq);
        const std::string value = s.substr(eq + 1);
        json* node = &j;
        std::size_t pos = 0;
        while (true) {
            const auto dot = path.find('.', pos);
            const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
            if (key.empty()) throw ConfigError("override has an empty path component: " + s);
            if (dot == std::string::npos) {
                json parsed;
                try {
                    parsed = json::parse(value);
                } catch (const json::exception&) {
                    parsed = value;  // unquoted strings pass through verbatim
                }
                (*node)[key] = parsed;
                break;
            }
            node = &(*node)[key];
            pos = dot + 1;
        }
    }
    return j.dump(2);
}

}  // namespace randfield
