// Command-line driver: reproducible experiment runs with a single master
// seed, CSV outputs, and a manifest written last.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "randfield/csv.hpp"
#include "randfield/diagnostics.hpp"
#include "randfield/errors.hpp"
#include "randfield/meanfield.hpp"
#include "randfield/measure.hpp"
#include "randfield/model.hpp"
#include "randfield/network.hpp"
#include "randfield/rng.hpp"

namespace fs = std::filesystem;
using namespace randfield;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunContext {
    ModelConfig cfg;
    ModelParams model;
    std::string config_snapshot;
    std::string config_hash;
    fs::path out_dir;
    std::uint64_t seed = 0;
    Executor ex{1};
    std::vector<std::pair<std::string, double>> stages;
    std::vector<std::string> outputs;
};

class StageTimer {
  public:
    StageTimer(RunContext& ctx, std::string name)
        : ctx_(ctx), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        ctx_.stages.emplace_back(name_, secs);
    }

  private:
    RunContext& ctx_;
    std::string name_;
    std::chrono::steady_clock::time_point start_;
};

void emit(RunContext& ctx, const std::string& filename, const std::string& body) {
    write_text_file((ctx.out_dir / filename).string(), body);
    ctx.outputs.push_back(filename);
}

void write_manifest(RunContext& ctx, const std::string& subcommand) {
    nlohmann::json man;
    char stamp[32];
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &tm_utc);
    man["run_id"] = std::string(stamp) + "-" + ctx.config_hash.substr(0, 8);
    man["tool"] = std::string("randfield ") + kVersion;
    man["subcommand"] = subcommand;
    man["master_seed"] = ctx.seed;
    man["threads"] = ctx.ex.threads();
    man["config_hash"] = ctx.config_hash;
    man["config"] = nlohmann::json::parse(ctx.config_snapshot);
    const TimeGrid grid = ctx.model.grid();
    man["grid"] = {{"dt", grid.dt},
                   {"n_hist", grid.n_hist},
                   {"n_main", grid.n_main},
                   {"tau_bar", ctx.model.tau_bar}};
    auto& stages = man["stages"] = nlohmann::json::array();
    for (const auto& [name, secs] : ctx.stages) stages.push_back({{"name", name}, {"seconds", secs}});
    auto& outs = man["outputs"] = nlohmann::json::array();
    for (const auto& f : ctx.outputs) {
        const std::string body = read_text_file((ctx.out_dir / f).string());
        outs.push_back({{"path", f}, {"bytes", body.size()}, {"fnv1a64", fnv1a_hex(body)}});
    }
    write_text_file((ctx.out_dir / "manifest.json").string(), man.dump(2) + "\n");
}

std::string stats_csv(const ModelParams& m, const FieldStats& s) {
    std::ostringstream out;
    const int dim = static_cast<int>(m.domain.dim);
    for (int k = 1; k <= dim; ++k) out << "r_" << k << ',';
    out << "t,M,Sigma_diag,m,K_diag\n";
    for (std::size_t nd = 0; nd < s.r_nodes.size(); ++nd) {
        for (std::size_t t = 0; t < s.times.size(); ++t) {
            for (int k = 0; k < dim; ++k) out << format_double(s.r_nodes[nd][k]) << ',';
            out << format_double(s.times[t]) << ',' << format_double(s.M[nd][t]) << ','
                << format_double(s.sigma_at(nd, t, t)) << ','
                << format_double(s.scaled_mean(m, nd, t)) << ','
                << format_double(s.scaled_cov(m, nd, t, t)) << '\n';
        }
    }
    return out.str();
}

int cmd_simulate(RunContext& ctx, bool binary) {
    const TimeGrid grid = ctx.model.grid();
    Ensemble ens;
    {
        StageTimer timer(ctx, "simulate");
        const auto positions =
            sample_positions(ctx.model, static_cast<std::size_t>(ctx.cfg.run.N), ctx.seed);
        const auto couplings = sample_couplings(ctx.model, positions, ctx.seed);
        const auto histories = build_initial(ctx.model.initial, positions, grid, ctx.seed);
        ens = simulate_network(ctx.model, positions, couplings, histories, grid, ctx.seed, ctx.ex);
    }
    {
        StageTimer timer(ctx, "write");
        if (binary) {
            write_ensemble_bin((ctx.out_dir / "ensemble.bin").string(), ens);
            ctx.outputs.push_back("ensemble.bin");
        } else {
            write_ensemble_csv((ctx.out_dir / "ensemble.csv").string(), ens,
                               ctx.cfg.run.path_stride);
            ctx.outputs.push_back("ensemble.csv");
        }
    }
    write_manifest(ctx, "simulate");
    return 0;
}

int cmd_meanfield(RunContext& ctx, bool binary) {
    const TimeGrid grid = ctx.model.grid();
    MeanFieldSolution sol;
    {
        StageTimer timer(ctx, "picard_solve");
        sol = picard_solve(ctx.model, grid, static_cast<std::size_t>(ctx.cfg.run.n_particles),
                           ctx.cfg.run.m_nodes, ctx.cfg.run.tol, ctx.cfg.run.max_iter, ctx.seed,
                           ctx.ex, static_cast<std::size_t>(ctx.cfg.run.subsample));
    }
    {
        StageTimer timer(ctx, "write");
        std::ostringstream iter_csv;
        iter_csv << "iter,w2,seconds\n";
        for (const auto& it : sol.iterates)
            iter_csv << it.iter << ',' << format_double(it.w2) << ','
                     << format_double(it.seconds) << '\n';
        emit(ctx, "iterates.csv", iter_csv.str());
        emit(ctx, "stats.csv", stats_csv(ctx.model, sol.stats));
        if (binary) {
            write_ensemble_bin((ctx.out_dir / "ensemble.bin").string(), sol.ensemble);
            ctx.outputs.push_back("ensemble.bin");
        } else {
            write_ensemble_csv((ctx.out_dir / "ensemble.csv").string(), sol.ensemble, 1,
                               ctx.cfg.run.particle_stride);
            ctx.outputs.push_back("ensemble.csv");
        }
        std::ostringstream conv;
        conv << "converged,iterations\n" << (sol.converged ? 1 : 0) << ','
             << sol.iterates.size() << '\n';
        emit(ctx, "converged.csv", conv.str());
    }
    write_manifest(ctx, "meanfield");
    if (!sol.converged)
        std::cerr << "meanfield: not converged within max_iter (history written)\n";
    return 0;
}

int cmd_compare(RunContext& ctx, const std::string& path_a, const std::string& path_b) {
    if (path_a.empty() || path_b.empty())
        throw ConfigError("compare: missing input ensembles (--a and --b are required)");
    Ensemble A, B;
    {
        StageTimer timer(ctx, "read");
        A = read_ensemble_any(path_a);
        B = read_ensemble_any(path_b);
    }
    {
        StageTimer timer(ctx, "compare");
        const auto nodes = location_nodes(ctx.model.domain, ctx.cfg.run.sweep.probe_nodes);
        const TimeGrid& grid = A.grid;
        const double t_max = grid.time(grid.total_points() - 1);
        std::vector<double> times;
        for (double t : ctx.cfg.run.sweep.probe_times)
            if (t >= 0.0 && t <= t_max + 1e-12) times.push_back(t);
        if (times.empty()) {
            // configured probes fall outside this grid; use five spread times
            for (int k = 1; k <= 5; ++k) times.push_back(t_max * k / 5.0);
        }
        const FieldStats sa = field_stats(A, ctx.model, nodes, times, ctx.ex);
        const FieldStats sb = field_stats(B, ctx.model, nodes, times, ctx.ex);
        emit(ctx, "stats_a.csv", stats_csv(ctx.model, sa));
        emit(ctx, "stats_b.csv", stats_csv(ctx.model, sb));

        const std::size_t nsub = std::min<std::size_t>(
            {static_cast<std::size_t>(ctx.cfg.run.subsample), A.size(), B.size()});
        std::ostringstream dist;
        dist << "method,value,n_a,n_b,subsample\n";
        for (const auto method :
             {CouplingMethod::exact_assignment, CouplingMethod::index_coupling}) {
            const DistanceReport rep =
                wasserstein2(A, B, ctx.model.lipschitz.K_tau, nsub, method, ctx.seed, ctx.ex);
            dist << rep.method << ',' << format_double(rep.value) << ',' << rep.n_a << ','
                 << rep.n_b << ',' << rep.subsample << '\n';
        }
        emit(ctx, "distances.csv", dist.str());
    }
    write_manifest(ctx, "compare");
    return 0;
}

std::string sweep_csv(const SweepReport& rep, const std::string& kind) {
    std::ostringstream out;
    out << "kind,N,replicate,statistic,value,stderr\n";
    for (const auto& row : rep.rows)
        out << kind << ',' << row.N << ',' << row.replicate << ',' << row.statistic << ','
            << format_double(row.value) << ',' << format_double(row.stderr_or_tol) << '\n';
    return out.str();
}

int cmd_sweep(RunContext& ctx) {
    const TimeGrid grid = ctx.model.grid();
    const SweepConfig& sc = ctx.cfg.run.sweep;
    if (sc.kind == "convergence") {
        MeanFieldSolution sol;
        {
            StageTimer timer(ctx, "picard_solve");
            sol = picard_solve(ctx.model, grid, static_cast<std::size_t>(ctx.cfg.run.n_particles),
                               ctx.cfg.run.m_nodes, ctx.cfg.run.tol, ctx.cfg.run.max_iter,
                               ctx.seed, ctx.ex, static_cast<std::size_t>(ctx.cfg.run.subsample));
        }
        SweepReport rep;
        {
            StageTimer timer(ctx, "convergence_sweep");
            const auto nodes = location_nodes(ctx.model.domain, sc.probe_nodes);
            rep = convergence_sweep(ctx.model, grid, sc.N_list, sc.replicates, sol,
                                    sc.probe_times, nodes, ctx.seed, ctx.ex);
        }
        emit(ctx, "sweep.csv", sweep_csv(rep, "convergence"));
    } else if (sc.kind == "chaos") {
        SweepReport rep;
        {
            StageTimer timer(ctx, "chaos_sweep");
            rep = chaos_sweep(ctx.model, grid, sc.N_list, sc.replicates, sc.pair_count,
                              sc.probe_times, ctx.seed, ctx.ex);
        }
        emit(ctx, "sweep.csv", sweep_csv(rep, "chaos"));
    } else {
        throw ConfigError("run.sweep.kind must be 'convergence' or 'chaos'");
    }
    write_manifest(ctx, "sweep");
    return 0;
}

int cmd_check(RunContext& ctx) {
    SweepReport rep;
    {
        StageTimer timer(ctx, "identity_suite");
        rep = identity_suite(ctx.model, ctx.seed, ctx.ex);
    }
    bool all_pass = true;
    std::ostringstream out;
    out << "statistic,value,tolerance,pass\n";
    for (const auto& row : rep.rows) {
        const bool pass = row.value <= row.stderr_or_tol;
        all_pass = all_pass && pass;
        out << row.statistic << ',' << format_double(row.value) << ','
            << format_double(row.stderr_or_tol) << ',' << (pass ? 1 : 0) << '\n';
    }
    emit(ctx, "identities.csv", out.str());
    write_manifest(ctx, "check");
    if (!all_pass) {
        std::cerr << "check: at least one identity exceeded its tolerance\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatially extended random-coupling neural network simulator and mean-field solver"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 12345;
    int threads = 1;
    std::vector<std::string> sets;
    app.add_option("--config", config_path, "Configuration JSON (defaults to the built-in reference)");
    app.add_option("--seed", seed, "Master seed; all randomness derives from it");
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads (numerics are thread-count independent)");
    app.add_option("--set", sets, "Dotted-path config overrides, e.g. coupling.J.J0=0.25");

    std::string ens_a, ens_b;
    bool binary = false;
    CLI::App* simulate = app.add_subcommand("simulate", "Integrate one finite-N network draw");
    simulate->add_flag("--binary", binary, "Write the compact binary ensemble format");
    CLI::App* meanfield = app.add_subcommand("meanfield", "Solve the mean-field fixed point");
    meanfield->add_flag("--binary", binary, "Write the compact binary ensemble format");
    CLI::App* compare = app.add_subcommand("compare", "Field statistics and distances of two ensembles");
    compare->add_option("--a", ens_a, "First ensemble CSV");
    compare->add_option("--b", ens_b, "Second ensemble CSV");
    CLI::App* sweep = app.add_subcommand("sweep", "Convergence or chaos N-sweep");
    CLI::App* check = app.add_subcommand("check", "Run the exact-identity suite");
    for (CLI::App* sub : {simulate, meanfield, compare, sweep, check}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Treat malformed invocations as configuration errors (exit 2).
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunContext ctx;
        std::string text = config_path.empty() ? default_config_json()
                                               : read_text_file(config_path);
        ctx.config_snapshot = apply_overrides(text, sets);
        ctx.config_hash = fnv1a_hex(ctx.config_snapshot);
        ctx.cfg = parse_config_json(ctx.config_snapshot);
        ctx.model = build_model(ctx.cfg);  // validate before touching the filesystem
        ctx.seed = seed;
        ctx.ex = Executor{threads};
        ctx.out_dir = out_dir;
        fs::create_directories(ctx.out_dir);

        if (*simulate) return cmd_simulate(ctx, binary);
        if (*meanfield) return cmd_meanfield(ctx, binary);
        if (*compare) return cmd_compare(ctx, ens_a, ens_b);
        if (*sweep) return cmd_sweep(ctx);
        if (*check) return cmd_check(ctx);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
