#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "randfield/csv.hpp"

namespace fs = std::filesystem;
using randfield::fnv1a_hex;
using randfield::read_text_file;

namespace {

const char* cli_path() { return RANDFIELD_CLI_PATH; }

int run_cli(const std::string& args) {
    const std::string cmd = std::string(cli_path()) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("randfield_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string small_run_overrides() {
    return "--set run.N=24 --set grid.T=0.3 --set run.n_particles=64 --set run.subsample=32 "
           "--set run.max_iter=3";
}

}  // namespace

TEST_CASE("simulate: determinism across reruns and thread counts") {
    const fs::path d1 = fresh_dir("sim1");
    const fs::path d2 = fresh_dir("sim2");
    const fs::path d3 = fresh_dir("sim3");
    REQUIRE(run_cli("simulate --seed 7 --out " + d1.string() + " " + small_run_overrides()) == 0);
    REQUIRE(run_cli("simulate --seed 7 --out " + d2.string() + " " + small_run_overrides()) == 0);
    REQUIRE(run_cli("simulate --seed 7 --threads 4 --out " + d3.string() + " " +
                    small_run_overrides()) == 0);

    const std::string a = read_text_file((d1 / "ensemble.csv").string());
    CHECK(a == read_text_file((d2 / "ensemble.csv").string()));
    CHECK(a == read_text_file((d3 / "ensemble.csv").string()));

    // A different seed changes the body.
    const fs::path d4 = fresh_dir("sim4");
    REQUIRE(run_cli("simulate --seed 8 --out " + d4.string() + " " + small_run_overrides()) == 0);
    CHECK(a != read_text_file((d4 / "ensemble.csv").string()));
}

TEST_CASE("validation failure: exit 2, assumption named, no output written") {
    const fs::path d = fresh_dir("invalid");
    const std::string cmd = std::string(cli_path()) + " simulate --out " + d.string() +
                            " --set noise.lambda.lambda0=0 2> " + (d.string() + ".stderr");
    fs::create_directories(d.parent_path());
    const int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 2);
    CHECK_FALSE(fs::exists(d / "ensemble.csv"));
    CHECK_FALSE(fs::exists(d / "manifest.json"));
    const std::string err = read_text_file(d.string() + ".stderr");
    CHECK(err.find("assumption (5)") != std::string::npos);
}

TEST_CASE("manifest lists outputs with matching checksums") {
    const fs::path d = fresh_dir("manifest");
    REQUIRE(run_cli("simulate --seed 3 --out " + d.string() + " " + small_run_overrides()) == 0);
    const auto man = nlohmann::json::parse(read_text_file((d / "manifest.json").string()));
    CHECK(man.at("master_seed").get<std::uint64_t>() == 3);
    CHECK(man.at("config_hash").get<std::string>().size() == 16);
    REQUIRE(man.at("outputs").size() >= 1);
    for (const auto& out : man.at("outputs")) {
        const fs::path f = d / out.at("path").get<std::string>();
        REQUIRE(fs::exists(f));
        const std::string body = read_text_file(f.string());
        CHECK(out.at("bytes").get<std::size_t>() == body.size());
        CHECK(out.at("fnv1a64").get<std::string>() == fnv1a_hex(body));
    }
}

TEST_CASE("meanfield + compare pipeline") {
    const fs::path dm = fresh_dir("mf");
    REQUIRE(run_cli("meanfield --seed 5 --out " + dm.string() +
                    " --set run.n_particles=128 --set run.subsample=64 --set grid.T=0.3 "
                    "--set run.particle_stride=1 --set run.max_iter=6 --set run.tol=0.08") == 0);
    REQUIRE(fs::exists(dm / "iterates.csv"));
    REQUIRE(fs::exists(dm / "stats.csv"));
    REQUIRE(fs::exists(dm / "ensemble.csv"));

    // iterates.csv numeric columns (iter, w2) are deterministic; seconds is
    // wall time and may differ.
    const fs::path dm2 = fresh_dir("mf2");
    REQUIRE(run_cli("meanfield --seed 5 --threads 3 --out " + dm2.string() +
                    " --set run.n_particles=128 --set run.subsample=64 --set grid.T=0.3 "
                    "--set run.particle_stride=1 --set run.max_iter=6 --set run.tol=0.08") == 0);
    auto strip_seconds = [](const std::string& path) {
        std::istringstream in(read_text_file(path));
        std::ostringstream out;
        std::string line;
        while (std::getline(in, line)) {
            const auto last = line.rfind(',');
            out << line.substr(0, last) << '\n';
        }
        return out.str();
    };
    CHECK(strip_seconds((dm / "iterates.csv").string()) ==
          strip_seconds((dm2 / "iterates.csv").string()));
    CHECK(read_text_file((dm / "stats.csv").string()) ==
          read_text_file((dm2 / "stats.csv").string()));
    CHECK(read_text_file((dm / "ensemble.csv").string()) ==
          read_text_file((dm2 / "ensemble.csv").string()));

    const fs::path ds = fresh_dir("simcmp");
    REQUIRE(run_cli("simulate --seed 6 --out " + ds.string() +
                    " --set run.N=64 --set grid.T=0.3") == 0);
    const fs::path dc = fresh_dir("cmp");
    REQUIRE(run_cli("compare --seed 6 --out " + dc.string() + " --set grid.T=0.3 " +
                    "--set run.subsample=48 --a " + (dm / "ensemble.csv").string() + " --b " +
                    (ds / "ensemble.csv").string()) == 0);
    REQUIRE(fs::exists(dc / "stats_a.csv"));
    REQUIRE(fs::exists(dc / "stats_b.csv"));
    const std::string dist = read_text_file((dc / "distances.csv").string());
    CHECK(dist.find("exact_assignment") != std::string::npos);
    CHECK(dist.find("index_coupling") != std::string::npos);

    // Missing inputs for compare: config-class error.
    CHECK(run_cli("compare --out " + fresh_dir("cmp2").string()) == 2);
}

TEST_CASE("check subcommand writes identities.csv with all rows passing") {
    const fs::path d = fresh_dir("check");
    REQUIRE(run_cli("check --seed 2026 --threads 4 --out " + d.string()) == 0);
    std::istringstream in(read_text_file((d / "identities.csv").string()));
    std::string line;
    std::getline(in, line);
    CHECK(line == "statistic,value,tolerance,pass");
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        CHECK(line.substr(line.size() - 2) == ",1");
    }
    CHECK(rows >= 14);
}

TEST_CASE("binary ensemble format round-trips and feeds compare") {
    // Unit-level roundtrip.
    randfield::Ensemble e;
    e.grid.dt = 0.05;
    e.grid.n_hist = 3;
    e.grid.n_main = 7;
    for (int i = 0; i < 5; ++i) {
        randfield::PathSample p;
        p.r = {0.1 * i, 1.0 - 0.1 * i};
        for (std::size_t k = 0; k < e.grid.total_points(); ++k)
            p.values.push_back(std::sin(0.3 * i + 0.7 * k));
        e.members.push_back(std::move(p));
    }
    const fs::path bin = fs::temp_directory_path() / "randfield_roundtrip.bin";
    randfield::write_ensemble_bin(bin.string(), e);
    const randfield::Ensemble back = randfield::read_ensemble_any(bin.string());
    REQUIRE(back.size() == e.size());
    CHECK(back.grid == e.grid);
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(back.members[i].r == e.members[i].r);
        CHECK(back.members[i].values == e.members[i].values);
    }

    // CLI --binary output accepted by compare.
    const fs::path d1 = fresh_dir("bin1");
    const fs::path d2 = fresh_dir("bin2");
    REQUIRE(run_cli("simulate --binary --seed 4 --out " + d1.string() +
                    " --set run.N=20 --set grid.T=0.2") == 0);
    REQUIRE(fs::exists(d1 / "ensemble.bin"));
    REQUIRE(run_cli("simulate --seed 9 --out " + d2.string() +
                    " --set run.N=20 --set grid.T=0.2") == 0);
    const fs::path dc = fresh_dir("bincmp");
    REQUIRE(run_cli("compare --seed 4 --out " + dc.string() + " --set grid.T=0.2 " +
                    "--set run.subsample=16 --a " + (d1 / "ensemble.bin").string() + " --b " +
                    (d2 / "ensemble.csv").string()) == 0);
    CHECK(fs::exists(dc / "distances.csv"));
}

TEST_CASE("sweep subcommand: chaos kind small run is reproducible") {
    const std::string overrides =
        " --set run.sweep.kind=chaos --set \"run.sweep.N_list=[8,16]\" "
        "--set run.sweep.replicates=12 --set run.sweep.pair_count=4 "
        "--set \"run.sweep.probe_times=[0.25]\" --set grid.T=0.25";
    const fs::path d1 = fresh_dir("sweep1");
    const fs::path d2 = fresh_dir("sweep2");
    REQUIRE(run_cli("sweep --seed 11 --out " + d1.string() + overrides) == 0);
    REQUIRE(run_cli("sweep --seed 11 --threads 2 --out " + d2.string() + overrides) == 0);
    CHECK(read_text_file((d1 / "sweep.csv").string()) ==
          read_text_file((d2 / "sweep.csv").string()));
}
