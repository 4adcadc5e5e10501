#include "doctest.h"

#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = KBOOST_CLI_PATH;
const std::string kPresets = KBOOST_PRESET_SRC_DIR;

struct CmdResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "kboost_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CmdResult run_cli(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const fs::path out = work_dir() / ("stdout_" + std::to_string(counter));
    const fs::path err = work_dir() / ("stderr_" + std::to_string(counter));
    ++counter;
    std::string cmd = env.empty() ? "" : env + " ";
    cmd += kCli + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("spectrum subcommand emits descending eigenvalues") {
    const CmdResult r = run_cli("spectrum --kernel sobolev1 --n 4");
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "j,eigenvalue");
    double prev = 1e300;
    for (int j = 1; j <= 4; ++j) {
        std::stringstream ss(lines[j]);
        std::string idx, val;
        std::getline(ss, idx, ',');
        std::getline(ss, val, ',');
        CHECK(idx == std::to_string(j));
        const double v = std::stod(val);
        CHECK(v <= prev);
        prev = v;
    }

    const CmdResult again = run_cli("spectrum --kernel sobolev1 --n 4");
    CHECK(again.out == r.out);  // byte-identical
}

TEST_CASE("spectrum of a tabulated identity kernel") {
    const fs::path table = work_dir() / "identity2.txt";
    {
        std::ofstream f(table);
        f << "2\n1 0\n0 1\n";
    }
    const CmdResult r = run_cli("spectrum --kernel tabulated --table " + table.string());
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 3);
    CHECK(lines[1] == "1,0.5");
    CHECK(lines[2] == "2,0.5");
}

TEST_CASE("radius subcommand") {
    // all-ones table: normalized matrix has spectrum {1, 0, ...}, so
    // delta_n = sigma / sqrt(n)
    const fs::path table = work_dir() / "ones100.txt";
    {
        std::ofstream f(table);
        f << "100\n";
        for (int i = 0; i < 100; ++i) {
            for (int j = 0; j < 100; ++j) f << "1 ";
            f << "\n";
        }
    }
    const CmdResult r =
        run_cli("radius --kernel tabulated --table " + table.string() + " --sigma 1");
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "delta_n,delta_n_sq,d_n,is_regular,T_theory");
    std::stringstream ss(lines[1]);
    std::string field;
    std::getline(ss, field, ',');
    CHECK(std::stod(field) == doctest::Approx(0.1).epsilon(1e-8));

    SUBCASE("delta_n grows with sigma") {
        const CmdResult r2 =
            run_cli("radius --kernel tabulated --table " + table.string() + " --sigma 2");
        REQUIRE(r2.exit_code == 0);
        const double d2 = std::stod(lines_of(r2.out)[1]);
        CHECK(d2 > 0.1);
    }

    SUBCASE("sobolev1 n=256 matches the grid-scan oracle value") {
        const CmdResult r3 = run_cli("radius --kernel sobolev1 --n 256 --sigma 1");
        REQUIRE(r3.exit_code == 0);
        const double dn = std::stod(lines_of(r3.out)[1]);
        CHECK(dn == doctest::Approx(0.1254138831188325).epsilon(1e-6));
    }
}

TEST_CASE("gaussian kernels require a bandwidth") {
    const CmdResult r = run_cli("spectrum --kernel gaussian --n 8");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("bandwidth") != std::string::npos);
    const CmdResult ok = run_cli("spectrum --kernel gaussian --bandwidth 0.1 --n 8");
    CHECK(ok.exit_code == 0);
}

TEST_CASE("boost subcommand emits a per-iteration trace") {
    const CmdResult r =
        run_cli("boost --kernel sobolev1 --n 50 --loss logistic --iterations 20 --seed 3");
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 21);
    CHECK(lines[0] == "t,err_iterate,err_average");
    CHECK(lines[1].rfind("1,", 0) == 0);
    CHECK(lines[20].rfind("20,", 0) == 0);
}

TEST_CASE("experiment subcommand with a config file") {
    const fs::path conf = work_dir() / "mini.conf";
    {
        std::ofstream f(conf);
        f << "mode = experiment\nkernel = sobolev1\nloss = least_squares\n"
          << "n_grid = 32\ntrials = 1\nrules = gold\nalpha = 0.75\n"
          << "seed = 5\nmc_samples = 0\n";
    }
    const CmdResult r = run_cli("experiment --config " + conf.string());
    REQUIRE(r.exit_code == 0);
    const auto lines = lines_of(r.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "n,trial,rule,kappa,T,mse_emp,mse_pop,excess_risk,wall_ms,failed");
    CHECK(lines[1].rfind("32,0,gold,", 0) == 0);

    SUBCASE("unknown config keys name the offender") {
        std::ofstream(conf, std::ios::app) << "not_a_key = 3\n";
        const CmdResult bad = run_cli("experiment --config " + conf.string());
        CHECK(bad.exit_code == 1);
        CHECK(bad.err.find("not_a_key") != std::string::npos);
    }
}

TEST_CASE("inline overrides and the KBOOST_SEED default") {
    const fs::path conf = work_dir() / "seeded.conf";
    {
        std::ofstream f(conf);
        f << "kernel = sobolev1\nloss = least_squares\nn_grid = 24\n"
          << "trials = 2\nrules = gold\nmc_samples = 0\n";
    }
    const std::string base = "experiment --config " + conf.string();
    const CmdResult with_flag = run_cli(base + " --seed 7");
    const CmdResult with_env = run_cli(base, "KBOOST_SEED=7");
    const CmdResult with_override = run_cli(base + " seed=7");
    REQUIRE(with_flag.exit_code == 0);
    CHECK(with_flag.out == with_env.out);
    CHECK(with_flag.out == with_override.out);

    const CmdResult other = run_cli(base + " --seed 8");
    CHECK(other.out != with_flag.out);

    SUBCASE("malformed overrides fail") {
        const CmdResult bad = run_cli(base + " trials");
        CHECK(bad.exit_code == 1);
    }
}

TEST_CASE("replicate presets run end to end at reduced scale") {
    const fs::path out = work_dir() / "rep3a";
    const std::string overrides =
        " n_grid=32,48 trials=2 mc_samples=50 max_iter_cap=80 seed=11";
    const std::string cmd = "replicate --figure 3a --preset-dir " + kPresets +
                            " --out " + out.string() + overrides;
    const CmdResult r1 = run_cli(cmd + " --jobs 1");
    REQUIRE(r1.exit_code == 0);
    REQUIRE(fs::exists(out.string() + "_raw.csv"));
    REQUIRE(fs::exists(out.string() + "_agg.csv"));
    const std::string raw1 = slurp(out.string() + "_raw.csv");
    const std::string agg1 = slurp(out.string() + "_agg.csv");

    const CmdResult r2 = run_cli(cmd + " --jobs 2");
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(out.string() + "_raw.csv") == raw1);
    CHECK(slurp(out.string() + "_agg.csv") == agg1);

    // sanity on the raw schema: 2 n values x 2 trials x 4 rules + header
    CHECK(lines_of(raw1).size() == 1 + 2 * 2 * 4);

    SUBCASE("unknown figures are rejected") {
        const CmdResult bad = run_cli("replicate --figure 9z --preset-dir " + kPresets);
        CHECK(bad.exit_code == 1);
        CHECK(bad.err.find("9z") != std::string::npos);
    }
}

TEST_CASE("trace presets run end to end at reduced scale") {
    const fs::path out = work_dir() / "fig1a.csv";
    const CmdResult r = run_cli("replicate --figure 1a --preset-dir " + kPresets +
                                " --out " + out.string() + " iterations=30");
    REQUIRE(r.exit_code == 0);
    CHECK(lines_of(slurp(out)).size() == 31);
}

TEST_CASE("divergent runs exit nonzero unless allowed") {
    const fs::path conf = work_dir() / "diverge.conf";
    {
        std::ofstream f(conf);
        f << "kernel = sobolev1\nkernel_rescale = false\nloss = least_squares\n"
          << "n_grid = 16\ntrials = 1\nrules = power(1, 7)\nalpha = 1e6\n"
          << "seed = 3\nmc_samples = 0\n";
    }
    const CmdResult r = run_cli("experiment --config " + conf.string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("diverged") != std::string::npos);

    const CmdResult allowed =
        run_cli("experiment --config " + conf.string() + " --allow-failures");
    CHECK(allowed.exit_code == 0);
}
