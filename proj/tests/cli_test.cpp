// Black-box checks of the command-line tool: exit codes, output contracts,
// and byte-level determinism. The binary path comes from the build system.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

int g_failures = 0;

void check(bool cond, const std::string& what) {
    if (cond) {
        std::cout << "[PASS] " << what << "\n";
    } else {
        std::cout << "[FAIL] " << what << "\n";
        ++g_failures;
    }
}

std::string cli_path() { return NEEDLET_CLI_PATH; }

int run(const std::string& args, const std::string& stdout_file = "/dev/null") {
    const std::string cmd = cli_path() + " " + args + " > " + stdout_file + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "needlet_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string out1 = (dir / "out1.json").string();
    const std::string out2 = (dir / "out2.json").string();

    // frame-check
    check(run("frame-check --B 2 --J-max 4 --seed 7", out1) == 0, "frame-check B=2 exits 0");
    {
        const auto report = nlohmann::json::parse(slurp(out1));
        check(report.at("pass").get<bool>(), "frame-check reports all diagnostics green");
        check(report.at("levels").size() == 5 && report.at("levels")[3].contains("nodes") &&
                  report.at("levels")[3].contains("band_min"),
              "frame-check lists per-level node counts and bands");
    }
    check(run("frame-check --B 1 --seed 7") == 2, "frame-check B=1 exits 2");
    check(run("frame-check --B 2 --J-max 3") == 2, "frame-check without a seed exits 2");

    // estimate
    const std::string uniform = "'{\"kind\":\"uniform\"}'";
    const std::string zonal2 = "'{\"kind\":\"zonal\",\"components\":[[2,0.1]],\"axis\":[0,0,1]}'";
    check(run("estimate --density " + uniform + " --r 1 --J 2 --n 500 --seed 3", out1) == 0,
          "estimate on the uniform density exits 0");
    {
        const auto est = nlohmann::json::parse(slurp(out1));
        check(est.at("truth").get<double>() == 0.0, "uniform density has zero first-order energy");
    }
    check(run("estimate --density " + zonal2 + " --r 1 --J 3 --n 1000 --seed 3", out1) == 0,
          "estimate on the zonal density exits 0");
    {
        const auto est = nlohmann::json::parse(slurp(out1));
        check(std::abs(est.at("truth").get<double>() - 0.023873) < 1e-5,
              "zonal degree-2 truth matches the closed form");
    }
    run("estimate --density " + zonal2 + " --r 1 --J 3 --n 1000 --seed 3", out2);
    check(slurp(out1) == slurp(out2), "estimate is byte-identical under one seed");
    check(run("estimate --density '{\"kind\":\"zonal\",\"components\":[[2,0.9]]}' --seed 1") == 2,
          "invalid density spec exits 2");

    // lepski
    check(run("lepski --density " + zonal2 + " --r 0.5 --n 800 --seed 9 --C0 0.05 "
              "--J-min 1 --J-max 1",
              out1) == 0,
          "lepski with a one-level grid exits 0");
    {
        const auto lep = nlohmann::json::parse(slurp(out1));
        check(lep.at("J_hat").get<int>() == 1, "singleton grid returns its level");
        check(lep.at("C0").get<double>() == 0.05, "output echoes the threshold constant");
    }
    check(run("lepski --density " + zonal2 + " --r 0 --n 2000 --seed 9 --C0 0.05", out1) == 0,
          "lepski on the default grid exits 0");
    {
        const auto lep = nlohmann::json::parse(slurp(out1));
        const auto thresholds = lep.at("thresholds").get<std::vector<double>>();
        bool increasing = thresholds.size() > 1;
        for (std::size_t i = 1; i < thresholds.size(); ++i)
            increasing = increasing && thresholds[i] > thresholds[i - 1];
        check(increasing, "lepski thresholds increase strictly in the level");
    }
    check(run("lepski --density " + zonal2 + " --r 0 --n 500 --seed 9 --C0 nonsense") == 2,
          "malformed C0 exits 2");

    // oracle-table
    check(run("oracle-table --calibrate-switch", out1) == 0, "oracle-table exits 0");
    {
        std::istringstream table(slurp(out1));
        std::string line;
        std::getline(table, line);
        check(line == "s,n,J_star,J_adaptive,oracle_mse,adaptive_mse,c_bias,c_var",
              "oracle-table header is fixed");
        int rows = 0;
        bool levels_ok = true;
        while (std::getline(table, line)) {
            if (line.empty()) continue;
            ++rows;
            std::istringstream ls(line);
            std::string s_str, n_str, js_str, ja_str;
            std::getline(ls, s_str, ',');
            std::getline(ls, n_str, ',');
            std::getline(ls, js_str, ',');
            std::getline(ls, ja_str, ',');
            const long long n = std::stoll(n_str);
            const int expected = n <= 3000 ? 1 : 2;
            levels_ok = levels_ok && std::stoi(js_str) == expected && js_str == ja_str;
        }
        check(rows == 12, "oracle-table emits all twelve rows");
        check(levels_ok, "oracle-table levels switch from 1 to 2 between n=3000 and n=8000");
    }
    check(run("oracle-table --s 0.5") == 2, "oracle-table with s <= r exits 2");

    // experiment
    const std::string spec_path = (dir / "smoke_spec.json").string();
    {
        nlohmann::json spec{{"density", {{"kind", "uniform"}, {"components", nlohmann::json::array()}, {"axis", {0, 0, 1}}}},
                            {"r", 0.0},
                            {"sample_sizes", {300}},
                            {"replicates", 2},
                            {"seed", 4},
                            {"c0_policy", "fixed"},
                            {"c0", 0.05},
                            {"j_max_cap", 3}};
        std::ofstream(spec_path) << spec.dump(2);
    }
    const std::string listing = (dir / "listing.txt").string();
    const auto t0 = std::chrono::steady_clock::now();
    check(run("experiment --spec " + spec_path + " --output " + (dir / "run1").string(), listing) == 0,
          "experiment smoke spec exits 0");
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    check(secs < 60.0, "experiment smoke spec completes inside a minute");
    {
        std::istringstream ls(slurp(listing));
        std::string csv_path, json_path;
        std::getline(ls, csv_path);
        std::getline(ls, json_path);
        check(fs::exists(csv_path) && fs::exists(json_path),
              "experiment lists its outputs on standard output");
        run("experiment --spec " + spec_path + " --output " + (dir / "run2").string());
        const std::string csv2 = (dir / "run2" / fs::path(csv_path).filename()).string();
        check(slurp(csv_path) == slurp(csv2), "experiment reruns are byte-identical");
    }
    check(run("experiment --spec " + (dir / "nope.json").string()) == 2,
          "missing experiment spec exits 2");

    // config handling
    const std::string cfg_path = (dir / "config.json").string();
    std::ofstream(cfg_path) << R"({"seed": 3, "n": 400})";
    check(run("estimate --density " + zonal2 + " --r 0 --J 2 --config " + cfg_path, out1) == 0,
          "config file supplies seed and sample size");
    {
        const auto est = nlohmann::json::parse(slurp(out1));
        check(est.at("n").get<int>() == 400 && est.at("seed").get<std::uint64_t>() == 3,
              "config values reach the command");
    }
    run("estimate --density " + zonal2 + " --r 0 --J 2 --config " + cfg_path + " --n 600", out1);
    {
        const auto est = nlohmann::json::parse(slurp(out1));
        check(est.at("n").get<int>() == 600, "flags override the config file");
    }
    std::ofstream(cfg_path) << R"({"seed": 3, "wavelength": 7})";
    check(run("estimate --density " + zonal2 + " --config " + cfg_path) == 2,
          "unknown config keys are rejected");

    fs::remove_all(dir);
    std::cout << (g_failures == 0 ? "CLI TESTS PASSED\n" : "CLI TESTS FAILED\n");
    return g_failures == 0 ? 0 : 1;
}
