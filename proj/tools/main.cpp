#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "needlet/adaptive.hpp"
#include "needlet/harness.hpp"
#include "needlet/theory.hpp"

using namespace needlet;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file: " + path);
    json cfg;
    in >> cfg;
    if (!cfg.is_object()) throw UsageError("config must be a flat JSON object");
    return cfg;
}

/// Flags override config; a config value counts as "given" for required keys.
class Settings {
  public:
    Settings(json cfg, const std::set<std::string>& known) : cfg_(std::move(cfg)) {
        for (const auto& [key, value] : cfg_.items()) {
            if (!known.count(key)) throw UsageError("unknown config key: " + key);
            (void)value;
        }
    }

    template <typename T>
    T resolve(const CLI::Option* opt, const T& flag_value, const std::string& key,
              const T& fallback) const {
        if (opt->count() > 0) return flag_value;
        if (cfg_.contains(key)) return cfg_.at(key).get<T>();
        return fallback;
    }

    bool provided(const CLI::Option* opt, const std::string& key) const {
        return opt->count() > 0 || cfg_.contains(key);
    }

  private:
    json cfg_;
};

DensityDescriptor parse_density(const std::string& text) {
    json j;
    if (!text.empty() && text.front() == '{') {
        j = json::parse(text);
    } else {
        std::ifstream in(text);
        if (!in) throw UsageError("cannot read density file: " + text);
        in >> j;
    }
    return j.get<DensityDescriptor>();
}

std::string format_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int cmd_frame_check(double band_ratio, int max_level, std::uint64_t seed, const std::string& output) {
    if (!(band_ratio > 1.0)) throw UsageError("frame-check: B must exceed 1");
    if (max_level < 0) throw UsageError("frame-check: J_max must be nonnegative");
    const Frame frame(band_ratio, max_level);
    json report = frame.summary();
    bool all_pass = true;

    // Partition of unity over every degree the frame fully covers.
    {
        const int l_cap = static_cast<int>(std::floor(std::pow(band_ratio, max_level)));
        double worst = 0.0;
        for (int l = 1; l <= l_cap; ++l) {
            double s = 0.0;
            for (int j = 0; j <= max_level; ++j)
                s += frame.window().squared(l / std::pow(band_ratio, j));
            worst = std::max(worst, std::abs(s - 1.0));
        }
        const bool pass = worst <= 1e-12;
        report["partition_of_unity"] = {{"max_error", worst}, {"pass", pass}};
        all_pass = all_pass && pass;
    }

    // Per-level cubature health: positive weights, total mass, exactness spot
    // checks on random harmonics.
    {
        Rng rng(seed);
        json levels = json::array();
        bool pass = true;
        for (int j = 0; j <= max_level; ++j) {
            const auto& lvl = frame.level(j);
            double mass = 0.0;
            bool positive = true;
            for (const double w : lvl.rule.weights) {
                positive = positive && w > 0.0;
                mass += w;
            }
            double worst = 0.0;
            const int degree = lvl.rule.exactness_degree;
            for (int t = 0; t < 100; ++t) {
                const int l = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(degree));
                const int m = static_cast<int>(rng.next_u64() % (2 * l + 1)) - l;
                const double v =
                    integrate(lvl.rule, [&](const Vec3& x) { return eval_harmonic({l, m}, x); });
                worst = std::max(worst, std::abs(v));
            }
            const bool lvl_pass = positive && std::abs(mass - kFourPi) <= 1e-10 && worst <= 1e-10;
            pass = pass && lvl_pass;
            levels.push_back({{"level", j},
                              {"mass_error", std::abs(mass - kFourPi)},
                              {"max_exactness_residual", worst},
                              {"pass", lvl_pass}});
        }
        report["cubature"] = {{"levels", levels}, {"pass", pass}};
        all_pass = all_pass && pass;
    }

    // Tight-frame energy on random zero-mean bandlimited functions.
    {
        Rng rng(seed + 1);
        const int deg = std::min(16, static_cast<int>(std::floor(std::pow(band_ratio, max_level))));
        double worst = 0.0;
        bool pass = deg >= 1;
        if (deg >= 1) {
            for (int rep = 0; rep < 20; ++rep) {
                HarmonicExpansion g(deg);
                double norm2 = 0.0;
                for (int l = 1; l <= deg; ++l)
                    for (int m = -l; m <= l; ++m) {
                        const double a = rng.uniform(-1.0, 1.0);
                        g.set_coeff(l, m, a);
                        norm2 += a * a;
                    }
                const int cover = frame.covering_level(deg);
                const double energy = frame_energy(frame.analyze(g, 0.0, cover), cover);
                worst = std::max(worst, std::abs(energy - norm2) / norm2);
            }
            pass = worst <= 1e-9;
        }
        report["tight_frame"] = {{"max_relative_error", worst}, {"pass", pass}};
        all_pass = all_pass && pass;
    }

    // Lp scaling of the atoms across levels (needs a few levels to slope).
    if (max_level >= 3) {
        std::vector<double> l1, l2, linf;
        for (int j = 2; j <= std::min(5, max_level); ++j) {
            const auto& lvl = frame.level(j);
            const int k = static_cast<int>(lvl.node_count() / 2);
            l1.push_back(integrate(
                lvl.rule, [&](const Vec3& x) { return std::abs(frame.eval_atom(j, k, 0.0, x)); }));
            l2.push_back(std::sqrt(integrate(lvl.rule, [&](const Vec3& x) {
                const double v = frame.eval_atom(j, k, 0.0, x);
                return v * v;
            })));
            double sup = 0.0;
            for (std::size_t q = 0; q < lvl.node_count(); ++q)
                sup = std::max(sup, std::abs(frame.eval_atom(j, k, 0.0, lvl.rule.nodes[q])));
            linf.push_back(sup);
        }
        bool pass = true;
        double w1 = 0.0, w2 = 0.0, winf = 0.0;
        const double lb = std::log2(band_ratio);
        for (std::size_t i = 1; i < l1.size(); ++i) {
            w1 = std::max(w1, std::abs(std::log2(l1[i] / l1[i - 1]) / lb + 1.0));
            w2 = std::max(w2, std::abs(std::log2(l2[i] / l2[i - 1]) / lb));
            winf = std::max(winf, std::abs(std::log2(linf[i] / linf[i - 1]) / lb - 1.0));
        }
        pass = w1 <= 0.3 && w2 <= 0.3 && winf <= 0.3;
        report["lp_scaling"] = {{"l1_deviation", w1},
                                {"l2_deviation", w2},
                                {"sup_deviation", winf},
                                {"pass", pass}};
        all_pass = all_pass && pass;
    } else {
        report["lp_scaling"] = {{"skipped", true}};
    }

    report["pass"] = all_pass;
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!output.empty() && output != "-") {
        file.open(output);
        if (!file) throw std::runtime_error("cannot write report: " + output);
        os = &file;
    }
    *os << report.dump(2) << '\n';
    return all_pass ? kExitOk : kExitRuntime;
}

int cmd_estimate(const DensityDescriptor& desc, double r, int level, int n, std::uint64_t seed,
                 double band_ratio, const std::string& output) {
    const TestDensity density = density_from_descriptor(desc);
    const Frame frame(band_ratio, level);
    const auto sample = draw_sample(density, n, seed);
    const EstimatorConfig cfg(r, level, derive_seed(seed, 1));
    const auto est = estimate_truncated(sample, frame, cfg);
    const double truth = exact_T(density, r);
    json out{{"value", est.value},
             {"truth", truth},
             {"error", est.value - truth},
             {"truncated_truth", truncated_exact(density, frame, r, level)},
             {"per_level", est.per_level},
             {"mean_term", est.mean_term},
             {"n", n},
             {"r", r},
             {"J", level},
             {"seed", seed},
             {"density", desc}};
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!output.empty() && output != "-") {
        file.open(output);
        if (!file) throw std::runtime_error("cannot write output: " + output);
        os = &file;
    }
    *os << out.dump(2) << '\n';
    return kExitOk;
}

int cmd_lepski(const DensityDescriptor& desc, double r, int n, std::uint64_t seed,
               const std::string& c0_policy, double kappa, int j_min, int j_max,
               int calibration_replicates, double band_ratio, const std::string& output) {
    const TestDensity density = density_from_descriptor(desc);
    ResolutionGrid grid = default_grid(n, 2, r, band_ratio);
    if (j_min >= 0) grid.j_min = j_min;
    if (j_max >= 0) grid.j_max = std::min(grid.j_max, j_max);
    validate_grid(grid, n, 2, r);
    const Frame frame(band_ratio, grid.j_max);

    double c0;
    if (c0_policy == "calibrate") {
        c0 = calibrate_C0(uniform_density(), frame, r, n, calibration_replicates,
                          derive_seed(seed, 2), grid, kappa);
    } else {
        try {
            std::size_t pos = 0;
            c0 = std::stod(c0_policy, &pos);
            if (pos != c0_policy.size()) throw std::invalid_argument(c0_policy);
        } catch (const std::exception&) {
            throw UsageError("lepski: --C0 must be a number or 'calibrate'");
        }
        if (!(c0 > 0.0)) throw UsageError("lepski: C0 must be positive");
    }

    const auto sample = draw_sample(density, n, seed);
    const LepskiConfig cfg{.c0 = c0, .grid = grid, .r = r, .d = 2};
    const auto est = adaptive_estimate(sample, frame, cfg, derive_seed(seed, 1));
    json out{{"J_hat", est.j_hat},
             {"value", est.value},
             {"per_level_estimates", est.level_values},
             {"thresholds", est.thresholds},
             {"C0", c0},
             {"grid", {{"J_min", grid.j_min}, {"J_max", grid.j_max}}},
             {"truth", exact_T(density, r)},
             {"n", n},
             {"r", r},
             {"seed", seed},
             {"density", desc}};
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!output.empty() && output != "-") {
        file.open(output);
        if (!file) throw std::runtime_error("cannot write output: " + output);
        os = &file;
    }
    *os << out.dump(2) << '\n';
    return kExitOk;
}

int cmd_oracle_table(const std::vector<double>& s_values, const std::vector<long long>& n_values,
                     const TableOptions& opt) {
    for (const double s : s_values)
        if (!(s > opt.r)) throw UsageError("oracle-table: every s must exceed r");
    std::vector<std::pair<double, long long>> rows;
    for (const double s : s_values)
        for (const long long n : n_values) rows.push_back({s, n});
    const auto table = oracle_table(rows, opt);
    std::cout << "s,n,J_star,J_adaptive,oracle_mse,adaptive_mse,c_bias,c_var\n";
    for (const auto& row : table) {
        const double c_bias =
            opt.calibrate_switch ? switch_calibrated_c_bias(row.s, opt) : opt.c_bias;
        std::cout << row.s << ',' << row.n << ',' << row.j_star << ',' << row.j_adaptive << ','
                  << format_g(row.oracle_mse) << ',' << format_g(row.adaptive_mse) << ','
                  << format_g(c_bias) << ',' << format_g(opt.c_var) << '\n';
    }
    return kExitOk;
}

int cmd_experiment(const std::string& spec_path, const std::string& output_dir,
                   const CLI::Option* seed_opt, std::uint64_t seed_override,
                   const CLI::Option* threads_opt, int threads_override) {
    std::ifstream in(spec_path);
    if (!in) throw UsageError("cannot read experiment spec: " + spec_path);
    json j;
    in >> j;
    ExperimentSpec spec = j.get<ExperimentSpec>();
    if (seed_opt->count() > 0) spec.seed = seed_override;
    if (threads_opt->count() > 0) spec.threads = threads_override;

    const auto curve = run_experiment(spec);
    std::filesystem::create_directories(output_dir);
    const auto stem = std::filesystem::path(spec_path).stem().string();
    const std::string csv = (std::filesystem::path(output_dir) / (stem + "_risk.csv")).string();
    const std::string meta = (std::filesystem::path(output_dir) / (stem + "_run.json")).string();
    export_results(curve, csv, meta);
    std::cout << csv << '\n' << meta << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Needlet estimation of quadratic Sobolev functionals on the sphere"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    std::string config_path;
    app.add_option("--config", config_path, "flat JSON config merged under the flags");
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (required for randomized commands)");
    int threads = 1;
    auto* threads_opt = app.add_option("--threads", threads, "worker thread cap");
    std::string output;
    auto* output_opt = app.add_option("--output", output, "output file or directory");

    // frame-check
    auto* fc = app.add_subcommand("frame-check", "run frame diagnostics");
    double fc_B = 2.0;
    int fc_jmax = 4;
    auto* fc_B_opt = fc->add_option("--B", fc_B, "band ratio");
    auto* fc_j_opt = fc->add_option("--J-max", fc_jmax, "deepest level to build");

    // estimate
    auto* es = app.add_subcommand("estimate", "one truncated estimate on one sample");
    std::string es_density;
    double es_r = 0.0, es_B = 2.0;
    int es_J = 3, es_n = 1000;
    auto* es_density_opt = es->add_option("--density", es_density, "density JSON or file");
    auto* es_r_opt = es->add_option("--r", es_r, "Sobolev order");
    auto* es_J_opt = es->add_option("--J", es_J, "truncation level");
    auto* es_n_opt = es->add_option("--n", es_n, "sample size");
    auto* es_B_opt = es->add_option("--B", es_B, "band ratio");

    // lepski
    auto* lp = app.add_subcommand("lepski", "adaptive level selection on one sample");
    std::string lp_density, lp_c0 = "calibrate";
    double lp_r = 0.0, lp_B = 2.0, lp_kappa = 2.6;
    int lp_n = 1000, lp_jmin = -1, lp_jmax = -1, lp_cal_reps = 200;
    auto* lp_density_opt = lp->add_option("--density", lp_density, "density JSON or file");
    auto* lp_r_opt = lp->add_option("--r", lp_r, "Sobolev order");
    auto* lp_n_opt = lp->add_option("--n", lp_n, "sample size");
    auto* lp_c0_opt = lp->add_option("--C0", lp_c0, "threshold constant or 'calibrate'");
    auto* lp_kappa_opt = lp->add_option("--kappa", lp_kappa, "calibration safety factor");
    auto* lp_jmin_opt = lp->add_option("--J-min", lp_jmin, "grid floor");
    auto* lp_jmax_opt = lp->add_option("--J-max", lp_jmax, "grid cap");
    auto* lp_cal_opt = lp->add_option("--calibration-replicates", lp_cal_reps, "pilot replicates");
    auto* lp_B_opt = lp->add_option("--B", lp_B, "band ratio");

    // oracle-table
    auto* ot = app.add_subcommand("oracle-table", "asymptotic model oracle/adaptive table");
    std::vector<double> ot_s{2.2, 2.6, 3.0};
    std::vector<long long> ot_n{1000, 3000, 8000, 20000};
    double ot_r = 1.0, ot_B = 2.0, ot_cbias = 1.0, ot_cvar = 1.0, ot_switch_n = 7800.0;
    int ot_d = 2;
    bool ot_calibrate = false;
    auto* ot_s_opt = ot->add_option("--s", ot_s, "smoothness values");
    auto* ot_n_opt = ot->add_option("--n", ot_n, "sample sizes");
    auto* ot_r_opt = ot->add_option("--r", ot_r, "Sobolev order");
    auto* ot_d_opt = ot->add_option("--d", ot_d, "sphere dimension");
    auto* ot_B_opt = ot->add_option("--B", ot_B, "band ratio");
    auto* ot_cb_opt = ot->add_option("--c-bias", ot_cbias, "bias constant");
    auto* ot_cv_opt = ot->add_option("--c-var", ot_cvar, "variance constant");
    auto* ot_cal_opt = ot->add_flag("--calibrate-switch", ot_calibrate,
                                    "choose c_bias per s from the oracle switch point");
    auto* ot_sw_opt = ot->add_option("--switch-n", ot_switch_n, "switch sample size");

    // experiment
    auto* ex = app.add_subcommand("experiment", "run a Monte Carlo risk study from a spec file");
    std::string ex_spec;
    auto* ex_spec_opt = ex->add_option("--spec", ex_spec, "experiment spec JSON file");

    try {
        app.parse(argc, argv);

        static const std::set<std::string> kKnownKeys{
            "seed",    "threads", "output",  "B",       "J-max",   "density", "r",
            "J",       "n",       "C0",      "kappa",   "J-min",   "calibration-replicates",
            "s",       "d",       "c-bias",  "c-var",   "calibrate-switch", "switch-n",
            "spec"};
        const Settings settings(config_path.empty() ? json::object() : load_config(config_path),
                                kKnownKeys);

        seed = settings.resolve(seed_opt, seed, "seed", seed);
        threads = settings.resolve(threads_opt, threads, "threads", threads);
        output = settings.resolve(output_opt, output, "output", output);
        const bool have_seed = settings.provided(seed_opt, "seed");

        if (fc->parsed()) {
            if (!have_seed) throw UsageError("frame-check needs --seed (flag or config)");
            return cmd_frame_check(settings.resolve(fc_B_opt, fc_B, "B", fc_B),
                                   settings.resolve(fc_j_opt, fc_jmax, "J-max", fc_jmax), seed,
                                   output);
        }
        if (es->parsed()) {
            if (!have_seed) throw UsageError("estimate needs --seed (flag or config)");
            const std::string density_text =
                settings.resolve(es_density_opt, es_density, "density", es_density);
            if (density_text.empty()) throw UsageError("estimate needs --density");
            return cmd_estimate(parse_density(density_text),
                                settings.resolve(es_r_opt, es_r, "r", es_r),
                                settings.resolve(es_J_opt, es_J, "J", es_J),
                                settings.resolve(es_n_opt, es_n, "n", es_n), seed,
                                settings.resolve(es_B_opt, es_B, "B", es_B), output);
        }
        if (lp->parsed()) {
            if (!have_seed) throw UsageError("lepski needs --seed (flag or config)");
            const std::string density_text =
                settings.resolve(lp_density_opt, lp_density, "density", lp_density);
            if (density_text.empty()) throw UsageError("lepski needs --density");
            return cmd_lepski(
                parse_density(density_text), settings.resolve(lp_r_opt, lp_r, "r", lp_r),
                settings.resolve(lp_n_opt, lp_n, "n", lp_n), seed,
                settings.resolve(lp_c0_opt, lp_c0, "C0", lp_c0),
                settings.resolve(lp_kappa_opt, lp_kappa, "kappa", lp_kappa),
                settings.resolve(lp_jmin_opt, lp_jmin, "J-min", lp_jmin),
                settings.resolve(lp_jmax_opt, lp_jmax, "J-max", lp_jmax),
                settings.resolve(lp_cal_opt, lp_cal_reps, "calibration-replicates", lp_cal_reps),
                settings.resolve(lp_B_opt, lp_B, "B", lp_B), output);
        }
        if (ot->parsed()) {
            TableOptions opt;
            opt.d = settings.resolve(ot_d_opt, ot_d, "d", ot_d);
            opt.r = settings.resolve(ot_r_opt, ot_r, "r", ot_r);
            opt.band_ratio = settings.resolve(ot_B_opt, ot_B, "B", ot_B);
            opt.c_bias = settings.resolve(ot_cb_opt, ot_cbias, "c-bias", ot_cbias);
            opt.c_var = settings.resolve(ot_cv_opt, ot_cvar, "c-var", ot_cvar);
            opt.calibrate_switch =
                settings.resolve(ot_cal_opt, ot_calibrate, "calibrate-switch", ot_calibrate);
            opt.switch_n = settings.resolve(ot_sw_opt, ot_switch_n, "switch-n", ot_switch_n);
            return cmd_oracle_table(settings.resolve(ot_s_opt, ot_s, "s", ot_s),
                                    settings.resolve(ot_n_opt, ot_n, "n", ot_n), opt);
        }
        if (ex->parsed()) {
            const std::string spec_path = settings.resolve(ex_spec_opt, ex_spec, "spec", ex_spec);
            if (spec_path.empty()) throw UsageError("experiment needs --spec");
            return cmd_experiment(spec_path, output.empty() ? "." : output, seed_opt, seed,
                                  threads_opt, threads);
        }
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
