#include "needlet/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "needlet/adaptive.hpp"
#include "needlet/parallel.hpp"

namespace needlet {

void to_json(nlohmann::json& j, const ExperimentSpec& spec) {
    j = nlohmann::json{{"density", spec.density},
                       {"r", spec.r},
                       {"band_ratio", spec.band_ratio},
                       {"j_min", spec.j_min},
                       {"j_max_cap", spec.j_max_cap},
                       {"j_max_offset", spec.j_max_offset},
                       {"sample_sizes", spec.sample_sizes},
                       {"replicates", spec.replicates},
                       {"seed", spec.seed},
                       {"c0_policy", spec.c0_policy},
                       {"c0", spec.c0},
                       {"calibration_replicates", spec.calibration_replicates},
                       {"kappa", spec.kappa},
                       {"threads", spec.threads}};
}

void from_json(const nlohmann::json& j, ExperimentSpec& spec) {
    spec.density = j.at("density").get<DensityDescriptor>();
    spec.r = j.at("r").get<double>();
    spec.sample_sizes = j.at("sample_sizes").get<std::vector<int>>();
    spec.replicates = j.at("replicates").get<int>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.band_ratio = j.value("band_ratio", 2.0);
    spec.j_min = j.value("j_min", 0);
    spec.j_max_cap = j.value("j_max_cap", -1);
    spec.j_max_offset = j.value("j_max_offset", 0);
    spec.c0_policy = j.value("c0_policy", std::string("calibrated"));
    spec.c0 = j.value("c0", 0.0);
    spec.calibration_replicates = j.value("calibration_replicates", 200);
    spec.kappa = j.value("kappa", 2.6);
    spec.threads = j.value("threads", 1);
}

namespace {

void validate_spec(const ExperimentSpec& spec) {
    if (spec.replicates < 2) throw std::invalid_argument("experiment: replicates < 2");
    if (spec.sample_sizes.empty()) throw std::invalid_argument("experiment: no sample sizes");
    if (!std::is_sorted(spec.sample_sizes.begin(), spec.sample_sizes.end()))
        throw std::invalid_argument("experiment: sample sizes must be ascending");
    for (int n : spec.sample_sizes)
        if (n < 2) throw std::invalid_argument("experiment: sample size < 2");
    if (spec.c0_policy != "calibrated" && spec.c0_policy != "fixed")
        throw std::invalid_argument("experiment: unknown C0 policy " + spec.c0_policy);
    if (spec.c0_policy == "fixed" && !(spec.c0 > 0.0))
        throw std::invalid_argument("experiment: fixed C0 must be positive");
}

ResolutionGrid grid_for(const ExperimentSpec& spec, int n) {
    ResolutionGrid grid = default_grid(n, 2, spec.r, spec.band_ratio);
    grid.j_min = spec.j_min;
    grid.j_max += spec.j_max_offset;
    if (spec.j_max_cap >= 0) grid.j_max = std::min(grid.j_max, spec.j_max_cap);
    if (grid.j_min > grid.j_max) grid.j_max = grid.j_min;
    return grid;
}

double jackknife_se_mse(const std::vector<double>& sq_errors, double q1) {
    const double R = static_cast<double>(sq_errors.size());
    double bar = 0.0;
    std::vector<double> loo(sq_errors.size());
    for (std::size_t i = 0; i < sq_errors.size(); ++i) {
        loo[i] = (q1 - sq_errors[i]) / (R - 1.0);
        bar += loo[i];
    }
    bar /= R;
    double ss = 0.0;
    for (const double v : loo) ss += (v - bar) * (v - bar);
    return std::sqrt((R - 1.0) / R * ss);
}

}  // namespace

RateModel fit_scenario_model(const TestDensity& f, const Frame& frame, double r,
                             const ResolutionGrid& grid, long long n, double c_var) {
    const double truth = exact_T(f, r);
    std::vector<double> bias2(static_cast<std::size_t>(grid.j_max) + 1, 0.0);
    double peak = 0.0;
    for (int j = 0; j <= grid.j_max; ++j) {
        const double b = truth - truncated_exact(f, frame, r, j);
        bias2[static_cast<std::size_t>(j)] = b * b;
        peak = std::max(peak, bias2[static_cast<std::size_t>(j)]);
    }
    int last = -1;
    for (int j = 0; j <= grid.j_max; ++j)
        if (bias2[static_cast<std::size_t>(j)] > 1e-24 * std::max(peak, 1.0)) last = j;

    RateModel m{.d = 2, .r = r, .s = r + 4.0, .band_ratio = grid.band_ratio, .n = n,
                .c_bias = 1e-300, .c_var = c_var};
    if (last < 0) return m;  // fully covered from j_min on: bias identically zero

    const double log_b = std::log(grid.band_ratio);
    if (last >= 1 && bias2[static_cast<std::size_t>(last - 1)] >
                         bias2[static_cast<std::size_t>(last)] * (1.0 + 1e-9)) {
        const double slope = std::log(bias2[static_cast<std::size_t>(last - 1)] /
                                      bias2[static_cast<std::size_t>(last)]) /
                             (4.0 * log_b);
        m.s = r + std::clamp(slope, 0.25, 16.0);
    }
    m.c_bias = bias2[static_cast<std::size_t>(last)] *
               std::pow(grid.band_ratio, 4.0 * last * (m.s - r));
    return m;
}

RiskCurve run_experiment(const ExperimentSpec& spec) {
    validate_spec(spec);
    const TestDensity density = density_from_descriptor(spec.density);
    const double truth = exact_T(density, spec.r);

    int frame_levels = 0;
    for (int n : spec.sample_sizes) frame_levels = std::max(frame_levels, grid_for(spec, n).j_max);
    const Frame frame(spec.band_ratio, frame_levels);

    // Pilot pass at the smallest n: threshold constant (when calibrated) and
    // the variance constant of the oracle rate model. C0 carries no
    // n-dependence, so one calibration serves the whole curve.
    const int n_cal = spec.sample_sizes.front();
    const ResolutionGrid cal_grid = grid_for(spec, n_cal);
    const TestDensity pilot = uniform_density();
    const std::uint64_t cal_seed = derive_seed(spec.seed, 0x9E1B);
    double c0 = spec.c0;
    if (spec.c0_policy == "calibrated") {
        c0 = calibrate_C0(pilot, frame, spec.r, n_cal, spec.calibration_replicates, cal_seed,
                          cal_grid, spec.kappa, spec.threads);
    }

    double c_var;
    {
        const int reps = std::max(50, std::min(spec.calibration_replicates, 200));
        std::vector<double> top(static_cast<std::size_t>(reps));
        for_each_index(top.size(), spec.threads, [&](std::size_t rep) {
            const SphericalSample s = draw_sample(pilot, n_cal, cal_seed + 1, rep);
            const NestedEstimates nested = nested_estimates(
                s, frame, spec.r, cal_grid.j_max, derive_seed(cal_seed + 1, rep));
            top[rep] = nested.values.back();
        });
        double s1 = 0.0, s2 = 0.0;
        for (const double v : top) {
            s1 += v;
            s2 += v * v;
        }
        const double var = (s2 - s1 * s1 / top.size()) / (static_cast<double>(top.size()) - 1.0);
        c_var = var * n_cal /
                std::pow(spec.band_ratio, cal_grid.j_max * (2.0 + 4.0 * spec.r));
        if (!(c_var > 0.0)) c_var = 1e-12;
    }

    RiskCurve curve;
    nlohmann::json per_n = nlohmann::json::array();
    for (std::size_t idx = 0; idx < spec.sample_sizes.size(); ++idx) {
        const int n = spec.sample_sizes[idx];
        const ResolutionGrid grid = grid_for(spec, n);
        const RateModel model = fit_scenario_model(density, frame, spec.r, grid, n, c_var);
        const int j_star = oracle_J(model, grid);
        const LepskiConfig lepski{.c0 = c0, .grid = grid, .r = spec.r, .d = 2};

        const std::uint64_t seed_n = derive_seed(spec.seed, idx);
        const std::size_t R = static_cast<std::size_t>(spec.replicates);
        std::vector<double> oracle_sq(R), adaptive_sq(R);
        std::vector<int> j_hats(R);
        for_each_index(R, spec.threads, [&](std::size_t rep) {
            const SphericalSample sample = draw_sample(density, n, seed_n, rep);
            const NestedEstimates nested = nested_estimates(
                sample, frame, spec.r, grid.j_max, derive_seed(seed_n, rep));
            std::map<int, double> values;
            for (int j = grid.j_min; j <= grid.j_max; ++j)
                values[j] = nested.values[static_cast<std::size_t>(j)];
            const int j_hat = select_J(values, lepski, n);
            j_hats[rep] = j_hat;
            const double e_oracle = values.at(j_star) - truth;
            const double e_adaptive = values.at(j_hat) - truth;
            oracle_sq[rep] = e_oracle * e_oracle;
            adaptive_sq[rep] = e_adaptive * e_adaptive;
        });

        RiskCurvePoint pt;
        pt.n = n;
        pt.j_star = j_star;
        pt.j_max = grid.j_max;
        double q_oracle = 0.0, q_adaptive = 0.0, jh = 0.0, over = 0.0;
        for (std::size_t rep = 0; rep < R; ++rep) {
            q_oracle += oracle_sq[rep];
            q_adaptive += adaptive_sq[rep];
            jh += j_hats[rep];
            if (j_hats[rep] > j_star) over += 1.0;
        }
        pt.oracle_risk = q_oracle / static_cast<double>(R);
        pt.adaptive_risk = q_adaptive / static_cast<double>(R);
        pt.mean_j_hat = jh / static_cast<double>(R);
        pt.freq_oversmooth = over / static_cast<double>(R);
        pt.se_oracle = jackknife_se_mse(oracle_sq, q_oracle);
        pt.se_adaptive = jackknife_se_mse(adaptive_sq, q_adaptive);
        curve.points.push_back(pt);

        per_n.push_back({{"n", n},
                         {"j_star", j_star},
                         {"j_max", grid.j_max},
                         {"model_s", model.s},
                         {"model_c_bias", model.c_bias},
                         {"seed", seed_n}});
    }

    curve.metadata = {{"spec", spec},
                      {"truth", truth},
                      {"c0", c0},
                      {"c_var", c_var},
                      {"calibration_seed", cal_seed},
                      {"frame", frame.summary()},
                      {"per_n", per_n}};
    return curve;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

}  // namespace

void export_results(const RiskCurve& curve, const std::string& csv_path,
                    const std::string& json_path) {
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw std::runtime_error("export_results: cannot open " + csv_path);
    csv << "n,oracle_risk,adaptive_risk,mean_J_hat,freq_oversmooth,se_oracle,se_adaptive\n";
    for (const RiskCurvePoint& pt : curve.points) {
        csv << pt.n << ',' << format_double(pt.oracle_risk) << ',' << format_double(pt.adaptive_risk)
            << ',' << format_double(pt.mean_j_hat) << ',' << format_double(pt.freq_oversmooth)
            << ',' << format_double(pt.se_oracle) << ',' << format_double(pt.se_adaptive) << '\n';
    }
    csv.close();
    if (!csv) throw std::runtime_error("export_results: write failed for " + csv_path);

    nlohmann::json out = curve.metadata;
    nlohmann::json pts = nlohmann::json::array();
    for (const RiskCurvePoint& pt : curve.points) {
        pts.push_back({{"n", pt.n},
                       {"oracle_risk", pt.oracle_risk},
                       {"adaptive_risk", pt.adaptive_risk},
                       {"mean_J_hat", pt.mean_j_hat},
                       {"freq_oversmooth", pt.freq_oversmooth},
                       {"se_oracle", pt.se_oracle},
                       {"se_adaptive", pt.se_adaptive},
                       {"j_star", pt.j_star},
                       {"j_max", pt.j_max}});
    }
    out["points"] = pts;
    std::ofstream js(json_path, std::ios::binary);
    if (!js) throw std::runtime_error("export_results: cannot open " + json_path);
    js << out.dump(2) << '\n';
    js.close();
    if (!js) throw std::runtime_error("export_results: write failed for " + json_path);
}

}  // namespace needlet
