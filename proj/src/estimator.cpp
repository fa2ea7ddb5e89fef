#include "needlet/estimator.hpp"

#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "needlet/parallel.hpp"

namespace needlet {

std::pair<std::vector<Vec3>, std::vector<Vec3>> split_sample(
    const std::vector<Vec3>& points, std::uint64_t split_seed) {
    const std::size_t n = points.size();
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    Rng rng(split_seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
        std::swap(perm[i], perm[j]);
    }
    const std::size_t n1 = (n + 1) / 2;
    std::pair<std::vector<Vec3>, std::vector<Vec3>> halves;
    halves.first.reserve(n1);
    halves.second.reserve(n - n1);
    for (std::size_t i = 0; i < n; ++i)
        (i < n1 ? halves.first : halves.second).push_back(points[perm[i]]);
    return halves;
}

namespace {

std::vector<double> harmonic_means(const std::vector<Vec3>& pts, int max_degree) {
    std::vector<double> sums(static_cast<std::size_t>(max_degree + 1) * (max_degree + 1), 0.0);
    accumulate_harmonics(pts, max_degree, sums);
    return sums;
}

}  // namespace

Coefficients empirical_coefficients(const Frame& frame, const SphericalSample& half,
                                    double r, int max_level) {
    if (half.points.empty()) throw std::invalid_argument("empirical_coefficients: empty sample");
    if (max_level < 0 || max_level > frame.max_level())
        throw std::out_of_range("empirical_coefficients: level beyond the frame cap");
    const int L = frame.level(max_level).band_max;
    const std::vector<double> sums = harmonic_means(half.points, L);
    const double scale = 1.0 / static_cast<double>(half.points.size());
    Coefficients out;
    out.r = r;
    out.levels.resize(static_cast<std::size_t>(max_level) + 1);
    for (int j = 0; j <= max_level; ++j)
        out.levels[static_cast<std::size_t>(j)] = frame.level_coefficients(j, sums, L, r, scale);
    return out;
}

NestedEstimates nested_estimates(const SphericalSample& sample, const Frame& frame,
                                 double r, int max_level, std::uint64_t split_seed,
                                 bool include_mean_term) {
    if (sample.points.size() < 2) throw std::invalid_argument("nested_estimates: need n >= 2");
    if (max_level < 0 || max_level > frame.max_level())
        throw std::out_of_range("nested_estimates: level beyond the frame cap");
    if (r < 0.0) throw std::invalid_argument("nested_estimates: r < 0");

    const auto [first, second] = split_sample(sample.points, split_seed);
    const int L = frame.level(max_level).band_max;
    const std::vector<double> sums1 = harmonic_means(first, L);
    const std::vector<double> sums2 = harmonic_means(second, L);
    const double scale1 = 1.0 / static_cast<double>(first.size());
    const double scale2 = 1.0 / static_cast<double>(second.size());

    NestedEstimates out;
    out.r = r;
    out.n = static_cast<int>(sample.points.size());
    out.split_seed = split_seed;
    out.mean_term = (include_mean_term && r == 0.0) ? 1.0 / kFourPi : 0.0;
    out.per_level.resize(static_cast<std::size_t>(max_level) + 1);
    out.values.resize(static_cast<std::size_t>(max_level) + 1);
    double running = out.mean_term;
    for (int j = 0; j <= max_level; ++j) {
        const std::vector<double> b1 = frame.level_coefficients(j, sums1, L, r, scale1);
        const std::vector<double> b2 = frame.level_coefficients(j, sums2, L, r, scale2);
        double cross = 0.0;
        for (std::size_t k = 0; k < b1.size(); ++k) cross += b1[k] * b2[k];
        out.per_level[static_cast<std::size_t>(j)] = cross;
        running += cross;
        out.values[static_cast<std::size_t>(j)] = running;
    }
    return out;
}

TruncatedEstimate estimate_truncated(const SphericalSample& sample, const Frame& frame,
                                     const EstimatorConfig& cfg) {
    const NestedEstimates nested =
        nested_estimates(sample, frame, cfg.r, cfg.max_level, cfg.split_seed, cfg.include_mean_term);
    TruncatedEstimate est{.value = nested.values.back(),
                          .per_level = nested.per_level,
                          .mean_term = nested.mean_term,
                          .n = nested.n,
                          .config = cfg};
    return est;
}

double truncated_exact(const TestDensity& f, const Frame& frame, double r, int max_level) {
    const Coefficients coeffs = frame.analyze(f.expansion(), r, max_level);
    const double mean_term = (r == 0.0) ? 1.0 / kFourPi : 0.0;
    return mean_term + frame_energy(coeffs, max_level);
}

void to_json(nlohmann::json& j, const RiskReport& report) {
    j = nlohmann::json{{"n", report.n},
                       {"replicates", report.replicates},
                       {"r", report.r},
                       {"J", report.max_level},
                       {"truth", report.truth},
                       {"mean_estimate", report.mean_estimate},
                       {"bias", report.bias},
                       {"variance", report.variance},
                       {"mse", report.mse},
                       {"se_mean", report.se_mean},
                       {"se_variance", report.se_variance},
                       {"se_mse", report.se_mse}};
}

namespace {

std::string csv_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string risk_report_csv_header() { return "n,r,J,bias,var,mse,se"; }

std::string risk_report_csv_row(const RiskReport& report) {
    return std::to_string(report.n) + ',' + csv_double(report.r) + ',' +
           std::to_string(report.max_level) + ',' + csv_double(report.bias) + ',' +
           csv_double(report.variance) + ',' + csv_double(report.mse) + ',' +
           csv_double(report.se_mse);
}

RiskReport mc_risk(const TestDensity& f, const Frame& frame, const EstimatorConfig& cfg,
                   int n, int replicates, std::uint64_t seed, int threads) {
    if (replicates < 2) throw std::invalid_argument("mc_risk: need replicates >= 2");
    std::vector<double> estimates(static_cast<std::size_t>(replicates));
    for_each_index(static_cast<std::size_t>(replicates), threads, [&](std::size_t rep) {
        const SphericalSample sample = draw_sample(f, n, seed, rep);
        EstimatorConfig rep_cfg = cfg;
        rep_cfg.split_seed = derive_seed(cfg.split_seed, rep);
        estimates[rep] = estimate_truncated(sample, frame, rep_cfg).value;
    });

    const double truth = exact_T(f, cfg.r);
    const double R = static_cast<double>(replicates);
    double s1 = 0.0, s2 = 0.0, q1 = 0.0;
    for (const double v : estimates) {
        s1 += v;
        s2 += v * v;
        q1 += (v - truth) * (v - truth);
    }
    RiskReport rep;
    rep.n = n;
    rep.replicates = replicates;
    rep.r = cfg.r;
    rep.max_level = cfg.max_level;
    rep.truth = truth;
    rep.mean_estimate = s1 / R;
    rep.bias = rep.mean_estimate - truth;
    rep.variance = (s2 - s1 * s1 / R) / (R - 1.0);
    rep.mse = q1 / R;
    rep.se_mean = std::sqrt(std::max(0.0, rep.variance) / R);

    // Jackknife standard errors for the quadratic statistics.
    double var_bar = 0.0, mse_bar = 0.0;
    std::vector<double> var_loo(estimates.size()), mse_loo(estimates.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const double v = estimates[i];
        const double s1i = s1 - v, s2i = s2 - v * v;
        var_loo[i] = (s2i - s1i * s1i / (R - 1.0)) / (R - 2.0);
        mse_loo[i] = (q1 - (v - truth) * (v - truth)) / (R - 1.0);
        var_bar += var_loo[i];
        mse_bar += mse_loo[i];
    }
    var_bar /= R;
    mse_bar /= R;
    double var_ss = 0.0, mse_ss = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        var_ss += (var_loo[i] - var_bar) * (var_loo[i] - var_bar);
        mse_ss += (mse_loo[i] - mse_bar) * (mse_loo[i] - mse_bar);
    }
    rep.se_variance = std::sqrt((R - 1.0) / R * var_ss);
    rep.se_mse = std::sqrt((R - 1.0) / R * mse_ss);
    return rep;
}

}  // namespace needlet
