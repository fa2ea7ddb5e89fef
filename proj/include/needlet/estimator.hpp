#pragma once

#include <cstdint>
#include <vector>

#include "needlet/densities.hpp"
#include "needlet/frame.hpp"

namespace needlet {

struct EstimatorConfig {
    double r = 0.0;
    int max_level = 0;  // truncation resolution J
    std::uint64_t split_seed = 0;
    bool include_mean_term = true;  // the deterministic a_{0,0}^2 term; only for r = 0

    EstimatorConfig(double r_, int max_level_, std::uint64_t split_seed_)
        : r(r_), max_level(max_level_), split_seed(split_seed_), include_mean_term(r_ == 0.0) {}
};

struct TruncatedEstimate {
    double value = 0.0;
    std::vector<double> per_level;  // cross-product contribution of each level
    double mean_term = 0.0;
    int n = 0;
    EstimatorConfig config;
};

/// Seeded-permutation split into disjoint halves of sizes ceil(n/2) and
/// floor(n/2); robust to ordered inputs.
std::pair<std::vector<Vec3>, std::vector<Vec3>> split_sample(const std::vector<Vec3>& points,
                                                             std::uint64_t split_seed);

/// Empirical Sobolev-needlet coefficients of one half-sample:
/// beta_{j,k} = (1/|D|) sum_{x in D} psi^(r)_{j,k}(x), for every j <= max_level.
Coefficients empirical_coefficients(const Frame& frame, const SphericalSample& half,
                                    double r, int max_level);

/// The nested family { T-hat^(J) : J <= max_level } computed from a single
/// seeded-permutation split of the sample.
struct NestedEstimates {
    std::vector<double> per_level;  // sum_k beta1 beta2 at each level
    std::vector<double> values;     // values[J] = mean term + sum_{j<=J} per_level[j]
    double mean_term = 0.0;
    double r = 0.0;
    int n = 0;
    std::uint64_t split_seed = 0;
};

NestedEstimates nested_estimates(const SphericalSample& sample, const Frame& frame,
                                 double r, int max_level, std::uint64_t split_seed,
                                 bool include_mean_term = true);

/// Split-sample estimator of the truncated Sobolev functional.
TruncatedEstimate estimate_truncated(const SphericalSample& sample, const Frame& frame,
                                     const EstimatorConfig& cfg);

/// Exact truncated target for a bandlimited density (mean term included
/// when r = 0), the quantity the estimator is unbiased for.
double truncated_exact(const TestDensity& f, const Frame& frame, double r, int max_level);

struct RiskReport {
    int n = 0;
    int replicates = 0;
    double r = 0.0;
    int max_level = 0;
    double truth = 0.0;
    double mean_estimate = 0.0;
    double bias = 0.0;
    double variance = 0.0;
    double mse = 0.0;
    double se_mean = 0.0;      // standard error of the replicate mean
    double se_variance = 0.0;  // jackknife
    double se_mse = 0.0;       // jackknife
};

void to_json(nlohmann::json& j, const RiskReport& report);

/// Fixed CSV row form "n,r,J,bias,var,mse,se" for risk sweeps.
std::string risk_report_csv_header();
std::string risk_report_csv_row(const RiskReport& report);

/// Monte Carlo risk of the estimator against exact_T(f, r); replicate k uses
/// RNG stream k and a derived split seed, so the report is a pure function
/// of (f, frame, cfg, n, replicates, seed).
RiskReport mc_risk(const TestDensity& f, const Frame& frame, const EstimatorConfig& cfg,
                   int n, int replicates, std::uint64_t seed, int threads = 1);

}  // namespace needlet
