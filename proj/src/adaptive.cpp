#include "needlet/adaptive.hpp"

#include <cmath>
#include <stdexcept>

#include "needlet/parallel.hpp"

namespace needlet {

ResolutionGrid default_grid(int n, int d, double r, double band_ratio) {
    if (n < 1) throw std::invalid_argument("default_grid: n < 1");
    if (!(band_ratio > 1.0)) throw std::invalid_argument("default_grid: band ratio must exceed 1");
    const int j_max = static_cast<int>(std::floor(std::log(static_cast<double>(n)) /
                                                  ((d + 4.0 * r) * std::log(band_ratio))));
    return {0, std::max(0, j_max), band_ratio};
}

void validate_grid(const ResolutionGrid& grid, int n, int d, double r) {
    if (grid.j_min < 0 || grid.j_min > grid.j_max)
        throw std::invalid_argument("grid: need 0 <= J_min <= J_max");
    const int guard = static_cast<int>(std::floor(std::log(static_cast<double>(n)) /
                                                  ((d + 4.0 * r) * std::log(grid.band_ratio)))) + 1;
    if (grid.j_max > guard)
        throw std::invalid_argument("grid: J_max violates the variance guard");
}

double omega(int level, int n, const LepskiConfig& cfg) {
    if (n < 1) throw std::invalid_argument("omega: n < 1");
    return cfg.c0 / std::sqrt(static_cast<double>(n)) *
           std::pow(cfg.grid.band_ratio, level * (cfg.d / 2.0 + 2.0 * cfg.r));
}

int select_J(const std::map<int, double>& estimates, const LepskiConfig& cfg, int n) {
    validate_grid(cfg.grid, n, cfg.d, cfg.r);
    for (int j = cfg.grid.j_min; j <= cfg.grid.j_max; ++j)
        if (estimates.find(j) == estimates.end())
            throw std::invalid_argument("select_J: estimates do not cover the grid");
    for (int j = cfg.grid.j_min; j <= cfg.grid.j_max; ++j) {
        bool admissible = true;
        const double v = estimates.at(j);
        for (int jp = j + 1; jp <= cfg.grid.j_max; ++jp) {
            if (std::abs(v - estimates.at(jp)) > omega(jp, n, cfg)) {
                admissible = false;
                break;
            }
        }
        if (admissible) return j;
    }
    return cfg.grid.j_max;  // unreachable: J_max is vacuously admissible
}

int select_J(const std::map<int, TruncatedEstimate>& estimates, const LepskiConfig& cfg, int n) {
    std::map<int, double> values;
    for (const auto& [j, est] : estimates) values[j] = est.value;
    return select_J(values, cfg, n);
}

AdaptiveEstimate adaptive_estimate(const SphericalSample& sample, const Frame& frame,
                                   const LepskiConfig& cfg, std::uint64_t split_seed) {
    const int n = static_cast<int>(sample.points.size());
    validate_grid(cfg.grid, n, cfg.d, cfg.r);
    const NestedEstimates nested =
        nested_estimates(sample, frame, cfg.r, cfg.grid.j_max, split_seed);
    std::map<int, double> values;
    AdaptiveEstimate out;
    for (int j = cfg.grid.j_min; j <= cfg.grid.j_max; ++j) {
        values[j] = nested.values[static_cast<std::size_t>(j)];
        out.level_values.push_back(values[j]);
        out.thresholds.push_back(omega(j, n, cfg));
    }
    out.j_hat = select_J(values, cfg, n);
    out.value = values.at(out.j_hat);
    return out;
}

double calibrate_C0_from_contributions(const std::vector<std::vector<double>>& contributions,
                                       const ResolutionGrid& grid, double r, int n,
                                       double kappa) {
    if (grid.size() < 2) throw std::invalid_argument("calibrate_C0: grid too small");
    const std::size_t R = contributions.size();
    if (R < 2) throw std::invalid_argument("calibrate_C0: need at least two replicates");
    double c0 = 0.0;
    for (int j = grid.j_min; j < grid.j_max; ++j) {
        const std::size_t lvl = static_cast<std::size_t>(j + 1);
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t rep = 0; rep < R; ++rep) {
            const double v = contributions[rep].at(lvl);
            s1 += v;
            s2 += v * v;
        }
        const double var = (s2 - s1 * s1 / static_cast<double>(R)) / (static_cast<double>(R) - 1.0);
        const double sd = std::sqrt(std::max(0.0, var));
        const double scaled = sd * std::sqrt(static_cast<double>(n)) *
                              std::pow(grid.band_ratio, -(j + 1) * (1.0 + 2.0 * r));
        c0 = std::max(c0, kappa * scaled);
    }
    if (!(c0 > 0.0) || !std::isfinite(c0))
        throw std::runtime_error("calibrate_C0: degenerate calibration, threshold must be positive");
    return c0;
}

double calibrate_C0(const TestDensity& pilot, const Frame& frame, double r, int n,
                    int replicates, std::uint64_t seed, const ResolutionGrid& grid,
                    double kappa, int threads) {
    if (replicates < 50) throw std::invalid_argument("calibrate_C0: need replicates >= 50");
    validate_grid(grid, n, 2, r);
    if (grid.size() < 2) throw std::invalid_argument("calibrate_C0: grid too small");
    const int j_top = grid.j_max;
    const std::size_t R = static_cast<std::size_t>(replicates);

    // T-hat^(J) - T-hat^(J+1) is minus the level-(J+1) contribution, so the
    // per-level cross products carry all adjacent differences.
    std::vector<std::vector<double>> level_contrib(R);
    for_each_index(R, threads, [&](std::size_t rep) {
        const SphericalSample sample = draw_sample(pilot, n, seed, rep);
        const NestedEstimates nested =
            nested_estimates(sample, frame, r, j_top, derive_seed(seed, rep));
        level_contrib[rep] = nested.per_level;
    });
    return calibrate_C0_from_contributions(level_contrib, grid, r, n, kappa);
}

}  // namespace needlet
