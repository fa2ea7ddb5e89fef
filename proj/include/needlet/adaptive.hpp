#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "needlet/estimator.hpp"

namespace needlet {

struct ResolutionGrid {
    int j_min = 0;
    int j_max = 0;
    double band_ratio = 2.0;

    int size() const { return j_max - j_min + 1; }
};

/// Grid {0, ..., floor(ln n / ((d+4r) ln B))}; the cap keeps the top-level
/// variance term O(1).
ResolutionGrid default_grid(int n, int d, double r, double band_ratio);

/// Enforces j_min <= j_max and the variance guard
/// j_max <= floor(ln n / ((d+4r) ln B)) + 1.
void validate_grid(const ResolutionGrid& grid, int n, int d, double r);

struct LepskiConfig {
    double c0 = 1.0;
    ResolutionGrid grid;
    double r = 0.0;
    int d = 2;
};

/// Fluctuation threshold omega(J) = C0 n^{-1/2} B^{J(d/2 + 2r)}.
double omega(int level, int n, const LepskiConfig& cfg);

/// Lepski rule: the smallest J in the grid whose estimate is within omega(J')
/// of every finer estimate; J_max (vacuously admissible) when no smaller
/// level qualifies. The map must cover the whole grid.
int select_J(const std::map<int, double>& estimates, const LepskiConfig& cfg, int n);
int select_J(const std::map<int, TruncatedEstimate>& estimates, const LepskiConfig& cfg, int n);

struct AdaptiveEstimate {
    double value = 0.0;
    int j_hat = 0;
    std::vector<double> level_values;  // T-hat^(J) for J = j_min..j_max
    std::vector<double> thresholds;    // omega(J) on the same grid
};

/// Computes the whole nested family from one split of the sample and applies
/// the selector.
AdaptiveEstimate adaptive_estimate(const SphericalSample& sample, const Frame& frame,
                                   const LepskiConfig& cfg, std::uint64_t split_seed = 0);

/// Pilot calibration of the threshold constant:
/// C0 = kappa * max_J sd(T-hat^(J) - T-hat^(J+1)) * sqrt(n) * B^{-(J+1)(d/2+2r)},
/// with the sd taken over Monte Carlo replicates on the pilot density.
/// Throws std::runtime_error when the calibration is degenerate (C0 = 0).
double calibrate_C0(const TestDensity& pilot, const Frame& frame, double r, int n,
                    int replicates, std::uint64_t seed, const ResolutionGrid& grid,
                    double kappa = 2.6, int threads = 1);

/// The C0 formula applied to precomputed per-replicate level contributions
/// (contributions[rep][j] = sum_k beta1 beta2 at level j); the seam the
/// Monte Carlo wrapper feeds.
double calibrate_C0_from_contributions(const std::vector<std::vector<double>>& contributions,
                                       const ResolutionGrid& grid, double r, int n,
                                       double kappa);

}  // namespace needlet
