#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "needlet/adaptive.hpp"

namespace needlet {

/// Parameters of the asymptotic MSE model
/// Bias^2(J) = c_bias B^{-4J(s-r)},  Var(J) = c_var B^{J(d+4r)} / n.
struct RateModel {
    int d = 2;
    double r = 0.0;
    double s = 1.0;  // must exceed r
    double band_ratio = 2.0;
    long long n = 1;
    double c_bias = 1.0;
    double c_var = 1.0;
};

void validate_model(const RateModel& m);

struct ModelMse {
    double bias2 = 0.0;
    double var = 0.0;
    double mse = 0.0;
};

ModelMse model_mse(const RateModel& m, int level);

/// Grid minimizer of the model MSE; ties break toward the smaller level.
int oracle_J(const RateModel& m, const ResolutionGrid& grid);

/// Deterministic adjacent-level surrogate of the Lepski rule on the model:
/// the smallest J with Bias^2(J) <= Var(J+1), else J_max.
int model_adaptive_J(const RateModel& m, const ResolutionGrid& grid);

/// Minimax rate exponent -4(s-r)/(2s+d+4r); requires s > r.
double rate_exponent(double s, double r, int d);

struct OracleTableRow {
    double s = 0.0;
    long long n = 0;
    int j_star = 0;
    int j_adaptive = 0;
    double oracle_mse = 0.0;
    double adaptive_mse = 0.0;
};

struct TableOptions {
    int d = 2;
    double r = 1.0;
    double band_ratio = 2.0;
    double c_var = 1.0;
    double c_bias = 1.0;
    /// When set, c_bias is chosen per row so the model's J = 1 -> 2 oracle
    /// switch sits at sample size switch_n for every smoothness.
    bool calibrate_switch = false;
    double switch_n = 7800.0;
};

double switch_calibrated_c_bias(double s, const TableOptions& opt);

std::vector<OracleTableRow> oracle_table(std::span<const std::pair<double, long long>> rows,
                                         const TableOptions& opt);

/// OLS slope of log(risk) on log(n). Requires at least two positive points;
/// returns 0 when the abscissae are all equal.
double fit_rate(std::span<const std::pair<double, double>> points);

}  // namespace needlet
