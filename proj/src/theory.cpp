#include "needlet/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace needlet {

void validate_model(const RateModel& m) {
    if (m.d < 1) throw std::invalid_argument("RateModel: d < 1");
    if (m.r < 0.0) throw std::invalid_argument("RateModel: r < 0");
    if (!(m.s > m.r)) throw std::invalid_argument("RateModel: need s > r");
    if (!(m.band_ratio > 1.0)) throw std::invalid_argument("RateModel: band ratio must exceed 1");
    if (m.n < 1) throw std::invalid_argument("RateModel: n < 1");
    if (!(m.c_bias > 0.0) || !(m.c_var > 0.0))
        throw std::invalid_argument("RateModel: constants must be positive");
}

ModelMse model_mse(const RateModel& m, int level) {
    validate_model(m);
    if (level < 0) throw std::invalid_argument("model_mse: J < 0");
    ModelMse out;
    out.bias2 = m.c_bias * std::pow(m.band_ratio, -4.0 * level * (m.s - m.r));
    out.var = m.c_var * std::pow(m.band_ratio, level * (m.d + 4.0 * m.r)) /
              static_cast<double>(m.n);
    out.mse = out.bias2 + out.var;
    return out;
}

int oracle_J(const RateModel& m, const ResolutionGrid& grid) {
    if (grid.j_min > grid.j_max) throw std::invalid_argument("oracle_J: empty grid");
    int best = grid.j_min;
    double best_mse = model_mse(m, grid.j_min).mse;
    for (int j = grid.j_min + 1; j <= grid.j_max; ++j) {
        const double mse = model_mse(m, j).mse;
        if (mse < best_mse) {
            best = j;
            best_mse = mse;
        }
    }
    return best;
}

int model_adaptive_J(const RateModel& m, const ResolutionGrid& grid) {
    if (grid.size() < 2) throw std::invalid_argument("model_adaptive_J: grid size < 2");
    for (int j = grid.j_min; j <= grid.j_max; ++j) {
        if (model_mse(m, j).bias2 <= model_mse(m, j + 1).var) return j;
    }
    return grid.j_max;
}

double rate_exponent(double s, double r, int d) {
    if (!(s > r)) throw std::invalid_argument("rate_exponent: need s > r");
    return -4.0 * (s - r) / (2.0 * s + d + 4.0 * r);
}

double switch_calibrated_c_bias(double s, const TableOptions& opt) {
    const double B = opt.band_ratio;
    const double a = opt.d + 4.0 * opt.r;
    const double g = std::pow(B, -4.0 * (s - opt.r)) - std::pow(B, -8.0 * (s - opt.r));
    return opt.c_var * (std::pow(B, 2.0 * a) - std::pow(B, a)) / (opt.switch_n * g);
}

std::vector<OracleTableRow> oracle_table(std::span<const std::pair<double, long long>> rows,
                                         const TableOptions& opt) {
    std::vector<OracleTableRow> out;
    out.reserve(rows.size());
    for (const auto& [s, n] : rows) {
        RateModel m{.d = opt.d,
                    .r = opt.r,
                    .s = s,
                    .band_ratio = opt.band_ratio,
                    .n = n,
                    .c_bias = opt.calibrate_switch ? switch_calibrated_c_bias(s, opt) : opt.c_bias,
                    .c_var = opt.c_var};
        validate_model(m);
        const ResolutionGrid grid =
            default_grid(static_cast<int>(n), opt.d, opt.r, opt.band_ratio);
        OracleTableRow row;
        row.s = s;
        row.n = n;
        row.j_star = oracle_J(m, grid);
        row.j_adaptive = model_adaptive_J(m, grid);
        row.oracle_mse = model_mse(m, row.j_star).mse;
        row.adaptive_mse = model_mse(m, row.j_adaptive).mse;
        out.push_back(row);
    }
    return out;
}

double fit_rate(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw std::invalid_argument("fit_rate: need at least two points");
    double sx = 0.0, sy = 0.0;
    for (const auto& [n, risk] : points) {
        if (!(n > 0.0) || !(risk > 0.0))
            throw std::invalid_argument("fit_rate: points must be positive");
        sx += std::log(n);
        sy += std::log(risk);
    }
    const double mx = sx / static_cast<double>(points.size());
    const double my = sy / static_cast<double>(points.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [n, risk] : points) {
        const double dx = std::log(n) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(risk) - my);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

}  // namespace needlet
