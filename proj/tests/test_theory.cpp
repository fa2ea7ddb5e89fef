#include <doctest.h>

#include <cmath>

#include "needlet/theory.hpp"

using namespace needlet;

namespace {

const std::vector<std::pair<double, long long>> kTableRows = [] {
    std::vector<std::pair<double, long long>> rows;
    for (const double s : {2.2, 2.6, 3.0})
        for (const long long n : {1000LL, 3000LL, 8000LL, 20000LL}) rows.push_back({s, n});
    return rows;
}();

}  // namespace

TEST_CASE("model mse formulas") {
    const RateModel m{.d = 2, .r = 1.0, .s = 2.5, .band_ratio = 2.0, .n = 4000};
    SUBCASE("exponents vanish at the base level") {
        const auto v = model_mse(m, 0);
        CHECK(v.bias2 == 1.0);
        CHECK(v.var == doctest::Approx(1.0 / 4000.0).epsilon(1e-15));
    }
    SUBCASE("spot value in a moderate-smoothness regime") {
        const auto v = model_mse(m, 2);
        CHECK(v.bias2 == doctest::Approx(std::pow(2.0, -12.0)).epsilon(1e-12));
        CHECK(v.var == doctest::Approx(4096.0 / 4000.0).epsilon(1e-12));
    }
    SUBCASE("bias falls and variance rises with the level") {
        for (int j = 0; j < 8; ++j) {
            CHECK(model_mse(m, j + 1).bias2 < model_mse(m, j).bias2);
            CHECK(model_mse(m, j + 1).var > model_mse(m, j).var);
        }
    }
    SUBCASE("invalid models rejected") {
        CHECK_THROWS_AS(model_mse({.d = 2, .r = 1.0, .s = 0.5, .band_ratio = 2.0, .n = 10}, 0),
                        std::invalid_argument);
        CHECK_THROWS_AS(model_mse({.d = 2, .r = 1.0, .s = 2.0, .band_ratio = 2.0, .n = 10,
                                   .c_bias = -1.0},
                                  0),
                        std::invalid_argument);
    }
}

TEST_CASE("oracle level") {
    SUBCASE("matches a direct comparison near the continuous balance point") {
        const RateModel m{.d = 2, .r = 1.0, .s = 2.2, .band_ratio = 2.0, .n = 8000};
        const ResolutionGrid grid{0, 4, 2.0};
        const int js = oracle_J(m, grid);
        const double m1 = model_mse(m, 1).mse;
        const double m2 = model_mse(m, 2).mse;
        CHECK(js == (m1 <= m2 ? 1 : 2));
    }
    SUBCASE("local optimality on the grid") {
        const RateModel m{.d = 2, .r = 1.0, .s = 2.6, .band_ratio = 2.0, .n = 100000};
        const ResolutionGrid grid{0, 5, 2.0};
        const int js = oracle_J(m, grid);
        const double best = model_mse(m, js).mse;
        if (js > grid.j_min) CHECK(best <= model_mse(m, js - 1).mse);
        if (js < grid.j_max) CHECK(best <= model_mse(m, js + 1).mse);
    }
    SUBCASE("never decreases with the sample size") {
        int prev = 0;
        for (const long long n : {100LL, 1000LL, 10000LL, 100000LL, 1000000LL}) {
            const RateModel m{.d = 2, .r = 1.0, .s = 2.2, .band_ratio = 2.0, .n = n};
            const int js = oracle_J(m, {0, 8, 2.0});
            CHECK(js >= prev);
            prev = js;
        }
    }
    SUBCASE("stays within one level of the continuous balance point") {
        for (const double s : {1.5, 2.2, 2.6, 3.0})
            for (const long long n : {1000LL, 20000LL, 500000LL}) {
                const RateModel m{.d = 2, .r = 1.0, .s = s, .band_ratio = 2.0, .n = n};
                const int js = oracle_J(m, {0, 10, 2.0});
                const double cont = std::log(static_cast<double>(n)) /
                                    ((2.0 * s + 6.0) * std::log(2.0));
                CHECK(std::abs(js - cont) <= 1.0);
            }
    }
}

TEST_CASE("adjacent-level adaptive surrogate") {
    SUBCASE("unreachable bias keeps the top level") {
        const RateModel m{.d = 2, .r = 1.0, .s = 2.5, .band_ratio = 2.0, .n = 1000,
                          .c_bias = 1e12};
        CHECK(model_adaptive_J(m, {0, 3, 2.0}) == 3);
    }
    SUBCASE("tracks the oracle at default constants") {
        const RateModel m{.d = 2, .r = 1.0, .s = 3.0, .band_ratio = 2.0, .n = 20000};
        const ResolutionGrid grid{0, 4, 2.0};
        const int js = oracle_J(m, grid);
        const int ja = model_adaptive_J(m, grid);
        CHECK(ja >= js - 1);
        CHECK(ja <= js + 1);
    }
}

TEST_CASE("rate exponent") {
    CHECK(rate_exponent(2.5, 1.0, 2) == doctest::Approx(-6.0 / 11.0).epsilon(1e-12));
    CHECK(rate_exponent(1e9, 1.0, 2) == doctest::Approx(-2.0).epsilon(1e-6));
    CHECK(rate_exponent(1.0 + 1e-9, 1.0, 2) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK_THROWS_AS(rate_exponent(1.0, 1.0, 2), std::invalid_argument);
}

TEST_CASE("oracle table structure under switch calibration") {
    TableOptions opt;
    opt.calibrate_switch = true;
    const auto table = oracle_table(kTableRows, opt);
    REQUIRE(table.size() == 12);
    for (const auto& row : table) {
        const int expected = (row.n <= 3000) ? 1 : 2;
        CHECK(row.j_star == expected);
        CHECK(row.j_adaptive == row.j_star);
        const double ratio = row.adaptive_mse / row.oracle_mse;
        CHECK(ratio >= 1.0);
        CHECK(ratio <= 1.15);
    }
    // risks fall strictly with n within each smoothness
    for (std::size_t base = 0; base < 12; base += 4)
        for (std::size_t i = base + 1; i < base + 4; ++i)
            CHECK(table[i].oracle_mse < table[i - 1].oracle_mse);
}

TEST_CASE("rate fitting") {
    SUBCASE("perfect power law") {
        std::vector<std::pair<double, double>> pts;
        for (const double n : {100.0, 500.0, 2500.0, 12500.0}) pts.push_back({n, std::pow(n, -0.5)});
        CHECK(fit_rate(pts) == doctest::Approx(-0.5).epsilon(1e-12));
    }
    SUBCASE("coincident abscissae give slope zero") {
        const std::vector<std::pair<double, double>> pts{{100.0, 2.0}, {100.0, 2.0}};
        CHECK(fit_rate(pts) == 0.0);
    }
    SUBCASE("input validation") {
        CHECK_THROWS_AS(fit_rate(std::vector<std::pair<double, double>>{{100.0, 1.0}}),
                        std::invalid_argument);
        CHECK_THROWS_AS(fit_rate(std::vector<std::pair<double, double>>{{100.0, 1.0}, {10.0, -1.0}}),
                        std::invalid_argument);
    }
    SUBCASE("model risks over a mixed sample-size grid recover the rate") {
        TableOptions opt;
        opt.calibrate_switch = true;
        const double s = 2.6;
        const RateModel base{.d = 2, .r = 1.0, .s = s, .band_ratio = 2.0, .n = 1,
                             .c_bias = switch_calibrated_c_bias(s, opt), .c_var = 1.0};
        std::vector<std::pair<double, double>> pts;
        for (const double n : {1e3, 3e3, 8e3, 2e4, 1e5, 1e6}) {
            RateModel m = base;
            m.n = static_cast<long long>(n);
            const auto grid = default_grid(static_cast<int>(n), 2, 1.0, 2.0);
            pts.push_back({n, model_mse(m, oracle_J(m, grid)).mse});
        }
        const double slope = fit_rate(pts);
        const double target = rate_exponent(s, 1.0, 2);
        CHECK(std::abs(slope - target) <= 0.15 * std::abs(target));
    }
    SUBCASE("rate recovery across smoothness levels on period-matched grids") {
        TableOptions opt;
        opt.calibrate_switch = true;
        for (const double s : {2.2, 2.6, 3.0}) {
            const double period = std::pow(2.0, 2.0 * s + 6.0);
            std::vector<std::pair<double, double>> pts;
            for (const double n : {1e3, 1e3 * std::sqrt(period), 1e3 * period}) {
                RateModel m{.d = 2, .r = 1.0, .s = s, .band_ratio = 2.0,
                            .n = static_cast<long long>(n),
                            .c_bias = switch_calibrated_c_bias(s, opt), .c_var = 1.0};
                const auto grid = default_grid(static_cast<int>(n), 2, 1.0, 2.0);
                pts.push_back({n, model_mse(m, oracle_J(m, grid)).mse});
            }
            const double slope = fit_rate(pts);
            const double target = rate_exponent(s, 1.0, 2);
            CHECK(std::abs(slope - target) <= 0.15 * std::abs(target));
        }
    }
}
