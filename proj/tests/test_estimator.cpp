#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "needlet/estimator.hpp"
#include "needlet/theory.hpp"

using namespace needlet;

TEST_CASE("seeded split is a disjoint cover with balanced sizes") {
    Rng rng(2);
    for (const int n : {2, 3, 101, 500}) {
        std::vector<Vec3> pts(static_cast<std::size_t>(n));
        for (auto& p : pts) p = rng.sphere_point();
        const auto [a, b] = split_sample(pts, 77);
        CHECK(a.size() == static_cast<std::size_t>((n + 1) / 2));
        CHECK(b.size() == static_cast<std::size_t>(n / 2));
        auto key = [](const Vec3& v) { return std::tuple{v.x, v.y, v.z}; };
        std::vector<std::tuple<double, double, double>> all;
        for (const auto& v : a) all.push_back(key(v));
        for (const auto& v : b) all.push_back(key(v));
        std::sort(all.begin(), all.end());
        std::vector<std::tuple<double, double, double>> orig;
        for (const auto& v : pts) orig.push_back(key(v));
        std::sort(orig.begin(), orig.end());
        CHECK(all == orig);
    }
}

TEST_CASE("empirical coefficients") {
    const Frame frame(2.0, 3);
    SUBCASE("single point reproduces the atom values") {
        Rng rng(5);
        SphericalSample s;
        s.points = {rng.sphere_point()};
        const auto coeffs = empirical_coefficients(frame, s, 1.0, 3);
        for (int j = 0; j <= 3; ++j)
            for (std::size_t k = 0; k < coeffs.levels[j].size(); k += 11)
                CHECK(coeffs.levels[j][k] ==
                      doctest::Approx(frame.eval_atom(j, static_cast<int>(k), 1.0, s.points[0]))
                          .epsilon(1e-11));
    }
    SUBCASE("uniform density coefficients are statistically zero") {
        const auto sample = draw_sample(uniform_density(), 20000, 7);
        const auto coeffs = empirical_coefficients(frame, sample, 1.0, 2);
        // per-coefficient z-test against the half-sample size
        for (int j = 0; j <= 2; ++j) {
            const auto& lvl = frame.level(j);
            for (std::size_t k = 0; k < coeffs.levels[j].size(); k += 5) {
                double s2 = 0.0;
                for (const Vec3& x : sample.points) {
                    const double v = frame.eval_atom(j, static_cast<int>(k), 1.0, x);
                    s2 += v * v;
                }
                const double sd = std::sqrt(s2 / static_cast<double>(sample.points.size()));
                CHECK(std::abs(coeffs.levels[j][k]) <=
                      5.0 * sd / std::sqrt(static_cast<double>(sample.points.size())));
            }
            (void)lvl;
        }
    }
    SUBCASE("replicate means match the exact coefficients") {
        const auto f = make_zonal_density(2, 0.1);
        const auto exact = frame.analyze(f.expansion(), 1.0, 2);
        const int reps = 300;
        const int n = 2000;
        for (const int j : {1, 2}) {
            const std::size_t k = frame.level(j).node_count() / 2;
            double s1 = 0.0, s2 = 0.0;
            for (int rep = 0; rep < reps; ++rep) {
                const auto sample = draw_sample(f, n, 31, static_cast<std::uint64_t>(rep));
                const auto coeffs = empirical_coefficients(frame, sample, 1.0, j);
                const double v = coeffs.levels[j][k];
                s1 += v;
                s2 += v * v;
            }
            const double mean = s1 / reps;
            const double se = std::sqrt((s2 - s1 * s1 / reps) / (reps - 1.0) / reps);
            CHECK(std::abs(mean - exact.levels[j][k]) <= 4.0 * se);
        }
    }
    SUBCASE("empty sample rejected") {
        SphericalSample s;
        CHECK_THROWS_AS(empirical_coefficients(frame, s, 0.0, 1), std::invalid_argument);
    }
}

TEST_CASE("truncated estimator") {
    const Frame frame(2.0, 3);
    SUBCASE("config picks the mean term automatically") {
        CHECK(EstimatorConfig(0.0, 2, 1).include_mean_term);
        CHECK(EstimatorConfig(0.5, 2, 1).include_mean_term == false);
    }
    SUBCASE("value decomposes into mean term plus level contributions") {
        const auto sample = draw_sample(make_zonal_density(2, 0.1), 400, 3);
        const auto est = estimate_truncated(sample, frame, EstimatorConfig(0.0, 3, 17));
        double total = est.mean_term;
        for (const double c : est.per_level) total += c;
        CHECK(est.value == doctest::Approx(total).epsilon(1e-15));
        CHECK(est.mean_term == doctest::Approx(1.0 / kFourPi).epsilon(1e-15));
    }
    SUBCASE("relabeling the halves leaves the estimate unchanged") {
        const auto sample = draw_sample(make_zonal_density(2, 0.1), 301, 5);
        const auto [h1, h2] = split_sample(sample.points, 23);
        SphericalSample a{h1, 0}, b{h2, 0};
        const auto ca = empirical_coefficients(frame, a, 1.0, 3);
        const auto cb = empirical_coefficients(frame, b, 1.0, 3);
        double ab = 0.0, ba = 0.0;
        for (int j = 0; j <= 3; ++j)
            for (std::size_t k = 0; k < ca.levels[j].size(); ++k) {
                ab += ca.levels[j][k] * cb.levels[j][k];
                ba += cb.levels[j][k] * ca.levels[j][k];
            }
        CHECK(ab == ba);
    }
    SUBCASE("uniform density recovers the mean energy") {
        const auto u = uniform_density();
        const EstimatorConfig cfg(0.0, 2, 29);
        const auto risk = mc_risk(u, frame, cfg, 500, 300, 41);
        CHECK(risk.truth == doctest::Approx(1.0 / kFourPi).epsilon(1e-14));
        CHECK(std::abs(risk.bias) <= 4.0 * risk.se_mean);
    }
    SUBCASE("determinism") {
        const auto sample = draw_sample(make_zonal_density(2, 0.1), 200, 5);
        const auto e1 = estimate_truncated(sample, frame, EstimatorConfig(1.0, 2, 9));
        const auto e2 = estimate_truncated(sample, frame, EstimatorConfig(1.0, 2, 9));
        CHECK(e1.value == e2.value);
        const auto e3 = estimate_truncated(sample, frame, EstimatorConfig(1.0, 2, 10));
        CHECK(e1.value != e3.value);  // a different split pairs differently
    }
    SUBCASE("sample too small") {
        SphericalSample s;
        s.points = {Vec3{0, 0, 1}};
        CHECK_THROWS_AS(estimate_truncated(s, frame, EstimatorConfig(0.0, 1, 1)),
                        std::invalid_argument);
    }
}

TEST_CASE("truncated exact targets") {
    const Frame frame(2.0, 4);
    const auto f = make_zonal_density(2, 0.1);
    SUBCASE("coverage recovers the full functional") {
        for (const double r : {0.0, 1.0, 2.0})
            CHECK(truncated_exact(f, frame, r, 4) == doctest::Approx(exact_T(f, r)).epsilon(1e-9));
    }
    SUBCASE("below the band everything vanishes for r > 0") {
        CHECK(truncated_exact(f, frame, 1.0, 0) == 0.0);
    }
    SUBCASE("monotone in the truncation level") {
        const auto g = make_multiband_density({{2, 0.05}, {8, 0.01}});
        double prev = 0.0;
        for (int J = 0; J <= 4; ++J) {
            const double cur = truncated_exact(g, frame, 1.0, J);
            CHECK(cur >= prev);
            prev = cur;
        }
    }
}

TEST_CASE("estimator is unbiased for the truncated target") {
    const Frame frame(2.0, 3);
    const auto f = make_zonal_density(2, 0.1);
    const int n = 2000;
    const int reps = 200;
    for (const double r : {0.0, 1.0}) {
        for (const int J : {1, 2, 3}) {
            const double target = truncated_exact(f, frame, r, J);
            double s1 = 0.0, s2 = 0.0;
            for (int rep = 0; rep < reps; ++rep) {
                const auto sample = draw_sample(f, n, 53, static_cast<std::uint64_t>(rep));
                EstimatorConfig cfg(r, J, derive_seed(53, static_cast<std::uint64_t>(rep)));
                const double v = estimate_truncated(sample, frame, cfg).value;
                s1 += v;
                s2 += v * v;
            }
            const double mean = s1 / reps;
            const double se = std::sqrt((s2 - s1 * s1 / reps) / (reps - 1.0) / reps);
            CHECK(std::abs(mean - target) <= 4.0 * se);
        }
    }
}

TEST_CASE("monte carlo risk scalings") {
    SUBCASE("no truncation bias under full coverage") {
        const Frame frame(2.0, 3);
        const auto f = make_zonal_density(2, 0.1);
        const auto risk = mc_risk(f, frame, EstimatorConfig(1.0, 3, 3), 1000, 300, 7);
        CHECK(std::abs(risk.bias) <= 4.0 * risk.se_mean);
    }
    SUBCASE("variance grows like B^{J(d+4r)} across levels") {
        const Frame frame(2.0, 4);
        const auto f = make_multiband_density({{16, 1.0 / 33.0}});
        std::vector<std::pair<double, double>> pts;
        for (int J = 1; J <= 4; ++J) {
            const auto risk = mc_risk(f, frame, EstimatorConfig(0.0, J, 5), 4000, 300, 11);
            pts.push_back({std::exp(static_cast<double>(J)), risk.variance});
        }
        const double slope = fit_rate(pts);
        const double target = 2.0 * std::log(2.0);
        CHECK(std::abs(slope - target) <= 0.35 * target);
    }
    SUBCASE("variance decays like 1/n") {
        const Frame frame(2.0, 2);
        const auto f = make_zonal_density(2, 0.1);
        const auto lo = mc_risk(f, frame, EstimatorConfig(0.0, 2, 5), 2000, 300, 13);
        const auto hi = mc_risk(f, frame, EstimatorConfig(0.0, 2, 5), 8000, 300, 17);
        const double ratio = hi.variance / lo.variance;
        CHECK(ratio >= 0.25 * 0.6);
        CHECK(ratio <= 0.25 * 1.6);
    }
    SUBCASE("reports are deterministic in the seed") {
        const Frame frame(2.0, 2);
        const auto f = make_zonal_density(2, 0.1);
        const auto a = mc_risk(f, frame, EstimatorConfig(0.0, 2, 5), 500, 100, 19);
        const auto b = mc_risk(f, frame, EstimatorConfig(0.0, 2, 5), 500, 100, 19);
        CHECK(a.mse == b.mse);
        CHECK(a.variance == b.variance);
    }
    SUBCASE("reports serialize to JSON and CSV rows") {
        const Frame frame(2.0, 2);
        const auto f = make_zonal_density(2, 0.1);
        const auto a = mc_risk(f, frame, EstimatorConfig(1.0, 2, 5), 400, 50, 19);
        const nlohmann::json j = a;
        CHECK(j.at("n").get<int>() == 400);
        CHECK(j.at("r").get<double>() == 1.0);
        CHECK(j.at("J").get<int>() == 2);
        CHECK(j.at("mse").get<double>() == a.mse);
        CHECK(risk_report_csv_header() == "n,r,J,bias,var,mse,se");
        const std::string row = risk_report_csv_row(a);
        CHECK(row.substr(0, 8) == "400,1,2,");
        CHECK(std::count(row.begin(), row.end(), ',') == 6);
    }
}
