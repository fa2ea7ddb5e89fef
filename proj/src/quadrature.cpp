#include "needlet/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "needlet/harmonics.hpp"

namespace needlet {

GaussLegendre gauss_legendre(int npoints) {
    if (npoints < 1) throw std::invalid_argument("gauss_legendre: npoints < 1");
    const int n = npoints;
    GaussLegendre out;
    out.nodes.resize(n);
    out.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Chebyshev-based initial guess for the i-th root of P_n.
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        bool converged = false;
        for (int it = 0; it < 100; ++it) {
            // Evaluate P_n and P_{n-1} by recurrence.
            double p0 = 1.0, p1 = x;
            for (int l = 2; l <= n; ++l) {
                const double p2 = ((2 * l - 1) * x * p1 - (l - 1) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) <= 1e-14) {
                converged = true;
                break;
            }
        }
        if (!converged) throw std::runtime_error("gauss_legendre: Newton iteration did not converge");
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.nodes[i] = -x;  // roots found from the positive end; store ascending
        out.nodes[n - 1 - i] = x;
        out.weights[i] = w;
        out.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) out.nodes[half - 1] = 0.0;
    return out;
}

CubatureRule sphere_cubature(int degree) {
    if (degree < 0) throw std::invalid_argument("sphere_cubature: degree < 0");
    const int n_theta = (degree + 2) / 2;  // ceil((degree+1)/2)
    const int n_phi = degree + 1;
    const GaussLegendre gl = gauss_legendre(n_theta);

    CubatureRule rule;
    rule.exactness_degree = degree;
    rule.cos_colat = gl.nodes;
    rule.n_phi = n_phi;
    rule.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    rule.weights.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    const double wphi = 2.0 * kPi / n_phi;
    for (int i = 0; i < n_theta; ++i) {
        const double z = gl.nodes[i];
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        for (int b = 0; b < n_phi; ++b) {
            const double phi = 2.0 * kPi * b / n_phi;
            rule.nodes.push_back({s * std::cos(phi), s * std::sin(phi), z});
            rule.weights.push_back(gl.weights[i] * wphi);
        }
    }
    return rule;
}

double integrate(const CubatureRule& rule, const std::function<double(const Vec3&)>& f) {
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const double v = f(rule.nodes[k]);
        if (!std::isfinite(v)) throw std::domain_error("integrate: non-finite integrand value");
        acc += rule.weights[k] * v;
    }
    return acc;
}

}  // namespace needlet
