#pragma once

#include <functional>
#include <vector>

#include "needlet/sphere.hpp"

namespace needlet {

struct GaussLegendre {
    std::vector<double> nodes;    // in (-1, 1), ascending
    std::vector<double> weights;  // positive, sum to 2
};

/// Gauss-Legendre rule with npoints nodes, exact for polynomials of degree
/// <= 2*npoints - 1. Roots of P_n found by Newton iteration to 1e-14;
/// throws std::runtime_error if a root fails to converge in 100 iterations.
GaussLegendre gauss_legendre(int npoints);

/// Cubature rule on S^2. Nodes are laid out on the product grid
/// (Gauss-Legendre colatitudes) x (equal-angle longitudes), row-major:
/// node[i * n_phi + b] has cos(colatitude) = cos_colat[i] and longitude
/// 2*pi*b/n_phi. Weights are in steradians and sum to 4*pi.
struct CubatureRule {
    int exactness_degree = 0;
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    std::vector<double> cos_colat;
    int n_phi = 0;
};

/// Product rule exact for all spherical harmonics of degree <= degree.
CubatureRule sphere_cubature(int degree);

/// sum_k lambda_k f(xi_k); throws std::domain_error on a non-finite value.
double integrate(const CubatureRule& rule, const std::function<double(const Vec3&)>& f);

}  // namespace needlet
