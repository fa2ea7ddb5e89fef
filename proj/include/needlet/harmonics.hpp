#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "needlet/sphere.hpp"

namespace needlet {

/// Largest spherical-harmonic degree the evaluation routines accept.
inline constexpr int kDegreeCap = 512;

/// Laplace-Beltrami eigenvalue e_{l,d} = l(l + d - 1) on S^d.
double eigenvalue(int degree, int dim);

/// Dimension of the degree-l eigenspace on S^d, computed exactly by
/// multiplicative accumulation. Throws std::overflow_error when the value
/// does not fit in 64 bits (degree too large).
std::uint64_t multiplicity(int degree, int dim);

/// Legendre polynomial P_l(t) by the three-term recurrence.
double legendre_poly(int degree, double t);

/// Zonal addition kernel sum_m Y_{l,m}(x) Y_{l,m}(y) = (2l+1)/(4pi) P_l(<x,y>).
double addition_kernel(int degree, double t);

/// Fully normalized associated Legendre function (Condon-Shortley phase),
/// i.e. the colatitude part of the orthonormal Y_{l,m}. 0 <= m <= l.
double legendre_norm(int degree, int order, double x);

/// Index of a real spherical harmonic on S^2; order runs over -l..l
/// (the conventional bijection with 1..2l+1).
struct HarmonicIndex {
    int degree = 0;
    int order = 0;
};

/// Finite real spherical-harmonic expansion on S^2. Coefficients are stored
/// densely; the slot for (l, m) is l*l + l + m.
class HarmonicExpansion {
  public:
    explicit HarmonicExpansion(int max_degree);

    /// Expansion of a probability density: a_{0,0} = 1/sqrt(4pi) is fixed.
    static HarmonicExpansion density(int max_degree);

    int max_degree() const { return max_degree_; }
    bool is_density() const { return density_; }

    double coeff(int degree, int order) const;
    void set_coeff(int degree, int order, double value);

    /// sum_m a_{l,m}^2 at a fixed degree.
    double degree_energy(int degree) const;

    std::span<const double> data() const { return coeffs_; }

  private:
    void check_index(int degree, int order) const;

    int max_degree_;
    bool density_ = false;
    std::vector<double> coeffs_;
};

inline std::size_t coeff_slot(int degree, int order) {
    return static_cast<std::size_t>(degree) * degree + degree + order;
}

/// Real fully normalized spherical harmonic Y_{l,m}(x) on S^2.
double eval_harmonic(const HarmonicIndex& idx, const Vec3& point);

/// Pointwise value of the spectral derivative f^(r); coefficients are
/// weighted by e_{l,2}^{r/2} and the l = 0 term is dropped for r > 0.
double evaluate_expansion(const HarmonicExpansion& f, const Vec3& point, double r = 0.0);

/// sums[l*l + l + m] += sum_i Y_{l,m}(x_i) for all l <= max_degree.
/// The buffer must have size >= (max_degree+1)^2. Points are processed in
/// blocks of fixed size, so the summation order, and hence the result, does
/// not depend on anything but the point order.
void accumulate_harmonics(std::span<const Vec3> points, int max_degree,
                          std::span<double> sums);

/// Values of the normalized associated Legendre functions at fixed order:
/// out[l - order] = legendre_norm(l, order, x) for l = order..max_degree.
void legendre_row(int order, int max_degree, double x, std::span<double> out);

}  // namespace needlet
