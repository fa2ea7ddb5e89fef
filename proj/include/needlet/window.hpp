#pragma once

#include <vector>

#include "needlet/quadrature.hpp"

namespace needlet {

/// Needlet frequency window. phi is a C-infinity monotone transition built
/// from the bump g(t) = exp(-1/(1-t^2)): phi = 1 on [0, 1/B], 0 on [1, inf),
/// and the normalized integral of g in between. The squared window
/// b^2(t) = phi(t/B) - phi(t) is supported on [1/B, B] and telescopes to
/// sum_{j>=0} b^2(l/B^j) = 1 for every integer l >= 1.
class Window {
  public:
    explicit Window(double band_ratio);

    double band_ratio() const { return B_; }

    /// The transition function phi on [0, inf).
    double phi(double t) const;

    /// b(t) = sqrt(max(0, phi(t/B) - phi(t))).
    double value(double t) const;

    double squared(double t) const;

  private:
    double bump_integral(double s) const;  // integral of g over [-1, s]

    double B_;
    GaussLegendre gl_;       // 64-point rule for the bump integral
    double normalization_;   // integral of g over [-1, 1]
};

}  // namespace needlet
