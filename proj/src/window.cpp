#include "needlet/window.hpp"

#include <cmath>
#include <stdexcept>

namespace needlet {

namespace {

double bump(double t) {
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(-1.0 / ((1.0 - t) * (1.0 + t)));
}

}  // namespace

Window::Window(double band_ratio) : B_(band_ratio), gl_(gauss_legendre(64)) {
    if (!(band_ratio > 1.0)) throw std::invalid_argument("Window: band ratio must exceed 1");
    normalization_ = bump_integral(1.0);
}

double Window::bump_integral(double s) const {
    if (s <= -1.0) return 0.0;
    if (s > 1.0) s = 1.0;
    // Map [-1, s] onto the reference interval of the cached rule.
    const double half = 0.5 * (s + 1.0);
    const double mid = 0.5 * (s - 1.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < gl_.nodes.size(); ++i)
        acc += gl_.weights[i] * bump(mid + half * gl_.nodes[i]);
    return half * acc;
}

double Window::phi(double t) const {
    if (t < 0.0) throw std::invalid_argument("Window::phi: t < 0");
    const double a = 1.0 / B_;
    if (t <= a) return 1.0;
    if (t >= 1.0) return 0.0;
    // Affine map of [1/B, 1] onto [-1, 1]; all derivatives of the normalized
    // integral vanish at the endpoints, so phi is C-infinity.
    const double s = -1.0 + 2.0 * (t - a) / (1.0 - a);
    return 1.0 - bump_integral(s) / normalization_;
}

double Window::squared(double t) const {
    const double v = phi(t / B_) - phi(t);
    return v > 0.0 ? v : 0.0;
}

double Window::value(double t) const { return std::sqrt(squared(t)); }

}  // namespace needlet
