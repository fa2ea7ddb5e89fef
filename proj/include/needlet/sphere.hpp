#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace needlet {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kFourPi = 4.0 * std::numbers::pi;

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

inline double dot(const Vec3& a, const Vec3& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    if (!(n > 0.0)) throw std::invalid_argument("cannot normalize a zero vector");
    return {a.x / n, a.y / n, a.z / n};
}

inline bool is_unit(const Vec3& a, double tol = 1e-12) {
    return std::abs(norm(a) - 1.0) <= tol;
}

inline void require_unit(const Vec3& a, double tol = 1e-12) {
    if (!is_unit(a, tol)) throw std::invalid_argument("point is not a unit vector");
}

/// Geodesic (great-circle) distance between two unit vectors.
inline double geodesic(const Vec3& a, const Vec3& b) {
    const double c = std::clamp(dot(a, b), -1.0, 1.0);
    return std::acos(c);
}

/// Unit vector from colatitude theta in [0, pi] and longitude phi.
inline Vec3 from_angles(double theta, double phi) {
    const double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

}  // namespace needlet
