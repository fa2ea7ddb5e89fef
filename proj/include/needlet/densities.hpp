#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "needlet/harmonics.hpp"
#include "needlet/rng.hpp"
#include "needlet/sphere.hpp"

namespace needlet {

struct DensityComponent {
    int degree = 0;
    double amplitude = 0.0;
};

/// Construction record of a synthetic density; serializable so CLI runs are
/// reproducible from their JSON output alone.
struct DensityDescriptor {
    std::string kind = "uniform";  // "uniform" | "zonal" | "multiband"
    std::vector<DensityComponent> components;
    Vec3 axis{0.0, 0.0, 1.0};
};

void to_json(nlohmann::json& j, const DensityDescriptor& d);
void from_json(const nlohmann::json& j, DensityDescriptor& d);

/// Bandlimited density on S^2 with known harmonic expansion, hence known
/// T_r(f) for every r. Zonal building blocks keep evaluation cheap.
class TestDensity {
  public:
    const HarmonicExpansion& expansion() const { return expansion_; }
    double sup_bound() const { return sup_bound_; }
    const DensityDescriptor& descriptor() const { return descriptor_; }
    int max_degree() const { return expansion_.max_degree(); }

    /// Pointwise value through the zonal kernels.
    double value(const Vec3& x) const;

    friend TestDensity density_from_descriptor(const DensityDescriptor& d);

  private:
    TestDensity(HarmonicExpansion expansion, double sup_bound, DensityDescriptor descriptor);

    HarmonicExpansion expansion_;
    double sup_bound_;
    DensityDescriptor descriptor_;
};

TestDensity uniform_density();

/// f = 1/(4pi) + amplitude * K_l(<x, axis>). Requires |amplitude| <= 1/(2l+1)
/// so that f >= 0 (|P_l| <= 1).
TestDensity make_zonal_density(int degree, double amplitude, const Vec3& axis = {0.0, 0.0, 1.0});

/// Superposition of zonal components; requires sum |a_l| (2l+1) <= 1.
TestDensity make_multiband_density(const std::vector<DensityComponent>& components,
                                   const Vec3& axis = {0.0, 0.0, 1.0});

TestDensity density_from_descriptor(const DensityDescriptor& d);

/// T_r(f) = sum_l e_{l,2}^r sum_m a_{l,m}^2, the l = 0 term included only
/// when r = 0.
double exact_T(const TestDensity& f, double r);

struct SphericalSample {
    std::vector<Vec3> points;
    std::uint64_t seed = 0;
};

/// n i.i.d. draws by rejection from the uniform proposal; deterministic for a
/// fixed (seed, stream). Throws std::runtime_error if the acceptance rate
/// falls below 1e-3.
SphericalSample draw_sample(const TestDensity& f, int n, std::uint64_t seed,
                            std::uint64_t stream = 0);

}  // namespace needlet
