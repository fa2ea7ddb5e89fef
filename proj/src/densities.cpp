#include "needlet/densities.hpp"

#include <cmath>
#include <stdexcept>

namespace needlet {

void to_json(nlohmann::json& j, const DensityDescriptor& d) {
    j = nlohmann::json{{"kind", d.kind}, {"axis", {d.axis.x, d.axis.y, d.axis.z}}};
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : d.components) comps.push_back({c.degree, c.amplitude});
    j["components"] = comps;
}

void from_json(const nlohmann::json& j, DensityDescriptor& d) {
    d.kind = j.at("kind").get<std::string>();
    d.components.clear();
    if (j.contains("components")) {
        for (const auto& c : j.at("components"))
            d.components.push_back({c.at(0).get<int>(), c.at(1).get<double>()});
    }
    if (j.contains("axis")) {
        const auto& a = j.at("axis");
        d.axis = normalized({a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()});
    } else {
        d.axis = {0.0, 0.0, 1.0};
    }
}

namespace {

/// Min over a deterministic 10^4-point spiral grid; construction-time check
/// that the nonnegativity preconditions actually delivered a density.
void validate_nonnegative(const TestDensity& f) {
    constexpr int kGrid = 10000;
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < kGrid; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / kGrid;
        const double phi = golden * i;
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        const Vec3 x{s * std::cos(phi), s * std::sin(phi), z};
        if (f.value(x) < -1e-12)
            throw std::invalid_argument("density is negative on the validation grid");
    }
}

HarmonicExpansion expansion_for(const DensityDescriptor& d) {
    int max_degree = 0;
    for (const auto& c : d.components) max_degree = std::max(max_degree, c.degree);
    HarmonicExpansion f = HarmonicExpansion::density(max_degree);
    for (const auto& c : d.components) {
        // a_{l,m} = amplitude * Y_{l,m}(axis), the expansion of the zonal kernel.
        for (int m = -c.degree; m <= c.degree; ++m)
            f.set_coeff(c.degree, m,
                        c.amplitude * eval_harmonic({c.degree, m}, d.axis));
    }
    return f;
}

}  // namespace

TestDensity::TestDensity(HarmonicExpansion expansion, double sup_bound, DensityDescriptor descriptor)
    : expansion_(std::move(expansion)), sup_bound_(sup_bound), descriptor_(std::move(descriptor)) {}

double TestDensity::value(const Vec3& x) const {
    double v = 1.0 / kFourPi;
    for (const auto& c : descriptor_.components)
        v += c.amplitude * addition_kernel(c.degree, dot(x, descriptor_.axis));
    return v;
}

TestDensity density_from_descriptor(const DensityDescriptor& d) {
    DensityDescriptor desc = d;
    desc.axis = normalized(desc.axis);
    if (desc.kind == "uniform") {
        if (!desc.components.empty())
            throw std::invalid_argument("uniform density takes no components");
    } else if (desc.kind == "zonal") {
        if (desc.components.size() != 1)
            throw std::invalid_argument("zonal density takes exactly one component");
    } else if (desc.kind != "multiband") {
        throw std::invalid_argument("unknown density kind: " + desc.kind);
    }
    double budget = 0.0;
    for (const auto& c : desc.components) {
        if (c.degree < 1) throw std::invalid_argument("density component degree must be >= 1");
        budget += std::abs(c.amplitude) * (2.0 * c.degree + 1.0);
    }
    if (budget > 1.0 + 1e-12)
        throw std::invalid_argument("amplitudes violate the nonnegativity bound");
    const double sup = (1.0 + budget) / kFourPi;
    TestDensity f(expansion_for(desc), sup, desc);
    validate_nonnegative(f);
    return f;
}

TestDensity uniform_density() {
    return density_from_descriptor(DensityDescriptor{});
}

TestDensity make_zonal_density(int degree, double amplitude, const Vec3& axis) {
    DensityDescriptor d;
    d.kind = "zonal";
    d.components = {{degree, amplitude}};
    d.axis = axis;
    return density_from_descriptor(d);
}

TestDensity make_multiband_density(const std::vector<DensityComponent>& components,
                                   const Vec3& axis) {
    DensityDescriptor d;
    d.kind = "multiband";
    d.components = components;
    d.axis = axis;
    return density_from_descriptor(d);
}

double exact_T(const TestDensity& f, double r) {
    if (r < 0.0) throw std::invalid_argument("exact_T: r < 0");
    double total = (r == 0.0) ? 1.0 / kFourPi : 0.0;  // a_{0,0}^2
    for (const auto& c : f.descriptor().components) {
        const double band = c.amplitude * c.amplitude * (2.0 * c.degree + 1.0) / kFourPi;
        total += (r == 0.0 ? 1.0 : std::pow(eigenvalue(c.degree, 2), r)) * band;
    }
    return total;
}

SphericalSample draw_sample(const TestDensity& f, int n, std::uint64_t seed, std::uint64_t stream) {
    if (n < 1) throw std::invalid_argument("draw_sample: n < 1");
    Rng rng(seed, stream);
    SphericalSample sample;
    sample.seed = seed;
    sample.points.reserve(static_cast<std::size_t>(n));
    const double sup = f.sup_bound();
    std::uint64_t proposals = 0;
    while (sample.points.size() < static_cast<std::size_t>(n)) {
        const Vec3 x = rng.sphere_point();
        const double u = rng.uniform();
        ++proposals;
        if (u * sup <= f.value(x)) sample.points.push_back(x);
        if (proposals >= 10000 &&
            static_cast<double>(sample.points.size()) < 1e-3 * static_cast<double>(proposals))
            throw std::runtime_error("draw_sample: acceptance rate below 1e-3");
    }
    return sample;
}

}  // namespace needlet
