#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "needlet/harmonics.hpp"
#include "needlet/quadrature.hpp"
#include "needlet/window.hpp"

namespace needlet {

/// One resolution level: the frequency band, the window samples on it, and a
/// cubature rule exact for products of two atoms of this band.
struct FrameLevel {
    int index = 0;
    int band_min = 1;                   // max(1, ceil(B^{j-1}))
    int band_max = 0;                   // floor(B^{j+1})
    std::vector<double> window_values;  // b(l/B^j) for l = band_min..band_max
    CubatureRule rule;

    std::size_t node_count() const { return rule.nodes.size(); }
    double window_at(int degree) const;
};

/// Needlet coefficients beta^(r)_{j,k}, one vector per level.
struct Coefficients {
    double r = 0.0;
    std::vector<std::vector<double>> levels;
};

/// Truncated quadratic energy sum_{j<=J} sum_k beta_{j,k}^2.
double frame_energy(const Coefficients& coeffs, int max_level);

class Frame {
  public:
    Frame(Window window, int max_level);
    Frame(double band_ratio, int max_level);

    const Window& window() const { return window_; }
    double band_ratio() const { return window_.band_ratio(); }
    int max_level() const { return static_cast<int>(levels_.size()) - 1; }
    const FrameLevel& level(int j) const;

    /// Smallest J such that levels 0..J carry the full window mass for every
    /// degree <= max_degree, i.e. B^J >= max_degree.
    int covering_level(int max_degree) const;

    /// psi^(r)_{j,k}(x) evaluated through the zonal addition kernel.
    double eval_atom(int j, int k, double r, const Vec3& x) const;

    /// Exact Sobolev-needlet coefficients of a bandlimited expansion,
    /// computed by closed-form spectral sums (no quadrature error).
    Coefficients analyze(const HarmonicExpansion& f, double r, int max_level) const;

    /// beta_k = sqrt(lambda_k) * sum_{l in band, m} e_l^{r/2} b(l/B^j)
    ///          * harmonics[slot(l,m)] * scale * Y_{l,m}(xi_k)
    /// for every node of level j, via separated colatitude/longitude sums on
    /// the product grid. `harmonics` covers degrees 0..max_degree in the
    /// l*l+l+m layout; band degrees above max_degree contribute zero.
    std::vector<double> level_coefficients(int j, std::span<const double> harmonics,
                                           int max_degree, double r, double scale) const;

    nlohmann::json summary() const;

  private:
    Window window_;
    std::vector<FrameLevel> levels_;
};

}  // namespace needlet
