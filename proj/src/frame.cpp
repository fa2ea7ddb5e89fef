#include "needlet/frame.hpp"

#include <cmath>
#include <stdexcept>

#include "vecops.hpp"

namespace needlet {

double FrameLevel::window_at(int degree) const {
    if (degree < band_min || degree > band_max) return 0.0;
    return window_values[static_cast<std::size_t>(degree - band_min)];
}

double frame_energy(const Coefficients& coeffs, int max_level) {
    if (max_level >= static_cast<int>(coeffs.levels.size()))
        throw std::out_of_range("frame_energy: level beyond coefficient range");
    double total = 0.0;
    for (int j = 0; j <= max_level; ++j) {
        double level = 0.0;
        for (const double b : coeffs.levels[j]) level += b * b;
        total += level;
    }
    return total;
}

Frame::Frame(Window window, int max_level) : window_(std::move(window)) {
    if (max_level < 0) throw std::invalid_argument("Frame: max_level < 0");
    const double B = window_.band_ratio();
    levels_.reserve(max_level + 1);
    for (int j = 0; j <= max_level; ++j) {
        FrameLevel lvl;
        lvl.index = j;
        const double lo = std::pow(B, j - 1);
        const double hi = std::pow(B, j + 1);
        lvl.band_min = std::max(1, static_cast<int>(std::ceil(lo - 1e-12)));
        lvl.band_max = static_cast<int>(std::floor(hi + 1e-12));
        if (lvl.band_max > kDegreeCap)
            throw std::invalid_argument("Frame: level band exceeds the degree cap");
        const double scale = std::pow(B, j);
        lvl.window_values.reserve(lvl.band_max - lvl.band_min + 1);
        for (int l = lvl.band_min; l <= lvl.band_max; ++l)
            lvl.window_values.push_back(window_.value(l / scale));
        lvl.rule = sphere_cubature(2 * static_cast<int>(std::ceil(hi - 1e-12)));
        levels_.push_back(std::move(lvl));
    }
}

Frame::Frame(double band_ratio, int max_level) : Frame(Window(band_ratio), max_level) {}

const FrameLevel& Frame::level(int j) const {
    if (j < 0 || j > max_level()) throw std::out_of_range("Frame: level out of range");
    return levels_[static_cast<std::size_t>(j)];
}

int Frame::covering_level(int max_degree) const {
    if (max_degree <= 1) return 0;
    const double B = band_ratio();
    int j = static_cast<int>(std::ceil(std::log(static_cast<double>(max_degree)) / std::log(B) - 1e-12));
    while (std::pow(B, j) < static_cast<double>(max_degree)) ++j;
    return j;
}

double Frame::eval_atom(int j, int k, double r, const Vec3& x) const {
    const FrameLevel& lvl = level(j);
    if (k < 0 || static_cast<std::size_t>(k) >= lvl.node_count())
        throw std::out_of_range("Frame: node index out of range");
    if (r < 0.0) throw std::invalid_argument("Frame::eval_atom: r < 0");
    require_unit(x);
    const double t = std::clamp(dot(lvl.rule.nodes[static_cast<std::size_t>(k)], x), -1.0, 1.0);
    // One pass of the Legendre recurrence across the band.
    double p_prev = 1.0, p_curr = t;
    double acc = 0.0;
    for (int l = 1; l <= lvl.band_max; ++l) {
        if (l >= 2) {
            const double p_next = ((2 * l - 1) * t * p_curr - (l - 1) * p_prev) / l;
            p_prev = p_curr;
            p_curr = p_next;
        }
        if (l >= lvl.band_min) {
            const double b = lvl.window_values[static_cast<std::size_t>(l - lvl.band_min)];
            if (b != 0.0) {
                const double w = (r == 0.0) ? 1.0 : std::pow(eigenvalue(l, 2), r / 2.0);
                acc += w * b * (2.0 * l + 1.0) / kFourPi * p_curr;
            }
        }
    }
    return std::sqrt(lvl.rule.weights[static_cast<std::size_t>(k)]) * acc;
}

Coefficients Frame::analyze(const HarmonicExpansion& f, double r, int max_lvl) const {
    if (max_lvl < 0 || max_lvl > max_level())
        throw std::out_of_range("Frame::analyze: level beyond the frame cap");
    if (r < 0.0) throw std::invalid_argument("Frame::analyze: r < 0");
    Coefficients out;
    out.r = r;
    out.levels.resize(max_lvl + 1);
    for (int j = 0; j <= max_lvl; ++j)
        out.levels[j] = level_coefficients(j, f.data(), f.max_degree(), r, 1.0);
    return out;
}

std::vector<double> Frame::level_coefficients(int j, std::span<const double> harmonics,
                                              int max_degree, double r, double scale) const {
    const FrameLevel& lvl = level(j);
    const CubatureRule& rule = lvl.rule;
    const int n_theta = static_cast<int>(rule.cos_colat.size());
    const int n_phi = rule.n_phi;
    std::vector<double> beta(lvl.node_count(), 0.0);

    const int l_hi = std::min(lvl.band_max, max_degree);
    if (l_hi < lvl.band_min) return beta;
    const int l_lo = lvl.band_min;

    // Degree weights e_l^{r/2} b(l/B^j) folded into the band coefficients.
    std::vector<double> wdeg(static_cast<std::size_t>(l_hi - l_lo + 1));
    for (int l = l_lo; l <= l_hi; ++l) {
        const double w = (r == 0.0) ? 1.0 : std::pow(eigenvalue(l, 2), r / 2.0);
        wdeg[static_cast<std::size_t>(l - l_lo)] =
            w * lvl.window_values[static_cast<std::size_t>(l - lvl.band_min)] * scale;
    }

    // Longitude tables cos(m phi_b), sin(m phi_b), contiguous in m per b.
    const int mu = l_hi;
    std::vector<double> ctab(static_cast<std::size_t>(n_phi) * (mu + 1));
    std::vector<double> stab(static_cast<std::size_t>(n_phi) * (mu + 1));
    for (int b = 0; b < n_phi; ++b) {
        const double phi = 2.0 * kPi * b / n_phi;
        const double c1 = std::cos(phi), s1 = std::sin(phi);
        double cm = 1.0, sm = 0.0;
        double* cr = ctab.data() + static_cast<std::size_t>(b) * (mu + 1);
        double* sr = stab.data() + static_cast<std::size_t>(b) * (mu + 1);
        for (int m = 0; m <= mu; ++m) {
            cr[m] = cm;
            sr[m] = sm;
            const double c = cm * c1 - sm * s1;
            sm = sm * c1 + cm * s1;
            cm = c;
        }
    }

    const double sqrt2 = std::numbers::sqrt2;
    std::vector<double> prow(static_cast<std::size_t>(l_hi + 1));
    std::vector<double> gc(static_cast<std::size_t>(mu + 1), 0.0);
    std::vector<double> gs(static_cast<std::size_t>(mu + 1), 0.0);
    for (int i = 0; i < n_theta; ++i) {
        const double x = rule.cos_colat[static_cast<std::size_t>(i)];
        for (int m = 0; m <= mu; ++m) {
            legendre_row(m, l_hi, x, prow);
            double sc = 0.0, ss = 0.0;
            for (int l = std::max(m, l_lo); l <= l_hi; ++l) {
                const double p = prow[static_cast<std::size_t>(l - m)] *
                                 wdeg[static_cast<std::size_t>(l - l_lo)];
                sc += p * harmonics[coeff_slot(l, m)];
                if (m > 0) ss += p * harmonics[coeff_slot(l, -m)];
            }
            gc[static_cast<std::size_t>(m)] = (m == 0) ? sc : sqrt2 * sc;
            gs[static_cast<std::size_t>(m)] = sqrt2 * ss;
        }
        double* out_row = beta.data() + static_cast<std::size_t>(i) * n_phi;
        const double* wrow = rule.weights.data() + static_cast<std::size_t>(i) * n_phi;
        const double* gcd = gc.data();
        const double* gsd = gs.data();
        for (int b = 0; b < n_phi; ++b) {
            const double* cr = ctab.data() + static_cast<std::size_t>(b) * (mu + 1);
            const double* sr = stab.data() + static_cast<std::size_t>(b) * (mu + 1);
            // 8-wide accumulation over m with a fixed reduction tree.
            detail::v8 acc_v{};
            int m = 0;
            for (; m + 8 <= mu + 1; m += 8) {
                acc_v += detail::load(gcd + m) * detail::load(cr + m) +
                         detail::load(gsd + m) * detail::load(sr + m);
            }
            double acc = detail::hsum(acc_v);
            for (; m <= mu; ++m) acc += gcd[m] * cr[m] + gsd[m] * sr[m];
            out_row[b] = std::sqrt(wrow[b]) * acc;
        }
    }
    return beta;
}

nlohmann::json Frame::summary() const {
    nlohmann::json levels = nlohmann::json::array();
    for (const FrameLevel& lvl : levels_) {
        levels.push_back({{"level", lvl.index},
                          {"band_min", lvl.band_min},
                          {"band_max", lvl.band_max},
                          {"nodes", lvl.node_count()},
                          {"exactness_degree", lvl.rule.exactness_degree}});
    }
    return {{"band_ratio", band_ratio()}, {"max_level", max_level()}, {"levels", levels}};
}

}  // namespace needlet
