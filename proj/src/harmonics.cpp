#include "needlet/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "vecops.hpp"

namespace needlet {

double eigenvalue(int degree, int dim) {
    if (degree < 0 || dim < 1) throw std::invalid_argument("eigenvalue: need l >= 0, d >= 1");
    return static_cast<double>(degree) * (degree + dim - 1);
}

std::uint64_t multiplicity(int degree, int dim) {
    if (degree < 0 || dim < 2) throw std::invalid_argument("multiplicity: need l >= 0, d >= 2");
    // M_{l;d} = (2l+d-1) * C(l+d-2, d-2) / (d-1), accumulated as an exact
    // integer: C(n, k) built incrementally stays integral at every step.
    const int k = dim - 2;
    const int n = degree + dim - 2;
    unsigned __int128 binom = 1;
    for (int i = 1; i <= k; ++i) {
        binom = binom * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    }
    unsigned __int128 value = binom * static_cast<unsigned>(2 * degree + dim - 1);
    value /= static_cast<unsigned>(dim - 1);
    if (value > std::numeric_limits<std::uint64_t>::max())
        throw std::overflow_error("multiplicity: degree too large for 64-bit result");
    return static_cast<std::uint64_t>(value);
}

double legendre_poly(int degree, double t) {
    if (degree == 0) return 1.0;
    double prev = 1.0;
    double curr = t;
    for (int l = 2; l <= degree; ++l) {
        const double next = ((2 * l - 1) * t * curr - (l - 1) * prev) / l;
        prev = curr;
        curr = next;
    }
    return curr;
}

double addition_kernel(int degree, double t) {
    if (std::abs(t) > 1.0 + 1e-12) throw std::invalid_argument("addition_kernel: |t| > 1");
    t = std::clamp(t, -1.0, 1.0);
    return (2.0 * degree + 1.0) / kFourPi * legendre_poly(degree, t);
}

double legendre_norm(int degree, int order, double x) {
    if (order < 0 || order > degree) throw std::invalid_argument("legendre_norm: need 0 <= m <= l");
    if (std::abs(x) > 1.0) throw std::invalid_argument("legendre_norm: |x| > 1");
    // Stable fully normalized recurrence, upward in l.
    double pmm = 1.0;
    if (order > 0) {
        const double omx2 = (1.0 - x) * (1.0 + x);
        double fact = 1.0;
        for (int i = 1; i <= order; ++i) {
            pmm *= omx2 * fact / (fact + 1.0);
            fact += 2.0;
        }
    }
    pmm = std::sqrt((2.0 * order + 1.0) * pmm / kFourPi);
    if (order & 1) pmm = -pmm;
    if (degree == order) return pmm;
    double pmmp1 = x * std::sqrt(2.0 * order + 3.0) * pmm;
    if (degree == order + 1) return pmmp1;
    double oldfact = std::sqrt(2.0 * order + 3.0);
    double pll = 0.0;
    for (int ll = order + 2; ll <= degree; ++ll) {
        const double fact = std::sqrt((4.0 * ll * ll - 1.0) / (static_cast<double>(ll) * ll - static_cast<double>(order) * order));
        pll = (x * pmmp1 - pmm / oldfact) * fact;
        oldfact = fact;
        pmm = pmmp1;
        pmmp1 = pll;
    }
    return pll;
}

HarmonicExpansion::HarmonicExpansion(int max_degree) : max_degree_(max_degree) {
    if (max_degree < 0) throw std::invalid_argument("HarmonicExpansion: max_degree < 0");
    coeffs_.assign(static_cast<std::size_t>(max_degree + 1) * (max_degree + 1), 0.0);
}

HarmonicExpansion HarmonicExpansion::density(int max_degree) {
    HarmonicExpansion f(max_degree);
    f.density_ = true;
    f.coeffs_[0] = 1.0 / std::sqrt(kFourPi);
    return f;
}

void HarmonicExpansion::check_index(int degree, int order) const {
    if (degree < 0 || degree > max_degree_ || std::abs(order) > degree)
        throw std::out_of_range("HarmonicExpansion: index out of range");
}

double HarmonicExpansion::coeff(int degree, int order) const {
    check_index(degree, order);
    return coeffs_[coeff_slot(degree, order)];
}

void HarmonicExpansion::set_coeff(int degree, int order, double value) {
    check_index(degree, order);
    if (!std::isfinite(value)) throw std::invalid_argument("HarmonicExpansion: non-finite coefficient");
    if (density_ && degree == 0) throw std::invalid_argument("HarmonicExpansion: a_{0,0} of a density is fixed");
    coeffs_[coeff_slot(degree, order)] = value;
}

double HarmonicExpansion::degree_energy(int degree) const {
    check_index(degree, 0);
    double e = 0.0;
    for (int m = -degree; m <= degree; ++m) {
        const double a = coeffs_[coeff_slot(degree, m)];
        e += a * a;
    }
    return e;
}

double eval_harmonic(const HarmonicIndex& idx, const Vec3& point) {
    if (idx.degree < 0 || std::abs(idx.order) > idx.degree)
        throw std::invalid_argument("eval_harmonic: invalid index");
    if (idx.degree > kDegreeCap) throw std::invalid_argument("eval_harmonic: degree above cap");
    require_unit(point);
    const double ct = std::clamp(point.z, -1.0, 1.0);
    const int m = std::abs(idx.order);
    const double p = legendre_norm(idx.degree, m, ct);
    if (idx.order == 0) return p;
    const double phi = std::atan2(point.y, point.x);
    const double sqrt2 = std::numbers::sqrt2;
    return idx.order > 0 ? sqrt2 * p * std::cos(m * phi) : sqrt2 * p * std::sin(m * phi);
}

double evaluate_expansion(const HarmonicExpansion& f, const Vec3& point, double r) {
    if (r < 0.0) throw std::invalid_argument("evaluate_expansion: r < 0");
    require_unit(point);
    const int L = f.max_degree();
    std::vector<double> sums(static_cast<std::size_t>(L + 1) * (L + 1), 0.0);
    accumulate_harmonics(std::span<const Vec3>(&point, 1), L, sums);
    double value = 0.0;
    const int l0 = (r > 0.0) ? 1 : 0;
    for (int l = l0; l <= L; ++l) {
        const double w = (r == 0.0) ? 1.0 : std::pow(eigenvalue(l, 2), r / 2.0);
        double band = 0.0;
        for (int m = -l; m <= l; ++m)
            band += f.coeff(l, m) * sums[coeff_slot(l, m)];
        value += w * band;
    }
    return value;
}

namespace {

using detail::v8;

// 8 independent 8-wide recurrence chains per block: enough in-flight FMAs to
// hide their latency on one core.
constexpr int kChains = 8;
constexpr int kBlock = 8 * kChains;

struct SweepFactors {
    // flm(l, m) = sqrt((4l^2-1)/(l^2-m^2)) packed m-major, plus 1/flm.
    std::vector<double> f, finv;
    std::vector<double> diag;  // sqrt((2m+1)/(2m)) for the P_m^m update
    std::vector<std::size_t> off;
    int L;

    explicit SweepFactors(int max_degree) : L(max_degree) {
        off.resize(L + 1);
        std::size_t total = 0;
        for (int m = 0; m <= L; ++m) {
            off[m] = total;
            total += static_cast<std::size_t>(L - m + 1);
        }
        f.assign(total, 0.0);
        finv.assign(total, 0.0);
        for (int m = 0; m <= L; ++m) {
            // f(m+1, m) = sqrt(2m+3), the first divisor of the upward sweep.
            for (int l = m + 1; l <= L; ++l) {
                const double v = std::sqrt((4.0 * l * l - 1.0) /
                                           (static_cast<double>(l) * l - static_cast<double>(m) * m));
                f[off[m] + (l - m)] = v;
                finv[off[m] + (l - m)] = 1.0 / v;
            }
        }
        diag.resize(L + 1);
        for (int m = 1; m <= L; ++m) diag[m] = std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    }
};

}  // namespace

void accumulate_harmonics(std::span<const Vec3> points, int max_degree,
                          std::span<double> sums) {
    const int L = max_degree;
    if (L < 0 || L > kDegreeCap) throw std::invalid_argument("accumulate_harmonics: bad degree");
    if (sums.size() < static_cast<std::size_t>(L + 1) * (L + 1))
        throw std::invalid_argument("accumulate_harmonics: buffer too small");
    const SweepFactors fac(L);
    const double y00 = 1.0 / std::sqrt(kFourPi);
    const double sqrt2 = std::numbers::sqrt2;

    for (std::size_t base = 0; base < points.size(); base += kBlock) {
        const int nb = static_cast<int>(std::min<std::size_t>(kBlock, points.size() - base));
        // Padding lanes keep cm = sm = 0 so every loop runs the full block
        // width without contributing to the sums.
        v8 ct[kChains] = {}, st[kChains] = {};
        v8 cphi[kChains], sphi[kChains];
        v8 cm[kChains] = {}, sm[kChains] = {};
        v8 pmm[kChains], pa[kChains], pb[kChains];
        for (int c = 0; c < kChains; ++c) {
            cphi[c] = detail::broadcast(1.0);
            sphi[c] = v8{};
            pmm[c] = detail::broadcast(y00);
            pa[c] = pb[c] = v8{};
        }
        for (int p = 0; p < nb; ++p) {
            const Vec3& v = points[base + p];
            require_unit(v);
            const int c = p / 8, lane = p % 8;
            ct[c][lane] = std::clamp(v.z, -1.0, 1.0);
            const double s = std::hypot(v.x, v.y);
            st[c][lane] = s;
            if (s > 0.0) {
                cphi[c][lane] = v.x / s;
                sphi[c][lane] = v.y / s;
            }
            cm[c][lane] = 1.0;
        }
        for (int m = 0; m <= L; ++m) {
            if (m > 0) {
                const v8 d = detail::broadcast(fac.diag[m]);
                for (int c = 0; c < kChains; ++c) {
                    pmm[c] *= -st[c] * d;
                    const v8 t = cm[c] * cphi[c] - sm[c] * sphi[c];
                    sm[c] = sm[c] * cphi[c] + cm[c] * sphi[c];
                    cm[c] = t;
                }
            }
            const double* fl = fac.f.data() + fac.off[m];
            const double* fi = fac.finv.data() + fac.off[m];
            const double norm_c = (m == 0) ? 1.0 : sqrt2;
            v8 qc[kChains], qs[kChains];
            // l = m
            for (int c = 0; c < kChains; ++c) {
                pa[c] = pmm[c];
                qc[c] = pa[c] * cm[c];
                qs[c] = pa[c] * sm[c];
            }
            sums[coeff_slot(m, m)] += norm_c * detail::hsum(detail::tree_sum(qc));
            if (m > 0) sums[coeff_slot(m, -m)] += norm_c * detail::hsum(detail::tree_sum(qs));
            if (m == L) break;
            // l = m + 1
            const v8 r3 = detail::broadcast(std::sqrt(2.0 * m + 3.0));
            for (int c = 0; c < kChains; ++c) {
                pb[c] = ct[c] * r3 * pa[c];
                qc[c] = pb[c] * cm[c];
                qs[c] = pb[c] * sm[c];
            }
            sums[coeff_slot(m + 1, m)] += norm_c * detail::hsum(detail::tree_sum(qc));
            if (m > 0) sums[coeff_slot(m + 1, -m)] += norm_c * detail::hsum(detail::tree_sum(qs));
            for (int l = m + 2; l <= L; ++l) {
                const v8 fv = detail::broadcast(fl[l - m]);
                const v8 fo = detail::broadcast(fi[l - m - 1]);
                for (int c = 0; c < kChains; ++c) {
                    const v8 pn = (ct[c] * pb[c] - pa[c] * fo) * fv;
                    pa[c] = pb[c];
                    pb[c] = pn;
                    qc[c] = pn * cm[c];
                    qs[c] = pn * sm[c];
                }
                sums[coeff_slot(l, m)] += norm_c * detail::hsum(detail::tree_sum(qc));
                if (m > 0) sums[coeff_slot(l, -m)] += norm_c * detail::hsum(detail::tree_sum(qs));
            }
        }
    }
}

void legendre_row(int order, int max_degree, double x, std::span<double> out) {
    const int m = order;
    const int L = max_degree;
    if (m < 0 || m > L) throw std::invalid_argument("legendre_row: need 0 <= m <= L");
    if (out.size() < static_cast<std::size_t>(L - m + 1))
        throw std::invalid_argument("legendre_row: buffer too small");
    double pmm = 1.0;
    if (m > 0) {
        const double omx2 = (1.0 - x) * (1.0 + x);
        double fact = 1.0;
        for (int i = 1; i <= m; ++i) {
            pmm *= omx2 * fact / (fact + 1.0);
            fact += 2.0;
        }
    }
    pmm = std::sqrt((2.0 * m + 1.0) * pmm / kFourPi);
    if (m & 1) pmm = -pmm;
    out[0] = pmm;
    if (L == m) return;
    double pmmp1 = x * std::sqrt(2.0 * m + 3.0) * pmm;
    out[1] = pmmp1;
    double oldfact = std::sqrt(2.0 * m + 3.0);
    for (int l = m + 2; l <= L; ++l) {
        const double fact = std::sqrt((4.0 * l * l - 1.0) /
                                      (static_cast<double>(l) * l - static_cast<double>(m) * m));
        const double pll = (x * pmmp1 - pmm / oldfact) * fact;
        out[l - m] = pll;
        oldfact = fact;
        pmm = pmmp1;
        pmmp1 = pll;
    }
}

}  // namespace needlet
