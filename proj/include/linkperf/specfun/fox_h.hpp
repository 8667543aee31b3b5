// Bivariate Fox-H-type integrals by double Mellin–Barnes quadrature.
//
// The object evaluated here is
//
//   I = (1/2πi)^2 ∮∮ J(s+t) · X(t) · Y(s) · x^t y^s  dt ds,
//
// where J, X, Y are products of gamma factors Γ(offset + scale·v), each
// optionally in the denominator.  With s = c_s + iu and t = c_t + iv the
// double integral becomes +(1/4π²) ∬ Re[exp(Σ ln Γ + t ln x + s ln y)] du dv
// (the two i's from ds dt cancel the minus sign of (2πi)^2).
//
// Contours are truncated vertical lines chosen automatically from the pole
// families: numerator Γ(o + a·v) puts a left family at v ≤ -o/a when a > 0
// and a right family at v ≥ -o/a when a < 0; denominator factors only
// contribute zeros.  Coupled factors J(s+t) constrain the sum c_s + c_t the
// same way.  Truncation is adaptive (integrand fallen to 1e-16 of its
// on-axis peak) and the quadrature error is estimated by node doubling.
//
// The weighted entry point additionally multiplies the s-line by a caller
// supplied analytic factor.  Metric layers use it to fold whole series —
// e.g. a sum of simple-pole powers in s, or a sum over modulation scale
// factors y_m^s — into a single tensor pass instead of one integral per
// series term.
#ifndef LINKPERF_SPECFUN_FOX_H_HPP
#define LINKPERF_SPECFUN_FOX_H_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "contour.hpp"
#include "gamma.hpp"

namespace linkperf::specfun {

// One gamma factor Γ(offset + scale * v) of a Mellin–Barnes kernel, where v
// is the integration variable the term is attached to (t, s, or s+t).
struct GammaTerm {
    double offset = 0.0;
    double scale = 1.0;
    bool denominator = false;
};

struct BivariateFoxHSpec {
    std::vector<GammaTerm> joint_terms;  // argument s + t
    std::vector<GammaTerm> x_terms;      // argument t
    std::vector<GammaTerm> y_terms;      // argument s
    double arg_x = 1.0;                  // x > 0
    double arg_y = 1.0;                  // y > 0
};

struct FoxHResult {
    double value = 0.0;
    double error_estimate = 0.0;  // |value(N) - value(2N)| node-doubling residual
    ContourSpec contour_t;
    ContourSpec contour_s;
    bool perturbed = false;       // pole families were nudged apart
};

namespace detail {

// (left, right) window for a vertical contour separating the pole families
// of the numerator terms; denominators impose nothing.
inline std::pair<double, double> contour_window(const std::vector<GammaTerm>& terms)
{
    double left = -std::numeric_limits<double>::infinity();
    double right = std::numeric_limits<double>::infinity();
    for (const auto& g : terms) {
        if (g.denominator || g.scale == 0.0) continue;
        const double bound = -g.offset / g.scale;
        if (g.scale > 0.0)
            left = std::max(left, bound);
        else
            right = std::min(right, bound);
    }
    return {left, right};
}

inline complex_t ln_terms(const std::vector<GammaTerm>& terms, complex_t v)
{
    complex_t acc{0.0, 0.0};
    for (const auto& g : terms) {
        const complex_t lg = ln_gamma(g.offset + g.scale * v);
        acc += g.denominator ? -lg : lg;
    }
    return acc;
}

// Move every numerator pole family outward by `eps` so a collapsed window
// reopens: left families shift left, right families shift right.
inline void nudge_families(std::vector<GammaTerm>& terms, double eps)
{
    for (auto& g : terms)
        if (!g.denominator && g.scale != 0.0)
            g.offset += eps * std::fabs(g.scale);
}

// Contour abscissa inside (lo, hi).  Prefers 0.45 — which clears the s = 0
// pole family of CDF/PDF kernels while staying under the smallest right
// family met in practice (1/2, from binary modulation) — and falls back to
// window midpoints when 0.45 is unavailable.
inline double pick_center(double lo, double hi)
{
    if (std::isfinite(hi)) {
        if (hi > 0.0) {
            const double c = std::min(0.45, 0.9 * hi);
            if (c > lo) return c;
        }
        return std::isfinite(lo) ? 0.5 * (lo + hi) : hi - 0.5;
    }
    if (lo < 0.45) return 0.45;
    return std::isfinite(lo) ? lo + 0.5 : 0.45;
}

} // namespace detail

using SLineWeight = std::function<complex_t(complex_t)>;

inline FoxHResult fox_h_bivariate_weighted(BivariateFoxHSpec spec,
                                           const SLineWeight& y_weight,
                                           double tol = 1e-6)
{
    if (!(spec.arg_x > 0.0) || !(spec.arg_y > 0.0))
        throw std::domain_error("fox_h_bivariate: arguments must be positive");

    FoxHResult res;

    // Pick (c_s, c_t): the s-window is its own families narrowed by what the
    // coupled s+t constraint can still admit given the t families; then the
    // t-window is its own families combined with the coupled constraint at
    // the chosen c_s.  The t abscissa prefers -0.49 c_s, which keeps the sum
    // c_s + c_t safely positive for the usual Γ(s+t) coupling while staying
    // left of the t = 0 family.
    double c_s = 0.0, c_t = 0.0;
    auto choose_contours = [&]() -> bool {
        auto [lt, rt] = detail::contour_window(spec.x_terms);
        auto [ls, rs] = detail::contour_window(spec.y_terms);
        auto [lj, rj] = detail::contour_window(spec.joint_terms);
        const double lo_s = std::max(ls, lj - rt);
        const double hi_s = std::min(rs, rj - lt);
        if (hi_s - lo_s <= 1e-9) return false;
        c_s = detail::pick_center(lo_s, hi_s);
        const double lo_t = std::max(lt, lj - c_s);
        const double hi_t = std::min(rt, rj - c_s);
        if (hi_t - lo_t <= 1e-9) return false;
        c_t = -0.49 * c_s;
        if (!(c_t > lo_t && c_t < hi_t))
            c_t = detail::pick_center(lo_t, hi_t);
        return true;
    };
    if (!choose_contours()) {
        detail::nudge_families(spec.x_terms, 1e-6);
        detail::nudge_families(spec.y_terms, 1e-6);
        detail::nudge_families(spec.joint_terms, 1e-6);
        res.perturbed = true;
        if (!choose_contours())
            throw std::domain_error("fox_h_bivariate: no separating contour strip");
    }

    const double ln_x = std::log(spec.arg_x);
    const double ln_y = std::log(spec.arg_y);
    const double sigma = c_s + c_t;

    // Truncation from each axis's own factors; the coupled term is excluded
    // on purpose — along the ridge u + v ≈ 0 it stays O(1), and there the
    // single-axis factors must carry (and do carry) the decay alone.  The
    // s-line weight is likewise excluded: the weights used here are bounded
    // on the contour, so ignoring them can only overestimate the extent.
    const double T_t = adaptive_half_extent(
        [&](double v) { return detail::ln_terms(spec.x_terms, {c_t, v}).real(); },
        1e-16, 8.0, 256.0);
    const double T_s = adaptive_half_extent(
        [&](double u) { return detail::ln_terms(spec.y_terms, {c_s, u}).real(); },
        1e-16, 8.0, 256.0);

    // Both lines use the uniform trapezoid with one shared step.  On a
    // vertical Mellin–Barnes line the integrand is analytic in a surrounding
    // strip, so the trapezoid converges geometrically in the step — and the
    // shared step makes the coupled argument u + v land on a lattice: the
    // joint gamma, the only factor touching both axes, takes just
    // n_s + n_t + 1 distinct values (one per anti-diagonal) instead of one
    // per tensor cell.  The tensor pass itself is then pure multiply-adds.
    std::vector<complex_t> ea, eb, diag, conv;
    auto integrate = [&](int n_t, int n_s) {
        const double h = std::min(2.0 * T_t / n_t, 2.0 * T_s / n_s);
        const int mt = static_cast<int>(std::ceil(2.0 * T_t / h));
        const int ms = static_cast<int>(std::ceil(2.0 * T_s / h));
        const double half_t = 0.5 * mt * h;  // >= T_t: padding costs ~1e-16
        const double half_s = 0.5 * ms * h;

        // Per-axis log factors, peak-normalized so the inner loop works near
        // unit magnitude; the combined peak is restored at the end.
        ea.assign(mt + 1, {});
        eb.assign(ms + 1, {});
        double peak_t = -std::numeric_limits<double>::infinity();
        double peak_s = -std::numeric_limits<double>::infinity();
        for (int j = 0; j <= mt; ++j) {
            const complex_t t{c_t, -half_t + h * j};
            ea[j] = detail::ln_terms(spec.x_terms, t) + t * ln_x;
            peak_t = std::max(peak_t, ea[j].real());
        }
        for (int i = 0; i <= ms; ++i) {
            const complex_t s{c_s, -half_s + h * i};
            eb[i] = detail::ln_terms(spec.y_terms, s) + s * ln_y;
            peak_s = std::max(peak_s, eb[i].real());
        }
        for (int j = 0; j <= mt; ++j) {
            const double w = (j == 0 || j == mt) ? 0.5 * h : h;
            ea[j] = w * std::exp(ea[j] - peak_t);
        }
        for (int i = 0; i <= ms; ++i) {
            const double w = (i == 0 || i == ms) ? 0.5 * h : h;
            eb[i] = w * std::exp(eb[i] - peak_s);
            if (y_weight) eb[i] *= y_weight({c_s, -half_s + h * i});
        }

        // Accumulate the outer product along anti-diagonals, then close with
        // the joint factor once per diagonal.
        conv.assign(mt + ms + 1, {});
        for (int i = 0; i <= ms; ++i) {
            const complex_t b = eb[i];
            complex_t* out = conv.data() + i;
            for (int j = 0; j <= mt; ++j) out[j] += b * ea[j];
        }
        diag.resize(mt + ms + 1);
        for (int k = 0; k <= mt + ms; ++k)
            diag[k] = std::exp(detail::ln_terms(
                spec.joint_terms, {sigma, -half_s - half_t + h * k}));
        double acc = 0.0;
        for (int k = 0; k <= mt + ms; ++k) acc += (diag[k] * conv[k]).real();

        // Restore the peak in two steps so exponents near the double range
        // (large shape parameters) do not overflow prematurely.
        const double scale = peak_t + peak_s;
        acc *= std::exp(std::min(scale, 600.0));
        acc *= std::exp(std::max(scale - 600.0, 0.0));
        return acc / (4.0 * M_PI * M_PI);
    };

    // Initial resolution: ten nodes per unit line covers the gamma-product
    // envelope; the x^t / y^s phases add |ln arg|/(2 pi) oscillations per
    // unit, wanting ~8 nodes per period on top.
    const auto initial_nodes = [](double T, double ln_arg) {
        const int osc = static_cast<int>(2.6 * T * std::fabs(ln_arg));
        return std::min(4096, std::max({384, static_cast<int>(10.0 * T), osc}));
    };
    int n_t = initial_nodes(T_t, ln_x);
    int n_s = initial_nodes(T_s, ln_y);
    double coarse = integrate(n_t, n_s);
    double fine = integrate(2 * n_t, 2 * n_s);
    double prev_delta = std::numeric_limits<double>::infinity();
    while (std::fabs(fine - coarse) > std::max(tol * std::fabs(fine), 1e-14) &&
           n_t < 4096 && n_s < 4096) {
        // A residual that stops shrinking means the accumulation has hit the
        // double-precision cancellation floor of this kernel; more nodes
        // cannot help, and the stagnant estimate is reported honestly.
        if (std::fabs(fine - coarse) > 0.5 * prev_delta) break;
        prev_delta = std::fabs(fine - coarse);
        n_t *= 2;
        n_s *= 2;
        coarse = fine;
        fine = integrate(2 * n_t, 2 * n_s);
    }

    res.value = fine;
    res.error_estimate = std::fabs(fine - coarse);
    res.contour_t = {c_t, T_t, 2 * n_t};
    res.contour_s = {c_s, T_s, 2 * n_s};
    return res;
}

inline FoxHResult fox_h_bivariate(BivariateFoxHSpec spec, double tol = 1e-6)
{
    return fox_h_bivariate_weighted(std::move(spec), SLineWeight{}, tol);
}

} // namespace linkperf::specfun

#endif
