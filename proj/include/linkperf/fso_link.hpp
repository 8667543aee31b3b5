// Optical segment statistics: beam propagation through the relay mirror,
// misalignment (generalized pointing-error) parameters, turbulence strength
// along both slant paths, aggregated scintillation shapes, and the closed
// form SNR distribution of the optical hop.
//
// The optical gain factorizes as h = h_p * h_g * S: deterministic
// attenuation, pointing/misalignment loss on (0, A0], and a sum of N_F
// independent Gamma-Gamma scintillation factors refit to a single
// Gamma-Gamma law.  The SNR CDF/PDF are truncated-series combinations of
// Meijer-G terms, normalized so the truncated series is itself a proper
// distribution.
#ifndef LINKPERF_FSO_LINK_HPP
#define LINKPERF_FSO_LINK_HPP

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "scenario.hpp"
#include "specfun/bessel.hpp"
#include "specfun/gamma.hpp"
#include "specfun/meijer_g.hpp"

namespace linkperf {

struct FsoParams {
    // Misalignment block.
    double h_p = 0.0;          // deterministic attenuation gain
    double a0 = 0.0;           // peak pointing gain, (0, 1]
    double q_g = 0.0;          // jitter asymmetry, (0, 1]
    double varpi = 0.0;        // pointing shape
    double t_g = 0.0;          // equivalent-area factor
    double sigma_u1_sq = 0.0;  // projected jitter variances [m^2]
    double sigma_u2_sq = 0.0;
    double nu1 = 0.0;          // aperture-to-waist ratios
    double nu2 = 0.0;

    // Waist chain [m].
    double w0 = 0.0;           // source waist meeting the receiver-spot target
    double w0_hat = 0.0;       // equivalent source waist after the mirror
    double w_d = 0.0;          // spot radius at the receiver, direct waist
    double w_d_hat = 0.0;      // spot radius, equivalent waist
    bool w0_from_root = true;  // false: target below diffraction bound, far-field pick

    // Turbulence block.
    double rytov_var = 0.0;    // total scintillation strength
    double rytov_up = 0.0;
    double rytov_down = 0.0;
    double alpha_tilde = 0.0;  // single-aperture Gamma-Gamma shapes
    double beta_tilde = 0.0;
    double alpha = 0.0;        // N_F-aperture refit shapes
    double beta = 0.0;

    // Series controls.
    double nf_norm = 0.0;      // truncated-series normalization constant
    int k_f = 5;
    int n_f = 1;
    int r = 1;                 // detection order

    // Derived helpers used across the metric kernels.
    double pole_w() const { return (1.0 + q_g * q_g) * varpi / (2.0 * q_g); }
    double pole_c() const { return (1.0 - q_g * q_g) * varpi / (2.0 * q_g); }
    // k-th series weight: Γ(1+2k)/(k! Γ(1+k)) (pole_c/2)^{2k}.
    double series_weight(int k) const
    {
        return std::exp(std::lgamma(1.0 + 2.0 * k) - std::lgamma(1.0 + k) -
                        std::lgamma(1.0 + k)) *
               std::pow(pole_c() / 2.0, 2.0 * k);
    }
};

inline double beam_waist(double d, double w0, double wavelength)
{
    if (!(w0 > 0.0)) throw std::domain_error("beam_waist: waist must be positive");
    const double spread = d * wavelength / (M_PI * w0 * w0);
    return w0 * std::sqrt(1.0 + spread * spread);
}

// Source waist w0 with beam_waist(d, w0) = target, by bracketed bisection on
// the chosen monotone branch.  The spot radius as a function of source waist
// has a single minimum sqrt(2 d lambda / pi) (the diffraction bound); `small`
// selects the root below the minimizing waist, `large` the one above.
enum class WaistBranch { Small, Large };

inline double solve_source_waist(double d, double wavelength, double target,
                                 WaistBranch branch)
{
    const double c = d * wavelength / M_PI;
    const double bound = std::sqrt(2.0 * c);
    if (target < bound)
        throw std::domain_error(
            "solve_source_waist: target spot " + std::to_string(target) +
            " m is below the diffraction bound " + std::to_string(bound) + " m");
    const double w_min = std::sqrt(c);  // argmin of the spot radius
    double lo, hi;
    if (branch == WaistBranch::Small) {
        lo = c / target;  // far-field asymptote, below the small root
        hi = w_min;
    } else {
        lo = w_min;
        hi = target;      // spot >= waist, so the large root is below target
    }
    auto f = [&](double w) { return beam_waist(d, w, wavelength) - target; };
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-15 * hi) break;
    }
    const double w = 0.5 * (lo + hi);
    if (std::fabs(f(w)) > 1e-12 * target)
        throw std::runtime_error("solve_source_waist: residual above tolerance");
    return w;
}

// Source waist from the receiver-spot design rule (spot = multiple of the
// aperture radius).  When the requested spot is below the diffraction bound
// for this path the far-field waist c/target is used instead; the flag
// records which branch produced the value.
struct SourceWaist {
    double value;
    bool from_root;
};

inline SourceWaist initial_source_waist(const ScenarioConfig& cfg, double d_oh)
{
    const double target = cfg.waist_target_over_aperture * cfg.aperture;
    const double c = d_oh * cfg.wavelength / M_PI;
    if (target >= std::sqrt(2.0 * c))
        return {solve_source_waist(d_oh, cfg.wavelength, target, WaistBranch::Large), true};
    return {c / target, false};
}

inline double attenuation(const ScenarioConfig& cfg, const LinkGeometry& g)
{
    return cfg.reflect_eff *
           std::pow(10.0, -cfg.absorption * (g.d_oh + g.d_he) / 10.0);
}

// Hufnagel-Valley refractive-index structure profile at altitude l [m].
inline double hv_profile(double l, const ScenarioConfig& cfg)
{
    return 0.00594 * std::pow(cfg.wind_rms / 27.0, 2.0) * std::pow(1e-5 * l, 10.0) *
               std::exp(-l / 1000.0) +
           2.7e-16 * std::exp(-l / 1500.0) + cfg.hv_nominal * std::exp(-l / 1000.0);
}

struct RytovVariance {
    double total = 0.0;
    double uplink = 0.0;
    double downlink = 0.0;
};

// Path-weight functions of the scintillation integrals, with the altitude
// parameterized by a normalized coordinate xi in [0, 1] anchored at the
// receiving end of each hop: the ascending path measures xi from the relay
// (xi = 0 at the relay, 1 at the source) and the descending path from the
// ground (xi = 0 at the ground terminal, 1 at the relay).  Both weights
// vanish at xi = 0, i.e. turbulence right at the receiver contributes
// nothing.
namespace detail {

struct RytovWeights {
    double lam = 0.0;   // beam curvature parameters at the relay
    double t_bar = 0.0;

    // Gaussian-beam weight for the ascending path (real part is physical).
    double up(double xi) const
    {
        const std::complex<double> base(lam * xi * xi, xi * (1.0 - t_bar * xi));
        return (std::pow(base, 5.0 / 6.0)).real() -
               std::pow(lam, 5.0 / 6.0) * std::pow(xi, 5.0 / 3.0);
    }
    // Plane-wave weight for the descending path.
    static double down(double xi) { return std::pow(xi, 5.0 / 6.0); }
};

inline RytovWeights rytov_weights(const ScenarioConfig& cfg, const LinkGeometry& g)
{
    const double k_w = 2.0 * M_PI / cfg.wavelength;
    const double lam0 = 2.0 * g.d_oh / (k_w * cfg.w0 * cfg.w0);
    const double th0 = 1.0 - (std::isfinite(cfg.f0) ? g.d_oh / cfg.f0 : 0.0);
    RytovWeights w;
    w.lam = lam0 / (lam0 * lam0 + th0 * th0);
    w.t_bar = 1.0 - th0 / (th0 * th0 + lam0 * lam0);
    return w;
}

} // namespace detail

inline RytovVariance rytov_variance(const ScenarioConfig& cfg, const LinkGeometry& g)
{
    using boost::math::quadrature::gauss_kronrod;
    const double k_w = 2.0 * M_PI / cfg.wavelength;
    const auto w = detail::rytov_weights(cfg, g);

    // Both weights behave like xi^{5/6} at their xi = 0 endpoint, so
    // integrate in u with xi = u^6; the substituted integrands are smooth and
    // the adaptive rule converges to near machine accuracy.
    const auto up_kernel = [&](double u) {
        const double xi = std::pow(u, 6.0);
        const double l = cfg.h_h + xi * (cfg.h_o - cfg.h_h);
        return hv_profile(l, cfg) * w.up(xi) * 6.0 * std::pow(u, 5.0);
    };
    const auto down_kernel = [&](double u) {
        const double xi = std::pow(u, 6.0);
        const double l = cfg.h_e + xi * (cfg.h_h - cfg.h_e);
        return hv_profile(l, cfg) * detail::RytovWeights::down(xi) * 6.0 *
               std::pow(u, 5.0);
    };
    const double up_int = (cfg.h_h - cfg.h_o) *
                          gauss_kronrod<double, 61>::integrate(up_kernel, 0.0, 1.0,
                                                               15, 1e-13);
    const double down_int = (cfg.h_h - cfg.h_e) *
                            gauss_kronrod<double, 61>::integrate(down_kernel, 0.0,
                                                                 1.0, 15, 1e-13);

    RytovVariance rv;
    rv.uplink = 8.70 * std::pow(k_w, 7.0 / 6.0) *
                std::pow(cfg.h_h - cfg.h_o, 5.0 / 6.0) *
                std::pow(1.0 / std::cos(cfg.zeta1), 11.0 / 6.0) * up_int;
    rv.downlink = 2.25 * std::pow(k_w, 7.0 / 6.0) *
                  std::pow(cfg.h_h - cfg.h_e, 5.0 / 6.0) *
                  std::pow(1.0 / std::cos(cfg.zeta2), 11.0 / 6.0) * down_int;
    rv.total = rv.uplink + rv.downlink;
    return rv;
}

// Single-aperture Gamma-Gamma shapes from the scintillation strength.
inline std::pair<double, double> gg_params(double rytov_var)
{
    if (!(rytov_var > 0.0))
        throw std::domain_error("gg_params: scintillation strength must be positive");
    const double s = std::sqrt(rytov_var);
    const double a =
        1.0 / (std::exp(0.49 * rytov_var /
                        std::pow(1.0 + 1.11 * std::pow(s, 12.0 / 5.0), 7.0 / 6.0)) -
               1.0);
    const double b =
        1.0 / (std::exp(0.51 * rytov_var /
                        std::pow(1.0 + 0.69 * std::pow(s, 12.0 / 5.0), 5.0 / 6.0)) -
               1.0);
    return {a, b};
}

// Shapes of the refit Gamma-Gamma law for a sum of n_f independent
// single-aperture factors (empirical shape correction on the large shape).
inline std::pair<double, double> gg_sum_params(double alpha_tilde, double beta_tilde,
                                               int n_f)
{
    const double eps = (n_f - 1) *
                       (-0.127 - 0.95 * alpha_tilde - 0.0058 * beta_tilde) /
                       (1.0 + 0.00124 * alpha_tilde + 0.98 * beta_tilde);
    const double alpha = n_f * alpha_tilde + eps;
    if (!(alpha > 0.0))
        throw std::domain_error(
            "gg_sum_params: shape correction drove alpha non-positive (alpha_tilde=" +
            std::to_string(alpha_tilde) + ", n_f=" + std::to_string(n_f) + ")");
    return {alpha, n_f * beta_tilde};
}

// Normalization constant making the truncated pointing series a proper
// density: 1 / sum_{k<=K_F} [2q/(1+q^2)] Γ(1+2k)/(k!Γ(1+k)) ((1-q^2)/(2(1+q^2)))^{2k}.
inline double normalization_nf(double q_g, int k_f)
{
    if (!(q_g > 0.0) || q_g > 1.0)
        throw std::domain_error("normalization_nf: asymmetry must lie in (0, 1]");
    double sum = 0.0;
    const double ratio = (1.0 - q_g * q_g) / (2.0 * (1.0 + q_g * q_g));
    for (int k = 0; k <= k_f; ++k) {
        sum += 2.0 * q_g / (1.0 + q_g * q_g) *
               std::exp(std::lgamma(1.0 + 2.0 * k) - std::lgamma(1.0 + k) -
                        std::lgamma(1.0 + k)) *
               std::pow(ratio, 2.0 * k);
    }
    return 1.0 / sum;
}

// Misalignment parameter block.  phi_r = pi and theta_rl = 0 is the stated
// modeling assumption for the projected-jitter variances used here.
inline void derive_misalignment(const ScenarioConfig& cfg, const LinkGeometry& g,
                                FsoParams& p)
{
    if (!(cfg.sigma_s >= 0.0 && cfg.sigma_r >= 0.0 && cfg.sigma_l >= 0.0))
        throw std::domain_error("derive_misalignment: negative jitter deviation");

    const auto w0 = initial_source_waist(cfg, g.d_oh);
    p.w0 = w0.value;
    p.w0_from_root = w0.from_root;
    const double w_at_mirror = beam_waist(g.d_oh, p.w0, cfg.wavelength);
    const double target_hat =
        std::cos(cfg.zeta2) / std::cos(cfg.zeta1) * w_at_mirror;
    p.w0_hat =
        solve_source_waist(g.d_oh, cfg.wavelength, target_hat, WaistBranch::Small);

    const double d_total = g.d_oh + g.d_he;
    p.w_d_hat = beam_waist(d_total, p.w0_hat, cfg.wavelength);
    p.w_d = beam_waist(d_total, p.w0, cfg.wavelength);

    p.nu1 = cfg.aperture * std::sqrt(M_PI / 2.0) / p.w_d_hat;
    p.nu2 = cfg.aperture * std::sqrt(M_PI / 2.0) / p.w_d;
    p.a0 = specfun::erf(p.nu1) * specfun::erf(p.nu2);
    p.t_g = (M_PI * cfg.aperture * cfg.aperture / (4.0 * p.nu1 * p.nu2)) *
            std::sqrt(M_PI * p.a0 /
                      (p.nu1 * p.nu2 *
                       std::exp(-(p.nu1 * p.nu1 + p.nu2 * p.nu2))));

    const double ci = std::cos(cfg.zeta1), cr = std::cos(cfg.zeta2);
    p.sigma_u1_sq = (cr * cr / (ci * ci)) * cfg.sigma_s * cfg.sigma_s +
                    (std::pow(std::sin(cfg.zeta1 + cfg.zeta2), 2.0) / (ci * ci)) *
                        cfg.sigma_r * cfg.sigma_r +
                    cfg.sigma_l * cfg.sigma_l;
    p.sigma_u2_sq = cfg.sigma_s * cfg.sigma_s + cfg.sigma_l * cfg.sigma_l;
    if (!(p.sigma_u1_sq > 0.0) || !(p.sigma_u2_sq > 0.0))
        throw std::domain_error("derive_misalignment: degenerate jitter (zero variance)");

    p.q_g = std::sqrt(std::min(p.sigma_u1_sq, p.sigma_u2_sq) /
                      std::max(p.sigma_u1_sq, p.sigma_u2_sq));
    const double omega = p.sigma_u1_sq + p.sigma_u2_sq;
    p.varpi = (1.0 + p.q_g * p.q_g) * p.t_g / (4.0 * p.q_g * omega);
}

// Full optical parameter derivation.
inline FsoParams derive_fso(const ScenarioConfig& cfg, const LinkGeometry& g)
{
    FsoParams p;
    p.k_f = cfg.k_f;
    p.n_f = cfg.n_f;
    p.r = cfg.detection_r;
    p.h_p = attenuation(cfg, g);
    derive_misalignment(cfg, g, p);
    const auto rv = rytov_variance(cfg, g);
    p.rytov_var = rv.total;
    p.rytov_up = rv.uplink;
    p.rytov_down = rv.downlink;
    std::tie(p.alpha_tilde, p.beta_tilde) = gg_params(rv.total);
    std::tie(p.alpha, p.beta) = gg_sum_params(p.alpha_tilde, p.beta_tilde, cfg.n_f);
    p.nf_norm = normalization_nf(p.q_g, cfg.k_f);
    return p;
}

// Truncated-series misalignment density on (0, a0].
inline double gml_pdf(double h, const FsoParams& p)
{
    if (!(h > 0.0) || h > p.a0) return 0.0;
    const double w = p.pole_w();
    const double c = p.pole_c();
    const double x = std::log(h / p.a0);  // <= 0
    double series = 0.0;
    for (int k = 0; k <= p.k_f; ++k)
        series += std::pow(c * x / 2.0, 2.0 * k) *
                  std::exp(-std::lgamma(1.0 + k) - std::lgamma(1.0 + k));
    return p.varpi * p.nf_norm / p.a0 * std::exp((w - 1.0) * x) * series;
}

// Closed-form integral of the truncated series: for x = ln(h/a0) <= 0,
//   F(h) = varpi N_F sum_k (c/2)^{2k}/(k!Γ(1+k)) e^{wx} sum_{j<=2k} (-1)^j
//          (2k)!/(2k-j)! x^{2k-j} / w^{j+1}.
inline double gml_cdf(double h, const FsoParams& p)
{
    if (!(h > 0.0)) return 0.0;
    if (h >= p.a0) return 1.0;
    const double w = p.pole_w();
    const double c = p.pole_c();
    const double x = std::log(h / p.a0);
    double total = 0.0;
    for (int k = 0; k <= p.k_f; ++k) {
        double inner = 0.0;
        double fall = 1.0;  // (2k)!/(2k-j)! running value
        for (int j = 0; j <= 2 * k; ++j) {
            inner += (j % 2 == 0 ? 1.0 : -1.0) * fall *
                     std::pow(x, 2.0 * k - j) / std::pow(w, j + 1.0);
            fall *= (2.0 * k - j);
        }
        total += std::pow(c / 2.0, 2.0 * k) *
                 std::exp(-std::lgamma(1.0 + k) - std::lgamma(1.0 + k)) * inner;
    }
    return p.varpi * p.nf_norm * std::exp(w * x) * total;
}

namespace detail {

// Meijer-G argument of the optical SNR forms.
inline double fso_g_argument(double gamma, double gbar, const FsoParams& p)
{
    return p.alpha * p.beta / (p.n_f * p.a0 * p.h_p) *
           std::pow(gamma / gbar, 1.0 / p.r);
}

} // namespace detail

// CDF of the optical SNR under detection order r, mean SNR gbar.
inline double fso_snr_cdf(double gamma, double gbar, const FsoParams& p)
{
    if (!(gbar > 0.0)) throw std::domain_error("fso_snr_cdf: mean SNR must be positive");
    if (!(gamma > 0.0)) return 0.0;
    const double z = detail::fso_g_argument(gamma, gbar, p);
    const double w = p.pole_w();
    const double pref = p.varpi * p.nf_norm *
                        std::exp(-specfun::ln_gamma(p.alpha) - specfun::ln_gamma(p.beta));
    double sum = 0.0;
    for (int k = 0; k <= p.k_f; ++k) {
        std::vector<double> a{1.0};
        std::vector<double> b{0.0, p.alpha, p.beta};
        a.insert(a.end(), 2 * k + 1, w + 1.0);
        b.insert(b.end(), 2 * k + 1, w);
        const int q = static_cast<int>(b.size());
        const int pp = static_cast<int>(a.size());
        sum += p.series_weight(k) *
               specfun::meijer_g_value(q, 0, pp, q, a, b, z, 1e-11);
    }
    const double raw = 1.0 - pref * sum;
    if (raw < -1e-6 || raw > 1.0 + 1e-6)
        throw std::runtime_error("fso_snr_cdf: series left the unit band (raw=" +
                                 std::to_string(raw) + ")");
    return std::min(1.0, std::max(0.0, raw));
}

// PDF of the optical SNR (term-wise derivative of the CDF series).
inline double fso_snr_pdf(double gamma, double gbar, const FsoParams& p)
{
    if (!(gbar > 0.0)) throw std::domain_error("fso_snr_pdf: mean SNR must be positive");
    if (!(gamma > 0.0)) return 0.0;
    const double z = detail::fso_g_argument(gamma, gbar, p);
    const double w = p.pole_w();
    const double pref = p.varpi * p.nf_norm *
                        std::exp(-specfun::ln_gamma(p.alpha) - specfun::ln_gamma(p.beta)) /
                        (p.r * gamma);
    double sum = 0.0;
    for (int k = 0; k <= p.k_f; ++k) {
        std::vector<double> a;
        std::vector<double> b{p.alpha, p.beta};
        a.insert(a.end(), 2 * k + 1, w + 1.0);
        b.insert(b.end(), 2 * k + 1, w);
        const int q = static_cast<int>(b.size());
        const int pp = static_cast<int>(a.size());
        sum += p.series_weight(k) *
               specfun::meijer_g_value(q, 0, pp, q, a, b, z, 1e-11);
    }
    return pref * sum;
}

} // namespace linkperf

#endif
