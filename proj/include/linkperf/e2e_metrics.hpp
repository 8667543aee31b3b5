// End-to-end SNR statistics of the relayed optical/radio chain.  The relay
// receives the optical signal (SNR gamma_F = gbar_F h^r with h the composite
// optical gain) and forwards it with a fixed amplification constant C, so the
// served user sees gamma = gamma_F gamma_R / (gamma_R + C) with gamma_R the
// generalized-K radio SNR of the surface-assisted hop.
//
// Every average over that product reduces to one double Mellin-Barnes pass:
// the radio factors Γ(-t)Γ(k-t)Γ(m-t) ride the t-line with argument
// x = Psi^2 C / gbar_R, the optical shape factors Γ(alpha+rs)Γ(beta+rs) ride
// the s-line with a per-metric argument y and gamma factor E(s), and a
// single Γ(s+t) couples the lines.  Two whole series fold into analytic
// s-line weights instead of separate integrals: the pointing series
// Σ_k w_k (w + r s)^{-(2k+1)} (each factor is Γ(w+rs)/Γ(1+w+rs) exactly) and
// the modulation branch sum Σ_m (q_m/q_1)^s.
//
// High-SNR behavior comes from the three leading s-residues (at -alpha/r,
// -beta/r and -w/r): each yields an algebraic z^h term whose radio factor is
// a univariate G^{3,1}; the smallest of the three exponents fixes the
// diversity order min(alpha, beta, w)/r.
#ifndef LINKPERF_E2E_METRICS_HPP
#define LINKPERF_E2E_METRICS_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fso_link.hpp"
#include "rf_link.hpp"
#include "scenario.hpp"
#include "specfun/fox_h.hpp"
#include "specfun/gamma.hpp"
#include "specfun/meijer_g.hpp"

namespace linkperf {

// ---------------------------------------------------------------------------
// Modulation table
// ---------------------------------------------------------------------------

// Conditional error rate P(gamma) = delta Σ_m Q-bar(p, q_m gamma) with
// Q-bar(p, x) = Γ(p, x)/(2 Γ(p)); delta and the q_m implement the usual
// coherent constellations, and the one intensity scheme runs on the
// square-law detection order.
struct ModulationScheme {
    std::string name;
    double delta = 1.0;
    double p = 0.5;
    std::vector<double> q;
    int r = 1;  // detection order the scheme is defined for
};

inline const std::vector<ModulationScheme>& modulation_table()
{
    static const std::vector<ModulationScheme> table = [] {
        std::vector<ModulationScheme> t;
        t.push_back({"bpsk", 1.0, 0.5, {1.0}, 1});
        {
            std::vector<double> q;
            for (int m = 1; m <= 4; ++m) {
                const double s = std::sin((2.0 * m - 1.0) * M_PI / 16.0);
                q.push_back(4.0 * s * s);
            }
            t.push_back({"16psk", 0.5, 0.5, q, 1});
        }
        t.push_back({"16qam", 0.75, 0.5, {0.4, 3.6}, 1});
        {
            std::vector<double> q;
            for (int m = 1; m <= 4; ++m)
                q.push_back((2.0 * m - 1.0) * (2.0 * m - 1.0) / 7.0);
            t.push_back({"64qam", 7.0 / 12.0, 0.5, q, 1});
        }
        t.push_back({"ook", 1.0, 0.5, {0.5}, 2});
        return t;
    }();
    return table;
}

inline const ModulationScheme& modulation_scheme(const std::string& name)
{
    for (const auto& m : modulation_table())
        if (m.name == name) return m;
    throw std::invalid_argument("modulation_scheme: unknown scheme '" + name + "'");
}

// ---------------------------------------------------------------------------
// Combined parameter bundle
// ---------------------------------------------------------------------------

struct E2EParams {
    FsoParams fso;
    RfParams rf;
    UserSide user = UserSide::Reflection;
    double relay_gain = 1.0;  // fixed amplification constant C
    double gamma_th = 0.0;    // outage threshold, linear
    int r = 1;                // detection order

    double k_gain = 0.0;      // optical gain scale K = a0 h_p N_F/(alpha beta)
    double x_rf = 0.0;        // radio kernel argument Psi^2 C / gbar_R

    // ln of the shared prefactor varpi N_F / (Γ(a)Γ(b)Γ(k)Γ(m)); around
    // e^{-100} at the baseline fit, so it only ever exists in the log domain.
    double ln_pref() const
    {
        return std::log(fso.varpi * fso.nf_norm) - specfun::ln_gamma(fso.alpha) -
               specfun::ln_gamma(fso.beta) - specfun::ln_gamma(rf.fit.k) -
               specfun::ln_gamma(rf.fit.m);
    }
};

inline E2EParams derive_e2e(const ScenarioConfig& cfg, UserSide user,
                            FitPolicy policy = FitPolicy::AllowFallback)
{
    const auto g = derive_geometry(cfg);
    E2EParams e;
    e.fso = derive_fso(cfg, g);
    e.rf = derive_rf(cfg, user, policy);
    e.user = user;
    e.relay_gain = cfg.relay_gain_c;
    e.gamma_th = std::pow(10.0, cfg.gamma_th_db / 10.0);
    e.r = e.fso.r;
    e.k_gain = e.fso.a0 * e.fso.h_p * cfg.n_f / (e.fso.alpha * e.fso.beta);
    e.x_rf = e.rf.fit.psi * e.rf.fit.psi * e.relay_gain / e.rf.mean_snr;
    return e;
}

struct MetricEstimate {
    double value = 0.0;
    double error_estimate = 0.0;  // propagated contour node-doubling residual
};

namespace detail {

// Kernel skeleton shared by all metrics; callers append the metric factor
// E(s) to y_terms and attach the folded series as the s-line weight.
inline specfun::BivariateFoxHSpec e2e_spec(const E2EParams& e, double arg_y)
{
    specfun::BivariateFoxHSpec spec;
    spec.joint_terms = {{0.0, 1.0, false}};
    spec.x_terms = {{0.0, -1.0, false},
                    {e.rf.fit.k, -1.0, false},
                    {e.rf.fit.m, -1.0, false}};
    const double rd = static_cast<double>(e.r);
    spec.y_terms = {{e.fso.alpha, rd, false}, {e.fso.beta, rd, false}};
    spec.arg_x = e.x_rf;
    spec.arg_y = arg_y;
    return spec;
}

// Σ_k w_k (w + r s)^{-(2k+1)} as an analytic weight on the s-line.
inline specfun::SLineWeight pointing_series_weight(const E2EParams& e)
{
    const double w = e.fso.pole_w();
    const double rd = static_cast<double>(e.r);
    std::vector<double> wk(e.fso.k_f + 1);
    for (int k = 0; k <= e.fso.k_f; ++k) wk[k] = e.fso.series_weight(k);
    return [w, rd, wk = std::move(wk)](specfun::complex_t s) {
        const specfun::complex_t inv = 1.0 / (w + rd * s);
        const specfun::complex_t inv2 = inv * inv;
        specfun::complex_t pow_odd = inv;
        specfun::complex_t acc = wk[0] * pow_odd;
        for (size_t k = 1; k < wk.size(); ++k) {
            pow_odd *= inv2;
            acc += wk[k] * pow_odd;
        }
        return acc;
    };
}

// Branch fold Σ_m (q_m/q_1)^s on top of the pointing series.
inline specfun::SLineWeight branch_weight(const E2EParams& e,
                                          const std::vector<double>& q)
{
    auto base = pointing_series_weight(e);
    std::vector<double> ln_ratio;
    for (size_t m = 1; m < q.size(); ++m) ln_ratio.push_back(std::log(q[m] / q[0]));
    return [base = std::move(base),
            ln_ratio = std::move(ln_ratio)](specfun::complex_t s) {
        specfun::complex_t branches{1.0, 0.0};
        for (const double lr : ln_ratio) branches += std::exp(s * lr);
        return base(s) * branches;
    };
}

} // namespace detail

// ---------------------------------------------------------------------------
// Distribution of the end-to-end SNR
// ---------------------------------------------------------------------------

// CDF at threshold gamma under optical mean SNR gbar_h.  The kernel value is
// the complement: F = 1 - pref * I, so the achievable tail resolution is
// bounded by tol * 1 in absolute terms; the error estimate reflects that.
inline MetricEstimate e2e_cdf_ex(double gamma, double gbar_h, const E2EParams& e,
                                 double tol = 1e-8)
{
    if (!(gbar_h > 0.0))
        throw std::domain_error("e2e_cdf: mean SNR must be positive");
    if (!(gamma > 0.0)) return {0.0, 0.0};

    auto spec = detail::e2e_spec(
        e, std::pow(e.k_gain, static_cast<double>(e.r)) * gbar_h / gamma);
    spec.y_terms.push_back({1.0, 1.0, true});  // E(s) = 1/Γ(1+s)
    const auto res = specfun::fox_h_bivariate_weighted(
        spec, detail::pointing_series_weight(e), tol);

    const double pref = std::exp(e.ln_pref());
    const double raw = 1.0 - pref * res.value;
    if (raw < -1e-6 || raw > 1.0 + 1e-6)
        throw std::runtime_error("e2e_cdf: kernel left the unit band (raw=" +
                                 std::to_string(raw) + ")");
    return {std::min(1.0, std::max(0.0, raw)), pref * res.error_estimate};
}

inline double e2e_cdf(double gamma, double gbar_h, const E2EParams& e,
                      double tol = 1e-8)
{
    return e2e_cdf_ex(gamma, gbar_h, e, tol).value;
}

inline MetricEstimate e2e_pdf_ex(double gamma, double gbar_h, const E2EParams& e,
                                 double tol = 1e-8)
{
    if (!(gbar_h > 0.0))
        throw std::domain_error("e2e_pdf: mean SNR must be positive");
    if (!(gamma > 0.0)) return {0.0, 0.0};

    auto spec = detail::e2e_spec(
        e, std::pow(e.k_gain, static_cast<double>(e.r)) * gbar_h / gamma);
    spec.y_terms.push_back({0.0, 1.0, true});  // E(s) = 1/Γ(s)
    const auto res = specfun::fox_h_bivariate_weighted(
        spec, detail::pointing_series_weight(e), tol);

    const double scale = std::exp(e.ln_pref()) / gamma;
    const double raw = scale * res.value;
    if (raw < -1e-6)
        throw std::runtime_error("e2e_pdf: kernel went negative (raw=" +
                                 std::to_string(raw) + ")");
    return {std::max(0.0, raw), scale * res.error_estimate};
}

inline double e2e_pdf(double gamma, double gbar_h, const E2EParams& e,
                      double tol = 1e-8)
{
    return e2e_pdf_ex(gamma, gbar_h, e, tol).value;
}

inline MetricEstimate outage_probability_ex(double gbar_h, const E2EParams& e,
                                            double tol = 1e-8)
{
    return e2e_cdf_ex(e.gamma_th, gbar_h, e, tol);
}

inline double outage_probability(double gbar_h, const E2EParams& e,
                                 double tol = 1e-8)
{
    return e2e_cdf_ex(e.gamma_th, gbar_h, e, tol).value;
}

// ---------------------------------------------------------------------------
// High-SNR expansion and diversity order
// ---------------------------------------------------------------------------

namespace detail {

struct LogSigned {
    double ln = -std::numeric_limits<double>::infinity();
    int sign = 0;
};

// Analytic continuation of the radio reduction factor to negative order:
// cont(mu) = G^{3,1}_{1,3}(x | 1+mu; 0,k,m) / Γ(-mu).  At positive order the
// defining line sits between the pole families; continuing to -mu drags
// l*+1 = floor(mu+1/2)+1 poles of Γ(-mu+u) across it.  Their residues are the
// leading descending terms  x^mu Σ_l (-mu)_l/l! Γ(k-mu+l)Γ(m-mu+l)(-1/x)^l,
// and the remainder is a convergent line integral on a strip that once again
// separates what is left of the two families.  The split is exact for every
// x; the residue block alone is the familiar large-x expansion.
inline LogSigned radio_continuation(double mu, double x, double k, double m,
                                    double tol)
{
    if (!(x > 0.0))
        throw std::domain_error("radio_continuation: argument must be positive");
    const double ln_x = std::log(x);
    const int lstar = static_cast<int>(std::floor(mu + 0.5));

    // Residue block, accumulated relative to its largest term.
    std::vector<double> ln_t(lstar + 1);
    std::vector<int> sg_t(lstar + 1);
    double ln_poch = 0.0;
    int sg_poch = 1;
    double ln_peak = -std::numeric_limits<double>::infinity();
    for (int l = 0; l <= lstar; ++l) {
        const int sk = specfun::gamma_sign(k - mu + l);
        const int sm = specfun::gamma_sign(m - mu + l);
        sg_t[l] = sg_poch * sk * sm * ((l % 2 == 0) ? 1 : -1);
        ln_t[l] = sg_t[l] == 0
                      ? -std::numeric_limits<double>::infinity()
                      : ln_poch + specfun::ln_gamma(k - mu + l) +
                            specfun::ln_gamma(m - mu + l) -
                            specfun::ln_gamma(static_cast<double>(l) + 1.0) -
                            l * ln_x;
        ln_peak = std::max(ln_peak, ln_t[l]);
        const double factor = l - mu;  // next Pochhammer step (-mu)_{l+1}
        if (factor < 0.0) sg_poch = -sg_poch;
        ln_poch += std::log(std::fabs(factor));
    }
    double acc = 0.0;
    for (int l = 0; l <= lstar; ++l)
        if (sg_t[l] != 0) acc += sg_t[l] * std::exp(ln_t[l] - ln_peak);

    // Line correction on c in (mu-l*-1, 0), kept clear of the bracketing
    // poles at mu-l*, mu-l*-1 and 0.
    const double left = mu - lstar - 1.0;
    const double cands[] = {mu - lstar - 0.5, 0.5 * std::max(left, -1.0), -0.5};
    double c = -0.5, best = -1.0;
    for (const double cc : cands) {
        if (!(left + 0.03 < cc && cc < -0.03)) continue;
        const double clear = std::min(
            std::min(std::fabs(cc), std::fabs(cc - (mu - lstar))),
            std::fabs(cc - left));
        if (clear > best) { best = clear; c = cc; }
    }
    const auto ln_integrand = [&](double v) {
        const specfun::complex_t u{c, v};
        return specfun::ln_gamma(-u) + specfun::ln_gamma(k - u) +
               specfun::ln_gamma(m - u) + specfun::ln_gamma(-mu + u) + u * ln_x;
    };
    // The modulus peaks off-axis (the gamma moduli decay only like
    // e^{-2 pi v} v^{k+m+...}), so scan for the crest before normalizing.
    double v_max = 30.0, ln_crest = -std::numeric_limits<double>::infinity();
    for (double v = 0.0; v <= v_max; v += 1.0)
        ln_crest = std::max(ln_crest, ln_integrand(v).real());
    while (ln_integrand(v_max).real() > ln_crest - 45.0 && v_max < 400.0)
        v_max += 10.0;
    double integral = 0.0, prev = 0.0;
    for (int grid = 0; grid < 12; ++grid) {
        const std::size_t n = std::size_t(256) << grid;
        const double h_step = v_max / static_cast<double>(n);
        double s = 0.5 * std::exp(ln_integrand(0.0).real() - ln_crest) *
                   std::cos(ln_integrand(0.0).imag());
        for (std::size_t i = 1; i <= n; ++i) {
            const auto lg = ln_integrand(h_step * static_cast<double>(i));
            s += std::exp(lg.real() - ln_crest) * std::cos(lg.imag());
        }
        integral = 2.0 * h_step * s;  // even real part: twice the half line
        if (grid > 0 && std::fabs(integral - prev) <=
                            tol * std::max(std::fabs(integral), 1e-300))
            break;
        prev = integral;
    }
    const int s_ref = specfun::gamma_sign(-mu);
    if (s_ref == 0)
        throw std::domain_error(
            "radio_continuation: integer order (degenerate residue)");
    // (1/2pi) integral, divided by Γ(-mu), folded onto the residue scale.
    const double corr = integral / (2.0 * M_PI) * s_ref *
                        std::exp(ln_crest - specfun::ln_gamma(-mu) -
                                 (ln_peak + mu * ln_x));
    acc += corr;
    if (acc == 0.0) return {};
    return {ln_peak + mu * ln_x + std::log(std::fabs(acc)),
            acc > 0.0 ? 1 : -1};
}

// One algebraic tail term  pref * gain(h) * cont(h/r) * z^h / h, where gain
// collects the residue's gamma/series factors.  Assembled fully in the log
// domain: the individual factors span e^{+-100}.
inline double asym_term(const E2EParams& e, double h, const LogSigned& gain,
                        const LogSigned& cont, double ln_z, double extra_ln,
                        int extra_sign)
{
    if (gain.sign == 0 || cont.sign == 0) return 0.0;
    const double ln = e.ln_pref() + gain.ln + cont.ln + h * ln_z -
                      std::log(h) + extra_ln;
    return gain.sign * cont.sign * extra_sign * std::exp(ln);
}

// Residue gains of the three leading families.
inline LogSigned shape_gain(const E2EParams& e, double h, double other)
{
    // Γ(other - h) * Σ_k w_k (w - h)^{-(2k+1)}
    const int s_g = specfun::gamma_sign(other - h);
    if (s_g == 0)
        throw std::domain_error(
            "e2e asymptotics: coincident shape parameters (alpha = beta)");
    const double w = e.fso.pole_w();
    double series = 0.0;
    for (int k = 0; k <= e.fso.k_f; ++k)
        series += e.fso.series_weight(k) / std::pow(w - h, 2.0 * k + 1.0);
    const int s_s = (series > 0.0) - (series < 0.0);
    return {specfun::ln_gamma(other - h) + std::log(std::fabs(series)), s_g * s_s};
}

inline LogSigned pointing_gain(const E2EParams& e)
{
    // Γ(alpha - w) Γ(beta - w) * (1/w is carried by the shared 1/h factor)
    const int sa = specfun::gamma_sign(e.fso.alpha - e.fso.pole_w());
    const int sb = specfun::gamma_sign(e.fso.beta - e.fso.pole_w());
    if (sa == 0 || sb == 0)
        throw std::domain_error(
            "e2e asymptotics: pointing exponent collides with a shape parameter");
    return {specfun::ln_gamma(e.fso.alpha - e.fso.pole_w()) +
                specfun::ln_gamma(e.fso.beta - e.fso.pole_w()),
            sa * sb};
}

} // namespace detail

// Three-term algebraic tail of the CDF; valid once gamma/gbar_h is small.
inline double e2e_cdf_asymptotic(double gamma, double gbar_h, const E2EParams& e)
{
    if (!(gbar_h > 0.0))
        throw std::domain_error("e2e_cdf_asymptotic: mean SNR must be positive");
    if (!(gamma > 0.0)) return 0.0;
    const double rd = static_cast<double>(e.r);
    const double ln_z =
        std::log(gamma / gbar_h) / rd - std::log(e.k_gain);
    double acc = 0.0;
    const std::pair<double, detail::LogSigned> families[] = {
        {e.fso.alpha, detail::shape_gain(e, e.fso.alpha, e.fso.beta)},
        {e.fso.beta, detail::shape_gain(e, e.fso.beta, e.fso.alpha)},
        {e.fso.pole_w(), detail::pointing_gain(e)}};
    for (const auto& [h, gain] : families) {
        const auto cont = detail::radio_continuation(h / rd, e.x_rf,
                                                     e.rf.fit.k, e.rf.fit.m,
                                                     1e-10);
        acc += detail::asym_term(e, h, gain, cont, ln_z, 0.0, 1);
    }
    return acc;
}

inline double outage_probability_asymptotic(double gbar_h, const E2EParams& e)
{
    return e2e_cdf_asymptotic(e.gamma_th, gbar_h, e);
}

// Slope of the outage tail on the log-log axis.
inline double diversity_order(const E2EParams& e)
{
    return std::min(std::min(e.fso.alpha, e.fso.beta), e.fso.pole_w()) /
           static_cast<double>(e.r);
}

// ---------------------------------------------------------------------------
// Average error rate
// ---------------------------------------------------------------------------

inline MetricEstimate avg_ber_ex(const ModulationScheme& mod, double gbar_h,
                                 const E2EParams& e, double tol = 1e-8)
{
    if (!(gbar_h > 0.0))
        throw std::domain_error("avg_ber: mean SNR must be positive");
    if (mod.r != e.r)
        throw std::invalid_argument("avg_ber: scheme '" + mod.name +
                                    "' is defined for detection order " +
                                    std::to_string(mod.r) + ", parameters use " +
                                    std::to_string(e.r));

    auto spec = detail::e2e_spec(
        e, std::pow(e.k_gain, static_cast<double>(e.r)) * mod.q[0] * gbar_h);
    spec.y_terms.push_back({mod.p, -1.0, false});  // Γ(p - s)
    spec.y_terms.push_back({1.0, 1.0, true});      // 1/Γ(1 + s)
    const auto res = specfun::fox_h_bivariate_weighted(
        spec, detail::branch_weight(e, mod.q), tol);

    const double scale =
        0.5 * std::exp(e.ln_pref() - specfun::ln_gamma(mod.p));
    const double half_branches = 0.5 * static_cast<double>(mod.q.size());
    const double raw = mod.delta * (half_branches - scale * res.value);
    const double cap = mod.delta * half_branches;
    if (raw < -1e-6 || raw > cap + 1e-6)
        throw std::runtime_error("avg_ber: kernel left [0, " +
                                 std::to_string(cap) + "] (raw=" +
                                 std::to_string(raw) + ")");
    return {std::min(cap, std::max(0.0, raw)),
            mod.delta * scale * res.error_estimate};
}

inline double avg_ber(const ModulationScheme& mod, double gbar_h,
                      const E2EParams& e, double tol = 1e-8)
{
    return avg_ber_ex(mod, gbar_h, e, tol).value;
}

// Tail expansion of the average error rate: each CDF tail term integrates
// against the conditional kernel to a factor Γ(p + h/r)/(2 Γ(p)), with the
// branch scale folded into z.
inline double avg_ber_asymptotic(const ModulationScheme& mod, double gbar_h,
                                 const E2EParams& e)
{
    if (!(gbar_h > 0.0))
        throw std::domain_error("avg_ber_asymptotic: mean SNR must be positive");
    if (mod.r != e.r)
        throw std::invalid_argument("avg_ber_asymptotic: detection order mismatch");
    const double rd = static_cast<double>(e.r);
    const std::pair<double, detail::LogSigned> families[] = {
        {e.fso.alpha, detail::shape_gain(e, e.fso.alpha, e.fso.beta)},
        {e.fso.beta, detail::shape_gain(e, e.fso.beta, e.fso.alpha)},
        {e.fso.pole_w(), detail::pointing_gain(e)}};
    detail::LogSigned cont[3];
    for (int i = 0; i < 3; ++i)
        cont[i] = detail::radio_continuation(families[i].first / rd, e.x_rf,
                                             e.rf.fit.k, e.rf.fit.m, 1e-10);
    double acc = 0.0;
    for (const double qm : mod.q) {
        const double ln_z =
            -std::log(qm * gbar_h) / rd - std::log(e.k_gain);
        for (int i = 0; i < 3; ++i) {
            const auto& [h, gain] = families[i];
            const double extra = specfun::ln_gamma(mod.p + h / rd) -
                                 std::log(2.0) - specfun::ln_gamma(mod.p);
            acc += detail::asym_term(e, h, gain, cont[i], ln_z, extra, 1);
        }
    }
    return mod.delta * acc;
}

// ---------------------------------------------------------------------------
// Moments and ergodic capacity
// ---------------------------------------------------------------------------

// E[gamma^s], closed form: the optical factor is a ratio of gamma functions
// times the pointing series at s, the radio factor E[(g/(g+C))^{s}] a single
// univariate G^{3,1}.
inline double snr_moment(double s, double gbar_h, const E2EParams& e,
                         double tol = 1e-10)
{
    if (!(gbar_h > 0.0))
        throw std::domain_error("snr_moment: mean SNR must be positive");
    if (!(s > 0.0))
        throw std::domain_error("snr_moment: order must be positive");
    const double rd = static_cast<double>(e.r);
    const double w = e.fso.pole_w();
    double series = 0.0;
    for (int k = 0; k <= e.fso.k_f; ++k)
        series += e.fso.series_weight(k) / std::pow(w + rd * s, 2.0 * k + 1.0);
    const double optical =
        std::pow(gbar_h * std::pow(e.k_gain, rd), s) *
        std::exp(specfun::ln_gamma(e.fso.alpha + rd * s) +
                 specfun::ln_gamma(e.fso.beta + rd * s) -
                 specfun::ln_gamma(e.fso.alpha) - specfun::ln_gamma(e.fso.beta)) *
        e.fso.varpi * e.fso.nf_norm * series;
    const double g31 = specfun::meijer_g_value(
        3, 1, 1, 3, {1.0 - s}, {0.0, e.rf.fit.k, e.rf.fit.m}, e.x_rf, tol);
    const double radio =
        g31 * std::exp(-specfun::ln_gamma(e.rf.fit.k) -
                       specfun::ln_gamma(e.rf.fit.m) - specfun::ln_gamma(s));
    return optical * radio;
}

// Ergodic capacity in nats per channel use.  Square-law detection uses the
// standard e/(2 pi) front factor inside the log.
inline double capacity_front_factor(int r)
{
    return r == 1 ? 1.0 : M_E / (2.0 * M_PI);
}

inline MetricEstimate ergodic_capacity_ex(double gbar_h, const E2EParams& e,
                                          double tol = 1e-8)
{
    if (!(gbar_h > 0.0))
        throw std::domain_error("ergodic_capacity: mean SNR must be positive");
    const double c0 = capacity_front_factor(e.r);
    auto spec = detail::e2e_spec(
        e, std::pow(e.k_gain, static_cast<double>(e.r)) * c0 * gbar_h);
    // E(s) = Γ(s)Γ(1-s)/Γ(1+s) = Γ(1-s)/s: the gamma ratio collapses exactly,
    // so Γ(1-s) joins the term list and 1/s rides along with the series fold.
    spec.y_terms.push_back({1.0, -1.0, false});
    auto base = detail::pointing_series_weight(e);
    const auto weight = [base = std::move(base)](specfun::complex_t sv) {
        return base(sv) / sv;
    };
    const auto res = specfun::fox_h_bivariate_weighted(spec, weight, tol);
    const double pref = std::exp(e.ln_pref());
    const double raw = pref * res.value;
    if (raw < -1e-6)
        throw std::runtime_error("ergodic_capacity: kernel went negative (raw=" +
                                 std::to_string(raw) + ")");
    return {std::max(0.0, raw), pref * res.error_estimate};
}

inline double ergodic_capacity(double gbar_h, const E2EParams& e,
                               double tol = 1e-8)
{
    return ergodic_capacity_ex(gbar_h, e, tol).value;
}

// Orthogonal-slot baseline: each user is served half the time with the full
// surface (amplitude efficiency 1), so the sum rate is the mean of the two
// full-allocation capacities.
inline double tdm_baseline_capacity(const ScenarioConfig& cfg, double gbar_h,
                                    FitPolicy policy = FitPolicy::AllowFallback,
                                    double tol = 1e-8)
{
    ScenarioConfig full = cfg;
    full.rho_t = 1.0;
    full.rho_r = 1.0;
    const double c_t =
        ergodic_capacity(gbar_h, derive_e2e(full, UserSide::Transmission, policy), tol);
    const double c_r =
        ergodic_capacity(gbar_h, derive_e2e(full, UserSide::Reflection, policy), tol);
    return 0.5 * (c_t + c_r);
}

} // namespace linkperf

#endif
