// Radio segment statistics: the received amplitude is a sum of N_R
// independent per-element products of two Nakagami-m amplitudes (access-path
// fade times element fade).  The sum's even moments follow from a binomial
// recurrence; a generalized-K (K_G) law is fitted by matching the 2nd, 4th
// and 6th moments, which reduces to a quadratic in the two shape parameters.
// Equal-shape sums sit slightly off the K_G manifold, so the quadratic can
// produce conjugate roots; the fallback takes their common modulus and the
// fit mode records which branch was used.
#ifndef LINKPERF_RF_LINK_HPP
#define LINKPERF_RF_LINK_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenario.hpp"
#include "specfun/bessel.hpp"
#include "specfun/gamma.hpp"
#include "specfun/meijer_g.hpp"

namespace linkperf {

// n-th raw moment of a single element amplitude: the product of two
// independent Nakagami-m amplitudes with shapes (m_a, m_l), normalized by
// psi_t = sqrt(m_a m_l / (omega_a omega_l)).
inline double product_moment(double m_a, double m_l, double psi_t, int n)
{
    return std::pow(psi_t, -static_cast<double>(n)) *
           std::exp(std::lgamma(m_a + 0.5 * n) + std::lgamma(m_l + 0.5 * n) -
                    std::lgamma(m_a) - std::lgamma(m_l));
}

struct SumMoments {
    std::array<double, 7> e;  // raw moments of the N_R-element sum, orders 0..6
    double psi_tilde = 0.0;   // single-element normalization
};

inline SumMoments sum_moments(double m_a, double m_l, double omega_a,
                              double omega_l, int n_r)
{
    if (n_r < 1) throw std::domain_error("sum_moments: element count must be >= 1");
    if (!(m_a > 0.0 && m_l > 0.0 && omega_a > 0.0 && omega_l > 0.0))
        throw std::domain_error("sum_moments: shapes and spreads must be positive");
    const double psi_t = std::sqrt(m_a * m_l / (omega_a * omega_l));
    std::array<double, 7> one{};
    for (int j = 0; j <= 6; ++j) one[j] = product_moment(m_a, m_l, psi_t, j);
    std::array<double, 7> e = one;
    for (int k = 2; k <= n_r; ++k) {
        std::array<double, 7> next{};
        for (int n = 0; n <= 6; ++n) {
            double binom = 1.0;
            for (int j = 0; j <= n; ++j) {
                next[n] += binom * e[n - j] * one[j];
                binom *= static_cast<double>(n - j) / (j + 1.0);
            }
        }
        e = next;
    }
    return {e, psi_t};
}

enum class FitMode { DistinctRoots, ModulusFallback };

inline const char* fit_mode_name(FitMode m)
{
    return m == FitMode::DistinctRoots ? "distinct-roots" : "modulus-fallback";
}

enum class FitPolicy { AllowFallback, RequireDistinct };

struct KgFit {
    double k = 0.0;    // larger shape
    double m = 0.0;    // smaller shape
    double psi = 0.0;  // amplitude normalization, psi = sqrt(k m / E2)
    FitMode mode = FitMode::DistinctRoots;
};

// Fit K_G shapes to the sum's 2nd/4th/6th moments.  The matching conditions
// reduce to A x^2 + B x + C = 0 whose roots are the two shapes; conjugate
// roots (disc < 0) collapse to the common modulus sqrt(C/A).
inline KgFit moment_match(double e2, double e4, double e6,
                          FitPolicy policy = FitPolicy::AllowFallback)
{
    const double a = e6 * e2 + e2 * e2 * e4 - 2.0 * e4 * e4;
    const double b = e6 * e2 - 4.0 * e4 * e4 + 3.0 * e2 * e2 * e4;
    const double c = 2.0 * e2 * e2 * e4;
    const double disc = b * b - 4.0 * a * c;
    KgFit fit;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        const double r1 = std::fabs((-b + s) / (2.0 * a));
        const double r2 = std::fabs((-b - s) / (2.0 * a));
        fit.k = std::max(r1, r2);
        fit.m = std::min(r1, r2);
        fit.mode = FitMode::DistinctRoots;
    } else {
        if (policy == FitPolicy::RequireDistinct)
            throw std::runtime_error(
                "moment_match: conjugate roots (disc = " + std::to_string(disc) +
                "); sum moments lie off the K_G manifold");
        fit.k = fit.m = std::sqrt(c / a);
        fit.mode = FitMode::ModulusFallback;
    }
    fit.psi = std::sqrt(fit.k * fit.m / e2);
    return fit;
}

// K_G SNR density at gamma for per-unit-amplitude-square mean SNR gbar:
//   f(g) = 2 z^{(k+m)/2} K_{k-m}(2 sqrt z) / (Gamma(k) Gamma(m) g),
// z = psi^2 g / gbar.
inline double rf_snr_pdf(double gamma, double gbar, const KgFit& fit)
{
    if (!(gbar > 0.0)) throw std::domain_error("rf_snr_pdf: mean SNR must be positive");
    if (!(gamma > 0.0)) return 0.0;
    const double z = fit.psi * fit.psi * gamma / gbar;
    const double arg = 2.0 * std::sqrt(z);
    const double lg = 0.5 * (fit.k + fit.m) * std::log(z) -
                      std::lgamma(fit.k) - std::lgamma(fit.m);
    const double kv = specfun::bessel_k(fit.k - fit.m, arg);
    return 2.0 * std::exp(lg) * kv / gamma;
}

// K_G SNR distribution function (Mellin-Barnes form of the incomplete
// integral of the density above).  Past the distribution's bulk (z of order
// k m) the direct form approaches 1 through heavy cancellation, so the upper
// tail is evaluated through the complementary integral instead, which shifts
// the contour across the pole at the origin and computes 1 - F directly.
inline double rf_snr_cdf(double gamma, double gbar, const KgFit& fit)
{
    if (!(gbar > 0.0)) throw std::domain_error("rf_snr_cdf: mean SNR must be positive");
    if (!(gamma > 0.0)) return 0.0;
    const double z = fit.psi * fit.psi * gamma / gbar;
    const double norm = std::exp(-std::lgamma(fit.k) - std::lgamma(fit.m));
    if (z > 2.0 * fit.k * fit.m) {
        const double comp =
            specfun::meijer_g_value(0, 3, 3, 1, {1.0 - fit.k, 1.0 - fit.m, 1.0},
                                    {0.0}, 1.0 / z, 1e-11) *
            norm;
        if (comp < -1e-6 || comp > 1.0 + 1e-6)
            throw std::runtime_error(
                "rf_snr_cdf: tail value left the unit band (comp=" +
                std::to_string(comp) + ")");
        return 1.0 - std::min(1.0, std::max(0.0, comp));
    }
    const double raw =
        specfun::meijer_g_value(2, 1, 1, 3, {1.0}, {fit.k, fit.m, 0.0}, z, 1e-11) *
        norm;
    if (raw < -1e-6 || raw > 1.0 + 1e-6)
        throw std::runtime_error("rf_snr_cdf: value left the unit band (raw=" +
                                 std::to_string(raw) + ")");
    return std::min(1.0, std::max(0.0, raw));
}

// Gaussian (central-limit) reference for the same sum: amplitude S
// approximately Normal(mu, sigma^2) with mu = N_R E[R~], sigma^2 =
// N_R (E[R~^2] - E[R~]^2); SNR = gbar S^2.
inline double clt_baseline_cdf(double gamma, double gbar, double m_a, double m_l,
                               double omega_a, double omega_l, int n_r)
{
    if (!(gamma > 0.0)) return 0.0;
    const double psi_t = std::sqrt(m_a * m_l / (omega_a * omega_l));
    const double e1 = product_moment(m_a, m_l, psi_t, 1);
    const double e2 = product_moment(m_a, m_l, psi_t, 2);
    const double mu = n_r * e1;
    const double sigma = std::sqrt(n_r * (e2 - e1 * e1));
    const double s = std::sqrt(gamma / gbar);
    const auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    return phi((s - mu) / sigma) - phi((-s - mu) / sigma);
}

// Per-user radio parameter bundle.
struct RfParams {
    KgFit fit;
    SumMoments moments;
    double mean_snr = 0.0;  // per-unit-amplitude-square scale
    RfBudget budget;
};

inline RfParams derive_rf(const ScenarioConfig& cfg, UserSide user,
                          FitPolicy policy = FitPolicy::AllowFallback)
{
    const auto g = derive_geometry(cfg);
    const double m_l = (user == UserSide::Transmission) ? cfg.m_t : cfg.m_r;
    RfParams p;
    p.moments = sum_moments(cfg.m_a, m_l, cfg.omega_a, cfg.omega_l, cfg.n_r);
    p.fit = moment_match(p.moments.e[2], p.moments.e[4], p.moments.e[6], policy);
    p.budget = rf_mean_snr(cfg, g, user);
    p.mean_snr = p.budget.mean_snr_linear;
    return p;
}

} // namespace linkperf

#endif
