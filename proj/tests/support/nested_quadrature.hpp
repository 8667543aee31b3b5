// Reference evaluation of the bivariate Mellin–Barnes integral, computed the
// way one would by hand: fix t, run the inner s-line sum, then accumulate the
// inner results along the t-line.  The rule here is the uniform trapezoid —
// for integrands analytic in a strip around the contour it converges
// geometrically in the step size, which is exactly the situation on a
// vertical Mellin–Barnes line — with truncation by direct profile scan and
// contour abscissae supplied by the caller.  Rule, truncation logic, and
// contours are therefore all independent of the production evaluator.
#ifndef LINKPERF_TESTS_NESTED_QUADRATURE_HPP
#define LINKPERF_TESTS_NESTED_QUADRATURE_HPP

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "linkperf/specfun/fox_h.hpp"

namespace linkperf::testsupport {

namespace detail {

// Smallest T (stepped by 1.5x) at which the axis profile has fallen 40 nats
// below its on-axis value; the integrand beyond contributes < 1e-17 of the
// peak.
inline double scan_half_extent(const std::vector<linkperf::specfun::GammaTerm>& terms,
                               double center)
{
    const double peak =
        linkperf::specfun::detail::ln_terms(terms, {center, 0.0}).real();
    double T = 10.0;
    while (T < 400.0 &&
           linkperf::specfun::detail::ln_terms(terms, {center, T}).real() > peak - 40.0)
        T *= 1.5;
    return T;
}

} // namespace detail

// `cancellation`, when requested, receives |Σ terms| / Σ |terms| of the
// tensor accumulation: the fraction of the summed magnitude that survives
// phase cancellation.  Double precision carries ~16 digits, so a kernel with
// cancellation 1e-12 cannot be evaluated to much better than 1e-3 relative
// by ANY fixed-precision quadrature — comparisons only make sense on kernels
// whose cancellation leaves room for the target accuracy.
inline double nested_fox_h(const specfun::BivariateFoxHSpec& spec,
                           double c_t, double c_s, double step = 0.04,
                           double* cancellation = nullptr)
{
    using specfun::complex_t;
    const double ln_x = std::log(spec.arg_x);
    const double ln_y = std::log(spec.arg_y);
    const double T_t = detail::scan_half_extent(spec.x_terms, c_t);
    const double T_s = detail::scan_half_extent(spec.y_terms, c_s);
    const int n_t = static_cast<int>(std::ceil(T_t / step));
    const int n_s = static_cast<int>(std::ceil(T_s / step));

    // Per-axis factors, peak-normalized so the tensor pass works near unity.
    std::vector<complex_t> fx(2 * n_t + 1), fy(2 * n_s + 1);
    std::vector<double> vt(2 * n_t + 1), us(2 * n_s + 1);
    double peak_t = -1e300, peak_s = -1e300;
    for (int j = -n_t; j <= n_t; ++j) {
        const complex_t t{c_t, j * step};
        fx[j + n_t] = specfun::detail::ln_terms(spec.x_terms, t) + t * ln_x;
        peak_t = std::max(peak_t, fx[j + n_t].real());
        vt[j + n_t] = j * step;
    }
    for (int i = -n_s; i <= n_s; ++i) {
        const complex_t s{c_s, i * step};
        fy[i + n_s] = specfun::detail::ln_terms(spec.y_terms, s) + s * ln_y;
        peak_s = std::max(peak_s, fy[i + n_s].real());
        us[i + n_s] = i * step;
    }
    for (auto& f : fx) f = std::exp(f - peak_t);
    for (auto& f : fy) f = std::exp(f - peak_s);
    // Trapezoid endpoint halving (the endpoints are ~1e-17 of the peak, but
    // keep the rule honest).
    fx.front() *= 0.5; fx.back() *= 0.5;
    fy.front() *= 0.5; fy.back() *= 0.5;

    const double sigma = c_s + c_t;
    double acc = 0.0, acc_abs = 0.0;
    for (size_t i = 0; i < fy.size(); ++i) {
        double inner = 0.0, inner_abs = 0.0;
        for (size_t j = 0; j < fx.size(); ++j) {
            const complex_t joint =
                specfun::detail::ln_terms(spec.joint_terms, {sigma, us[i] + vt[j]});
            const double term = (fy[i] * fx[j] * std::exp(joint)).real();
            inner += term;
            inner_abs += std::fabs(term);
        }
        acc += inner;
        acc_abs += inner_abs;
    }
    if (cancellation)
        *cancellation = acc_abs > 0.0 ? std::fabs(acc) / acc_abs : 1.0;
    acc *= step * step / (4.0 * M_PI * M_PI);
    const double scale = peak_t + peak_s;
    acc *= std::exp(std::min(scale, 600.0));
    acc *= std::exp(std::max(scale - 600.0, 0.0));
    return acc;
}

// A random kernel drawn from the family the end-to-end metrics actually use:
// Γ(s+t) coupling, a three-gamma product side in t, and a gamma-pair side in
// s carrying an odd-multiplicity Γ/Γ ratio plus one of the four metric
// closers (distribution, density, error-rate, capacity).
struct RandomKernelSet {
    specfun::BivariateFoxHSpec spec;
    double c_t;   // oracle t-contour (not the production choice)
    double c_s;   // oracle s-contour
};

inline RandomKernelSet random_metric_kernel(std::mt19937_64& rng)
{
    auto uni = [&](double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(rng);
    };
    auto log_uni = [&](double a, double b) {
        return std::exp(uni(std::log(a), std::log(b)));
    };

    const double k = uni(1.5, 30.0);
    const double m = uni(1.5, 30.0);
    const double alpha = uni(2.0, 14.0);
    const double beta = uni(1.0, 5.5);
    const double w = uni(1.2, 45.0);
    const double r = (rng() & 1u) ? 1.0 : 2.0;
    const int reps = 1 + 2 * static_cast<int>(rng() % 3);

    specfun::BivariateFoxHSpec s;
    s.joint_terms = {{0.0, 1.0, false}};
    s.x_terms = {{0.0, -1.0, false}, {k, -1.0, false}, {m, -1.0, false}};
    s.y_terms = {{alpha, r, false}, {beta, r, false}};
    for (int i = 0; i < reps; ++i) {
        s.y_terms.push_back({w, r, false});
        s.y_terms.push_back({1.0 + w, r, true});
    }

    double right_s = std::numeric_limits<double>::infinity();
    switch (rng() % 4u) {
    case 0u:  // distribution closer 1/Γ(1+s)
        s.y_terms.push_back({1.0, 1.0, true});
        break;
    case 1u:  // density closer 1/Γ(s)
        s.y_terms.push_back({0.0, 1.0, true});
        break;
    case 2u: {  // error-rate closer Γ(p-s)/Γ(1+s)
        const double p = uni(0.5, 4.0);
        s.y_terms.push_back({p, -1.0, false});
        s.y_terms.push_back({1.0, 1.0, true});
        right_s = p;
        break;
    }
    default:  // capacity closer Γ(s)Γ(1-s)/Γ(1+s)
        s.y_terms.push_back({0.0, 1.0, false});
        s.y_terms.push_back({1.0, -1.0, false});
        s.y_terms.push_back({1.0, 1.0, true});
        right_s = 1.0;
        break;
    }

    s.arg_x = log_uni(0.02, 500.0);
    s.arg_y = log_uni(0.02, 500.0);

    const double c_s = std::min(0.40, 0.8 * right_s);
    return {s, -0.45 * c_s, c_s};
}

} // namespace linkperf::testsupport

#endif
