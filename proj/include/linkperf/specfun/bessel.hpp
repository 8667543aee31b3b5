// Modified Bessel functions and erf used by the channel models.
//
// These are thin, contract-checked fronts over boost::math / libm; the one
// piece of real work here is the log-domain I0 needed when the pointing-loss
// series is evaluated far into the tail (arguments beyond exp overflow).
#ifndef LINKPERF_SPECFUN_BESSEL_HPP
#define LINKPERF_SPECFUN_BESSEL_HPP

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <stdexcept>

namespace linkperf::specfun {

// Modified Bessel K_v(x), x > 0.  Order may be any real (negative order
// folds by symmetry inside boost).
inline double bessel_k(double v, double x)
{
    if (!(x > 0.0))
        throw std::domain_error("bessel_k: argument must be positive");
    return boost::math::cyl_bessel_k(v, x);
}

// Modified Bessel I_0(x).
inline double bessel_i0(double x)
{
    return boost::math::cyl_bessel_i(0.0, std::fabs(x));
}

// ln I_0(x): exact via boost below the overflow knee, uniform asymptotic
// expansion above it.  I_0(x) ~ e^x / sqrt(2 pi x) (1 + 1/(8x) + ...).
inline double ln_bessel_i0(double x)
{
    x = std::fabs(x);
    if (x < 700.0)
        return std::log(bessel_i0(x));
    const double ix = 1.0 / x;
    // First three correction terms; at x >= 700 the next term is < 1e-9.
    const double series = 1.0 + ix * (0.125 + ix * (0.0703125 + ix * 0.0732421875));
    return x - 0.5 * std::log(2.0 * M_PI * x) + std::log(series);
}

inline double erf(double x) { return std::erf(x); }

} // namespace linkperf::specfun

#endif
