// Vertical-line quadrature support for Mellin–Barnes integrals.
//
// All evaluators in this library integrate along truncated vertical lines
// Re(s) = shift with composite Gauss–Legendre panels.  Truncation is chosen
// adaptively from the integrand's own decay; accuracy is estimated by
// comparing against a doubled node count.
#ifndef LINKPERF_SPECFUN_CONTOUR_HPP
#define LINKPERF_SPECFUN_CONTOUR_HPP

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace linkperf::specfun {

// A truncated vertical contour Re(s)=shift, Im(s) in [-half_extent, half_extent],
// discretized with `nodes` points by the named rule (composite Gauss-Legendre
// is the only rule shipped; the field exists so emitted metadata is explicit).
struct ContourSpec {
    double shift = 0.0;
    double half_extent = 0.0;
    int nodes = 0;
    const char* rule = "composite-gauss-legendre";
};

namespace detail {

// 16-point Gauss-Legendre panel (abscissae/weights on [-1, 1]).
inline constexpr std::array<double, 8> kGlAbscissa = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline constexpr std::array<double, 8> kGlWeight = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

} // namespace detail

// Fill nodes (imaginary offsets u) and weights for a composite 16-point
// Gauss-Legendre rule over [-T, T]; `nodes` is rounded up to panels of 16.
inline void contour_nodes(double half_extent, int nodes,
                          std::vector<double>& u, std::vector<double>& w)
{
    const int panels = std::max(1, (nodes + 15) / 16);
    u.clear();
    w.clear();
    u.reserve(panels * 16);
    w.reserve(panels * 16);
    const double width = 2.0 * half_extent / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = -half_extent + (p + 0.5) * width;
        for (int j = 7; j >= 0; --j) {
            u.push_back(mid - 0.5 * width * detail::kGlAbscissa[j]);
            w.push_back(0.5 * width * detail::kGlWeight[j]);
        }
        for (int j = 0; j < 8; ++j) {
            u.push_back(mid + 0.5 * width * detail::kGlAbscissa[j]);
            w.push_back(0.5 * width * detail::kGlWeight[j]);
        }
    }
}

// Choose a truncation half-extent such that the integrand magnitude at the
// endpoints has fallen below `drop` times its on-line peak.  `ln_mag` maps an
// imaginary offset u to ln|integrand(shift + iu)|.  Scans a doubling ladder;
// the decay of gamma-product kernels is eventually exponential, so this
// terminates quickly.
inline double adaptive_half_extent(const std::function<double(double)>& ln_mag,
                                   double drop = 1e-16, double t_min = 8.0,
                                   double t_max = 4096.0)
{
    // Peak search near the real axis (kernels here peak at or near u = 0).
    double peak = ln_mag(0.0);
    for (double u : {0.5, 1.0, 2.0, 4.0})
        peak = std::max(peak, std::max(ln_mag(u), ln_mag(-u)));
    const double target = peak + std::log(drop);
    double t = t_min;
    while (t < t_max) {
        if (ln_mag(t) < target && ln_mag(-t) < target)
            return t;
        t *= 2.0;
    }
    return t_max;
}

} // namespace linkperf::specfun

#endif
