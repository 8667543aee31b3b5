// Independent Monte Carlo validation of the closed-form chain statistics.
//
// Sampling follows the same laws the analysis integrates — the pointing gain
// from its truncated-series distribution, the aggregated scintillation from
// the fitted Gamma-Gamma pair, the radio SNR from the moment-matched
// generalized-K — so a disagreement beyond statistical error indicts the
// quadrature or the derivation, not the modeling step.  (The element-level
// surface sampler below is the exception: it draws the physical per-element
// amplitude products so the moment-matched fit itself can be judged.)
//
// Randomness is counter-based: every sample owns a closed-form position in a
// Philox-4x32-10 stream keyed by (seed, sweep point, sample index).  Results
// are therefore bitwise reproducible for any thread count — chunked partial
// sums are reduced in index order no matter which worker produced them.
#ifndef LINKPERF_MONTE_CARLO_HPP
#define LINKPERF_MONTE_CARLO_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "e2e_metrics.hpp"
#include "fso_link.hpp"
#include "rf_link.hpp"

namespace linkperf {

// ---------------------------------------------------------------------------
// Counter-based generator
// ---------------------------------------------------------------------------

// Philox-4x32-10 round function with the reference multipliers and Weyl
// constants.  Pure function of (counter, key): no state to seed, no sequence
// to replay.
struct Philox4x32 {
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key)
    {
        constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
        constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
            ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0],
                   std::uint32_t(p1),
                   std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
                   std::uint32_t(p0)};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

// One sample's private stream: counter = (sample lo, sample hi, point, block),
// key = the user seed.  Rejection samplers may consume any number of draws
// without disturbing neighbouring samples.
class SampleStream {
public:
    SampleStream(std::uint64_t seed, std::uint32_t point, std::uint64_t sample)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)},
          ctr_{static_cast<std::uint32_t>(sample),
               static_cast<std::uint32_t>(sample >> 32), point, 0u}
    {
    }

    // Uniform on (0, 1): the half-offset keeps both endpoints out.
    double uniform()
    {
        if (idx_ == 4) {
            buf_ = Philox4x32::block(ctr_, key_);
            ++ctr_[3];
            idx_ = 0;
        }
        return (static_cast<double>(buf_[idx_++]) + 0.5) * 0x1p-32;
    }

    double normal()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform(), u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * M_PI * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

    // Marsaglia–Tsang squeeze for shape >= 1; shapes below one go through the
    // boost relation Gamma(a) = Gamma(a+1) * U^{1/a}.
    double gamma_variate(double shape)
    {
        if (!(shape > 0.0))
            throw std::domain_error("gamma_variate: shape must be positive");
        if (shape < 1.0)
            return gamma_variate(shape + 1.0) *
                   std::pow(uniform(), 1.0 / shape);
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            const double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
                return d * v;
        }
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> buf_{};
    int idx_ = 4;  // force refill on first draw
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// ---------------------------------------------------------------------------
// Channel samplers
// ---------------------------------------------------------------------------

// Inverse-distribution table for the pointing gain.  Built once from the
// closed series CDF on a log-spaced grid reaching down 22 nats from the
// collection ceiling a0 (mass below is ~1e-300); inversion is binary search
// plus linear interpolation in (CDF, ln h).
class GmlTable {
public:
    explicit GmlTable(const FsoParams& f, int nodes = 4096)
        : ln_lo_(std::log(f.a0) - 22.0), ln_hi_(std::log(f.a0))
    {
        cdf_.resize(nodes);
        const double step = (ln_hi_ - ln_lo_) / (nodes - 1);
        double prev = 0.0;
        for (int i = 0; i < nodes; ++i) {
            const double v = gml_cdf(std::exp(ln_lo_ + step * i), f);
            prev = std::max(prev, v);  // guard series round-off wiggles
            cdf_[i] = prev;
        }
        cdf_.back() = 1.0;
    }

    double quantile(double u) const
    {
        const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
        const auto hi = it == cdf_.begin() ? cdf_.begin() + 1
                      : it == cdf_.end()   ? cdf_.end() - 1
                                           : it;
        const std::size_t i = static_cast<std::size_t>(hi - cdf_.begin());
        const double step = (ln_hi_ - ln_lo_) / (cdf_.size() - 1);
        const double c0 = cdf_[i - 1], c1 = cdf_[i];
        const double frac = c1 > c0 ? std::clamp((u - c0) / (c1 - c0), 0.0, 1.0)
                                    : 0.0;
        return std::exp(ln_lo_ + step * (static_cast<double>(i - 1) + frac));
    }

private:
    double ln_lo_, ln_hi_;
    std::vector<double> cdf_;
};

// Composite optical gain h = h_p * h_g * S: deterministic attenuation,
// pointing from the table, aggregate scintillation from the fitted
// Gamma-Gamma pair scaled to its mean (the aperture count).
inline double composite_gain_sample(SampleStream& st, const GmlTable& gml,
                                    const FsoParams& f)
{
    const double h_g = gml.quantile(st.uniform());
    const double s = static_cast<double>(f.n_f) *
                     (st.gamma_variate(f.alpha) / f.alpha) *
                     (st.gamma_variate(f.beta) / f.beta);
    return f.h_p * h_g * s;
}

// Fitted radio SNR: gamma_R = gbar * X_k * X_m / Psi^2 reproduces the
// moment-matched generalized-K law exactly.
inline double fitted_radio_snr_sample(SampleStream& st, const RfParams& rf)
{
    return rf.mean_snr * st.gamma_variate(rf.fit.k) *
           st.gamma_variate(rf.fit.m) / (rf.fit.psi * rf.fit.psi);
}

// Element-level surface amplitude: the physical sum of per-element products
// of two Nakagami envelopes (R^2 ~ Gamma(m, Omega/m)).  This is the law the
// generalized-K fit approximates, kept separate so the fit can be judged
// against it.
inline double surface_amplitude_sample(SampleStream& st, double m_a, double m_l,
                                       double omega_a, double omega_l, int n_r)
{
    double acc = 0.0;
    for (int i = 0; i < n_r; ++i) {
        const double ga = st.gamma_variate(m_a) * (omega_a / m_a);
        const double gl = st.gamma_variate(m_l) * (omega_l / m_l);
        acc += std::sqrt(ga * gl);
    }
    return acc;
}

// ---------------------------------------------------------------------------
// Chain simulation
// ---------------------------------------------------------------------------

struct McConfig {
    std::uint64_t seed = 1;
    std::size_t samples = 1'000'000;
    unsigned threads = 1;
};

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t samples = 0;
    // Too few threshold crossings for the relative error to be trusted
    // (fewer than ~100 events).
    bool undersampled = false;
};

struct ChainMcResults {
    McEstimate outage;
    McEstimate error_rate;  // only filled when a scheme is supplied
    McEstimate capacity;    // nats per channel use
    McEstimate mean_snr;
    McEstimate mean_gain;   // E[h] of the optical composite, a sampler check
};

class ChainSimulator {
public:
    explicit ChainSimulator(const E2EParams& e, const ModulationScheme* mod = nullptr)
        : e_(e), mod_(mod), gml_(e.fso)
    {
        if (mod_ && mod_->r != e_.r)
            throw std::invalid_argument(
                "ChainSimulator: scheme detection order differs from the bundle");
    }

    // One grid point.  `point_index` salts the stream so sweep points are
    // independent; identical (seed, point, sample count) reproduce bitwise.
    ChainMcResults run(double gbar_h, const McConfig& cfg,
                       std::uint32_t point_index) const
    {
        if (!(gbar_h > 0.0))
            throw std::domain_error("ChainSimulator: mean SNR must be positive");
        if (cfg.samples == 0)
            throw std::domain_error("ChainSimulator: need at least one sample");

        // Fixed-size chunks make the reduction independent of the thread
        // layout: partials land in a slot per chunk and are combined in slot
        // order.
        constexpr std::size_t kChunk = 1u << 16;
        const std::size_t n_chunks = (cfg.samples + kChunk - 1) / kChunk;
        std::vector<Partial> partials(n_chunks);

        const unsigned threads =
            std::max(1u, std::min<unsigned>(cfg.threads,
                                            static_cast<unsigned>(n_chunks)));
        auto worker = [&](unsigned w) {
            for (std::size_t chunk = w; chunk < n_chunks; chunk += threads) {
                const std::size_t lo = chunk * kChunk;
                const std::size_t hi = std::min(lo + kChunk, cfg.samples);
                partials[chunk] = run_chunk(gbar_h, cfg.seed, point_index, lo, hi);
            }
        };
        if (threads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker, w);
            for (auto& t : pool) t.join();
        }

        Partial total;
        for (const auto& p : partials) total.add(p);
        return finalize(total, cfg.samples);
    }

private:
    struct Partial {
        double n_outage = 0.0;
        double s_err = 0.0, s2_err = 0.0;
        double s_cap = 0.0, s2_cap = 0.0;
        double s_snr = 0.0, s2_snr = 0.0;
        double s_gain = 0.0, s2_gain = 0.0;
        void add(const Partial& o)
        {
            n_outage += o.n_outage;
            s_err += o.s_err;   s2_err += o.s2_err;
            s_cap += o.s_cap;   s2_cap += o.s2_cap;
            s_snr += o.s_snr;   s2_snr += o.s2_snr;
            s_gain += o.s_gain; s2_gain += o.s2_gain;
        }
    };

    Partial run_chunk(double gbar_h, std::uint64_t seed, std::uint32_t point,
                      std::size_t lo, std::size_t hi) const
    {
        Partial p;
        const double c0 = capacity_front_factor(e_.r);
        const double rd = static_cast<double>(e_.r);
        for (std::size_t i = lo; i < hi; ++i) {
            SampleStream st(seed, point, i);
            const double h = composite_gain_sample(st, gml_, e_.fso);
            const double gf = gbar_h * std::pow(h, rd);
            const double gr = fitted_radio_snr_sample(st, e_.rf);
            const double g = gf * gr / (gr + e_.relay_gain);

            if (g < e_.gamma_th) p.n_outage += 1.0;
            if (mod_) {
                double es = 0.0;
                for (const double q : mod_->q)
                    es += 0.5 * boost::math::gamma_q(mod_->p, q * g);
                es *= mod_->delta;
                p.s_err += es;
                p.s2_err += es * es;
            }
            const double cap = std::log1p(c0 * g);
            p.s_cap += cap;
            p.s2_cap += cap * cap;
            p.s_snr += g;
            p.s2_snr += g * g;
            p.s_gain += h;
            p.s2_gain += h * h;
        }
        return p;
    }

    static McEstimate from_sums(double s, double s2, std::size_t n)
    {
        const double nd = static_cast<double>(n);
        const double mean = s / nd;
        const double var = std::max(0.0, s2 / nd - mean * mean);
        return {mean, std::sqrt(var / nd), n, false};
    }

    ChainMcResults finalize(const Partial& t, std::size_t n) const
    {
        ChainMcResults r;
        const double nd = static_cast<double>(n);
        const double p_hat = t.n_outage / nd;
        r.outage = {p_hat, std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) / nd),
                    n, t.n_outage < 100.0};
        if (mod_) r.error_rate = from_sums(t.s_err, t.s2_err, n);
        r.capacity = from_sums(t.s_cap, t.s2_cap, n);
        r.mean_snr = from_sums(t.s_snr, t.s2_snr, n);
        r.mean_gain = from_sums(t.s_gain, t.s2_gain, n);
        return r;
    }

    E2EParams e_;
    const ModulationScheme* mod_;
    GmlTable gml_;
};

} // namespace linkperf

#endif
