#include "irssim/impairments.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace irssim {

int thread_cap() {
#ifdef _OPENMP
    int def = omp_get_max_threads();
#else
    int def = 1;
#endif
    if (const char* env = std::getenv("IRS_SIM_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return def;
}

CsiSnapshot apply_phase_impairments(const CsiSnapshot& clean, const ImpairmentParams& p, RngStream& rng) {
    CsiSnapshot out = clean;
    double slope = p.pdd_slope + (p.synchronized ? 0.0 : p.sfo_slope);
    double common = p.beta + p.drift_rate * clean.timestamp;
    if (!p.synchronized) common += kTwoPi * rng.uniform();           // per-packet CFO
    if (p.jitter_std > 0.0) common += p.jitter_std * rng.gaussian(); // PLL jitter z
    for (std::size_t k = 0; k < out.h.size(); k++) {
        double delta = slope * double(k) + common;
        if (delta != 0.0) {
            // rotate in polar form so the magnitude is carried, not recomputed
            double mag = std::abs(out.h[k]);
            double ph = std::arg(out.h[k]) + delta;
            out.h[k] = Complex(mag * std::cos(ph), mag * std::sin(ph));
        }
        if (p.awgn_std > 0.0)
            out.h[k] += p.awgn_std * Complex(rng.gaussian(), rng.gaussian());
    }
    return out;
}

CsiSnapshot apply_agc_and_quantize(const CsiSnapshot& s, const QuantizerConfig& q) {
    if (q.bits < 1) throw std::invalid_argument("quantizer bits must be >= 1");
    if (!(q.agc_headroom > 0.0 && q.agc_headroom <= 1.0))
        throw std::invalid_argument("agc_headroom must be in (0,1]");
    double mc = 0.0;
    double power = 0.0;
    for (const Complex& v : s.h) {
        mc = std::max(mc, std::max(std::fabs(v.real()), std::fabs(v.imag())));
        power += std::norm(v);
    }
    if (mc == 0.0) throw std::invalid_argument("apply_agc_and_quantize: all-zero input, AGC undefined");
    power /= double(s.h.size());

    double full = double((1ll << (q.bits - 1)) - 1);
    double target = std::round(q.agc_headroom * full);
    if (target < 1.0) target = 1.0;
    double g = target / mc;

    CsiSnapshot out = s;
    for (Complex& v : out.h)
        v = Complex(std::round(g * v.real()), std::round(g * v.imag()));
    out.agc_gain = s.agc_gain * g;
    // rssi reflects pre-gain power; an already-scaled snapshot keeps its record
    if (s.agc_gain == 1.0)
        out.rssi_db = std::round(10.0 * std::log10(power));
    else
        out.rssi_db = s.rssi_db;
    return out;
}

double scaled_amplitude_metric(const CsiSnapshot& s) {
    double mean = 0.0;
    for (const Complex& v : s.h) mean += std::abs(v);
    if (s.h.empty()) return kMetricFloorDb;
    mean /= double(s.h.size());
    if (mean <= 0.0) return kMetricFloorDb;
    if (s.agc_gain > 0.0) {
        double db = 20.0 * std::log10(mean / s.agc_gain);
        return std::max(db, kMetricFloorDb);
    }
    // gain unknown (file replay): reconstruct the scale from rssi
    double rms = 0.0;
    for (const Complex& v : s.h) rms += std::norm(v);
    rms = std::sqrt(rms / double(s.h.size()));
    double pre_rms = std::pow(10.0, s.rssi_db / 20.0);
    double db = 20.0 * std::log10(mean * pre_rms / rms);
    return std::max(db, kMetricFloorDb);
}

// Per-packet work shared by the serial and parallel stream kernels. The
// packet's rng is forked from the stream seed and its index alone.
static CsiSnapshot synth_packet(const std::vector<Complex>& base,
                                const std::vector<double>& inv_lambda,
                                const BreathPathParams& bp, double disp, std::uint64_t idx,
                                double dt, const ImpairmentParams& p,
                                const std::optional<QuantizerConfig>& q, const RngStream& rng) {
    int K = int(base.size());
    CsiSnapshot snap;
    snap.packet_index = idx;
    snap.timestamp = double(idx) * dt;
    snap.h.resize(K);
    double d_t = 2.0 * disp;   // chest motion is traversed twice
    for (int k = 0; k < K; k++) {
        double ph = -kTwoPi * (bp.d0 + d_t) * inv_lambda[k];
        snap.h[k] = base[k] + bp.a0 * Complex(std::cos(ph), std::sin(ph));
    }
    RngStream prng = rng.fork(idx);
    snap = apply_phase_impairments(snap, p, prng);
    if (q) snap = apply_agc_and_quantize(snap, *q);
    else {
        double power = 0.0;
        for (const Complex& v : snap.h) power += std::norm(v);
        power /= double(K);
        snap.rssi_db = power > 0.0 ? std::round(10.0 * std::log10(power)) : kMetricFloorDb;
    }
    return snap;
}

// State-independent part of the channel, per subcarrier.
static std::vector<Complex> state_baseline(const Scenario& s, const IrsState& state,
                                           std::vector<double>& inv_lambda) {
    ElementTable t = build_element_table(s);
    std::vector<Complex> amps(t.amp.begin(), t.amp.end());
    std::vector<double> dists = t.dist;
    if (s.round_trip_phase)
        for (double& d : dists) d *= 2.0;
    int K = s.n_subcarriers;
    std::vector<Complex> base(K);
    inv_lambda.resize(K);
    for (int k = 0; k < K; k++) {
        double lam = subcarrier_wavelength(s.carrier_hz, s.subcarrier_spacing_hz, K, k);
        inv_lambda[k] = 1.0 / lam;
        base[k] = eval_static_paths(s.static_paths, lam) +
                  eval_irs_paths(s.irs_geometry, state, amps, dists, lam) +
                  eval_self_interference(s.si);
    }
    return base;
}

static std::vector<CsiSnapshot> synth_stream(const Scenario& s, const IrsState& state,
                                             const std::vector<double>& chest, double rate_hz,
                                             const ImpairmentParams& p,
                                             const std::optional<QuantizerConfig>& q,
                                             const RngStream& rng, bool parallel) {
    if (!(rate_hz > 0.0)) throw std::invalid_argument("packet rate must be positive");
    std::vector<double> inv_lambda;
    std::vector<Complex> base = state_baseline(s, state, inv_lambda);
    BreathPathParams bp = s.breath_path;
    double dt = 1.0 / rate_hz;
    std::vector<CsiSnapshot> out(chest.size());
    long n = long(chest.size());
    if (parallel) {
        int nt = thread_cap();
#pragma omp parallel for schedule(static) num_threads(nt)
        for (long i = 0; i < n; i++)
            out[i] = synth_packet(base, inv_lambda, bp, chest[i], std::uint64_t(i), dt, p, q, rng);
    } else {
        for (long i = 0; i < n; i++)
            out[i] = synth_packet(base, inv_lambda, bp, chest[i], std::uint64_t(i), dt, p, q, rng);
    }
    return out;
}

std::vector<CsiSnapshot> synthesize_csi_stream(const Scenario& s, const IrsState& state,
                                               const std::vector<double>& chest, double rate_hz,
                                               const ImpairmentParams& p,
                                               const std::optional<QuantizerConfig>& q,
                                               const RngStream& rng) {
    return synth_stream(s, state, chest, rate_hz, p, q, rng, true);
}

std::vector<CsiSnapshot> synthesize_csi_stream_serial(const Scenario& s, const IrsState& state,
                                                      const std::vector<double>& chest, double rate_hz,
                                                      const ImpairmentParams& p,
                                                      const std::optional<QuantizerConfig>& q,
                                                      const RngStream& rng) {
    return synth_stream(s, state, chest, rate_hz, p, q, rng, false);
}

} // namespace irssim
