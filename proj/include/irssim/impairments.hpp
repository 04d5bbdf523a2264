#pragma once
#include <optional>
#include <vector>

#include "irssim/model.hpp"
#include "irssim/rng.hpp"

namespace irssim {

// Additive phase error model per packet:
//   (pdd_slope + sfo_slope)*k + cfo + beta + drift_rate*t + z
// cfo is uniform over [0,2pi) per packet when unsynchronized, zero otherwise.
// z is common-mode Gaussian phase noise, std jitter_std.
// synchronized forces cfo and sfo_slope to zero and keeps beta constant.
// awgn_std adds complex noise per subcarrier after the phase terms (off by
// default; the magnitude-preservation guarantee only holds with it at 0).
// Draw order per packet: cfo (if unsynchronized), z (if jitter_std > 0),
// then 2 gaussians per subcarrier (if awgn_std > 0).
struct ImpairmentParams {
    double pdd_slope = 0.0;    // radians per subcarrier index
    double sfo_slope = 0.0;
    double beta = 0.0;         // radians
    double jitter_std = 0.0;   // radians
    double drift_rate = 0.0;   // radians per second
    double awgn_std = 0.0;
    bool synchronized = true;
};

struct QuantizerConfig {
    int bits = 10;
    double agc_headroom = 0.9;   // fraction of full scale for the peak component
};

struct CsiSnapshot {
    std::uint64_t packet_index = 0;
    double timestamp = 0.0;      // seconds
    std::vector<Complex> h;      // length K
    double rssi_db = 0.0;
    // AGC gain applied by the quantizer. 1 = unscaled, 0 = unknown
    // (snapshot came from a file, which does not store gain).
    double agc_gain = 1.0;
};

CsiSnapshot apply_phase_impairments(const CsiSnapshot& clean, const ImpairmentParams& p, RngStream& rng);
CsiSnapshot apply_agc_and_quantize(const CsiSnapshot& s, const QuantizerConfig& q);

// Mean |h_k| renormalized back to pre-gain scale, in dB. Uses the recorded
// gain when present, otherwise reconstructs the scale from rssi_db.
// All-zero input returns the floor sentinel.
inline constexpr double kMetricFloorDb = -300.0;
double scaled_amplitude_metric(const CsiSnapshot& s);

// One snapshot per displacement sample, spaced 1/packet_rate_hz apart.
// Breath path length change is twice the chest displacement (round trip).
// q = nullopt skips AGC and quantization. Parallel over packets; the
// per-packet rng fork makes the result independent of thread count.
std::vector<CsiSnapshot> synthesize_csi_stream(const Scenario& s, const IrsState& state,
                                               const std::vector<double>& chest_displacement,
                                               double packet_rate_hz, const ImpairmentParams& p,
                                               const std::optional<QuantizerConfig>& q,
                                               const RngStream& rng);

// Serial twin of synthesize_csi_stream, kept as the reference the parallel
// kernel is tested against. Output is bit-identical.
std::vector<CsiSnapshot> synthesize_csi_stream_serial(const Scenario& s, const IrsState& state,
                                                      const std::vector<double>& chest_displacement,
                                                      double packet_rate_hz, const ImpairmentParams& p,
                                                      const std::optional<QuantizerConfig>& q,
                                                      const RngStream& rng);

// Thread cap from IRS_SIM_THREADS, else hardware default.
int thread_cap();

} // namespace irssim
