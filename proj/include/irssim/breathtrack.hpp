#pragma once
#include <optional>
#include <string>
#include <vector>

#include "irssim/impairments.hpp"
#include "irssim/model.hpp"

namespace irssim {

struct BreathSegment {
    enum class Kind { regular, hold } kind = Kind::regular;
    double duration_s = 0.0;
    double rate_hz = 0.25;    // regular only, (0.05, 2.0)
    double depth_m = 0.015;   // regular only, [0, 0.05]
};

struct BreathPattern {
    std::vector<BreathSegment> segments;
    double total_duration() const;
};

struct PhaseSeries {
    double sample_rate_hz = 0.0;
    double t0 = 0.0;
    std::vector<double> samples;   // radians, or meters for displacement
};

struct DetectionResult {
    double rate_hz = 0.0;
    double confidence = 0.0;            // in [0,1]
    bool rate_valid = false;
    bool detected = false;              // confidence >= detection threshold
    double peak_to_trough_deg = 0.0;
    PhaseSeries waveform;               // band-filtered phase
};

inline constexpr double kDetectionThreshold = 0.5;

// Raised-cosine displacement in [0, depth] per regular segment; hold freezes
// the last value, so segment boundaries stay continuous.
PhaseSeries synth_chest_displacement(const BreathPattern& p, double sample_rate_hz);

PhaseSeries unwrap_phase(const PhaseSeries& s);

// Zero-phase Hamming windowed-sinc FIR. Tap count follows from the band
// edges the filter has to meet (<=0.5 dB below 0.8*cutoff, >=40 dB above
// 2*cutoff), about 8.25*fs/cutoff. Errors if the series is shorter than
// the filter.
PhaseSeries lowpass_filter(const PhaseSeries& s, double cutoff_hz);

// x minus its lowpass at cutoff_hz; removes DC and slow drift.
PhaseSeries highpass_detrend(const PhaseSeries& s, double cutoff_hz);

// Mean of dec-sample blocks; the block mean is the anti-alias stage.
PhaseSeries decimate_mean(const PhaseSeries& s, int dec);

// Welch periodogram (30 s segments, 50% overlap, Hann) restricted to band.
// Peak power counts the peak bin plus its larger immediate neighbor.
// Requires duration >= 3/band.first. Constant input gives confidence 0 and
// an invalid rate.
DetectionResult estimate_breath_rate(const PhaseSeries& s, double band_low_hz = 0.1,
                                     double band_high_hz = 0.5);

// Affine map to [0,1]. Errors on a constant series.
PhaseSeries normalize_ground_truth(const PhaseSeries& s);

// Full pipeline: synthesize CSI, take one subcarrier's phase, unwrap,
// decimate to ~10 Hz, detrend at 0.05 Hz, lowpass at 0.5 Hz, estimate rate.
DetectionResult track_breath(const Scenario& s, const IrsState& state, const BreathPattern& pattern,
                             double packet_rate_hz, const ImpairmentParams& imp,
                             const std::optional<QuantizerConfig>& q, int subcarrier,
                             const RngStream& rng);

// The same pipeline applied to an already-captured stream.
DetectionResult detect_from_snapshots(const std::vector<CsiSnapshot>& stream, double packet_rate_hz,
                                      int subcarrier);

// Intermediate stages of detect_from_snapshots, for result tables.
struct BreathTrace {
    PhaseSeries raw_decimated;     // unwrapped phase after decimation
    PhaseSeries filtered;          // detrended + lowpassed
    DetectionResult result;
};
BreathTrace trace_breath(const std::vector<CsiSnapshot>& stream, double packet_rate_hz, int subcarrier);

} // namespace irssim
