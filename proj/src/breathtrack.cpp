#include "irssim/breathtrack.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace irssim {

double BreathPattern::total_duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration_s;
    return t;
}

static void validate_pattern(const BreathPattern& p) {
    if (p.segments.empty()) throw std::invalid_argument("breath pattern has no segments");
    for (const auto& s : p.segments) {
        if (!(s.duration_s > 0.0)) throw std::invalid_argument("segment duration must be positive");
        if (s.kind == BreathSegment::Kind::regular) {
            if (!(s.rate_hz > 0.05 && s.rate_hz < 2.0))
                throw std::invalid_argument("breath rate must lie in (0.05, 2.0) Hz");
            if (!(s.depth_m >= 0.0 && s.depth_m <= 0.05))
                throw std::invalid_argument("breath depth must lie in [0, 0.05] m");
        }
    }
}

PhaseSeries synth_chest_displacement(const BreathPattern& p, double sample_rate_hz) {
    validate_pattern(p);
    if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("sample rate must be positive");
    PhaseSeries out;
    out.sample_rate_hz = sample_rate_hz;
    long total = lround(p.total_duration() * sample_rate_hz);
    out.samples.reserve(total);
    double seg_start = 0.0;
    double held = 0.0;
    std::size_t seg = 0;
    double seg_end = p.segments[0].duration_s;
    for (long i = 0; i < total; i++) {
        double t = double(i) / sample_rate_hz;
        while (t >= seg_end && seg + 1 < p.segments.size()) {
            // entering a hold freezes wherever the previous segment stopped
            double t_loc = seg_end - seg_start;
            const auto& s = p.segments[seg];
            if (s.kind == BreathSegment::Kind::regular)
                held = s.depth_m * (1.0 - std::cos(kTwoPi * s.rate_hz * t_loc)) / 2.0;
            seg++;
            seg_start = seg_end;
            seg_end += p.segments[seg].duration_s;
        }
        const auto& s = p.segments[seg];
        if (s.kind == BreathSegment::Kind::regular)
            out.samples.push_back(s.depth_m * (1.0 - std::cos(kTwoPi * s.rate_hz * (t - seg_start))) / 2.0);
        else
            out.samples.push_back(held);
    }
    return out;
}

PhaseSeries unwrap_phase(const PhaseSeries& s) {
    PhaseSeries out = s;
    double offset = 0.0;
    for (std::size_t i = 1; i < out.samples.size(); i++) {
        double d = s.samples[i] - s.samples[i - 1];
        if (d > kPi) offset -= kTwoPi;
        else if (d < -kPi) offset += kTwoPi;
        out.samples[i] = s.samples[i] + offset;
    }
    return out;
}

// Hamming-windowed sinc, normalized to unit DC gain, always odd length.
static std::vector<double> design_lowpass(double cutoff_hz, double fs) {
    int n = int(std::ceil(8.25 * fs / cutoff_hz));
    if (n % 2 == 0) n++;
    std::vector<double> h(n);
    double fc = cutoff_hz / fs;
    int mid = n / 2;
    double sum = 0.0;
    for (int i = 0; i < n; i++) {
        double t = i - mid;
        double x = 2.0 * fc * t;
        double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
        double w = 0.54 - 0.46 * std::cos(kTwoPi * i / (n - 1));
        h[i] = 2.0 * fc * sinc * w;
        sum += h[i];
    }
    for (double& v : h) v /= sum;
    return h;
}

// Centered convolution with reflected padding; symmetric kernel, so the
// result is zero-phase.
static std::vector<double> filter_reflect(const std::vector<double>& x, const std::vector<double>& h) {
    int n = int(x.size());
    int m = int(h.size());
    int mid = m / 2;
    auto at = [&](long idx) {
        // reflect without repeating the edge sample
        while (idx < 0 || idx >= n) {
            if (idx < 0) idx = -idx;
            if (idx >= n) idx = 2L * (n - 1) - idx;
        }
        return x[std::size_t(idx)];
    };
    std::vector<double> y(n);
    for (int i = 0; i < n; i++) {
        double acc = 0.0;
        for (int j = 0; j < m; j++) acc += h[j] * at(long(i) + j - mid);
        y[i] = acc;
    }
    return y;
}

PhaseSeries lowpass_filter(const PhaseSeries& s, double cutoff_hz) {
    if (!(cutoff_hz > 0.0 && cutoff_hz < s.sample_rate_hz / 2.0))
        throw std::invalid_argument("lowpass cutoff must lie below Nyquist");
    std::vector<double> h = design_lowpass(cutoff_hz, s.sample_rate_hz);
    if (s.samples.size() < h.size())
        throw std::invalid_argument("series shorter than the filter length");
    PhaseSeries out = s;
    out.samples = filter_reflect(s.samples, h);
    return out;
}

PhaseSeries highpass_detrend(const PhaseSeries& s, double cutoff_hz) {
    PhaseSeries trend = lowpass_filter(s, cutoff_hz);
    PhaseSeries out = s;
    for (std::size_t i = 0; i < out.samples.size(); i++) out.samples[i] -= trend.samples[i];
    return out;
}

PhaseSeries decimate_mean(const PhaseSeries& s, int dec) {
    if (dec < 1) throw std::invalid_argument("decimation factor must be >= 1");
    PhaseSeries out;
    out.sample_rate_hz = s.sample_rate_hz / dec;
    out.t0 = s.t0;
    std::size_t nb = s.samples.size() / std::size_t(dec);
    out.samples.resize(nb);
    for (std::size_t b = 0; b < nb; b++) {
        double acc = 0.0;
        for (int j = 0; j < dec; j++) acc += s.samples[b * dec + j];
        out.samples[b] = acc / dec;
    }
    return out;
}

DetectionResult estimate_breath_rate(const PhaseSeries& s, double band_low_hz, double band_high_hz) {
    double duration = double(s.samples.size()) / s.sample_rate_hz;
    if (duration < 3.0 / band_low_hz)
        throw std::invalid_argument("series too short for rate estimation in this band");

    int seg_len = int(std::lround(30.0 * s.sample_rate_hz));
    seg_len = std::min<int>(seg_len, int(s.samples.size()));
    int hop = seg_len / 2;

    // band bin indices for a seg_len DFT, band edges exclusive
    double df = s.sample_rate_hz / seg_len;
    int k_lo = int(std::floor(band_low_hz / df)) + 1;
    int k_hi = int(std::ceil(band_high_hz / df)) - 1;
    if (k_hi < k_lo) throw std::invalid_argument("band too narrow for the segment length");

    std::vector<double> win(seg_len);
    for (int i = 0; i < seg_len; i++)
        win[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / (seg_len - 1));

    int nb = k_hi - k_lo + 1;
    std::vector<double> acc(nb, 0.0);
    int count = 0;
    for (std::size_t start = 0; start + seg_len <= s.samples.size(); start += hop) {
        double mean = 0.0;
        for (int i = 0; i < seg_len; i++) mean += s.samples[start + i];
        mean /= seg_len;
        for (int b = 0; b < nb; b++) {
            int k = k_lo + b;
            double re = 0.0, im = 0.0;
            for (int i = 0; i < seg_len; i++) {
                double v = (s.samples[start + i] - mean) * win[i];
                double ang = kTwoPi * double(k) * i / seg_len;
                re += v * std::cos(ang);
                im -= v * std::sin(ang);
            }
            acc[b] += re * re + im * im;
        }
        count++;
        if (hop == 0) break;
    }
    for (double& v : acc) v /= count;

    DetectionResult r;
    r.waveform = s;
    double total = 0.0;
    for (double v : acc) total += v;
    int pk = int(std::max_element(acc.begin(), acc.end()) - acc.begin());
    if (!(total > 0.0) || !std::isfinite(total)) {
        // flat spectrum, nothing to detect
        r.confidence = 0.0;
        r.rate_valid = false;
        r.detected = false;
        return r;
    }
    double neighbor = 0.0;
    if (pk > 0) neighbor = acc[pk - 1];
    if (pk < nb - 1) neighbor = std::max(neighbor, acc[pk + 1]);
    r.confidence = (acc[pk] + neighbor) / total;
    double rate = (k_lo + pk) * df;
    // parabolic refinement between bins
    if (pk > 0 && pk < nb - 1) {
        double y0 = acc[pk - 1], y1 = acc[pk], y2 = acc[pk + 1];
        double den = y0 - 2.0 * y1 + y2;
        if (den != 0.0) rate += 0.5 * (y0 - y2) / den * df;
    }
    r.rate_hz = rate;
    r.rate_valid = true;
    r.detected = r.confidence >= kDetectionThreshold;

    double lo = s.samples[0], hi = s.samples[0];
    for (double v : s.samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    r.peak_to_trough_deg = (hi - lo) * 180.0 / kPi;
    return r;
}

PhaseSeries normalize_ground_truth(const PhaseSeries& s) {
    if (s.samples.empty()) throw std::invalid_argument("normalize_ground_truth: empty series");
    double lo = s.samples[0], hi = s.samples[0];
    for (double v : s.samples) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) throw std::invalid_argument("normalize_ground_truth: constant series");
    PhaseSeries out = s;
    for (double& v : out.samples) v = (v - lo) / (hi - lo);
    return out;
}

BreathTrace trace_breath(const std::vector<CsiSnapshot>& stream, double packet_rate_hz, int subcarrier) {
    if (stream.empty()) throw std::invalid_argument("trace_breath: empty stream");
    if (subcarrier < 0 || subcarrier >= int(stream[0].h.size()))
        throw std::invalid_argument("trace_breath: subcarrier index out of range");
    PhaseSeries raw;
    raw.sample_rate_hz = packet_rate_hz;
    raw.samples.reserve(stream.size());
    for (const auto& snap : stream) raw.samples.push_back(std::arg(snap.h[subcarrier]));

    PhaseSeries un = unwrap_phase(raw);
    // bring the rate near 10 Hz before the narrow filters
    int dec = std::max(1, int(std::lround(packet_rate_hz / 10.0)));
    PhaseSeries ds = decimate_mean(un, dec);
    if (double(ds.samples.size()) / ds.sample_rate_hz < 30.0)
        throw std::invalid_argument("stream too short for breath-rate estimation, need 30 s");

    BreathTrace t;
    t.raw_decimated = ds;
    // short captures cannot afford the 0.05 Hz filter; fall back to mean removal
    PhaseSeries flat;
    if (ds.samples.size() >= std::size_t(std::ceil(8.25 * ds.sample_rate_hz / 0.05)) + 1) {
        flat = highpass_detrend(ds, 0.05);
    } else {
        flat = ds;
        double mean = 0.0;
        for (double v : flat.samples) mean += v;
        mean /= double(flat.samples.size());
        for (double& v : flat.samples) v -= mean;
    }
    t.filtered = lowpass_filter(flat, 0.5);
    t.result = estimate_breath_rate(t.filtered, 0.1, 0.5);
    return t;
}

DetectionResult detect_from_snapshots(const std::vector<CsiSnapshot>& stream, double packet_rate_hz,
                                      int subcarrier) {
    return trace_breath(stream, packet_rate_hz, subcarrier).result;
}

DetectionResult track_breath(const Scenario& s, const IrsState& state, const BreathPattern& pattern,
                             double packet_rate_hz, const ImpairmentParams& imp,
                             const std::optional<QuantizerConfig>& q, int subcarrier,
                             const RngStream& rng) {
    PhaseSeries chest = synth_chest_displacement(pattern, packet_rate_hz);
    std::vector<CsiSnapshot> stream =
        synthesize_csi_stream(s, state, chest.samples, packet_rate_hz, imp, q, rng);
    return detect_from_snapshots(stream, packet_rate_hz, subcarrier);
}

} // namespace irssim
