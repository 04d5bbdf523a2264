#include "irssim/model.hpp"

#include <cmath>
#include <stdexcept>

namespace irssim {

double subcarrier_wavelength(double carrier_hz, double spacing_hz, int n_subcarriers, int k) {
    if (k < 0 || k >= n_subcarriers) throw std::out_of_range("subcarrier index out of range");
    double f = carrier_hz + (double(k) - (n_subcarriers - 1) / 2.0) * spacing_hz;
    return kSpeedOfLight / f;
}

Complex eval_breath_path(const BreathPathParams& p, double d_t) {
    if (!std::isfinite(p.d0) || !std::isfinite(d_t) || !std::isfinite(p.lambda) ||
        !std::isfinite(p.a0.real()) || !std::isfinite(p.a0.imag()))
        throw std::invalid_argument("eval_breath_path: non-finite input");
    double ph = -kTwoPi * (p.d0 + d_t) / p.lambda;
    return p.a0 * Complex(std::cos(ph), std::sin(ph));
}

// Shared path term so the IRS evaluation with all switches off reduces to
// the static sum through identical arithmetic.
static inline Complex path_term(const Complex& a, double d, double lambda) {
    double ph = -kTwoPi * d / lambda;
    return a * Complex(std::cos(ph), std::sin(ph));
}

Complex eval_static_paths(const std::vector<StaticPath>& paths, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("eval_static_paths: lambda must be positive");
    Complex sum{0.0, 0.0};
    for (const auto& p : paths) sum += path_term(p.a, p.d, lambda);
    return sum;
}

Complex eval_irs_paths(const IrsGeometry& geom, const IrsState& state,
                       const std::vector<Complex>& element_amps,
                       const std::vector<double>& element_lengths, double lambda) {
    std::size_t n = std::size_t(geom.element_count());
    if (element_amps.size() != n || element_lengths.size() != n ||
        state.bits.size() != n || state.n_rows != geom.n_rows || state.n_cols != geom.n_cols)
        throw std::invalid_argument("eval_irs_paths: element list / state dimension mismatch");
    Complex sw(std::cos(geom.phase_shift), std::sin(geom.phase_shift));
    Complex sum{0.0, 0.0};
    for (std::size_t i = 0; i < n; i++) {
        Complex term = path_term(element_amps[i], element_lengths[i], lambda);
        sum += state.bits[i] ? term * sw : term;
    }
    return sum;
}

Complex eval_self_interference(const SelfInterferenceParams& p) {
    double ph = -kTwoPi * p.theta;
    return p.a_iso * Complex(std::cos(ph), std::sin(ph));
}

double far_field_radius(double longest_dimension, double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("far_field_radius: lambda must be positive");
    return 2.0 * longest_dimension * longest_dimension / lambda;
}

double element_path_length(double d, double d_h, double d_v, const IrsGeometry& geom) {
    double x = d_h * geom.width / geom.n_cols;
    double y = d_v * geom.height / geom.n_rows;
    double d1sq = d * d + x * x;
    return std::sqrt(d1sq + y * y);
}

double element_phase(double d2, double lambda) {
    double m = std::fmod(d2, lambda);
    if (m < 0.0) m += lambda;
    double ph = kTwoPi / lambda * m;
    // fmod residue at the wavelength boundary can round up to exactly 2pi
    if (ph >= kTwoPi) ph -= kTwoPi;
    return ph;
}

ElementTable build_element_table(const Scenario& s) {
    const IrsGeometry& g = s.irs_geometry;
    int I = g.element_count();
    ElementTable t;
    t.amp.resize(I);
    t.dist.resize(I);
    double lam_c = s.carrier_lambda();
    // antenna offset folded into fractional element indices
    double off_h = s.antenna_offset_x * g.n_cols / g.width;
    double off_v = s.antenna_offset_y * g.n_rows / g.height;
    for (int r = 0; r < g.n_rows; r++) {
        double d_v = (r - (g.n_rows - 1) / 2.0) - off_v;
        for (int c = 0; c < g.n_cols; c++) {
            double d_h = (c - (g.n_cols - 1) / 2.0) - off_h;
            double d2 = element_path_length(s.antenna_distance, d_h, d_v, g);
            int i = r * g.n_cols + c;
            t.dist[i] = d2;
            // two-way spreading, element's share of the aperture
            double a = lam_c / (4.0 * kPi * d2);
            t.amp[i] = g.element_reflectance * a * a / double(I);
        }
    }
    return t;
}

Complex eval_total_channel(const Scenario& s, const IrsState& state, double d_t, int subcarrier_index) {
    double lam = subcarrier_wavelength(s.carrier_hz, s.subcarrier_spacing_hz, s.n_subcarriers,
                                       subcarrier_index);
    BreathPathParams bp = s.breath_path;
    bp.lambda = lam;
    ElementTable t = build_element_table(s);
    std::vector<Complex> amps(t.amp.begin(), t.amp.end());
    std::vector<double> dists = t.dist;
    if (s.round_trip_phase)
        for (double& d : dists) d *= 2.0;
    return eval_static_paths(s.static_paths, lam) + eval_breath_path(bp, d_t) +
           eval_irs_paths(s.irs_geometry, state, amps, dists, lam) + eval_self_interference(s.si);
}

std::vector<double> phase_pattern(const Scenario& s) {
    const IrsGeometry& g = s.irs_geometry;
    ElementTable t = build_element_table(s);
    double lam = s.carrier_lambda();
    std::vector<double> out(std::size_t(g.element_count()));
    for (std::size_t i = 0; i < out.size(); i++) {
        double d = s.round_trip_phase ? 2.0 * t.dist[i] : t.dist[i];
        out[i] = element_phase(d, lam);
    }
    return out;
}

IrsState binary_projection(const std::vector<double>& pattern, int n_rows, int n_cols,
                           double threshold_phase) {
    if (pattern.size() != std::size_t(n_rows) * n_cols)
        throw std::invalid_argument("binary_projection: pattern size mismatch");
    IrsState st(n_rows, n_cols);
    for (std::size_t i = 0; i < pattern.size(); i++) {
        double rel = std::fmod(pattern[i] - threshold_phase, kTwoPi);
        if (rel < 0.0) rel += kTwoPi;
        st.bits[i] = rel < kPi ? 1 : 0;
    }
    return st;
}

double residual_si_power(const PowerBudget& b) {
    return b.p_tx - b.alpha_iso + b.p_static - b.p_irs;
}

} // namespace irssim
