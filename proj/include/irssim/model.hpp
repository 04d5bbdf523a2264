#pragma once
#include <complex>
#include <vector>
#include <cstddef>

namespace irssim {

using Complex = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.141592653589793238462643383279;
inline constexpr double kTwoPi = 2.0 * kPi;

// Direct reflection off the breathing subject. d0 is the static part of the
// path length; the time-varying part d(t) is passed separately.
struct BreathPathParams {
    Complex a0{0.0, 0.0};
    double d0 = 0.0;       // meters, >= 0
    double lambda = 0.0;   // meters, > 0
};

struct StaticPath {
    Complex a{0.0, 0.0};
    double d = 0.0;        // meters, >= 0
};

struct IrsGeometry {
    int n_rows = 16;
    int n_cols = 16;
    double width = 0.4;              // meters
    double height = 0.32;            // meters
    double phase_shift = kPi;        // radians, switched phase of an ON element
    double element_reflectance = 1.0;

    int element_count() const { return n_rows * n_cols; }
};

// Binary element states, row-major n_rows x n_cols.
struct IrsState {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<std::uint8_t> bits;

    IrsState() = default;
    IrsState(int rows, int cols) : n_rows(rows), n_cols(cols), bits(std::size_t(rows) * cols, 0) {}
    std::uint8_t& at(int r, int c) { return bits[std::size_t(r) * n_cols + c]; }
    std::uint8_t at(int r, int c) const { return bits[std::size_t(r) * n_cols + c]; }
    bool operator==(const IrsState& o) const = default;
};

struct SelfInterferenceParams {
    double a_iso = 0.0;    // leakage amplitude, >= 0
    double theta = 0.0;    // phase in cycles
};

struct Scenario {
    IrsGeometry irs_geometry;
    double antenna_distance = 1.0;       // meters, surface normal through its center
    double antenna_offset_x = 0.0;       // meters, antenna midpoint relative to surface center
    double antenna_offset_y = 0.0;
    std::vector<StaticPath> static_paths;
    BreathPathParams breath_path;
    SelfInterferenceParams si;
    double carrier_hz = 5.32e9;
    double subcarrier_spacing_hz = 312.5e3;
    int n_subcarriers = 56;
    bool round_trip_phase = false;       // phases from 2*d2 instead of d2

    double carrier_lambda() const { return kSpeedOfLight / carrier_hz; }
};

// Link-budget bookkeeping, all dB quantities.
struct PowerBudget {
    double p_tx = 0.0;
    double alpha_iso = 0.0;
    double p_static = 0.0;
    double p_irs = 0.0;
    double p_res = 0.0;
};

// Per-element amplitudes and one-way path lengths derived from the geometry.
// Row-major over elements, index i = r*n_cols + c.
struct ElementTable {
    std::vector<double> amp;
    std::vector<double> dist;
};

double subcarrier_wavelength(double carrier_hz, double spacing_hz, int n_subcarriers, int k);

Complex eval_breath_path(const BreathPathParams& p, double d_t);
Complex eval_static_paths(const std::vector<StaticPath>& paths, double lambda);
Complex eval_irs_paths(const IrsGeometry& geom, const IrsState& state,
                       const std::vector<Complex>& element_amps,
                       const std::vector<double>& element_lengths, double lambda);
Complex eval_self_interference(const SelfInterferenceParams& p);
Complex eval_total_channel(const Scenario& s, const IrsState& state, double d_t, int subcarrier_index);

double far_field_radius(double longest_dimension, double lambda);

// d_h, d_v are signed element indices relative to the antenna's projection
// onto the surface plane; fractional values carry the antenna offset.
double element_path_length(double d, double d_h, double d_v, const IrsGeometry& geom);
double element_phase(double d2, double lambda);

ElementTable build_element_table(const Scenario& s);

// Per-element wrapped phase at the carrier wavelength, n_rows x n_cols
// row-major. Honors s.round_trip_phase.
std::vector<double> phase_pattern(const Scenario& s);
IrsState binary_projection(const std::vector<double>& pattern, int n_rows, int n_cols, double threshold_phase);

double residual_si_power(const PowerBudget& b);

} // namespace irssim
