// End-to-end acceptance checks, one pass/fail line each. Exit code is
// nonzero when any check fails. Thresholds are pinned here on purpose;
// loosening one needs a reason, not a rerun.
#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "irssim/breathtrack.hpp"
#include "irssim/impairments.hpp"
#include "irssim/model.hpp"
#include "irssim/optimizer.hpp"
#include "irssim/rng.hpp"
#include "irssim/scenario_io.hpp"

using namespace irssim;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) g_failures++;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

std::string scenario_path(const char* name) {
    return std::string(IRSSIM_SCENARIO_DIR) + "/" + name;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); i++) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(x.size());
    my /= double(x.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); i++) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

// ---- 1: far-field boundary --------------------------------------------

void c1_far_field() {
    double r = far_field_radius(0.4, 0.06);
    bool pass = std::abs(r - 16.0 / 3.0) <= 0.01;
    double r2 = far_field_radius(0.8, 0.06);
    pass = pass && r2 == 4.0 * r;
    report(1, pass, fmt("far-field boundary %.4f m for a 0.4 m aperture at 0.06 m wavelength "
                        "(expected 5.3333 +/- 0.01); doubling the aperture scales it %.1fx",
                        r, r2 / r));
}

// ---- 2: breath path phase swing ---------------------------------------

void c2_breath_swing() {
    double lambda = kSpeedOfLight / 5.32e9;
    BreathPathParams p;
    p.a0 = {1.0, 0.0};
    p.d0 = 1.0;
    p.lambda = lambda;
    // walk one wavelength of path change, unwrapping as we go
    int steps = 64;
    double total = 0.0;
    double prev = std::arg(eval_breath_path(p, 0.0));
    for (int i = 1; i <= steps; i++) {
        double cur = std::arg(eval_breath_path(p, lambda * double(i) / steps));
        double d = cur - prev;
        if (d > kPi) d -= kTwoPi;
        if (d < -kPi) d += kTwoPi;
        total += d;
        prev = cur;
    }
    double swing_full = std::abs(total) * 180.0 / kPi;
    double swing_tenth =
        std::abs(std::arg(eval_breath_path(p, lambda / 10.0)) - std::arg(eval_breath_path(p, 0.0))) *
        180.0 / kPi;
    bool pass = std::abs(swing_full - 360.0) <= 0.1 && std::abs(swing_tenth - 36.0) <= 0.1;
    report(2, pass, fmt("one-wavelength path change sweeps %.3f deg, a tenth sweeps %.3f deg "
                        "(expected 360 and 36 +/- 0.1)",
                        swing_full, swing_tenth));
}

// ---- 3: sampling weights are a distribution ---------------------------

void c3_weight_sum() {
    double worst = 0.0;
    for (int L = 1; L <= 1000; L++) {
        OptimizerBuffers b;
        for (int j = 0; j < L; j++) {
            IrsState st(1, 1);
            st.bits[0] = 1;
            b.states.push_back(st);
            b.magnitudes.push_back(double(L - j));   // descending
        }
        for (auto w : {GreedyConfig::Weighting::linear, GreedyConfig::Weighting::uniform}) {
            std::vector<double> pn = compute_pnorm(b, w);
            worst = std::max(worst, std::abs(pn[0] - 1.0));
        }
    }
    report(3, worst <= 1e-12,
           fmt("rank weights sum to 1 within %.2e for buffer lengths 1..1000 (tolerance 1e-12)", worst));
}

// ---- 4: small-surface search finds the true optimum -------------------

void c4_exhaustive_match() {
    Scenario sc = load_scenario(scenario_path("desk2x2.json"));
    SimulatedSiMeasurement enum_meas(sc);
    double best_enum = 1e300;
    for (int mask = 0; mask < 16; mask++) {
        IrsState st(2, 2);
        for (int i = 0; i < 4; i++) st.bits[std::size_t(i)] = (mask >> i) & 1;
        best_enum = std::min(best_enum, enum_meas.measure(st));
    }

    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; seed++) {
        SimulatedSiMeasurement meas(sc);
        GreedyConfig cfg;
        cfg.n_rows = 2;
        cfg.n_cols = 2;
        cfg.buffer_len = 8;
        cfg.patience = 50;
        cfg.rng_seed = seed;
        RngStream rng(seed);
        OptimizationTrace tr = greedy_optimize(cfg, meas, rng);
        if (std::abs(tr.best_si - best_enum) < 1e-6) hits++;
    }
    report(4, hits >= 95,
           fmt("greedy matched the exhaustive optimum %.2f dB on %d/100 seeds (needed 95)", best_enum,
               hits));
}

// ---- 5 and 6: convergence quality on the full surface -----------------

struct ConvergenceBatch {
    std::vector<OptimizationTrace> linear, uniform, random;
};

ConvergenceBatch run_batch(const Scenario& sc, int n_seeds, long budget) {
    ConvergenceBatch b;
    for (int seed = 0; seed < n_seeds; seed++) {
        for (int m = 0; m < 2; m++) {
            SimulatedSiMeasurement meas(sc);
            GreedyConfig cfg;
            cfg.n_rows = sc.irs_geometry.n_rows;
            cfg.n_cols = sc.irs_geometry.n_cols;
            cfg.buffer_len = 100;
            cfg.patience = int(budget);   // let the budget end the run
            cfg.max_iterations = budget;
            cfg.weighting = m == 0 ? GreedyConfig::Weighting::linear : GreedyConfig::Weighting::uniform;
            RngStream rng{std::uint64_t(seed)};
            (m == 0 ? b.linear : b.uniform).push_back(greedy_optimize(cfg, meas, rng));
        }
        SimulatedSiMeasurement meas(sc);
        RngStream rng{std::uint64_t(seed)};
        b.random.push_back(
            random_search(sc.irs_geometry.n_rows, sc.irs_geometry.n_cols, budget, meas, rng));
    }
    return b;
}

long measurements_to_reach(const OptimizationTrace& tr, double threshold) {
    for (const TraceRecord& r : tr.records)
        if (r.cum_min <= threshold) return r.iteration + 1;
    return long(tr.records.size());
}

void c5_c6_convergence(const Scenario& canonical) {
    const int n_seeds = 10;
    const long budget = 2500;
    ConvergenceBatch b = run_batch(canonical, n_seeds, budget);

    std::vector<double> its_linear, its_uniform;
    for (int s = 0; s < n_seeds; s++) {
        double threshold =
            std::max(b.linear[std::size_t(s)].best_si, b.uniform[std::size_t(s)].best_si);
        its_linear.push_back(double(measurements_to_reach(b.linear[std::size_t(s)], threshold)));
        its_uniform.push_back(double(measurements_to_reach(b.uniform[std::size_t(s)], threshold)));
    }
    double med_lin = median(its_linear), med_uni = median(its_uniform);
    report(5, med_lin < med_uni,
           fmt("median measurements to the per-seed common level: rank-weighted %.0f vs uniform %.0f "
               "over %d seeds at budget %ld",
               med_lin, med_uni, n_seeds, budget));

    double imp_greedy = 0.0, imp_random = 0.0;
    for (int s = 0; s < n_seeds; s++) {
        imp_greedy += b.linear[std::size_t(s)].records.front().cum_min - b.linear[std::size_t(s)].best_si;
        imp_random += b.random[std::size_t(s)].records.front().cum_min - b.random[std::size_t(s)].best_si;
    }
    imp_greedy /= n_seeds;
    imp_random /= n_seeds;
    report(6, imp_random < 0.2 * imp_greedy,
           fmt("mean improvement: random %.2f dB vs greedy %.2f dB (random must stay under 20%%)",
               imp_random, imp_greedy));
}

// ---- 7: learned states align with the geometric phase map -------------

void c7_pattern_alignment(const Scenario& canonical) {
    SimulatedSiMeasurement meas(canonical);
    GreedyConfig cfg;
    cfg.n_rows = canonical.irs_geometry.n_rows;
    cfg.n_cols = canonical.irs_geometry.n_cols;
    cfg.buffer_len = 100;
    cfg.patience = 5000;
    cfg.max_iterations = 20000;
    RngStream rng(0);
    OptimizationTrace tr = greedy_optimize(cfg, meas, rng);
    std::vector<double> on_ratio = buffer_on_ratio(tr.final_buffers);

    std::vector<double> pattern = phase_pattern(canonical);
    double best_r = -1.0;
    double best_th = 0.0;
    for (int t = 0; t < 64; t++) {
        double th = kTwoPi * double(t) / 64.0;
        IrsState proj = binary_projection(pattern, cfg.n_rows, cfg.n_cols, th);
        std::vector<double> bits(proj.bits.begin(), proj.bits.end());
        double r = pearson(bits, on_ratio);
        if (r > best_r) {
            best_r = r;
            best_th = th;
        }
    }
    report(7, best_r >= 0.5,
           fmt("best correlation between the phase-map projection and buffered on-rates is %.3f at "
               "threshold %.2f rad (needed 0.5)",
               best_r, best_th));
}

// ---- 8: phase impairment envelopes ------------------------------------

void c8_impairment_envelopes(const Scenario& canonical) {
    std::vector<double> still(4000, 0.0);
    ImpairmentParams sync;
    sync.jitter_std = 15.0 * kPi / 180.0;
    RngStream rng_a(7);
    std::vector<CsiSnapshot> stream =
        synthesize_csi_stream(canonical, IrsState(16, 16), still, 400.0, sync, std::nullopt, rng_a);
    double cs = 0.0, sn = 0.0;
    std::vector<double> ph;
    for (const CsiSnapshot& s : stream) {
        double a = std::arg(s.h[25]);
        ph.push_back(a);
        cs += std::cos(a);
        sn += std::sin(a);
    }
    double mean_angle = std::atan2(sn, cs);
    int inside = 0;
    for (double a : ph)
        if (std::abs(std::remainder(a - mean_angle, kTwoPi)) <= kPi / 3.0) inside++;
    double frac = double(inside) / double(ph.size());

    ImpairmentParams unsync = sync;
    unsync.synchronized = false;
    RngStream rng_b(7);
    std::vector<CsiSnapshot> u_stream =
        synthesize_csi_stream(canonical, IrsState(16, 16), still, 400.0, unsync, std::nullopt, rng_b);
    double uc = 0.0, us = 0.0;
    for (const CsiSnapshot& s : u_stream) {
        double a = std::arg(s.h[25]);
        uc += std::cos(a);
        us += std::sin(a);
    }
    double resultant = std::sqrt(uc * uc + us * us) / double(u_stream.size());

    bool pass = frac >= 0.99 && resultant <= 0.1;
    report(8, pass,
           fmt("synchronized 15-deg jitter keeps %.1f%% of packets within 60 deg (needed 99%%); "
               "unsynchronized phase resultant %.3f (allowed 0.1)",
               100.0 * frac, resultant));
}

// ---- 9: full pipeline detects breathing through the optimized surface -

void c9_end_to_end(const Scenario& canonical) {
    BreathPattern pattern = load_breath_pattern(scenario_path("patterns/regular_hold.json"));
    Scenario frozen = canonical;
    frozen.breath_path.a0 = {0.0, 0.0};
    SimulatedSiMeasurement meas(frozen);
    GreedyConfig cfg;
    cfg.n_rows = 16;
    cfg.n_cols = 16;
    cfg.buffer_len = 100;
    cfg.patience = 5000;
    cfg.max_iterations = 50000;
    RngStream opt_rng(42);
    OptimizationTrace tr = greedy_optimize(cfg, meas, opt_rng);

    ImpairmentParams imp;
    imp.jitter_std = 15.0 * kPi / 180.0;
    QuantizerConfig quant;   // 10 bits
    PhaseSeries chest = synth_chest_displacement(pattern, 400.0);

    RngStream rng(42);
    std::vector<CsiSnapshot> stream =
        synthesize_csi_stream(canonical, tr.best_state, chest.samples, 400.0, imp, quant, rng);
    BreathTrace bt = trace_breath(stream, 400.0, 25);

    bool rate_ok = bt.result.rate_valid && std::abs(bt.result.rate_hz - 0.25) <= 0.02 &&
                   bt.result.detected;
    bool swing_ok = bt.result.peak_to_trough_deg >= 90.0;

    // held-breath interval must go quiet relative to the breathing intervals
    auto window_var = [&](double t0, double t1) {
        double rate = bt.filtered.sample_rate_hz;
        std::size_t a = std::size_t(t0 * rate), b = std::size_t(t1 * rate);
        double m = 0.0;
        for (std::size_t i = a; i < b; i++) m += bt.filtered.samples[i];
        m /= double(b - a);
        double v = 0.0;
        for (std::size_t i = a; i < b; i++)
            v += (bt.filtered.samples[i] - m) * (bt.filtered.samples[i] - m);
        return v / double(b - a);
    };
    double var_hold = window_var(70.0, 80.0);
    double var_breath = 0.5 * (window_var(20.0, 55.0) + window_var(105.0, 170.0));
    bool hold_ok = var_hold <= 0.2 * var_breath;

    RngStream rng_off(42);
    std::vector<CsiSnapshot> off_stream = synthesize_csi_stream(
        canonical, IrsState(16, 16), chest.samples, 400.0, imp, quant, rng_off);
    double off_conf = trace_breath(off_stream, 400.0, 25).result.confidence;
    bool contrast_ok = off_conf < 0.5;

    report(9, rate_ok && swing_ok && hold_ok && contrast_ok,
           fmt("optimized surface: rate %.3f Hz conf %.2f swing %.0f deg, hold/breathing power %.3f "
               "(allowed 0.2), all-off conf %.2f (must stay under 0.5)",
               bt.result.rate_hz, bt.result.confidence, bt.result.peak_to_trough_deg,
               var_breath > 0.0 ? var_hold / var_breath : 0.0, off_conf));
}

// ---- 10: quantizer depth vs faint motion ------------------------------

void c10_quantizer_depth() {
    Scenario faint = load_scenario(scenario_path("faintsubject.json"));
    BreathPattern p;
    p.segments.push_back({BreathSegment::Kind::regular, 60.0, 0.25, 0.015});
    PhaseSeries chest = synth_chest_displacement(p, 400.0);

    std::vector<int> depths = {6, 8, 10, 12};
    std::vector<double> med_conf;
    for (int bits : depths) {
        std::vector<double> confs;
        for (int run = 0; run < 10; run++) {
            Scenario sc = faint;
            sc.breath_path.d0 += double(run) * 0.33e-3;   // decorrelate phase alignment
            QuantizerConfig q;
            q.bits = bits;
            RngStream rng{std::uint64_t(run)};
            std::vector<CsiSnapshot> stream = synthesize_csi_stream(
                sc, IrsState(16, 16), chest.samples, 400.0, ImpairmentParams{}, q, rng);
            confs.push_back(trace_breath(stream, 400.0, 25).result.confidence);
        }
        med_conf.push_back(median(confs));
    }
    bool pass = true;
    for (std::size_t i = 1; i < med_conf.size(); i++)
        if (med_conf[i] < med_conf[i - 1]) pass = false;
    report(10, pass,
           fmt("median detection confidence per quantizer depth {6,8,10,12}: %.3f %.3f %.3f %.3f "
               "(must be non-decreasing)",
               med_conf[0], med_conf[1], med_conf[2], med_conf[3]));
}

// ---- 11: channel composition, geometry and weights oracles ------------

void c11_oracles() {
    RngStream rng(99);
    double worst = 0.0;

    for (int trial = 0; trial < 1000; trial++) {
        Scenario s;
        s.irs_geometry.n_rows = 1 + int(rng.uniform() * 6.0);
        s.irs_geometry.n_cols = 1 + int(rng.uniform() * 6.0);
        s.irs_geometry.width = 0.1 + 0.4 * rng.uniform();
        s.irs_geometry.height = 0.1 + 0.4 * rng.uniform();
        s.irs_geometry.phase_shift = rng.uniform() * kTwoPi;
        s.irs_geometry.element_reflectance = 10.0 * rng.uniform();
        s.antenna_distance = 0.3 + 2.0 * rng.uniform();
        s.antenna_offset_x = 0.3 * (rng.uniform() - 0.5);
        s.antenna_offset_y = 0.3 * (rng.uniform() - 0.5);
        s.round_trip_phase = rng.uniform() < 0.5;
        int n_static = int(rng.uniform() * 4.0);
        for (int i = 0; i < n_static; i++)
            s.static_paths.push_back({{rng.uniform() - 0.5, rng.uniform() - 0.5}, 2.0 * rng.uniform()});
        s.breath_path.a0 = {rng.uniform() - 0.5, rng.uniform() - 0.5};
        s.breath_path.d0 = 2.0 * rng.uniform();
        s.si.a_iso = 0.1 * rng.uniform();
        s.si.theta = 2.0 * (rng.uniform() - 0.5);
        s.n_subcarriers = 1 + int(rng.uniform() * 16.0);

        IrsState st(s.irs_geometry.n_rows, s.irs_geometry.n_cols);
        for (auto& b : st.bits) b = rng.uniform() < 0.5 ? 1 : 0;
        int k = int(rng.uniform() * s.n_subcarriers);
        double d_t = 0.1 * rng.uniform();

        Complex total = eval_total_channel(s, st, d_t, k);

        double lam = subcarrier_wavelength(s.carrier_hz, s.subcarrier_spacing_hz, s.n_subcarriers, k);
        ElementTable et = build_element_table(s);
        std::vector<double> dist = et.dist;
        if (s.round_trip_phase)
            for (double& d : dist) d *= 2.0;
        std::vector<Complex> amps(et.amp.begin(), et.amp.end());
        BreathPathParams bp = s.breath_path;
        bp.lambda = lam;
        Complex manual = eval_breath_path(bp, d_t) + eval_static_paths(s.static_paths, lam) +
                         eval_irs_paths(s.irs_geometry, st, amps, dist, lam) +
                         eval_self_interference(s.si);
        double scale = std::max(1.0, std::abs(total));
        worst = std::max(worst, std::abs(total - manual) / scale);
    }

    double worst_geom = 0.0;
    for (int trial = 0; trial < 1000; trial++) {
        IrsGeometry g;
        g.n_rows = 1 + int(rng.uniform() * 32.0);
        g.n_cols = 1 + int(rng.uniform() * 32.0);
        g.width = 0.05 + rng.uniform();
        g.height = 0.05 + rng.uniform();
        double d = 0.2 + 3.0 * rng.uniform();
        double dh = 40.0 * (rng.uniform() - 0.5);
        double dv = 40.0 * (rng.uniform() - 0.5);
        double got = element_path_length(d, dh, dv, g);
        double ex = dh * g.width / g.n_cols;
        double ey = dv * g.height / g.n_rows;
        double want = std::sqrt(d * d + ex * ex + ey * ey);
        worst_geom = std::max(worst_geom, std::abs(got - want) / want);
    }

    double worst_pn = 0.0;
    for (int trial = 0; trial < 1000; trial++) {
        int L = 1 + int(rng.uniform() * 40.0);
        int rows = 1 + int(rng.uniform() * 4.0), cols = 1 + int(rng.uniform() * 4.0);
        OptimizerBuffers b;
        for (int j = 0; j < L; j++) {
            b.states.push_back(random_state(rows, cols, rng));
            b.magnitudes.push_back(double(L - j));
        }
        auto w = trial % 2 ? GreedyConfig::Weighting::linear : GreedyConfig::Weighting::uniform;
        std::vector<double> pn = compute_pnorm(b, w);
        for (std::size_t i = 0; i < pn.size(); i++) {
            double manual = 0.0;
            for (int j = 0; j < L; j++)
                if (b.states[std::size_t(j)].bits[i])
                    manual += w == GreedyConfig::Weighting::linear
                                  ? 2.0 * double(j + 1) / (double(L) * L + L)
                                  : 1.0 / double(L);
            worst_pn = std::max(worst_pn, std::abs(pn[i] - manual));
        }
    }

    bool pass = worst <= 1e-12 && worst_geom <= 1e-12 && worst_pn <= 1e-12;
    report(11, pass,
           fmt("1000-trial oracles: channel composition %.2e, element geometry %.2e, sampling weights "
               "%.2e (tolerance 1e-12)",
               worst, worst_geom, worst_pn));
}

} // namespace

int main() {
    Scenario canonical = load_scenario(scenario_path("canonical.json"));

    c1_far_field();
    c2_breath_swing();
    c3_weight_sum();
    c4_exhaustive_match();
    c5_c6_convergence(canonical);
    c7_pattern_alignment(canonical);
    c8_impairment_envelopes(canonical);
    c9_end_to_end(canonical);
    c10_quantizer_depth();
    c11_oracles();

    if (g_failures)
        std::printf("%d criterion(s) failed\n", g_failures);
    else
        std::printf("all criteria passed\n");
    return g_failures ? 1 : 0;
}