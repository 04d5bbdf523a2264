#include "irssim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace irssim {

SimulatedSiMeasurement::SimulatedSiMeasurement(const Scenario& s, std::optional<ImpairmentParams> imp,
                                               std::optional<QuantizerConfig> quant,
                                               std::uint64_t noise_seed)
    : scenario_(s), imp_(std::move(imp)), quant_(std::move(quant)), rng_(noise_seed) {
    ElementTable t = build_element_table(s);
    n_elements_ = s.irs_geometry.element_count();
    n_subcarriers_ = s.n_subcarriers;
    std::vector<double> dists = t.dist;
    if (s.round_trip_phase)
        for (double& d : dists) d *= 2.0;
    element_phasors_.resize(std::size_t(n_elements_) * n_subcarriers_);
    base_.assign(n_subcarriers_, Complex{0.0, 0.0});
    for (int k = 0; k < n_subcarriers_; k++) {
        double lam = subcarrier_wavelength(s.carrier_hz, s.subcarrier_spacing_hz, n_subcarriers_, k);
        Complex stat = eval_static_paths(s.static_paths, lam) + eval_self_interference(s.si);
        // subject at rest; the SI metric is measured without chest motion
        if (std::abs(s.breath_path.a0) > 0.0) {
            BreathPathParams bp = s.breath_path;
            bp.lambda = lam;
            stat += eval_breath_path(bp, 0.0);
        }
        Complex surface{0.0, 0.0};
        for (int i = 0; i < n_elements_; i++) {
            double ph = -kTwoPi * dists[i] / lam;
            Complex e = t.amp[i] * Complex(std::cos(ph), std::sin(ph));
            element_phasors_[std::size_t(i) * n_subcarriers_ + k] = e;
            surface += e;
        }
        base_[k] = stat + surface;
    }
    double phs = s.irs_geometry.phase_shift;
    switch_factor_ = Complex(std::cos(phs) - 1.0, std::sin(phs));
}

double SimulatedSiMeasurement::measure(const IrsState& state) {
    if (state.n_rows * state.n_cols != n_elements_)
        throw std::invalid_argument("measure: state dimension mismatch");
    CsiSnapshot snap;
    snap.packet_index = call_;
    snap.timestamp = double(call_);
    snap.h.resize(n_subcarriers_);
    for (int k = 0; k < n_subcarriers_; k++) {
        Complex on{0.0, 0.0};
        for (int i = 0; i < n_elements_; i++)
            if (state.bits[i]) on += element_phasors_[std::size_t(i) * n_subcarriers_ + k];
        snap.h[k] = base_[k] + switch_factor_ * on;
    }
    call_++;
    if (imp_) snap = apply_phase_impairments(snap, *imp_, rng_);
    if (quant_) {
        double power = 0.0;
        for (const Complex& v : snap.h) power += std::norm(v);
        snap.rssi_db = std::round(10.0 * std::log10(power / double(n_subcarriers_)));
        snap = apply_agc_and_quantize(snap, *quant_);
        return scaled_amplitude_metric(snap);
    }
    double mean = 0.0;
    for (const Complex& v : snap.h) mean += std::abs(v);
    mean /= double(n_subcarriers_);
    return mean > 0.0 ? 20.0 * std::log10(mean) : kMetricFloorDb;
}

ReplaySiMeasurement::ReplaySiMeasurement(std::vector<double> values) : values_(std::move(values)) {}

ReplaySiMeasurement ReplaySiMeasurement::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open measurement file: " + path);
    std::vector<double> v;
    double x;
    while (in >> x) v.push_back(x);
    return ReplaySiMeasurement(std::move(v));
}

double ReplaySiMeasurement::measure(const IrsState&) {
    if (next_ >= values_.size())
        throw std::runtime_error("replay measurement exhausted");
    return values_[next_++];
}

IrsState random_state(int n_rows, int n_cols, RngStream& rng) {
    if (n_rows < 1 || n_cols < 1) throw std::invalid_argument("random_state: dimensions must be >= 1");
    IrsState st(n_rows, n_cols);
    for (auto& b : st.bits) b = rng.uniform() < 0.5 ? 1 : 0;
    return st;
}

OptimizerBuffers initialize_buffers(const GreedyConfig& cfg, SiMeasurement& m, RngStream& rng) {
    if (cfg.buffer_len < 1) throw std::invalid_argument("buffer_len must be >= 1");
    OptimizerBuffers b;
    b.states.reserve(cfg.buffer_len);
    b.magnitudes.reserve(cfg.buffer_len);
    for (int j = 0; j < cfg.buffer_len; j++) {
        b.states.push_back(random_state(cfg.n_rows, cfg.n_cols, rng));
        b.magnitudes.push_back(m.measure(b.states.back()));
    }
    return b;
}

static void sort_buffers_desc(OptimizerBuffers& b) {
    std::size_t L = b.magnitudes.size();
    std::vector<std::size_t> idx(L);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t c) { return b.magnitudes[a] > b.magnitudes[c]; });
    OptimizerBuffers s;
    s.states.reserve(L);
    s.magnitudes.reserve(L);
    for (std::size_t i : idx) {
        s.states.push_back(std::move(b.states[i]));
        s.magnitudes.push_back(b.magnitudes[i]);
    }
    b = std::move(s);
}

std::vector<double> compute_pnorm(const OptimizerBuffers& buffers, GreedyConfig::Weighting weighting) {
    std::size_t L = buffers.states.size();
    if (L == 0 || buffers.magnitudes.size() != L)
        throw std::invalid_argument("compute_pnorm: empty or inconsistent buffers");
    for (std::size_t i = 1; i < L; i++)
        if (buffers.magnitudes[i - 1] < buffers.magnitudes[i])
            throw std::invalid_argument("compute_pnorm: buffers must be sorted descending");
    std::size_t n = buffers.states[0].bits.size();
    std::vector<double> pn(n, 0.0);
    for (std::size_t j = 0; j < L; j++) {
        // rank l = j+1; the best state (largest rank) weighs most
        double w = weighting == GreedyConfig::Weighting::linear
                       ? 2.0 * double(j + 1) / (double(L) * L + L)
                       : 1.0 / double(L);
        const auto& bits = buffers.states[j].bits;
        for (std::size_t i = 0; i < n; i++)
            if (bits[i]) pn[i] += w;
    }
    return pn;
}

IrsState sample_state_from_pnorm(const std::vector<double>& pnorm, int n_rows, int n_cols,
                                 RngStream& rng) {
    if (pnorm.size() != std::size_t(n_rows) * n_cols)
        throw std::invalid_argument("sample_state_from_pnorm: size mismatch");
    IrsState st(n_rows, n_cols);
    for (std::size_t i = 0; i < pnorm.size(); i++)
        st.bits[i] = rng.uniform() < pnorm[i] ? 1 : 0;
    return st;
}

OptimizationTrace greedy_optimize(const GreedyConfig& cfg, SiMeasurement& m, RngStream& rng) {
    if (cfg.patience < 1) throw std::invalid_argument("patience must be >= 1");
    OptimizationTrace tr;
    long cap = cfg.iteration_cap();
    if (cap < cfg.buffer_len)
        throw std::invalid_argument("iteration budget smaller than the initialization cost L");

    OptimizerBuffers buf = initialize_buffers(cfg, m, rng);
    double cum = buf.magnitudes[0];
    long it = 0;
    for (int j = 0; j < cfg.buffer_len; j++) {
        cum = std::min(cum, buf.magnitudes[j]);
        tr.records.push_back({it++, buf.magnitudes[j], cum, true});
        if (buf.magnitudes[j] == cum) {
            tr.best_state = buf.states[j];
            tr.best_si = cum;
        }
    }

    long stale = 0;
    while (it < cap) {
        sort_buffers_desc(buf);
        std::vector<double> pn = compute_pnorm(buf, cfg.weighting);
        IrsState cand = sample_state_from_pnorm(pn, cfg.n_rows, cfg.n_cols, rng);
        double v = m.measure(cand);
        bool accept = v < buf.magnitudes[0];   // strictly better than the worst entry
        if (accept) {
            buf.magnitudes[0] = v;
            buf.states[0] = cand;
            stale = 0;
        } else {
            stale++;
        }
        if (v < cum) {
            cum = v;
            tr.best_state = cand;
            tr.best_si = v;
        }
        tr.records.push_back({it++, v, cum, accept});
        if (stale > cfg.patience) break;
    }

    if (cfg.remeasure_best > 0) {
        double acc = 0.0;
        for (int j = 0; j < cfg.remeasure_best; j++) acc += m.measure(tr.best_state);
        tr.best_si = acc / double(cfg.remeasure_best);
    }
    sort_buffers_desc(buf);
    tr.final_buffers = std::move(buf);
    return tr;
}

OptimizationTrace random_search(int n_rows, int n_cols, long budget, SiMeasurement& m, RngStream& rng) {
    if (budget < 1) throw std::invalid_argument("random_search: budget must be >= 1");
    OptimizationTrace tr;
    double cum = 0.0;
    for (long i = 0; i < budget; i++) {
        IrsState st = random_state(n_rows, n_cols, rng);
        double v = m.measure(st);
        if (i == 0 || v < cum) {
            cum = v;
            tr.best_state = st;
            tr.best_si = v;
        }
        tr.records.push_back({i, v, cum, i == 0 || v == cum});
    }
    return tr;
}

std::vector<double> aggregate_traces(const std::vector<OptimizationTrace>& traces) {
    if (traces.empty()) throw std::invalid_argument("aggregate_traces: empty trace list");
    std::size_t n = 0;
    for (const auto& t : traces) n = std::max(n, t.records.size());
    std::vector<double> mean(n, 0.0);
    for (const auto& t : traces) {
        for (std::size_t i = 0; i < n; i++) {
            double v = i < t.records.size() ? t.records[i].cum_min : t.records.back().cum_min;
            mean[i] += v;
        }
    }
    for (double& v : mean) v /= double(traces.size());
    return mean;
}

std::vector<double> buffer_on_ratio(const OptimizerBuffers& buffers) {
    if (buffers.states.empty()) throw std::invalid_argument("buffer_on_ratio: empty buffers");
    std::size_t n = buffers.states[0].bits.size();
    std::vector<double> r(n, 0.0);
    for (const auto& st : buffers.states)
        for (std::size_t i = 0; i < n; i++) r[i] += st.bits[i];
    for (double& v : r) v /= double(buffers.states.size());
    return r;
}

} // namespace irssim
