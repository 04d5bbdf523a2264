#pragma once
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "irssim/impairments.hpp"
#include "irssim/model.hpp"
#include "irssim/rng.hpp"

namespace irssim {

// Measurement abstraction the optimizer searches over. Lower = less SI.
struct SiMeasurement {
    virtual ~SiMeasurement() = default;
    virtual double measure(const IrsState& state) = 0;
};

// Channel-model-backed measurement: mean |h_k| over all subcarriers in dB,
// optionally passed through impairments and the quantizer.
class SimulatedSiMeasurement : public SiMeasurement {
public:
    explicit SimulatedSiMeasurement(const Scenario& s,
                                    std::optional<ImpairmentParams> imp = std::nullopt,
                                    std::optional<QuantizerConfig> quant = std::nullopt,
                                    std::uint64_t noise_seed = 0);
    double measure(const IrsState& state) override;

private:
    Scenario scenario_;
    std::optional<ImpairmentParams> imp_;
    std::optional<QuantizerConfig> quant_;
    RngStream rng_;
    std::uint64_t call_ = 0;
    // per-subcarrier element phasors and the state-independent baseline
    std::vector<Complex> element_phasors_;  // I x K row-major
    std::vector<Complex> base_;             // statics + SI + all-off surface
    int n_elements_ = 0;
    int n_subcarriers_ = 0;
    Complex switch_factor_;                 // e^{j phase_shift} - 1
};

// Replays a pre-recorded sequence of measurement values (one per call).
class ReplaySiMeasurement : public SiMeasurement {
public:
    explicit ReplaySiMeasurement(std::vector<double> values);
    static ReplaySiMeasurement from_file(const std::string& path);
    double measure(const IrsState& state) override;

private:
    std::vector<double> values_;
    std::size_t next_ = 0;
};

struct GreedyConfig {
    int n_rows = 16;
    int n_cols = 16;
    int buffer_len = 100;       // L
    int patience = 500;         // consecutive non-improving iterations allowed
    long max_iterations = 0;    // total measurement cap; 0 = 10*L*patience
    enum class Weighting { linear, uniform } weighting = Weighting::linear;
    std::uint64_t rng_seed = 0;
    int remeasure_best = 0;     // re-average the winner this many times

    long iteration_cap() const {
        return max_iterations > 0 ? max_iterations : 10L * buffer_len * patience;
    }
};

struct OptimizerBuffers {
    std::vector<IrsState> states;
    std::vector<double> magnitudes;
};

struct TraceRecord {
    long iteration = 0;       // measurement index, 0-based, initialization included
    double measured = 0.0;
    double cum_min = 0.0;
    bool accepted = false;
};

struct OptimizationTrace {
    std::vector<TraceRecord> records;
    IrsState best_state;
    double best_si = 0.0;
    OptimizerBuffers final_buffers;   // state of the buffers at termination
};

IrsState random_state(int n_rows, int n_cols, RngStream& rng);
OptimizerBuffers initialize_buffers(const GreedyConfig& cfg, SiMeasurement& m, RngStream& rng);

// Buffers must be sorted descending by magnitude (worst first). Linear
// weighting l/(sum of 1..L) over rank l; rank L (the best) weighs most.
std::vector<double> compute_pnorm(const OptimizerBuffers& buffers,
                                  GreedyConfig::Weighting weighting = GreedyConfig::Weighting::linear);
IrsState sample_state_from_pnorm(const std::vector<double>& pnorm, int n_rows, int n_cols, RngStream& rng);

OptimizationTrace greedy_optimize(const GreedyConfig& cfg, SiMeasurement& m, RngStream& rng);
OptimizationTrace random_search(int n_rows, int n_cols, long budget, SiMeasurement& m, RngStream& rng);

// Element-wise mean of cumulative minima; shorter traces are padded with
// their final value. Errors on an empty list.
std::vector<double> aggregate_traces(const std::vector<OptimizationTrace>& traces);

// Mean ON-rate per element over the buffer states.
std::vector<double> buffer_on_ratio(const OptimizerBuffers& buffers);

} // namespace irssim
