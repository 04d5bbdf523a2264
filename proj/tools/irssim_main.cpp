// Command-line front end: scenario files in, CSV/SVG artifacts out.
// Every run writes a manifest.json so results can be reproduced exactly.
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "irssim/breathtrack.hpp"
#include "irssim/impairments.hpp"
#include "irssim/model.hpp"
#include "irssim/optimizer.hpp"
#include "irssim/scenario_io.hpp"
#include "irssim/svgplot.hpp"

using namespace irssim;
namespace fs = std::filesystem;

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

Scenario load_scenario_checked(const std::string& path, bool round_trip) {
    Scenario s = load_scenario(path);
    if (round_trip) s.round_trip_phase = true;
    return s;
}

void check_subcarrier(int sub, int k_total) {
    if (sub < 0 || sub >= k_total)
        throw ValidationError("--subcarrier must lie in [0, " + std::to_string(k_total) + ")");
}

std::optional<QuantizerConfig> make_quantizer(int bits) {
    if (bits == 0) return std::nullopt;
    QuantizerConfig q;
    q.bits = bits;
    return q;
}

ImpairmentParams make_impairments(bool sync, double jitter_deg) {
    if (jitter_deg < 0.0) throw ValidationError("--jitter-deg must be nonnegative");
    ImpairmentParams p;
    p.synchronized = sync;
    p.jitter_std = jitter_deg * kPi / 180.0;
    return p;
}

GreedyConfig::Weighting parse_weighting(const std::string& w) {
    if (w == "linear") return GreedyConfig::Weighting::linear;
    if (w == "uniform") return GreedyConfig::Weighting::uniform;
    throw ValidationError("--weighting must be linear or uniform");
}

ResultTable state_table(const IrsState& st) {
    ResultTable t;
    t.name = "best_state";
    t.columns = {"row", "col", "bit"};
    for (int r = 0; r < st.n_rows; r++)
        for (int c = 0; c < st.n_cols; c++)
            t.rows.push_back({double(r), double(c), double(st.at(r, c))});
    return t;
}

IrsState state_from_file(const std::string& path, int n_rows, int n_cols) {
    ResultTable t = read_csv(path);
    if (t.columns != std::vector<std::string>{"row", "col", "bit"})
        throw ValidationError(path + ": state file needs columns row,col,bit");
    IrsState st(n_rows, n_cols);
    std::vector<char> seen(std::size_t(n_rows) * n_cols, 0);
    for (const auto& row : t.rows) {
        double r = row[0], c = row[1], b = row[2];
        if (r != std::floor(r) || c != std::floor(c) || r < 0 || c < 0 || int(r) >= n_rows || int(c) >= n_cols)
            throw ValidationError(path + ": element index out of range for this surface");
        if (b != 0.0 && b != 1.0)
            throw ValidationError(path + ": bits must be 0 or 1");
        std::size_t i = std::size_t(r) * n_cols + std::size_t(c);
        if (seen[i])
            throw ValidationError(path + ": duplicate element entry");
        seen[i] = 1;
        st.bits[i] = std::uint8_t(b);
    }
    for (char s : seen)
        if (!s) throw ValidationError(path + ": state file does not cover every element");
    return st;
}

// "all-off", "all-on", "optimize" (greedy on a breath-frozen copy), or
// "file:<path>" with a previously written best_state.csv.
IrsState resolve_state(const std::string& choice, const Scenario& sc, int bits, long budget, int buffer,
                       int patience, GreedyConfig::Weighting weighting, std::uint64_t seed,
                       const std::string& out_dir) {
    int rows = sc.irs_geometry.n_rows, cols = sc.irs_geometry.n_cols;
    if (choice == "all-off") return IrsState(rows, cols);
    if (choice == "all-on") {
        IrsState st(rows, cols);
        for (auto& b : st.bits) b = 1;
        return st;
    }
    if (choice == "optimize") {
        Scenario frozen = sc;
        frozen.breath_path.a0 = Complex(0.0, 0.0);
        SimulatedSiMeasurement meas(frozen, std::nullopt, make_quantizer(bits), seed);
        GreedyConfig cfg;
        cfg.n_rows = rows;
        cfg.n_cols = cols;
        cfg.buffer_len = buffer;
        cfg.patience = patience;
        cfg.max_iterations = budget;
        cfg.weighting = weighting;
        RngStream rng(seed);
        OptimizationTrace tr = greedy_optimize(cfg, meas, rng);
        write_results({state_table(tr.best_state)}, out_dir);
        std::printf("optimized surface: si %.2f dB after %zu measurements\n", tr.best_si,
                    tr.records.size());
        return tr.best_state;
    }
    if (choice.rfind("file:", 0) == 0) return state_from_file(choice.substr(5), rows, cols);
    throw ValidationError("--state must be all-off, all-on, optimize or file:<path>");
}

ResultTable select_columns(const ResultTable& t, const std::vector<std::string>& names) {
    ResultTable out;
    out.name = t.name;
    std::vector<std::size_t> idx;
    for (const std::string& n : names) {
        auto it = std::find(t.columns.begin(), t.columns.end(), n);
        if (it == t.columns.end()) throw std::runtime_error("column " + n + " missing from " + t.name);
        idx.push_back(std::size_t(it - t.columns.begin()));
        out.columns.push_back(n);
    }
    for (const auto& row : t.rows) {
        std::vector<double> r;
        for (std::size_t i : idx) r.push_back(row[i]);
        out.rows.push_back(std::move(r));
    }
    return out;
}

// ---- phase-pattern ----------------------------------------------------

struct PhasePatternArgs {
    std::string scenario, out;
    double threshold = 0.0;
    bool round_trip = false;
};

int run_phase_pattern(const PhasePatternArgs& a) {
    Scenario sc = load_scenario_checked(a.scenario, a.round_trip);
    int rows = sc.irs_geometry.n_rows, cols = sc.irs_geometry.n_cols;
    std::vector<double> pattern = phase_pattern(sc);
    IrsState proj = binary_projection(pattern, rows, cols, a.threshold);

    ResultTable pt;
    pt.name = "phase_pattern";
    pt.columns = {"row", "col", "phase_rad"};
    ResultTable bt;
    bt.name = "projection";
    bt.columns = {"row", "col", "bit"};
    for (int r = 0; r < rows; r++)
        for (int c = 0; c < cols; c++) {
            pt.rows.push_back({double(r), double(c), pattern[std::size_t(r) * cols + c]});
            bt.rows.push_back({double(r), double(c), double(proj.at(r, c))});
        }
    std::vector<std::string> paths = write_results({pt, bt}, a.out);
    plot_heatmap_svg(read_csv(paths[0]), "element phase (rad)", join_path(a.out, "phase_pattern.svg"));
    plot_heatmap_svg(read_csv(paths[1]), "binary projection", join_path(a.out, "projection.svg"));

    RunManifest m;
    m.command = "phase-pattern";
    m.scenario_file = a.scenario;
    m.params = {{"threshold", format_full(a.threshold)},
                {"round_trip_phase", sc.round_trip_phase ? "true" : "false"}};
    write_manifest(m, a.out);

    int on = 0;
    for (auto b : proj.bits) on += b;
    std::printf("%dx%d pattern written to %s; %d/%d elements on at threshold %.3f rad\n", rows, cols,
                a.out.c_str(), on, rows * cols, a.threshold);
    return 0;
}

// ---- optimize ---------------------------------------------------------

struct OptimizeArgs {
    std::string scenario, out, weighting = "linear";
    std::uint64_t seed = 0;
    long budget = 0;
    int buffer = 100, patience = 500, bits = 10;
    bool round_trip = false;
};

ResultTable trace_table(const OptimizationTrace& tr) {
    ResultTable t;
    t.name = "trace";
    t.columns = {"iteration", "si_db", "cum_min_db", "accepted"};
    for (const TraceRecord& r : tr.records)
        t.rows.push_back({double(r.iteration), r.measured, r.cum_min, r.accepted ? 1.0 : 0.0});
    return t;
}

int run_optimize(const OptimizeArgs& a) {
    Scenario sc = load_scenario_checked(a.scenario, a.round_trip);
    GreedyConfig cfg;
    cfg.n_rows = sc.irs_geometry.n_rows;
    cfg.n_cols = sc.irs_geometry.n_cols;
    cfg.buffer_len = a.buffer;
    cfg.patience = a.patience;
    cfg.max_iterations = a.budget;
    cfg.weighting = parse_weighting(a.weighting);
    cfg.rng_seed = a.seed;

    SimulatedSiMeasurement meas(sc, std::nullopt, make_quantizer(a.bits), a.seed);
    RngStream rng(a.seed);
    OptimizationTrace tr = greedy_optimize(cfg, meas, rng);

    SimulatedSiMeasurement baseline_meas(sc, std::nullopt, make_quantizer(a.bits), a.seed);
    double all_off = baseline_meas.measure(IrsState(cfg.n_rows, cfg.n_cols));

    ResultTable summary;
    summary.name = "summary";
    summary.columns = {"best_si_db", "all_off_si_db", "improvement_db", "measurements"};
    summary.rows = {{tr.best_si, all_off, all_off - tr.best_si, double(tr.records.size())}};

    std::vector<std::string> paths = write_results({trace_table(tr), state_table(tr.best_state), summary}, a.out);
    plot_lines_svg(select_columns(read_csv(paths[0]), {"iteration", "cum_min_db"}),
                   "residual interference vs measurements", join_path(a.out, "trace.svg"));

    RunManifest m;
    m.command = "optimize";
    m.scenario_file = a.scenario;
    m.seed = a.seed;
    m.params = {{"budget", std::to_string(a.budget)},
                {"buffer", std::to_string(a.buffer)},
                {"patience", std::to_string(a.patience)},
                {"weighting", a.weighting},
                {"bits", std::to_string(a.bits)}};
    write_manifest(m, a.out);

    std::printf("best si %.2f dB after %zu measurements (all-off %.2f dB, improvement %.2f dB)\n",
                tr.best_si, tr.records.size(), all_off, all_off - tr.best_si);
    return 0;
}

// ---- convergence ------------------------------------------------------

struct ConvergenceArgs {
    std::string scenario, out;
    std::uint64_t seed = 0;
    long budget = 2500;
    int runs = 10, buffer = 100, patience = 500, bits = 10;
    bool round_trip = false;
};

struct MethodCurve {
    std::string name;
    std::vector<double> mean_cum_min;
    double mean_measurements = 0.0;
};

MethodCurve run_method(const std::string& name, const ConvergenceArgs& a, const Scenario& sc,
                       int method_idx) {
    int rows = sc.irs_geometry.n_rows, cols = sc.irs_geometry.n_cols;
    std::vector<OptimizationTrace> traces(std::size_t(a.runs));
    bool failed = false;
    std::string what;
    // runs are independent; each gets its own forked stream and measurement
    long n = a.runs;
#pragma omp parallel for schedule(dynamic) num_threads(thread_cap())
    for (long r = 0; r < n; r++) {
        try {
            RngStream rng = RngStream(a.seed).fork(std::uint64_t(method_idx) * std::uint64_t(a.runs) +
                                                   std::uint64_t(r));
            SimulatedSiMeasurement meas(sc, std::nullopt, make_quantizer(a.bits), a.seed);
            if (name == "random") {
                traces[std::size_t(r)] = random_search(rows, cols, a.budget, meas, rng);
            } else {
                GreedyConfig cfg;
                cfg.n_rows = rows;
                cfg.n_cols = cols;
                cfg.buffer_len = a.buffer;
                cfg.patience = a.patience;
                cfg.max_iterations = a.budget;
                cfg.weighting = name == "greedy-linear" ? GreedyConfig::Weighting::linear
                                                        : GreedyConfig::Weighting::uniform;
                traces[std::size_t(r)] = greedy_optimize(cfg, meas, rng);
            }
        } catch (const std::exception& e) {
#pragma omp critical
            {
                failed = true;
                what = e.what();
            }
        }
    }
    if (failed) throw std::runtime_error("convergence run failed: " + what);

    MethodCurve c;
    c.name = name;
    c.mean_cum_min = aggregate_traces(traces);
    for (const auto& t : traces) c.mean_measurements += double(t.records.size());
    c.mean_measurements /= double(a.runs);
    return c;
}

int run_convergence(const ConvergenceArgs& a) {
    Scenario sc = load_scenario_checked(a.scenario, a.round_trip);
    if (a.runs < 1) throw ValidationError("--runs must be at least 1");
    if (a.budget < a.buffer)
        throw ValidationError("--budget must cover buffer initialization (budget >= buffer)");

    std::vector<MethodCurve> curves;
    const char* names[] = {"greedy-linear", "greedy-uniform", "random"};
    for (int i = 0; i < 3; i++) curves.push_back(run_method(names[i], a, sc, i));

    fs::create_directories(a.out);
    std::ostringstream csv;
    csv << "method,iteration,mean_cum_min_db\n";
    for (const MethodCurve& c : curves)
        for (std::size_t i = 0; i < c.mean_cum_min.size(); i++)
            csv << c.name << ',' << i << ',' << format_full(c.mean_cum_min[i]) << '\n';
    std::string conv_path = join_path(a.out, "convergence.csv");
    atomic_write_text(conv_path, csv.str());

    std::ostringstream sum;
    sum << "method,final_mean_db,mean_measurements\n";
    for (const MethodCurve& c : curves)
        sum << c.name << ',' << format_full(c.mean_cum_min.back()) << ','
            << format_full(c.mean_measurements) << '\n';
    atomic_write_text(join_path(a.out, "summary.csv"), sum.str());

    // pivot the written long table back to one series per method for the plot
    std::ifstream in(conv_path);
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> series(curves.size());
    while (std::getline(in, line)) {
        std::size_t c1 = line.find(','), c2 = line.rfind(',');
        std::string method = line.substr(0, c1);
        for (std::size_t i = 0; i < curves.size(); i++)
            if (curves[i].name == method) series[i].push_back(std::stod(line.substr(c2 + 1)));
    }
    std::size_t longest = 0;
    for (const auto& s : series) longest = std::max(longest, s.size());
    ResultTable wide;
    wide.name = "convergence";
    wide.columns = {"iteration", "greedy-linear", "greedy-uniform", "random"};
    for (std::size_t i = 0; i < longest; i++) {
        std::vector<double> row{double(i)};
        for (const auto& s : series) row.push_back(i < s.size() ? s[i] : s.back());
        wide.rows.push_back(std::move(row));
    }
    plot_lines_svg(wide, "mean cumulative minimum si (dB)", join_path(a.out, "convergence.svg"));

    RunManifest m;
    m.command = "convergence";
    m.scenario_file = a.scenario;
    m.seed = a.seed;
    m.params = {{"runs", std::to_string(a.runs)},
                {"budget", std::to_string(a.budget)},
                {"buffer", std::to_string(a.buffer)},
                {"patience", std::to_string(a.patience)},
                {"bits", std::to_string(a.bits)}};
    write_manifest(m, a.out);

    for (const MethodCurve& c : curves)
        std::printf("%-14s final mean %.2f dB over %d runs (mean %.0f measurements)\n", c.name.c_str(),
                    c.mean_cum_min.back(), a.runs, c.mean_measurements);
    return 0;
}

// ---- track / replay ---------------------------------------------------

struct TrackArgs {
    std::string scenario, out, pattern, state = "all-off", weighting = "linear";
    std::uint64_t seed = 0;
    double duration = 120.0, packet_rate = 400.0, jitter_deg = 15.0;
    long budget = 0;
    int subcarrier = 25, bits = 10, buffer = 100, patience = 500;
    bool sync = true, round_trip = false;
};

BreathPattern resolve_pattern(const std::string& path, double duration) {
    if (!path.empty()) return load_breath_pattern(path);
    if (!(duration > 0.0)) throw ValidationError("--duration must be positive");
    BreathPattern p;
    p.segments.push_back({BreathSegment::Kind::regular, duration, 0.25, 0.015});
    return p;
}

void write_breath_outputs(const BreathTrace& tr, const std::vector<double>* gt_decimated,
                          const std::string& out_dir) {
    ResultTable bt;
    bt.name = "breath";
    bt.columns = {"time_s", "phase_deg_raw", "phase_deg_filtered"};
    if (gt_decimated) bt.columns.push_back("ground_truth_norm");
    double rate = tr.raw_decimated.sample_rate_hz;
    for (std::size_t i = 0; i < tr.raw_decimated.samples.size(); i++) {
        std::vector<double> row{double(i) / rate, tr.raw_decimated.samples[i] * 180.0 / kPi,
                                tr.filtered.samples[i] * 180.0 / kPi};
        if (gt_decimated) row.push_back(i < gt_decimated->size() ? (*gt_decimated)[i] : gt_decimated->back());
        bt.rows.push_back(std::move(row));
    }

    ResultTable sum;
    sum.name = "summary";
    sum.columns = {"rate_hz", "confidence", "detected", "peak_to_trough_deg", "rate_valid"};
    const DetectionResult& r = tr.result;
    sum.rows = {{r.rate_hz, r.confidence, r.detected ? 1.0 : 0.0, r.peak_to_trough_deg,
                 r.rate_valid ? 1.0 : 0.0}};

    std::vector<std::string> paths = write_results({bt, sum}, out_dir);
    plot_lines_svg(read_csv(paths[0]), "breathing phase (deg)", join_path(out_dir, "breath.svg"));

    if (r.detected)
        std::printf("breath rate %.3f Hz, confidence %.2f, peak-to-trough %.0f deg\n", r.rate_hz,
                    r.confidence, r.peak_to_trough_deg);
    else
        std::printf("breath not detected (confidence %.2f)\n", r.confidence);
}

// chest displacement decimated the same way the phase stream was
std::vector<double> decimated_ground_truth(const std::vector<double>& chest, double packet_rate) {
    PhaseSeries s;
    s.sample_rate_hz = packet_rate;
    s.samples = chest;
    int dec = std::max(1, int(std::lround(packet_rate / 10.0)));
    PhaseSeries d = decimate_mean(s, dec);
    try {
        return normalize_ground_truth(d).samples;
    } catch (const std::invalid_argument&) {
        return std::vector<double>(d.samples.size(), 0.5);   // held breath, flat truth
    }
}

int run_track(const TrackArgs& a) {
    Scenario sc = load_scenario_checked(a.scenario, a.round_trip);
    check_subcarrier(a.subcarrier, sc.n_subcarriers);
    if (!(a.packet_rate > 0.0)) throw ValidationError("--packet-rate must be positive");
    BreathPattern pattern = resolve_pattern(a.pattern, a.duration);

    IrsState state = resolve_state(a.state, sc, a.bits, a.budget, a.buffer, a.patience,
                                   parse_weighting(a.weighting), a.seed, a.out);

    PhaseSeries chest = synth_chest_displacement(pattern, a.packet_rate);
    ImpairmentParams imp = make_impairments(a.sync, a.jitter_deg);
    RngStream rng(a.seed);
    std::vector<CsiSnapshot> stream =
        synthesize_csi_stream(sc, state, chest.samples, a.packet_rate, imp, make_quantizer(a.bits), rng);
    fs::create_directories(a.out);
    write_csi_stream(stream, join_path(a.out, "stream.csi"));

    BreathTrace tr = trace_breath(stream, a.packet_rate, a.subcarrier);
    std::vector<double> gt = decimated_ground_truth(chest.samples, a.packet_rate);
    write_breath_outputs(tr, &gt, a.out);

    RunManifest m;
    m.command = "track";
    m.scenario_file = a.scenario;
    m.pattern_file = a.pattern;
    m.seed = a.seed;
    m.params = {{"state", a.state},
                {"packet_rate", format_full(a.packet_rate)},
                {"subcarrier", std::to_string(a.subcarrier)},
                {"bits", std::to_string(a.bits)},
                {"sync", a.sync ? "true" : "false"},
                {"jitter_deg", format_full(a.jitter_deg)},
                {"duration", format_full(a.duration)}};
    write_manifest(m, a.out);
    return 0;
}

struct ReplayArgs {
    std::string input, out, ground_truth;
    double packet_rate = 400.0;
    int subcarrier = 25;
};

int run_replay(const ReplayArgs& a) {
    if (!(a.packet_rate > 0.0)) throw ValidationError("--packet-rate must be positive");
    std::vector<CsiRecord> records = read_csi_stream(a.input);
    if (records.empty()) throw ValidationError(a.input + ": stream is empty");
    std::vector<CsiSnapshot> stream;
    stream.reserve(records.size());
    for (const CsiRecord& r : records) stream.push_back(snapshot_from_record(r));
    check_subcarrier(a.subcarrier, int(stream[0].h.size()));

    BreathTrace tr = trace_breath(stream, a.packet_rate, a.subcarrier);

    std::vector<double> gt;
    if (!a.ground_truth.empty()) {
        BreathPattern p = load_breath_pattern(a.ground_truth);
        PhaseSeries chest = synth_chest_displacement(p, a.packet_rate);
        gt = decimated_ground_truth(chest.samples, a.packet_rate);
    }
    write_breath_outputs(tr, gt.empty() ? nullptr : &gt, a.out);

    RunManifest m;
    m.command = "replay";
    m.pattern_file = a.ground_truth;
    m.params = {{"input", a.input},
                {"packet_rate", format_full(a.packet_rate)},
                {"subcarrier", std::to_string(a.subcarrier)}};
    write_manifest(m, a.out);
    return 0;
}

// ---- impairments-demo -------------------------------------------------

struct DemoArgs {
    std::string scenario, out;
    std::uint64_t seed = 0;
    double duration = 10.0, packet_rate = 400.0, jitter_deg = 15.0;
    int subcarrier = 25, bits = 10;
    bool sync = true;
};

int run_demo(const DemoArgs& a) {
    Scenario sc = load_scenario_checked(a.scenario, false);
    check_subcarrier(a.subcarrier, sc.n_subcarriers);
    if (!(a.duration > 0.0)) throw ValidationError("--duration must be positive");
    if (!(a.packet_rate > 0.0)) throw ValidationError("--packet-rate must be positive");

    std::vector<double> chest(std::size_t(std::lround(a.duration * a.packet_rate)), 0.0);
    if (chest.empty()) throw ValidationError("--duration too short for one packet");
    ImpairmentParams imp = make_impairments(a.sync, a.jitter_deg);
    RngStream rng(a.seed);
    std::vector<CsiSnapshot> stream = synthesize_csi_stream(sc, IrsState(sc.irs_geometry.n_rows, sc.irs_geometry.n_cols),
                                                            chest, a.packet_rate, imp, make_quantizer(a.bits), rng);

    const char* mode = a.sync ? "sync" : "unsync";
    ResultTable t;
    t.name = std::string("phase_") + mode;
    t.columns = {"time_s", "phase_deg"};
    for (const CsiSnapshot& s : stream)
        t.rows.push_back({s.timestamp, std::arg(s.h[std::size_t(a.subcarrier)]) * 180.0 / kPi});
    std::vector<std::string> paths = write_results({t}, a.out);

    ResultTable back = read_csv(paths[0]);
    std::vector<double> deg, rad;
    for (const auto& row : back.rows) {
        deg.push_back(row[1]);
        rad.push_back(row[1] * kPi / 180.0);
    }
    plot_polar_svg(rad, std::string("packet phase, ") + mode, join_path(a.out, t.name + "_polar.svg"));
    plot_histogram_svg(deg, 72, std::string("phase histogram, ") + mode,
                       join_path(a.out, t.name + "_hist.svg"));

    double re = 0.0, im = 0.0;
    for (double v : rad) {
        re += std::cos(v);
        im += std::sin(v);
    }
    double resultant = std::sqrt(re * re + im * im) / double(rad.size());

    RunManifest m;
    m.command = "impairments-demo";
    m.scenario_file = a.scenario;
    m.seed = a.seed;
    m.params = {{"mode", mode},
                {"duration", format_full(a.duration)},
                {"packet_rate", format_full(a.packet_rate)},
                {"subcarrier", std::to_string(a.subcarrier)},
                {"jitter_deg", format_full(a.jitter_deg)},
                {"bits", std::to_string(a.bits)}};
    write_manifest(m, a.out);

    std::printf("%zu packets (%s); phase resultant %.3f\n", stream.size(), mode, resultant);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"surface-assisted interference cancellation and CSI breath tracking"};
    app.require_subcommand(1);

    PhasePatternArgs pp;
    CLI::App* sub_pp = app.add_subcommand("phase-pattern", "per-element phase map and binary projection");
    sub_pp->add_option("--scenario", pp.scenario, "scenario JSON")->required();
    sub_pp->add_option("--out", pp.out, "output directory")->required();
    sub_pp->add_option("--threshold", pp.threshold, "projection threshold (rad)");
    sub_pp->add_flag("--round-trip-phase", pp.round_trip, "phases from the round-trip path length");

    OptimizeArgs op;
    CLI::App* sub_op = app.add_subcommand("optimize", "greedy search for the lowest-interference state");
    sub_op->add_option("--scenario", op.scenario, "scenario JSON")->required();
    sub_op->add_option("--out", op.out, "output directory")->required();
    sub_op->add_option("--seed", op.seed, "rng seed");
    sub_op->add_option("--budget", op.budget, "total measurement cap, 0 = patience-bounded");
    sub_op->add_option("--buffer", op.buffer, "buffered state count");
    sub_op->add_option("--patience", op.patience, "non-improving measurements before stopping");
    sub_op->add_option("--weighting", op.weighting, "linear|uniform")
        ->check(CLI::IsMember({"linear", "uniform"}));
    sub_op->add_option("--bits", op.bits, "quantizer bits, 0 = ideal");
    sub_op->add_flag("--round-trip-phase", op.round_trip, "phases from the round-trip path length");

    ConvergenceArgs cv;
    CLI::App* sub_cv = app.add_subcommand("convergence", "compare search methods over repeated runs");
    sub_cv->add_option("--scenario", cv.scenario, "scenario JSON")->required();
    sub_cv->add_option("--out", cv.out, "output directory")->required();
    sub_cv->add_option("--seed", cv.seed, "rng seed");
    sub_cv->add_option("--runs", cv.runs, "independent runs per method");
    sub_cv->add_option("--budget", cv.budget, "measurements per run");
    sub_cv->add_option("--buffer", cv.buffer, "buffered state count");
    sub_cv->add_option("--patience", cv.patience, "non-improving measurements before stopping");
    sub_cv->add_option("--bits", cv.bits, "quantizer bits, 0 = ideal");
    sub_cv->add_flag("--round-trip-phase", cv.round_trip, "phases from the round-trip path length");

    TrackArgs tk;
    CLI::App* sub_tk = app.add_subcommand("track", "synthesize a capture and trace the breathing phase");
    sub_tk->add_option("--scenario", tk.scenario, "scenario JSON")->required();
    sub_tk->add_option("--out", tk.out, "output directory")->required();
    sub_tk->add_option("--pattern", tk.pattern, "breathing pattern JSON");
    sub_tk->add_option("--duration", tk.duration, "capture length (s) when no pattern is given");
    sub_tk->add_option("--seed", tk.seed, "rng seed");
    sub_tk->add_option("--packet-rate", tk.packet_rate, "packets per second");
    sub_tk->add_option("--subcarrier", tk.subcarrier, "subcarrier used for the phase trace");
    sub_tk->add_option("--bits", tk.bits, "quantizer bits, 0 = ideal");
    sub_tk->add_option("--jitter-deg", tk.jitter_deg, "common-mode phase noise std (deg)");
    sub_tk->add_flag("--sync,!--no-sync", tk.sync, "packet-level carrier/sampling sync");
    sub_tk->add_option("--state", tk.state, "all-off|all-on|optimize|file:<path>");
    sub_tk->add_option("--budget", tk.budget, "optimizer budget when --state optimize");
    sub_tk->add_option("--buffer", tk.buffer, "optimizer buffer when --state optimize");
    sub_tk->add_option("--patience", tk.patience, "optimizer patience when --state optimize");
    sub_tk->add_option("--weighting", tk.weighting, "linear|uniform")
        ->check(CLI::IsMember({"linear", "uniform"}));
    sub_tk->add_flag("--round-trip-phase", tk.round_trip, "phases from the round-trip path length");

    ReplayArgs rp;
    CLI::App* sub_rp = app.add_subcommand("replay", "trace breathing from a captured stream file");
    sub_rp->add_option("--input", rp.input, "stream file")->required();
    sub_rp->add_option("--out", rp.out, "output directory")->required();
    sub_rp->add_option("--packet-rate", rp.packet_rate, "packets per second of the capture");
    sub_rp->add_option("--subcarrier", rp.subcarrier, "subcarrier used for the phase trace");
    sub_rp->add_option("--ground-truth", rp.ground_truth, "breathing pattern JSON for reference");

    DemoArgs dm;
    CLI::App* sub_dm = app.add_subcommand("impairments-demo", "phase behaviour of a still capture");
    sub_dm->add_option("--scenario", dm.scenario, "scenario JSON")->required();
    sub_dm->add_option("--out", dm.out, "output directory")->required();
    sub_dm->add_option("--seed", dm.seed, "rng seed");
    sub_dm->add_option("--duration", dm.duration, "capture length (s)");
    sub_dm->add_option("--packet-rate", dm.packet_rate, "packets per second");
    sub_dm->add_option("--subcarrier", dm.subcarrier, "subcarrier used for the phase trace");
    sub_dm->add_option("--jitter-deg", dm.jitter_deg, "common-mode phase noise std (deg)");
    sub_dm->add_option("--bits", dm.bits, "quantizer bits, 0 = ideal");
    sub_dm->add_flag("--sync,!--no-sync", dm.sync, "packet-level carrier/sampling sync");

    int rc = 0;
    try {
        app.parse(argc, argv);
        if (sub_pp->parsed()) rc = run_phase_pattern(pp);
        else if (sub_op->parsed()) rc = run_optimize(op);
        else if (sub_cv->parsed()) rc = run_convergence(cv);
        else if (sub_tk->parsed()) rc = run_track(tk);
        else if (sub_rp->parsed()) rc = run_replay(rp);
        else if (sub_dm->parsed()) rc = run_demo(dm);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return rc;
}