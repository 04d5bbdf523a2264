#pragma once
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "irssim/breathtrack.hpp"
#include "irssim/impairments.hpp"
#include "irssim/model.hpp"

namespace irssim {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// JSON scenario config. Unknown keys are rejected; validation errors name
// the offending field. Units: meters, Hz, radians.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& s);

BreathPattern parse_breath_pattern(const std::string& text);
BreathPattern load_breath_pattern(const std::string& path);

// Line-delimited CSI record: index, timestamp, rssi, then 2K reals.
struct CsiRecord {
    std::uint64_t packet_index = 0;
    double timestamp_s = 0.0;
    double rssi_db = 0.0;
    std::vector<Complex> csi;
};

// Streaming reader; memory use is independent of stream length.
class CsiStreamReader {
public:
    explicit CsiStreamReader(const std::string& path);
    ~CsiStreamReader();
    CsiStreamReader(CsiStreamReader&&) noexcept;
    CsiStreamReader& operator=(CsiStreamReader&&) noexcept;
    // false at end of stream; throws ParseError with a line number otherwise
    bool next(CsiRecord& out);

private:
    struct Impl;
    Impl* impl_;
};

std::vector<CsiRecord> read_csi_stream(const std::string& path);
void write_csi_stream(const std::vector<CsiSnapshot>& stream, const std::string& path);
CsiSnapshot snapshot_from_record(const CsiRecord& r);

// One CSV table: header plus numeric rows, full round-trip precision.
struct ResultTable {
    std::string name;                       // file name without extension
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

// Writes each table to dir/<name>.csv atomically (write then rename).
std::vector<std::string> write_results(const std::vector<ResultTable>& tables, const std::string& dir);
ResultTable read_csv(const std::string& path);

// Everything needed to rerun a command: configs and explicit seeds.
struct RunManifest {
    std::string command;
    std::string scenario_file;
    std::string pattern_file;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> params;
};
void write_manifest(const RunManifest& m, const std::string& dir);

void atomic_write_text(const std::string& path, const std::string& content);
std::string format_full(double v);   // round-trip decimal formatting

} // namespace irssim
