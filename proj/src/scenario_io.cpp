#include "irssim/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace irssim {

namespace {

using nlohmann::json;

json parse_json_text(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok)
            throw ParseError("unknown key \"" + it.key() + "\" in " + where);
    }
}

const json& require_object(const json& parent, const char* key, const std::string& label) {
    if (!parent.contains(key))
        throw ValidationError("missing required field " + label);
    const json& v = parent.at(key);
    if (!v.is_object())
        throw ParseError(label + " must be an object");
    return v;
}

double req_num(const json& obj, const char* key, const std::string& label) {
    if (!obj.contains(key))
        throw ValidationError("missing required field " + label);
    const json& v = obj.at(key);
    if (!v.is_number())
        throw ParseError(label + " must be a number");
    return v.get<double>();
}

double opt_num(const json& obj, const char* key, double dflt, const std::string& label) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_number())
        throw ParseError(label + " must be a number");
    return v.get<double>();
}

long req_int(const json& obj, const char* key, const std::string& label) {
    if (!obj.contains(key))
        throw ValidationError("missing required field " + label);
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ParseError(label + " must be an integer");
    return v.get<long>();
}

long opt_int(const json& obj, const char* key, long dflt, const std::string& label) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_number_integer())
        throw ParseError(label + " must be an integer");
    return v.get<long>();
}

bool opt_bool(const json& obj, const char* key, bool dflt, const std::string& label) {
    if (!obj.contains(key)) return dflt;
    const json& v = obj.at(key);
    if (!v.is_boolean())
        throw ParseError(label + " must be a boolean");
    return v.get<bool>();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

Scenario parse_scenario(const std::string& text) {
    json j = parse_json_text(text, "scenario");
    if (!j.is_object())
        throw ParseError("scenario root must be an object");
    check_keys(j,
               {"irs", "antenna", "carrier_hz", "subcarrier_spacing_hz", "n_subcarriers",
                "round_trip_phase", "static_paths", "breath", "self_interference"},
               "scenario");

    Scenario s;

    const json& ji = require_object(j, "irs", "irs");
    check_keys(ji, {"rows", "cols", "width_m", "height_m", "phase_shift_rad", "element_reflectance"}, "irs");
    s.irs_geometry.n_rows = int(req_int(ji, "rows", "irs.rows"));
    s.irs_geometry.n_cols = int(req_int(ji, "cols", "irs.cols"));
    if (s.irs_geometry.n_rows < 1)
        throw ValidationError("irs.rows must be at least 1");
    if (s.irs_geometry.n_cols < 1)
        throw ValidationError("irs.cols must be at least 1");
    s.irs_geometry.width = opt_num(ji, "width_m", 0.4, "irs.width_m");
    s.irs_geometry.height = opt_num(ji, "height_m", 0.32, "irs.height_m");
    if (!(s.irs_geometry.width > 0.0))
        throw ValidationError("irs.width_m must be positive");
    if (!(s.irs_geometry.height > 0.0))
        throw ValidationError("irs.height_m must be positive");
    s.irs_geometry.phase_shift = opt_num(ji, "phase_shift_rad", kPi, "irs.phase_shift_rad");
    s.irs_geometry.element_reflectance = opt_num(ji, "element_reflectance", 1.0, "irs.element_reflectance");
    if (s.irs_geometry.element_reflectance < 0.0)
        throw ValidationError("irs.element_reflectance must be nonnegative");

    const json& ja = require_object(j, "antenna", "antenna");
    check_keys(ja, {"distance_m", "offset_x_m", "offset_y_m"}, "antenna");
    s.antenna_distance = req_num(ja, "distance_m", "antenna.distance_m");
    if (!(s.antenna_distance > 0.0))
        throw ValidationError("antenna.distance_m must be positive");
    s.antenna_offset_x = opt_num(ja, "offset_x_m", 0.0, "antenna.offset_x_m");
    s.antenna_offset_y = opt_num(ja, "offset_y_m", 0.0, "antenna.offset_y_m");

    s.carrier_hz = opt_num(j, "carrier_hz", 5.32e9, "carrier_hz");
    if (!(s.carrier_hz > 0.0))
        throw ValidationError("carrier_hz must be positive");
    s.subcarrier_spacing_hz = opt_num(j, "subcarrier_spacing_hz", 312.5e3, "subcarrier_spacing_hz");
    if (!(s.subcarrier_spacing_hz > 0.0))
        throw ValidationError("subcarrier_spacing_hz must be positive");
    s.n_subcarriers = int(opt_int(j, "n_subcarriers", 56, "n_subcarriers"));
    if (s.n_subcarriers < 1)
        throw ValidationError("n_subcarriers must be at least 1");
    s.round_trip_phase = opt_bool(j, "round_trip_phase", false, "round_trip_phase");

    if (j.contains("static_paths")) {
        const json& jp = j.at("static_paths");
        if (!jp.is_array())
            throw ParseError("static_paths must be an array");
        for (std::size_t i = 0; i < jp.size(); ++i) {
            std::string label = "static_paths[" + std::to_string(i) + "]";
            const json& je = jp.at(i);
            if (!je.is_object())
                throw ParseError(label + " must be an object");
            check_keys(je, {"amp_re", "amp_im", "distance_m"}, label);
            StaticPath p;
            p.a = Complex(req_num(je, "amp_re", label + ".amp_re"),
                          opt_num(je, "amp_im", 0.0, label + ".amp_im"));
            p.d = req_num(je, "distance_m", label + ".distance_m");
            if (p.d < 0.0)
                throw ValidationError(label + ".distance_m must be nonnegative");
            s.static_paths.push_back(p);
        }
    }

    if (j.contains("breath")) {
        const json& jb = j.at("breath");
        if (!jb.is_object())
            throw ParseError("breath must be an object");
        check_keys(jb, {"amp_re", "amp_im", "distance_m"}, "breath");
        s.breath_path.a0 = Complex(req_num(jb, "amp_re", "breath.amp_re"),
                                   opt_num(jb, "amp_im", 0.0, "breath.amp_im"));
        s.breath_path.d0 = req_num(jb, "distance_m", "breath.distance_m");
        if (s.breath_path.d0 < 0.0)
            throw ValidationError("breath.distance_m must be nonnegative");
    }

    if (j.contains("self_interference")) {
        const json& js = j.at("self_interference");
        if (!js.is_object())
            throw ParseError("self_interference must be an object");
        check_keys(js, {"amp", "phase_cycles"}, "self_interference");
        s.si.a_iso = req_num(js, "amp", "self_interference.amp");
        if (s.si.a_iso < 0.0)
            throw ValidationError("self_interference.amp must be nonnegative");
        s.si.theta = opt_num(js, "phase_cycles", 0.0, "self_interference.phase_cycles");
    }

    return s;
}

Scenario load_scenario(const std::string& path) {
    return parse_scenario(read_file(path));
}

std::string serialize_scenario(const Scenario& s) {
    json j;
    j["irs"] = {{"rows", s.irs_geometry.n_rows},
                {"cols", s.irs_geometry.n_cols},
                {"width_m", s.irs_geometry.width},
                {"height_m", s.irs_geometry.height},
                {"phase_shift_rad", s.irs_geometry.phase_shift},
                {"element_reflectance", s.irs_geometry.element_reflectance}};
    j["antenna"] = {{"distance_m", s.antenna_distance},
                    {"offset_x_m", s.antenna_offset_x},
                    {"offset_y_m", s.antenna_offset_y}};
    j["carrier_hz"] = s.carrier_hz;
    j["subcarrier_spacing_hz"] = s.subcarrier_spacing_hz;
    j["n_subcarriers"] = s.n_subcarriers;
    j["round_trip_phase"] = s.round_trip_phase;
    j["static_paths"] = json::array();
    for (const StaticPath& p : s.static_paths)
        j["static_paths"].push_back({{"amp_re", p.a.real()}, {"amp_im", p.a.imag()}, {"distance_m", p.d}});
    j["breath"] = {{"amp_re", s.breath_path.a0.real()},
                   {"amp_im", s.breath_path.a0.imag()},
                   {"distance_m", s.breath_path.d0}};
    j["self_interference"] = {{"amp", s.si.a_iso}, {"phase_cycles", s.si.theta}};
    return j.dump(2) + "\n";
}

BreathPattern parse_breath_pattern(const std::string& text) {
    json j = parse_json_text(text, "breath pattern");
    if (!j.is_object())
        throw ParseError("breath pattern root must be an object");
    check_keys(j, {"segments"}, "breath pattern");
    if (!j.contains("segments") || !j.at("segments").is_array())
        throw ValidationError("segments must be an array");
    const json& js = j.at("segments");
    if (js.empty())
        throw ValidationError("segments must not be empty");

    BreathPattern p;
    for (std::size_t i = 0; i < js.size(); ++i) {
        std::string label = "segments[" + std::to_string(i) + "]";
        const json& je = js.at(i);
        if (!je.is_object())
            throw ParseError(label + " must be an object");
        check_keys(je, {"kind", "duration_s", "rate_hz", "depth_m"}, label);
        if (!je.contains("kind") || !je.at("kind").is_string())
            throw ValidationError("missing required field " + label + ".kind");
        std::string kind = je.at("kind").get<std::string>();
        BreathSegment seg;
        if (kind == "regular")
            seg.kind = BreathSegment::Kind::regular;
        else if (kind == "hold")
            seg.kind = BreathSegment::Kind::hold;
        else
            throw ValidationError(label + ".kind must be \"regular\" or \"hold\"");
        seg.duration_s = req_num(je, "duration_s", label + ".duration_s");
        seg.rate_hz = opt_num(je, "rate_hz", 0.25, label + ".rate_hz");
        seg.depth_m = opt_num(je, "depth_m", 0.015, label + ".depth_m");
        p.segments.push_back(seg);
    }
    return p;
}

BreathPattern load_breath_pattern(const std::string& path) {
    return parse_breath_pattern(read_file(path));
}

struct CsiStreamReader::Impl {
    std::ifstream in;
    std::string path;
    std::size_t line_no = 0;
    std::size_t n_subcarriers = 0;
};

CsiStreamReader::CsiStreamReader(const std::string& path) : impl_(new Impl) {
    impl_->path = path;
    impl_->in.open(path, std::ios::binary);
    if (!impl_->in) {
        delete impl_;
        impl_ = nullptr;
        throw ParseError("cannot open " + path);
    }
}

CsiStreamReader::~CsiStreamReader() { delete impl_; }

CsiStreamReader::CsiStreamReader(CsiStreamReader&& o) noexcept : impl_(o.impl_) { o.impl_ = nullptr; }

CsiStreamReader& CsiStreamReader::operator=(CsiStreamReader&& o) noexcept {
    if (this != &o) {
        delete impl_;
        impl_ = o.impl_;
        o.impl_ = nullptr;
    }
    return *this;
}

bool CsiStreamReader::next(CsiRecord& out) {
    std::string line;
    while (std::getline(impl_->in, line)) {
        ++impl_->line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;

        std::string at = impl_->path + ":" + std::to_string(impl_->line_no);
        std::istringstream ss(line);
        std::vector<double> tok;
        double v;
        while (ss >> v)
            tok.push_back(v);
        if (!ss.eof())
            throw ParseError(at + ": malformed number");
        if (tok.size() < 5 || (tok.size() - 3) % 2 != 0)
            throw ParseError(at + ": expected packet index, timestamp, rssi and re/im pairs");
        std::size_t k = (tok.size() - 3) / 2;
        if (impl_->n_subcarriers == 0)
            impl_->n_subcarriers = k;
        else if (k != impl_->n_subcarriers)
            throw ParseError(at + ": record has " + std::to_string(k) + " subcarriers, stream started with " +
                             std::to_string(impl_->n_subcarriers));
        if (tok[0] < 0.0 || tok[0] != std::floor(tok[0]))
            throw ParseError(at + ": packet index must be a nonnegative integer");

        out.packet_index = std::uint64_t(tok[0]);
        out.timestamp_s = tok[1];
        out.rssi_db = tok[2];
        out.csi.resize(k);
        for (std::size_t i = 0; i < k; ++i)
            out.csi[i] = Complex(tok[3 + 2 * i], tok[4 + 2 * i]);
        return true;
    }
    return false;
}

std::vector<CsiRecord> read_csi_stream(const std::string& path) {
    CsiStreamReader r(path);
    std::vector<CsiRecord> out;
    CsiRecord rec;
    while (r.next(rec))
        out.push_back(rec);
    return out;
}

void write_csi_stream(const std::vector<CsiSnapshot>& stream, const std::string& path) {
    std::ostringstream text;
    for (const CsiSnapshot& s : stream) {
        text << s.packet_index << ' ' << format_full(s.timestamp) << ' ' << format_full(s.rssi_db);
        for (const Complex& h : s.h)
            text << ' ' << format_full(h.real()) << ' ' << format_full(h.imag());
        text << '\n';
    }
    atomic_write_text(path, text.str());
}

CsiSnapshot snapshot_from_record(const CsiRecord& r) {
    CsiSnapshot s;
    s.packet_index = r.packet_index;
    s.timestamp = r.timestamp_s;
    s.h = r.csi;
    s.rssi_db = r.rssi_db;
    s.agc_gain = 0.0;    // files carry no gain
    return s;
}

std::vector<std::string> write_results(const std::vector<ResultTable>& tables, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    for (const ResultTable& t : tables) {
        std::ostringstream text;
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            text << (i ? "," : "") << t.columns[i];
        text << '\n';
        for (const std::vector<double>& row : t.rows) {
            if (row.size() != t.columns.size())
                throw std::invalid_argument("row width mismatch in table " + t.name);
            for (std::size_t i = 0; i < row.size(); ++i)
                text << (i ? "," : "") << format_full(row[i]);
            text << '\n';
        }
        std::string path = (std::filesystem::path(dir) / (t.name + ".csv")).string();
        atomic_write_text(path, text.str());
        paths.push_back(path);
    }
    return paths;
}

ResultTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open " + path);
    ResultTable t;
    t.name = std::filesystem::path(path).stem().string();

    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ": empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    t.columns = split_csv_line(line);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<std::string> cells = split_csv_line(line);
        std::string at = path + ":" + std::to_string(line_no);
        if (cells.size() != t.columns.size())
            throw ParseError(at + ": expected " + std::to_string(t.columns.size()) + " cells, got " +
                             std::to_string(cells.size()));
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            try {
                std::size_t used = 0;
                row[i] = std::stod(cells[i], &used);
                if (used != cells[i].size())
                    throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw ParseError(at + ": cannot parse \"" + cells[i] + "\" in column " + t.columns[i]);
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_manifest(const RunManifest& m, const std::string& dir) {
    json j;
    j["command"] = m.command;
    if (!m.scenario_file.empty())
        j["scenario_file"] = m.scenario_file;
    if (!m.pattern_file.empty())
        j["pattern_file"] = m.pattern_file;
    j["seed"] = m.seed;
    j["params"] = json::object();
    for (const auto& [k, v] : m.params)
        j["params"][k] = v;
    std::filesystem::create_directories(dir);
    atomic_write_text((std::filesystem::path(dir) / "manifest.json").string(), j.dump(2) + "\n");
}

void atomic_write_text(const std::string& path, const std::string& content) {
    std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace irssim
