#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "irssim/scenario_io.hpp"

using namespace irssim;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
};

CmdResult run_cli(const std::string& args) {
    std::string cmd = std::string(IRSSIM_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    CmdResult r;
    char buf[512];
    while (std::fgets(buf, sizeof buf, p)) r.out += buf;
    int st = pclose(p);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string scenario(const char* name) {
    return std::string(IRSSIM_SCENARIO_DIR) + "/" + name;
}

std::string fresh_dir(const char* name) {
    fs::path d = fs::temp_directory_path() / "irssim_cli_test" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("no-such-command").code == 2);
    CHECK(run_cli("optimize --out /tmp/x").code == 2);   // --scenario missing
    CHECK(run_cli("--help").code == 0);

    CmdResult missing = run_cli("optimize --scenario /tmp/definitely_absent.json --out " + fresh_dir("m"));
    CHECK(missing.code == 2);
    CHECK(missing.out.find("definitely_absent.json") != std::string::npos);
}

TEST_CASE("phase pattern artifacts") {
    std::string out = fresh_dir("pp");
    CmdResult r = run_cli("phase-pattern --scenario " + scenario("canonical.json") + " --out " + out);
    CHECK(r.code == 0);

    ResultTable pt = read_csv(out + "/phase_pattern.csv");
    CHECK(pt.columns == std::vector<std::string>{"row", "col", "phase_rad"});
    REQUIRE(pt.rows.size() == 256);
    std::map<std::pair<int, int>, double> phase;
    for (const auto& row : pt.rows) {
        CHECK(row[2] >= 0.0);
        CHECK(row[2] < kTwoPi);
        phase[{int(row[0]), int(row[1])}] = row[2];
    }
    // antenna sits on the vertical centerline, so columns mirror exactly
    for (int rr = 0; rr < 16; rr++)
        for (int cc = 0; cc < 8; cc++)
            CHECK(phase[{rr, cc}] == phase[{rr, 15 - cc}]);

    ResultTable bt = read_csv(out + "/projection.csv");
    REQUIRE(bt.rows.size() == 256);
    for (const auto& row : bt.rows)
        CHECK((row[2] == 0.0 || row[2] == 1.0));

    CHECK(slurp(out + "/phase_pattern.svg").find("<svg") != std::string::npos);
    CHECK(slurp(out + "/projection.svg").find("<svg") != std::string::npos);
    CHECK(fs::exists(out + "/manifest.json"));
}

TEST_CASE("seeded runs are byte-identical") {
    std::string a = fresh_dir("det_a"), b = fresh_dir("det_b"), c = fresh_dir("det_c");
    std::string base = "optimize --scenario " + scenario("desk2x2.json") +
                       " --budget 150 --buffer 8 --patience 40 --seed 9 --out ";
    CHECK(run_cli(base + a).code == 0);
    CHECK(run_cli(base + b).code == 0);
    CHECK(slurp(a + "/trace.csv") == slurp(b + "/trace.csv"));
    CHECK(slurp(a + "/best_state.csv") == slurp(b + "/best_state.csv"));

    std::string other = "optimize --scenario " + scenario("desk2x2.json") +
                        " --budget 150 --buffer 8 --patience 40 --seed 10 --out " + c;
    CHECK(run_cli(other).code == 0);
    CHECK(slurp(a + "/trace.csv") != slurp(c + "/trace.csv"));
}

TEST_CASE("optimize emits a consistent trace") {
    std::string out = fresh_dir("opt");
    CmdResult r = run_cli("optimize --scenario " + scenario("desk2x2.json") +
                          " --budget 150 --buffer 8 --patience 40 --seed 9 --out " + out);
    CHECK(r.code == 0);
    CHECK(r.out.find("best si") != std::string::npos);

    ResultTable trace = read_csv(out + "/trace.csv");
    CHECK(trace.columns == std::vector<std::string>{"iteration", "si_db", "cum_min_db", "accepted"});
    REQUIRE(!trace.rows.empty());
    for (std::size_t i = 0; i < trace.rows.size(); i++) {
        CHECK(trace.rows[i][0] == double(i));
        if (i > 0) CHECK(trace.rows[i][2] <= trace.rows[i - 1][2]);
        CHECK(trace.rows[i][2] <= trace.rows[i][1]);
    }

    ResultTable summary = read_csv(out + "/summary.csv");
    REQUIRE(summary.rows.size() == 1);
    double best = summary.rows[0][0], all_off = summary.rows[0][1];
    CHECK(best == trace.rows.back()[2]);
    CHECK(best < all_off);
    CHECK(summary.rows[0][3] == double(trace.rows.size()));

    ResultTable st = read_csv(out + "/best_state.csv");
    REQUIRE(st.rows.size() == 4);
    for (const auto& row : st.rows)
        CHECK((row[2] == 0.0 || row[2] == 1.0));

    // the emitted state file feeds straight back in
    std::string tr_out = fresh_dir("opt_feed");
    CmdResult feed = run_cli("track --scenario " + scenario("desk2x2.json") +
                             " --duration 40 --packet-rate 50 --jitter-deg 0 --state file:" + out +
                             "/best_state.csv --out " + tr_out);
    CHECK(feed.code == 0);

    std::string bad = tr_out + "/partial_state.csv";
    atomic_write_text(bad, "row,col,bit\n0,0,1\n");
    CmdResult partial = run_cli("track --scenario " + scenario("desk2x2.json") +
                                " --duration 40 --packet-rate 50 --state file:" + bad + " --out " +
                                fresh_dir("opt_feed_bad"));
    CHECK(partial.code == 2);
    CHECK(partial.out.find("every element") != std::string::npos);
}

TEST_CASE("convergence compares three methods") {
    std::string out = fresh_dir("conv");
    CmdResult r = run_cli("convergence --scenario " + scenario("desk2x2.json") +
                          " --runs 3 --budget 100 --buffer 8 --patience 25 --seed 4 --out " + out);
    CHECK(r.code == 0);

    std::string text = slurp(out + "/convergence.csv");
    CHECK(text.rfind("method,iteration,mean_cum_min_db\n", 0) == 0);
    int random_rows = 0;
    std::istringstream ss(text);
    std::string line;
    std::getline(ss, line);
    while (std::getline(ss, line))
        if (line.rfind("random,", 0) == 0) random_rows++;
    CHECK(random_rows == 100);   // random search never stops early
    CHECK(text.find("greedy-linear,") != std::string::npos);
    CHECK(text.find("greedy-uniform,") != std::string::npos);

    std::string summary = slurp(out + "/summary.csv");
    CHECK(summary.rfind("method,final_mean_db,mean_measurements\n", 0) == 0);
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 4);
    CHECK(slurp(out + "/convergence.svg").find("<svg") != std::string::npos);

    CmdResult bad = run_cli("convergence --scenario " + scenario("desk2x2.json") +
                            " --budget 5 --buffer 8 --out " + fresh_dir("conv_bad"));
    CHECK(bad.code == 2);
}

TEST_CASE("track detects and replay agrees on the same stream") {
    std::string out = fresh_dir("track");
    CmdResult r = run_cli("track --scenario " + scenario("canonical.json") +
                          " --seed 42 --duration 60 --packet-rate 50 --state optimize --budget 3000" +
                          " --jitter-deg 15 --out " + out);
    CHECK(r.code == 0);
    CHECK(r.out.find("breath rate") != std::string::npos);

    ResultTable summary = read_csv(out + "/summary.csv");
    CHECK(summary.columns ==
          std::vector<std::string>{"rate_hz", "confidence", "detected", "peak_to_trough_deg", "rate_valid"});
    REQUIRE(summary.rows.size() == 1);
    CHECK(summary.rows[0][2] == 1.0);
    CHECK(std::abs(summary.rows[0][0] - 0.25) <= 0.02);

    ResultTable breath = read_csv(out + "/breath.csv");
    CHECK(breath.columns == std::vector<std::string>{"time_s", "phase_deg_raw", "phase_deg_filtered",
                                                     "ground_truth_norm"});
    CHECK(breath.rows.size() == 600);   // 60 s decimated to 10 Hz

    std::string rp = fresh_dir("replay");
    CmdResult rr = run_cli("replay --input " + out + "/stream.csi --packet-rate 50 --out " + rp);
    CHECK(rr.code == 0);
    CHECK(slurp(rp + "/summary.csv") == slurp(out + "/summary.csv"));
    ResultTable rbreath = read_csv(rp + "/breath.csv");
    CHECK(rbreath.columns == std::vector<std::string>{"time_s", "phase_deg_raw", "phase_deg_filtered"});
}

TEST_CASE("uncancelled surface reports no detection") {
    std::string out = fresh_dir("nodetect");
    CmdResult r = run_cli("track --scenario " + scenario("canonical.json") +
                          " --seed 5 --duration 60 --packet-rate 50 --state all-off --jitter-deg 5 --out " +
                          out);
    CHECK(r.code == 0);
    CHECK(r.out.find("not detected") != std::string::npos);
    ResultTable summary = read_csv(out + "/summary.csv");
    CHECK(summary.rows[0][2] == 0.0);
}

TEST_CASE("capture length is enforced") {
    CmdResult short_track = run_cli("track --scenario " + scenario("desk2x2.json") +
                                    " --duration 20 --packet-rate 50 --out " + fresh_dir("short"));
    CHECK(short_track.code == 2);
    CHECK(short_track.out.find("30 s") != std::string::npos);

    std::string one = fresh_dir("one") + "/one.csi";
    atomic_write_text(one, "0 0.0 -10 0.5 -0.25\n");
    CmdResult short_replay = run_cli("replay --input " + one + " --subcarrier 0 --out " + fresh_dir("rp1"));
    CHECK(short_replay.code == 2);

    std::string empty_pat = fresh_dir("pat") + "/empty.json";
    atomic_write_text(empty_pat, "{\"segments\":[]}\n");
    CmdResult ep = run_cli("track --scenario " + scenario("desk2x2.json") + " --pattern " + empty_pat +
                           " --out " + fresh_dir("pat_out"));
    CHECK(ep.code == 2);
}

TEST_CASE("impairment demo artifacts") {
    std::string out = fresh_dir("demo");
    CmdResult r = run_cli("impairments-demo --scenario " + scenario("canonical.json") +
                          " --no-sync --duration 5 --out " + out);
    CHECK(r.code == 0);
    CHECK(fs::exists(out + "/phase_unsync.csv"));
    CHECK(slurp(out + "/phase_unsync_polar.svg").find("<svg") != std::string::npos);
    CHECK(slurp(out + "/phase_unsync_hist.svg").find("<svg") != std::string::npos);

    CmdResult zero = run_cli("impairments-demo --scenario " + scenario("canonical.json") +
                             " --duration 0 --out " + fresh_dir("demo0"));
    CHECK(zero.code == 2);
}