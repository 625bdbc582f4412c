#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using namespace cellforge;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "cellforge");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("cellforge_cli_" + std::to_string(std::random_device{}()) + "_" + std::to_string(counter_++))) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path operator/(const std::string& name) const { return path_ / name; }
    const fs::path& path() const { return path_; }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST(Cli, EmitBuiltInParsesBack) {
    auto r = invoke({"emit", "proposed-gdi"});
    ASSERT_EQ(r.code, 0) << r.err;
    Circuit c = parse_netlist(r.out);
    EXPECT_EQ(count_transistors(c).total, 10);
    EXPECT_EQ(c.ports().outputs, (std::vector<std::string>{"sum", "carry"}));
}

TEST(Cli, EmitTestbenchAddsSources) {
    auto r = invoke({"emit", "cmos28", "--testbench", "--vdd", "3.0"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(parse_netlist(r.out).sources().size(), 4u);
}

TEST(Cli, EmitRandomIsSeeded) {
    auto a = invoke({"emit", "random", "--seed", "7"});
    auto b = invoke({"emit", "random", "--seed", "7"});
    auto c = invoke({"emit", "random", "--seed", "8"});
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, c.out);
}

TEST(Cli, UnknownCellIsUserError) {
    auto r = invoke({"emit", "nand9"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("unknown cell"), std::string::npos);
}

TEST(Cli, MissingFileIsReported) {
    auto r = invoke({"check", "missing.sp"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("file not found"), std::string::npos);
    EXPECT_NE(r.err.find("missing.sp"), std::string::npos);
}

TEST(Cli, BadFlagsAreUserErrors) {
    EXPECT_EQ(invoke({}).code, 1);
    EXPECT_EQ(invoke({"check", "proposed-gdi", "--bogus"}).code, 1);
    EXPECT_EQ(invoke({"check", "proposed-gdi", "--vdd", "-1"}).code, 1);
    EXPECT_EQ(invoke({"bench", "--format", "xml"}).code, 1);
}

TEST(Cli, Version) {
    auto r = invoke({"--version"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("cellforge "), std::string::npos);
}

TEST(Cli, CheckMarkdownAndJson) {
    auto md = invoke({"check", "proposed-gdi", "--vdd", "1.8"});
    ASSERT_EQ(md.code, 0) << md.err;
    EXPECT_NE(md.out.find("operable"), std::string::npos);
    auto js = invoke({"check", "proposed-gdi", "--vdd", "0.8", "--format", "json"});
    ASSERT_EQ(js.code, 0) << js.err;
    auto j = nlohmann::json::parse(js.out);
    EXPECT_FALSE(j.at("operable").get<bool>());
}

TEST(Cli, CheckReadsNetlistFiles) {
    TempDir d;
    spit(d / "cell.sp", invoke({"emit", "ptl-xor2"}).out);
    auto r = invoke({"check", (d / "cell.sp").string()});
    EXPECT_EQ(r.code, 0) << r.err;
    spit(d / "bad.sp", "M1 a b\n");
    auto bad = invoke({"check", (d / "bad.sp").string()});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("line 1"), std::string::npos);
}

TEST(Cli, TruthTableBothWays) {
    auto sw = invoke({"truthtable", "proposed-ptl-gdi"});
    auto tr = invoke({"truthtable", "proposed-ptl-gdi", "--transient"});
    ASSERT_EQ(sw.code, 0) << sw.err;
    ASSERT_EQ(tr.code, 0) << tr.err;
    EXPECT_NE(tr.out.find("sum"), std::string::npos);
}

TEST(Cli, SimWritesCsvAndVcd) {
    TempDir d;
    auto r = invoke({"sim", "ptl-xor2", "--nets", "a,b,h", "-o", (d / "w.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream csv(slurp(d / "w.csv"));
    auto w = read_csv(csv);
    EXPECT_GT(w.size(), 100u);
    EXPECT_EQ(w.node_volts.size(), 3u);
    auto v = invoke({"sim", "ptl-xor2", "-o", (d / "w.vcd").string()});
    ASSERT_EQ(v.code, 0) << v.err;
    EXPECT_NE(slurp(d / "w.vcd").find("$enddefinitions"), std::string::npos);
}

TEST(Cli, FailedSimLeavesNoFile) {
    TempDir d;
    Circuit c;
    c.add(IndependentSource{"V1", "n", "0", DcWave{1.0}});
    c.add(IndependentSource{"V2", "n", "0", DcWave{2.0}});
    spit(d / "short.sp", serialize(c, "conflicting sources"));
    auto r = invoke({"sim", (d / "short.sp").string(), "--tstop", "1n", "-o", (d / "w.csv").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_FALSE(fs::exists(d / "w.csv"));
    EXPECT_NE(r.err.find("singular"), std::string::npos);
}

TEST(Cli, BenchCsvFromConfig) {
    TempDir d;
    spit(d / "suite.toml", "cells = [ptl-xor2]\nvdds = [1.8]\n");
    auto r = invoke({"bench", "--config", (d / "suite.toml").string(), "--format", "csv", "-o",
                  (d / "out.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string text = slurp(d / "out.csv");
    EXPECT_EQ(text.rfind("cell,vdd,", 0), 0u);
    EXPECT_NE(text.find("\nptl-xor2,1.8,"), std::string::npos);
}

TEST(Cli, StrictBenchFailsOnBrokenTrend) {
    TempDir d;
    // Ten-transistor adder with long channels: slower than the 28T reference.
    std::string slow = invoke({"emit", "proposed-gdi"}).out;
    for (auto at = slow.find("L=180n"); at != std::string::npos; at = slow.find("L=180n", at))
        slow.replace(at, 6, "L=2u");
    spit(d / "slow.sp", slow);
    spit(d / "suite.toml", "cells = [\"slow.sp\", cmos28]\nvdds = [3.0, 1.8]\n");
    auto relaxed = invoke({"bench", "--config", (d / "suite.toml").string()});
    EXPECT_EQ(relaxed.code, 0) << relaxed.err;
    EXPECT_NE(relaxed.err.find("trend check failed"), std::string::npos);
    auto strict = invoke({"bench", "--config", (d / "suite.toml").string(), "--strict"});
    EXPECT_EQ(strict.code, 1);
    EXPECT_NE(strict.out.find("[FAIL]"), std::string::npos);
}

TEST(Cli, BenchMissingConfig) {
    auto r = invoke({"bench", "--config", "nowhere.toml"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("file not found"), std::string::npos);
}

TEST(Cli, SizeWritesNetlistAndHistory) {
    TempDir d;
    auto r = invoke({"size", "proposed-gdi", "--budget", "3", "-o", (d / "sized.sp").string(), "--history",
                  (d / "h.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(count_transistors(parse_netlist(slurp(d / "sized.sp"))).total, 10);
    std::istringstream h(slurp(d / "h.csv"));
    std::string line;
    int lines = 0;
    while (std::getline(h, line)) ++lines;
    EXPECT_EQ(lines, 4);  // header and three evaluations
}

TEST(Cli, SizeInfeasibleIsEngineError) {
    auto r = invoke({"size", "proposed-gdi", "--vdd", "0.8", "--budget", "2"});
    EXPECT_EQ(r.code, 2);
}

TEST(Cli, SizeRejectsUnknownDevice) {
    auto r = invoke({"size", "proposed-gdi", "--tunable", "MX9"});
    EXPECT_EQ(r.code, 1);
}
