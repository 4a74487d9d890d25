#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "prmbound/cli.hpp"

using namespace prmbound;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "prmbound");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("prmbound-test-" + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    std::string str(const std::string& leaf = "") const { return (leaf.empty() ? path_ : path_ / leaf).string(); }

private:
    fs::path path_;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<fs::path> records(const TempDir& d) {
    std::vector<fs::path> out;
    if (!fs::exists(d.str("runs"))) return out;
    for (auto& e : fs::directory_iterator(d.str("runs"))) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST(CliHelpers, IntegerLists) {
    EXPECT_EQ(cli::parse_int_list("0,1,2"), (std::vector<int>{0, 1, 2}));
    EXPECT_EQ(cli::parse_int_list("3-5,9"), (std::vector<int>{3, 4, 5, 9}));
    EXPECT_TRUE(cli::parse_int_list("").empty());
    EXPECT_THROW(cli::parse_int_list("a"), std::invalid_argument);
}

TEST(CliHelpers, Sha256KnownAnswer) {
    EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(CliHelpers, ConfigParsing) {
    TempDir d;
    std::ofstream(d.str("c.cfg")) << "# defaults\nlevel = 1\n\nn=2  # trailing\n";
    auto cfg = cli::read_config(d.str("c.cfg"));
    EXPECT_EQ(cfg.at("level"), "1");
    EXPECT_EQ(cfg.at("n"), "2");
    std::ofstream(d.str("bad.cfg")) << "level\n";
    EXPECT_THROW(cli::read_config(d.str("bad.cfg")), std::invalid_argument);
}

TEST(Cli, ScanHeaderGolden) { EXPECT_STREQ(cli::kScanHeader, "x,alpha,gamma,bound,classical,quantum,nosignalling,delta"); }

TEST(Cli, EmptyScanPrintsHeaderOnly) {
    TempDir d;
    auto r = run({"scan-amp", "--indices", "", "--out", d.str()});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out, std::string(cli::kScanHeader) + "\n");
    EXPECT_EQ(slurp(d.str("amp-scan.csv")), r.out);
}

TEST(Cli, ScanRejectsIndicesOutsideTable) {
    TempDir d;
    EXPECT_EQ(run({"scan-amp", "--indices", "36", "--out", d.str()}).code, 1);
}

TEST(Cli, InvalidFlagsExitOne) {
    EXPECT_EQ(run({"bound", "--ineq", "bogus"}).code, 1);
    EXPECT_EQ(run({"bound", "--n", "4"}).code, 1);
    EXPECT_EQ(run({"bound", "--level", "7"}).code, 1);
    EXPECT_EQ(run({"bound", "--gap-tol", "-1"}).code, 1);
    EXPECT_EQ(run({"bound", "--iota", "0"}).code, 1);
    EXPECT_EQ(run({"bound", "--unknown"}).code, 1);
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"verify", "other"}).code, 1);
    EXPECT_EQ(run({"export"}).code, 1);
}

TEST(Cli, VersionFlag) {
    auto r = run({"--version"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, std::string(PRMBOUND_VERSION) + "\n");
}

TEST(Cli, VerifyWarmup) {
    auto r = run({"verify", "warmup"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("infeasible: certified"), std::string::npos);
    auto json = nlohmann::json::parse(r.out.substr(0, r.out.rfind("infeasible")));
    EXPECT_EQ(json["contradiction"], "0 = 4");
}

TEST(Cli, VerifyQuantumWitnessThreeFiducials) {
    auto r = run({"verify", "quantum-witness", "--n", "3"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("value 0.2071067812"), std::string::npos);
}

TEST(Cli, ExportRoundTrip) {
    TempDir d;
    auto r = run({"export", "--ineq", "chsh", "--n", "2", "--iota", "0,1", "--level", "1", "--file", d.str("l1.dat-s")});
    ASSERT_EQ(r.code, 0) << r.err;
    std::string text = slurp(d.str("l1.dat-s"));
    EXPECT_EQ(r.out, cli::sha256_hex(text) + "  " + d.str("l1.dat-s") + "\n");
    auto parsed = parse_sdpa(text);
    auto direct = relax(assemble(2, {0, 1}, chsh()), Level::L1).problem;
    EXPECT_EQ(format_sdpa(parsed), format_sdpa(direct));
    EXPECT_EQ(parsed.blocks.front().dim, 18);
}

TEST(Cli, ExportLevelTwoHasFullMomentMatrix) {
    TempDir d;
    auto r = run({"export", "--level", "2", "--file", d.str("l2.dat-s")});
    ASSERT_EQ(r.code, 0) << r.err;
    auto p = read_sdpa(d.str("l2.dat-s"));
    EXPECT_EQ(p.blocks.front().dim, 171);
}

TEST(Cli, ExportToUnwritablePathExitsOne) {
    auto r = run({"export", "--level", "1", "--file", "/nonexistent-dir/x/out.dat-s"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("cannot write"), std::string::npos);
}

TEST(Cli, ConfigIsOverriddenByFlags) {
    TempDir d;
    std::ofstream(d.str("c.cfg")) << "level=2\nn=2\n";
    auto fromConfig = run({"--config", d.str("c.cfg"), "export", "--file", d.str("a.dat-s")});
    ASSERT_EQ(fromConfig.code, 0) << fromConfig.err;
    EXPECT_EQ(read_sdpa(d.str("a.dat-s")).blocks.front().dim, 171);
    auto overridden = run({"--config", d.str("c.cfg"), "export", "--level", "1", "--file", d.str("b.dat-s")});
    ASSERT_EQ(overridden.code, 0) << overridden.err;
    EXPECT_EQ(read_sdpa(d.str("b.dat-s")).blocks.front().dim, 18);
    std::ofstream(d.str("bad.cfg")) << "nonsense=1\n";
    EXPECT_EQ(run({"--config", d.str("bad.cfg"), "export", "--file", d.str("c.dat-s")}).code, 1);
}

TEST(Cli, BoundRecordIsPersistedAndDeterministic) {
    TempDir d;
    auto a = run({"bound", "--level", "1", "--out", d.str()});
    auto b = run({"bound", "--level", "1", "--out", d.str()});
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    auto files = records(d);
    ASSERT_EQ(files.size(), 2u);
    auto ja = nlohmann::json::parse(slurp(files[0].string())), jb = nlohmann::json::parse(slurp(files[1].string()));
    for (auto* j : {&ja, &jb}) {
        EXPECT_TRUE(j->contains("bound"));
        EXPECT_TRUE(j->contains("dualBound"));
        EXPECT_EQ((*j)["toolVersion"], PRMBOUND_VERSION);
        EXPECT_EQ((*j)["scenario"]["level"], "1");
        j->erase("wallSeconds");
        j->erase("timestamp");
        (*j)["solver"].erase("seconds");
    }
    EXPECT_EQ(ja, jb);
    EXPECT_EQ(nlohmann::json::parse(a.out)["inputHash"], ja["inputHash"]);
    EXPECT_LE(ja["bound"].get<double>(), 0.5 + 1e-6);
}

TEST(Cli, BoundCsvFormat) {
    TempDir d;
    auto r = run({"bound", "--level", "1", "--format", "csv", "--out", d.str()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "level,status,bound,dualBound,gap,iterations,seconds");
    EXPECT_NE(r.out.find("\n1,Optimal,"), std::string::npos);
}

TEST(Cli, SolverFailureExitsTwo) {
    TempDir d;
    auto r = run({"bound", "--level", "1", "--max-iter", "1", "--out", d.str()});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(records(d).size(), 1u);
}

TEST(Cli, ScanRowsAreOrderedAndFailuresRecorded) {
    TempDir d;
    auto r = run({"scan-amp", "--indices", "5,0,5", "--level", "1", "--jobs", "2", "--out", d.str()});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream lines(r.out);
    std::string header, first, second;
    std::getline(lines, header);
    std::getline(lines, second);
    std::getline(lines, first);
    EXPECT_EQ(header, cli::kScanHeader);
    EXPECT_EQ(first.substr(0, 6), "5,1,2,");
    EXPECT_EQ(first, "5,1,2,nan,nan,nan,nan,nan");
    EXPECT_NE(r.err.find("row 5"), std::string::npos);
    EXPECT_EQ(second.substr(0, 6), "0,1,0,");
    double bound = std::stod(second.substr(6, second.find(',', 6) - 6));
    EXPECT_GE(bound, 2 * std::sqrt(2.0) - 1e-6);
    EXPECT_LE(bound, 4 + 1e-6);
    EXPECT_EQ(records(d).size(), 1u);
}
