#pragma once

// Standard includes
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "prmbound/certificates.hpp"
#include "prmbound/moment.hpp"
#include "prmbound/scenarios.hpp"
#include "prmbound/sdpa.hpp"

#ifndef PRMBOUND_VERSION
#define PRMBOUND_VERSION "0.0.0"
#endif

namespace prmbound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitSolver = 2;
inline constexpr int kExitCheck = 3;

inline constexpr const char* kScanHeader = "x,alpha,gamma,bound,classical,quantum,nosignalling,delta";

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

inline std::string utc_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    std::ostringstream os;
    os << std::put_time(&tm, "%Y%m%dT%H%M%S") << std::setw(3) << std::setfill('0') << ms << "Z";
    return os.str();
}

inline std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto dash = item.find('-', 1);
        try {
            if (dash != std::string::npos) {
                int lo = std::stoi(item.substr(0, dash)), hi = std::stoi(item.substr(dash + 1));
                if (hi < lo) throw std::invalid_argument("empty range");
                for (int v = lo; v <= hi; ++v) out.push_back(v);
            } else {
                std::size_t used = 0;
                out.push_back(std::stoi(item, &used));
                if (used != item.size()) throw std::invalid_argument("trailing text");
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("bad integer list '" + text + "'");
        }
    }
    return out;
}

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

// Plain-text key=value; '#' starts a comment.
inline std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    int lineNo = 0;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineNo;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument(path + ":" + std::to_string(lineNo) + ": expected key=value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

struct ScenarioFlags {
    std::string ineq = "chsh";
    std::string alpha = "1";
    std::string gamma = "0";
    int n = 2;
    std::string iota = "0,1";
    std::string level = "1abstar";
    std::string restriction = "none";
    double gapTol = 1e-8;
    int maxIter = 200;
    std::string out = ".";
    std::string format = "json";
    bool verbose = false;
};

struct Scenario {
    int n = 2;
    std::vector<int> iota;
    BellFunctional functional;
    PrmRestriction restriction;
    Level level = Level::L1ABstar;
};

inline BellFunctional make_functional(const std::string& ineq, const std::string& alpha, const std::string& gamma) {
    if (ineq == "chsh") return chsh();
    if (ineq == "aq") return aq();
    if (ineq == "amp") return amp(parse_rational(alpha), parse_rational(gamma));
    throw std::invalid_argument("unknown inequality '" + ineq + "'");
}

inline Scenario resolve(const ScenarioFlags& f) {
    Scenario s;
    if (f.n != 2 && f.n != 3) throw std::invalid_argument("--n must be 2 or 3");
    s.n = f.n;
    s.iota = parse_int_list(f.iota);
    s.functional = make_functional(f.ineq, f.alpha, f.gamma);
    s.restriction = parse_restriction(f.restriction);
    s.level = parse_level(f.level);
    if (f.gapTol <= 0) throw std::invalid_argument("--gap-tol must be positive");
    if (f.maxIter <= 0) throw std::invalid_argument("--max-iter must be positive");
    return s;
}

inline nlohmann::json scenario_json(const Scenario& s) {
    nlohmann::json j = {{"n", s.n},
                        {"iota", s.iota},
                        {"inequality", s.functional.name},
                        {"restriction", s.restriction.str()},
                        {"level", level_name(s.level)}};
    if (s.functional.alpha) j["alpha"] = to_string(*s.functional.alpha);
    if (s.functional.gamma) j["gamma"] = to_string(*s.functional.gamma);
    return j;
}

inline nlohmann::json bounds_json(const BellBounds& b) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"classical", opt(b.classical)},
            {"quantum", opt(b.quantum)},
            {"quantumStrictlyBelow", opt(b.quantumStrictlyBelow)},
            {"noSignalling", b.noSignalling}};
}

// Persists under <out>/runs/<timestamp>-<hash>.json; never overwrites.
inline std::string persist_record(const nlohmann::json& record, const std::string& outDir) {
    namespace fs = std::filesystem;
    fs::path dir = fs::path(outDir) / "runs";
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
    std::string stem = record.at("timestamp").get<std::string>() + "-" + record.at("inputHash").get<std::string>().substr(0, 12);
    fs::path p = dir / (stem + ".json");
    for (int k = 1; fs::exists(p); ++k) p = dir / (stem + "-" + std::to_string(k) + ".json");
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write '" + p.string() + "'");
    os << record.dump(2) << "\n";
    return p.string();
}

struct BoundRun {
    nlohmann::json record;
    BoundResult result;
    bool ok = false;
};

inline BoundRun run_bound(const std::string& command, const Scenario& sc, const ScenarioFlags& f, std::ostream* log) {
    SolverOptions opts;
    opts.gapTol = f.gapTol;
    opts.maxIter = f.maxIter;
    if (log) opts.log = [log](const std::string& line) { *log << line << "\n"; };
    auto t0 = std::chrono::steady_clock::now();
    auto system = assemble(sc.n, sc.iota, sc.functional, sc.restriction);
    BoundRun run;
    run.result = solve_relaxation(system, sc.level, opts);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    run.ok = run.result.status == SdpStatus::Optimal;

    nlohmann::json options = {{"gapTol", f.gapTol}, {"maxIter", f.maxIter}};
    nlohmann::json scenario = scenario_json(sc);
    nlohmann::json hashInput = {{"command", command}, {"options", options}, {"scenario", scenario}};
    const auto& r = run.result;
    run.record = {{"command", command},
                  {"options", options},
                  {"scenario", scenario},
                  {"status", to_string(r.status)},
                  {"bound", r.bound},
                  {"dualBound", r.dualBound},
                  {"reference", bounds_json(sc.functional.bounds)},
                  {"solver",
                   {{"gap", r.gap},
                    {"primalInfeasibility", r.primalInfeasibility},
                    {"dualInfeasibility", r.dualInfeasibility},
                    {"iterations", r.iterations},
                    {"labels", r.labels},
                    {"moments", r.moments},
                    {"blocks", r.blocks},
                    {"seconds", r.seconds}}},
                  {"warnings", r.warnings},
                  {"wallSeconds", wall},
                  {"toolVersion", PRMBOUND_VERSION},
                  {"inputHash", sha256_hex(hashInput.dump())},
                  {"timestamp", utc_timestamp()}};
    return run;
}

inline void add_scenario_flags(CLI::App* sub, ScenarioFlags& f) {
    sub->add_option("--ineq", f.ineq, "inequality: chsh, amp or aq")->check(CLI::IsMember({"chsh", "amp", "aq"}));
    sub->add_option("--alpha", f.alpha, "AMP alpha (decimal or p/q)");
    sub->add_option("--gamma", f.gamma, "AMP gamma (decimal or p/q)");
    sub->add_option("--n", f.n, "affine dimension: 2 or 3");
    sub->add_option("--iota", f.iota, "parity-read settings, comma separated");
    sub->add_option("--level", f.level, "relaxation level: 1, 1abstar, 1ab or 2");
    sub->add_option("--restriction", f.restriction, "none, span or signature:<name>");
}

inline void add_solver_flags(CLI::App* sub, ScenarioFlags& f) {
    sub->add_option("--gap-tol", f.gapTol, "relative duality gap tolerance");
    sub->add_option("--max-iter", f.maxIter, "interior-point iteration limit");
    sub->add_flag("--verbose", f.verbose, "print solver iterations to stderr");
}

// Fills options the command line left unset from a key=value file.
inline void apply_config(CLI::App* sub, const std::map<std::string, std::string>& cfg) {
    for (auto& [key, value] : cfg) {
        CLI::Option* opt = nullptr;
        try {
            opt = sub->get_option("--" + key);
        } catch (const CLI::OptionNotFound&) {
            throw std::invalid_argument("unknown config key '" + key + "' for '" + sub->get_name() + "'");
        }
        if (opt->count() > 0) continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bell-violation bounds under parity reading measurements"};
    app.require_subcommand(1);
    app.set_version_flag("--version", PRMBOUND_VERSION);
    std::string configPath;
    app.add_option("--config", configPath, "key=value file with defaults for the subcommand's flags");

    ScenarioFlags bf;
    auto* bound = app.add_subcommand("bound", "relax, solve and print an upper bound");
    add_scenario_flags(bound, bf);
    add_solver_flags(bound, bf);
    bound->add_option("--out", bf.out, "directory for runs/");
    bound->add_option("--format", bf.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    std::string verifyKind;
    int witnessN = 2;
    auto* verify = app.add_subcommand("verify", "exact verifications");
    verify->add_option("kind", verifyKind, "warmup, nonlt or quantum-witness")
        ->required()
        ->check(CLI::IsMember({"warmup", "nonlt", "quantum-witness"}));
    verify->add_option("--n", witnessN, "dimension for quantum-witness: 2 or 3")->check(CLI::IsMember({2, 3}));

    ScenarioFlags sf;
    sf.ineq = "amp";
    sf.format = "csv";
    std::string indices = "0-35";
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    auto* scan = app.add_subcommand("scan-amp", "bound AMP table rows");
    scan->add_option("--indices", indices, "row indices 0..35, comma list or ranges (a-b)");
    scan->add_option("--level", sf.level, "relaxation level");
    scan->add_option("--n", sf.n, "affine dimension: 2 or 3");
    scan->add_option("--iota", sf.iota, "parity-read settings");
    scan->add_option("--restriction", sf.restriction, "none, span or signature:<name>");
    add_solver_flags(scan, sf);
    scan->add_option("--out", sf.out, "directory for runs/ and amp-scan.csv");
    scan->add_option("--format", sf.format, "csv or json")->check(CLI::IsMember({"json", "csv"}));
    scan->add_option("--jobs", jobs, "concurrent rows")->check(CLI::PositiveNumber);

    ScenarioFlags ef;
    std::string exportPath;
    auto* exp = app.add_subcommand("export", "write the relaxation as an SDPA .dat-s file");
    add_scenario_flags(exp, ef);
    exp->add_option("--file", exportPath, "output path")->required();

    try {
        app.parse(argc, argv);
        if (!configPath.empty()) {
            auto cfg = read_config(configPath);
            for (auto* sub : app.get_subcommands()) apply_config(sub, cfg);
        }
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << PRMBOUND_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    if (*bound) {
        Scenario sc;
        try {
            sc = resolve(bf);
            assemble(sc.n, sc.iota, sc.functional, sc.restriction);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        }
        auto run = run_bound("bound", sc, bf, bf.verbose ? &err : nullptr);
        std::string path;
        try {
            path = persist_record(run.record, bf.out);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        }
        if (bf.format == "csv") {
            out << "level,status,bound,dualBound,gap,iterations,seconds\n";
            out << level_name(sc.level) << "," << to_string(run.result.status) << "," << format_double(run.result.bound) << ","
                << format_double(run.result.dualBound) << "," << format_double(run.result.gap) << "," << run.result.iterations << ","
                << format_double(run.result.seconds) << "\n";
        } else {
            out << run.record.dump(2) << "\n";
        }
        err << "bound " << format_double(run.result.bound) << " (" << to_string(run.result.status) << "), record " << path << "\n";
        return run.ok ? kExitOk : kExitSolver;
    }

    if (*verify) {
        auto t0 = std::chrono::steady_clock::now();
        auto seconds = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
        if (verifyKind == "warmup") {
            auto cert = warmup_pr_exclusion();
            nlohmann::json j = certificate_to_json(cert);
            j["seconds"] = seconds();
            out << j.dump(2) << "\n";
            out << (cert.check() ? "infeasible: certified" : "infeasible: NOT certified") << "\n";
            return cert.check() ? kExitOk : kExitCheck;
        }
        if (verifyKind == "nonlt") {
            auto rep = verify_nonlt_construction();
            nlohmann::json j = {{"checks", rep.to_json()}, {"details", rep.extra}, {"passed", rep.passed()},
                                {"failures", rep.failures()}, {"seconds", seconds()}};
            out << j.dump(2) << "\n";
            out << "chsh value " << rep.extra.value("chsh", "?") << "; " << (rep.checks.size() - rep.failures().size()) << "/"
                << rep.checks.size() << " checks pass\n";
            return rep.passed() ? kExitOk : kExitCheck;
        }
        auto fp = quantum_chsh_witness(witnessN);
        nlohmann::json j = fp.to_json();
        j["closedForm"] = tsirelson_point_n2().to_json();
        j["seconds"] = seconds();
        out << j.dump(2) << "\n";
        out << "value " << std::setprecision(10) << fp.objectiveValue << ", min slack " << fp.minSlack << " ("
            << fp.worstConstraint << "), " << (fp.feasible() ? "feasible" : "infeasible") << "\n";
        return fp.feasible() ? kExitOk : kExitCheck;
    }

    if (*scan) {
        std::vector<int> idx;
        try {
            idx = parse_int_list(indices);
            std::sort(idx.begin(), idx.end());
            idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
            for (int i : idx)
                if (i < 0 || i > 35) throw std::invalid_argument("index " + std::to_string(i) + " outside 0..35");
            parse_level(sf.level);
            parse_restriction(sf.restriction);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        }
        auto table = amp_table();
        std::vector<std::string> rows(idx.size());
        std::vector<nlohmann::json> records(idx.size());
        std::atomic<std::size_t> next{0};
        std::mutex logMutex;
        auto worker = [&] {
            for (std::size_t k; (k = next++) < idx.size();) {
                const auto& row = table[idx[k]];
                ScenarioFlags f = sf;
                f.ineq = "amp";
                f.alpha = row.alpha;
                f.gamma = row.gamma;
                std::ostringstream line;
                line << row.index << "," << row.alpha << "," << row.gamma << ",";
                try {
                    Scenario sc = resolve(f);
                    auto run = run_bound("scan-amp", sc, f, nullptr);
                    run.record["scanIndex"] = row.index;
                    records[k] = run.record;
                    const auto& b = sc.functional.bounds;
                    double q = b.quantum.value_or(std::nan(""));
                    double bnd = run.ok ? run.result.bound : std::nan("");
                    line << format_double(bnd) << "," << format_double(b.classical.value_or(std::nan(""))) << ","
                         << format_double(q) << "," << format_double(b.noSignalling) << "," << format_double(bnd - q);
                    if (!run.ok) {
                        std::lock_guard<std::mutex> g(logMutex);
                        err << "row " << row.index << ": " << to_string(run.result.status) << " (last bound "
                            << format_double(run.result.bound) << ")\n";
                    }
                } catch (const std::exception& e) {
                    records[k] = {{"scanIndex", row.index}, {"error", e.what()}};
                    line << "nan,nan,nan,nan,nan";
                    std::lock_guard<std::mutex> g(logMutex);
                    err << "row " << row.index << ": " << e.what() << "\n";
                }
                rows[k] = line.str();
            }
        };
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < std::min<std::size_t>(jobs, std::max<std::size_t>(idx.size(), 1)); ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();

        std::ostringstream csv;
        csv << kScanHeader << "\n";
        for (auto& r : rows) csv << r << "\n";
        try {
            for (auto& rec : records)
                if (rec.contains("inputHash")) persist_record(rec, sf.out);
            std::filesystem::create_directories(sf.out);
            std::ofstream os(std::filesystem::path(sf.out) / "amp-scan.csv");
            if (!os) throw std::runtime_error("cannot write amp-scan.csv in '" + sf.out + "'");
            os << csv.str();
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        }
        if (sf.format == "json") out << nlohmann::json(records).dump(2) << "\n";
        else out << csv.str();
        return kExitOk;
    }

    if (*exp) {
        try {
            Scenario sc = resolve(ef);
            auto system = assemble(sc.n, sc.iota, sc.functional, sc.restriction);
            auto rel = relax(system, sc.level);
            std::string text = format_sdpa(rel.problem);
            std::ofstream os(exportPath);
            if (!os) throw std::runtime_error("cannot write '" + exportPath + "'");
            os << text;
            os.close();
            if (!os) throw std::runtime_error("write to '" + exportPath + "' failed");
            out << sha256_hex(text) << "  " << exportPath << "\n";
            for (auto& w : rel.warnings) err << "warning: " << w << "\n";
        } catch (const std::exception& e) {
            err << "error: " << e.what() << "\n";
            return kExitUsage;
        }
        return kExitOk;
    }
    return kExitUsage;
}

}  // namespace prmbound::cli
