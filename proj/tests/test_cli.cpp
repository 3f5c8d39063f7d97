#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string(GRWSIM_BIN) + " " + args + " 2>/dev/null";
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, got);
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir() {
    const fs::path d = fs::temp_directory_path() / "grwsim_cli_tests";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("every subcommand runs clean") {
    CHECK(run_cli("equilibrium").exit_code == 0);
    CHECK(run_cli("trajectory --duration 1e-6").exit_code == 0);
    CHECK(run_cli("anomaly-sweep --n-list 1,10,100").exit_code == 0);
    CHECK(run_cli("accessibility --n 5").exit_code == 0);
    CHECK(run_cli("chain --trials 500").exit_code == 0);
    // Scientific-notation counts are accepted.
    CHECK(run_cli("chain --trials 1e3").exit_code == 0);
}

TEST_CASE("reports are byte-identical across re-runs") {
    const std::string cmds[] = {
        "trajectory --seed 7 --duration 1e-6 --format json",
        "trajectory --seed 7 --duration 1e-6 --format csv",
        "equilibrium --format csv",
        "anomaly-sweep --alpha-sq 0.999 --p 0.4 --n-list 915,916 --format json",
        "anomaly-sweep --n-min 1 --n-max 1e9 --n-points 10 --format csv",
        "accessibility --n 42 --format csv",
        "chain --seed 9 --trials 2000 --format json",
        "chain --seed 9 --trials 2000 --threads 4 --format json",
    };
    for (const auto& cmd : cmds) {
        const auto a = run_cli(cmd);
        const auto b = run_cli(cmd);
        CHECK(a.exit_code == 0);
        CHECK(a.out == b.out);
        CHECK(!a.out.empty());
    }
}

TEST_CASE("chain output does not depend on the thread count") {
    const auto one = run_cli("chain --seed 5 --trials 4000 --threads 1");
    const auto four = run_cli("chain --seed 5 --trials 4000 --threads 4");
    CHECK(one.out == four.out);
}

TEST_CASE("flag overrides file overrides default") {
    const fs::path cfg = temp_dir() / "precedence.cfg";
    {
        std::ofstream out(cfg);
        out << "# chain run\n";
        out << "alpha_sq = 0.8\n";
        out << "trials = 100\n";
    }
    const auto file_only = run_cli("chain --config " + cfg.string());
    REQUIRE(file_only.exit_code == 0);
    auto doc = nlohmann::json::parse(file_only.out);
    CHECK(doc["config"]["alpha_sq"] == "0.8");
    CHECK(doc["config"]["trials"] == "100");
    CHECK(doc["config"]["gamma_sq"] == "0.99");  // untouched default

    const auto overridden =
        run_cli("chain --config " + cfg.string() + " --alpha-sq 0.7");
    auto doc2 = nlohmann::json::parse(overridden.out);
    CHECK(doc2["config"]["alpha_sq"] == "0.7");
}

TEST_CASE("emitted reports re-run from their embedded config") {
    const fs::path report = temp_dir() / "chain_report.json";
    const auto first =
        run_cli("chain --seed 123 --alpha-sq 0.85 --trials 3000 --out " + report.string());
    REQUIRE(first.exit_code == 0);
    const std::string original = slurp(report);

    const fs::path report2 = temp_dir() / "chain_report2.json";
    const auto second =
        run_cli("chain --config " + report.string() + " --out " + report2.string());
    REQUIRE(second.exit_code == 0);
    CHECK(slurp(report2) == original);
}

TEST_CASE("config errors exit with code 2") {
    const fs::path bad = temp_dir() / "bad.cfg";
    {
        std::ofstream out(bad);
        out << "no_such_key = 1\n";
    }
    CHECK(run_cli("chain --config " + bad.string()).exit_code == 2);
    CHECK(run_cli("chain --gamma-sq 0.3").exit_code == 2);       // invariant violation
    CHECK(run_cli("chain --trials nope").exit_code == 2);        // parse failure
    CHECK(run_cli("trajectory --mode sideways").exit_code == 2); // enum failure
    CHECK(run_cli("--no-such-flag chain").exit_code == 2);       // CLI parse error

    const fs::path dup = temp_dir() / "dup.cfg";
    {
        std::ofstream out(dup);
        out << "trials = 10\ntrials = 20\n";
    }
    CHECK(run_cli("chain --config " + dup.string()).exit_code == 2);
}

TEST_CASE("zero hit rate gives a flat variance series") {
    const auto res = run_cli("trajectory --lambda-micro 0 --duration 1 --format csv");
    REQUIRE(res.exit_code == 0);
    std::istringstream lines(res.out);
    std::string line;
    std::getline(lines, line);  // header
    int rows = 0;
    std::string first_variance;
    while (std::getline(lines, line)) {
        const std::string variance = line.substr(line.rfind(',') + 1);
        if (rows == 0) first_variance = variance;
        CHECK(variance == first_variance);
        ++rows;
    }
    CHECK(rows >= 2);
}

TEST_CASE("deterministic marble never flips any verdict") {
    const auto res = run_cli("anomaly-sweep --alpha-sq 1 --n-list 1,1000,1000000");
    REQUIRE(res.exit_code == 0);
    auto doc = nlohmann::json::parse(res.out);
    CHECK(doc["anomaly_threshold"].is_null());
    for (const auto& row : doc["rows"]) {
        CHECK(row["all_in_holds"] == true);
        CHECK(row["all_in_refuted"] == false);
        CHECK(row["anomaly_exhibited"] == false);
    }
}

TEST_CASE("trajectory analytics carry the physical orders of magnitude") {
    const auto res = run_cli("trajectory --duration 1e-6");
    REQUIRE(res.exit_code == 0);
    auto doc = nlohmann::json::parse(res.out);
    const double t_reg = doc["analytics"]["regime_time_s"].get<double>();
    const double width = doc["analytics"]["equilibrium_width_cm"].get<double>();
    CHECK(std::abs(t_reg - 3.8847777917856327e4) / 3.88e4 < 1e-10);
    CHECK(std::abs(width - 1.6044157211387927e-11) / 1.6e-11 < 1e-10);
}

TEST_CASE("equilibrium reports the displacement bound") {
    const auto res = run_cli("equilibrium");
    REQUIRE(res.exit_code == 0);
    auto doc = nlohmann::json::parse(res.out);
    REQUIRE(doc.contains("displacement_log10_bound"));
    const double log10_bound = doc["displacement_log10_bound"]["log10_mag"].get<double>();
    CHECK(log10_bound < -1e34);  // "much smaller than e^{-1e34}": bound only
}

TEST_CASE("trajectory csv schema") {
    const auto res = run_cli("trajectory --seed 3 --duration 1e-6 --format csv");
    REQUIRE(res.exit_code == 0);
    CHECK(res.out.rfind("t_s,hits,mean_cm,variance_cm2\n", 0) == 0);
    // One header plus at least two samples (t=0 and t=duration).
    int lines = 0;
    for (char ch : res.out) {
        if (ch == '\n') ++lines;
    }
    CHECK(lines >= 3);
}

TEST_CASE("analytics echo accompanies file output") {
    const fs::path out_file = temp_dir() / "traj.csv";
    const auto res = run_cli("trajectory --duration 1e-6 --format csv --out " +
                             out_file.string());
    REQUIRE(res.exit_code == 0);
    CHECK(res.out.find("regime_time_s") != std::string::npos);
    CHECK(res.out.find("equilibrium_width_cm") != std::string::npos);
    CHECK(slurp(out_file).rfind("t_s,hits", 0) == 0);
}

TEST_CASE("json reports embed the fully-resolved config") {
    const auto res = run_cli("accessibility --n 7");
    REQUIRE(res.exit_code == 0);
    auto doc = nlohmann::json::parse(res.out);
    CHECK(doc["command"] == "accessibility");
    for (const char* key : {"n", "p", "epsilon", "seed", "format", "beta_epsilon"}) {
        CHECK(doc["config"].contains(key));
    }
    // Pinned report fields.
    for (const char* key : {"per_marble", "all_in_fuzzy", "anomaly_threshold",
                            "scalar_product_log", "accessibility_in",
                            "accessibility_out", "anomaly_exhibited"}) {
        CHECK(doc.contains(key));
    }
    CHECK(doc["accessibility_in"]["mean_mass"].contains("sign"));
    CHECK(doc["accessibility_in"]["mean_mass"].contains("log10_mag"));
}
