#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "chdisc/cli_core.hpp"

using namespace chdisc;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return CliResult{code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

bool has_line_starting(const std::string& text, const std::string& prefix) {
    for (const auto& l : lines_of(text))
        if (l.rfind(prefix, 0) == 0) return true;
    return false;
}

// value printed after "name = ", or NaN when the line is absent
double report_value(const std::string& text, const std::string& name) {
    const std::string prefix = name + " = ";
    for (const auto& l : lines_of(text))
        if (l.rfind(prefix, 0) == 0) return std::stod(l.substr(prefix.size()));
    return std::numeric_limits<double>::quiet_NaN();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    f << text;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// three equally spaced clock phases: orthogonal to the identity
const char* kClockArg = "udiag:0,2.0943951023931953,4.1887902047863905";

} // namespace

TEST_CASE("mei-check exit code reflects the verdict") {
    CliResult hold = run({"mei-check", kClockArg, "identity:3"});
    CHECK(hold.code == 0);
    CHECK(has_line_starting(hold.out, "mei = 1"));
    CHECK(has_line_starting(hold.out, "p_mei = 1"));
    CHECK(has_line_starting(hold.out, "deviation = "));
    CHECK(has_line_starting(hold.out, "epsilon = "));
    CHECK_FALSE(has_line_starting(hold.out, "p_opt"));

    CliResult violated = run({"mei-check", "ad:0.5", "identity:2"});
    CHECK(violated.code == 1);
    CHECK(has_line_starting(violated.out, "mei = 0"));

    CliResult garbage = run({"mei-check", "bogus", "identity:2"});
    CHECK(garbage.code == 2);
    CHECK(garbage.err.find("error:") != std::string::npos);
}

TEST_CASE("solve flag adds the exact value") {
    CliResult r = run({"mei-check", "ad:0.5", "identity:2", "--solve"});
    CHECK(r.code == 1);
    CHECK(report_value(r.out, "p_opt") == doctest::Approx(0.75).epsilon(1e-6));
}

TEST_CASE("bounds writes a csv row when asked") {
    const std::string path = "cli_bounds_row.csv";
    CliResult r = run({"bounds", "ad:0.3", "identity:2", "--lambda", "0.4", "--solve", "--out", path});
    CHECK(r.code == 0);
    std::vector<std::string> rows = lines_of(read_file(path));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] == "param,p_mei,p_opt,upper_bound,mei,eps");
    CHECK(rows[1].rfind("0.4,", 0) == 0);
    // all six cells present
    int commas = 0;
    for (char ch : rows[1])
        if (ch == ',') ++commas;
    CHECK(commas == 5);
    std::remove(path.c_str());
}

TEST_CASE("sweep emits one csv row per grid point") {
    CliResult r = run({"sweep", "ad:?", "identity:2", "--grid", "0:1:3"});
    CHECK(r.code == 0);
    std::vector<std::string> rows = lines_of(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "param,p_mei,p_opt,upper_bound,mei,eps");
    CHECK(rows[1].rfind("0,", 0) == 0);
    CHECK(rows[2].rfind("0.5,", 0) == 0);
    CHECK(rows[3].rfind("1,", 0) == 0);
    // p_opt cell is empty without --solve
    CHECK(rows[1].find(",,") != std::string::npos);
    // the zero-distance endpoint keeps the entangled input optimal
    CHECK(rows[1].find(",1,") != std::string::npos);

    CliResult solved = run({"sweep", "ad:?", "identity:2", "--grid", "0:1:3", "--solve"});
    CHECK(solved.code == 0);
    CHECK(lines_of(solved.out)[1].find(",,") == std::string::npos);
}

TEST_CASE("sweep runs are reproducible in process") {
    std::vector<std::string> args{"sweep", "ad:?", "identity:2", "--grid", "0:1:5", "--solve"};
    CliResult a = run(args);
    CliResult b = run(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("sweep placeholder count is enforced") {
    CliResult none = run({"sweep", "ad:0.3", "identity:2", "--grid", "0:1:3"});
    CHECK(none.code == 2);
    CHECK(none.err.find("exactly one '?'") != std::string::npos);

    CliResult two = run({"sweep", "ad:?", "depol:2:?", "--grid", "0:1:3"});
    CHECK(two.code == 2);

    CliResult bad_grid = run({"sweep", "ad:?", "identity:2", "--grid", "0:1:1"});
    CHECK(bad_grid.code == 2);
}

TEST_CASE("sweep reports the failing grid point") {
    // damping parameter leaves [0, 1] at the top of the grid
    CliResult r = run({"sweep", "ad:?", "identity:2", "--grid", "0:2:3"});
    CHECK(r.code == 2);
    CHECK(r.err.find("at param 2") != std::string::npos);
}

TEST_CASE("channel spec grammar covers files and inline kinds") {
    write_file("cli_chan.json",
               R"({"kind":"kraus","dim_in":2,"dim_out":2,"operators":[[[[1,0],[0,0]],[[0,0],[1,0]]]]})");
    CliResult file = run({"mei-check", "@cli_chan.json", "identity:2"});
    CHECK(file.code == 0);  // identity versus identity
    std::remove("cli_chan.json");

    write_file("cli_u.json", R"([[[0,0],[1,0]],[[1,0],[0,0]]])");
    CliResult uf = run({"mei-check", "unitary:@cli_u.json", "identity:2"});
    CHECK(uf.code == 0);  // pauli flip against identity: traceless relative unitary
    std::remove("cli_u.json");

    CHECK(run({"mei-check", "depol:2:0.3", "depol:2:0.8"}).code == 0);
    CHECK(run({"mei-check", "wh:3", "identity:3"}).code == 0);
    CHECK(run({"mei-check", "depol:2", "identity:2"}).code == 2);
    CHECK(run({"mei-check", "udiag:0,notanumber", "identity:2"}).code == 2);
    CHECK(run({"mei-check", "@missing_file.json", "identity:2"}).code == 2);
    CHECK(run({"mei-check", "identity:2"}).code == 2);
}

TEST_CASE("ensembles beyond two channels need explicit weights") {
    CliResult missing = run({"mei-check", "identity:2", "identity:2", "identity:2"});
    CHECK(missing.code == 2);
    CliResult ok = run({"mei-check", "identity:2", "identity:2", "identity:2", "--weights",
                        "0.2,0.3,0.5"});
    CHECK(ok.code == 0);
    CliResult mismatch = run({"mei-check", "identity:2", "identity:2", "--weights", "0.2,0.3,0.5"});
    CHECK(mismatch.code == 2);
}

TEST_CASE("certify reads a scheme file and returns the verdict") {
    write_file("cli_scheme_me.json", R"({"input":"max_entangled","povm":"helstrom"})");

    CliResult good = run({"certify", kClockArg, "identity:3", "--scheme", "cli_scheme_me.json"});
    CHECK(good.code == 0);
    CHECK(has_line_starting(good.out, "verdict = 1"));
    CHECK(has_line_starting(good.out, "necessary_only = 0"));
    CHECK(has_line_starting(good.out, "success_probability = 1"));
    CHECK(has_line_starting(good.out, "lambda0 = 1"));
    CHECK(has_line_starting(good.out, "phi0 = reconstructed"));
    CHECK_FALSE(has_line_starting(good.out, "p_opt_reference"));

    CliResult solved = run({"certify", kClockArg, "identity:3", "--scheme", "cli_scheme_me.json",
                            "--solve"});
    CHECK(solved.code == 0);
    CHECK(has_line_starting(solved.out, "p_opt_reference = "));

    CliResult bad = run({"certify", "ad:0.5", "identity:2", "--scheme", "cli_scheme_me.json"});
    CHECK(bad.code == 1);
    CHECK(has_line_starting(bad.out, "verdict = 0"));
    std::remove("cli_scheme_me.json");
}

TEST_CASE("certify accepts explicit inputs and effect lists") {
    // product input |1> with a computational measurement separates total
    // damping from the identity
    write_file("cli_scheme_prod.json",
               R"({"input":[[0,0],[1,0]],"dim_anc":1,"povm":[[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]]})");
    CliResult r = run({"certify", "ad:1.0", "identity:2", "--scheme", "cli_scheme_prod.json"});
    CHECK(r.code == 0);
    CHECK(has_line_starting(r.out, "verdict = 1"));
    CHECK(has_line_starting(r.out, "necessary_only = 1"));
    CHECK(has_line_starting(r.out, "success_probability = 1"));
    CHECK(has_line_starting(r.out, "phi0 = unavailable"));
    std::remove("cli_scheme_prod.json");

    write_file("cli_scheme_bad.json", R"({"input":"max_entangled"})");
    CHECK(run({"certify", "ad:0.5", "identity:2", "--scheme", "cli_scheme_bad.json"}).code == 2);
    std::remove("cli_scheme_bad.json");

    write_file("cli_scheme_anc.json", R"({"input":"max_entangled","dim_anc":3,"povm":"helstrom"})");
    CHECK(run({"certify", "ad:0.5", "identity:2", "--scheme", "cli_scheme_anc.json"}).code == 2);
    std::remove("cli_scheme_anc.json");

    CHECK(run({"certify", "ad:0.5", "identity:2", "--scheme", "cli_missing.json"}).code == 2);
}

TEST_CASE("help requests succeed") {
    CliResult top = run({"--help"});
    CHECK(top.code == 0);
    CHECK(top.out.find("mei-check") != std::string::npos);
    CliResult sub = run({"sweep", "--help"});
    CHECK(sub.code == 0);
    CHECK(sub.out.find("--grid") != std::string::npos);
    CHECK(run({}).code == 2);
    CHECK(run({"no-such-command"}).code == 2);
}

TEST_CASE("sweep output is byte-identical across thread budgets") {
    // needs the installed binary; wired through the test environment
    const char* bin = std::getenv("CHDISC_BIN");
    if (bin == nullptr) {
        MESSAGE("CHDISC_BIN not set; skipping the cross-process determinism check");
        return;
    }
    const std::string base = std::string("\"") + bin +
                             "\" sweep ad:? identity:2 --grid 0:1:7 --solve --out ";
    const int rc1 = std::system(("CHDISC_THREADS=1 " + base + "cli_sweep_t1.csv 2>/dev/null").c_str());
    const int rc4 = std::system(("CHDISC_THREADS=4 " + base + "cli_sweep_t4.csv 2>/dev/null").c_str());
    REQUIRE(rc1 == 0);
    REQUIRE(rc4 == 0);
    const std::string a = read_file("cli_sweep_t1.csv");
    const std::string b = read_file("cli_sweep_t4.csv");
    CHECK(!a.empty());
    CHECK(a == b);
    std::remove("cli_sweep_t1.csv");
    std::remove("cli_sweep_t4.csv");
}
