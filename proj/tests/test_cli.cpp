#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ssqg/config.hpp"
#include "ssqg/errors.hpp"

using namespace ssqg;
namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* b = std::getenv("SSQG_BIN");
    REQUIRE(b != nullptr);
    return b;
}

int run_cmd(const std::string& args) {
    const int rc = std::system((bin() + " " + args + " >/dev/null 2>/dev/null").c_str());
    return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("ssqg_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// the only run directory under root
fs::path only_subdir(const fs::path& root) {
    fs::path found;
    for (const auto& e : fs::directory_iterator(root)) {
        REQUIRE(found.empty());
        found = e.path();
    }
    REQUIRE(!found.empty());
    return found;
}

} // namespace

TEST_CASE("config parser: sections, inline tables, lists, comments") {
    const auto m = parse_config_text(
        "symbol = { kind = \"loglog-power\", beta = 0.5 }\n"
        "[certificate]\n"
        "B_list = [1, 10, 1e3] # trailing comment\n"
        "margin = 1e-3\n"
        "[monitor]\n"
        "lags = [[1, 0], [2, 2]]\n"
        "enabled = true\n");
    CHECK(m.at("symbol.kind").str == "loglog-power");
    CHECK(m.at("symbol.beta").num == 0.5);
    CHECK(m.at("certificate.B_list").list.size() == 3);
    CHECK(m.at("certificate.margin").num == 1e-3);
    CHECK(m.at("monitor.lags").nested.size() == 2);
    CHECK(m.at("monitor.enabled").b);
}

TEST_CASE("duplicate keys are rejected") {
    CHECK_THROWS_AS(parse_config_text("a = 1\na = 2\n"), UsageError);
    CHECK_THROWS_AS(parse_config_text("[s]\nk = 1\nk = 3\n"), UsageError);
}

TEST_CASE("build_run_config fills documented defaults") {
    const auto dir = fresh_dir("defaults");
    write(dir / "c.cfg", "symbol = { kind = \"constant-one\" }\n[constants]\nA = 1\n");
    auto rc = build_run_config(Command::certify, (dir / "c.cfg").string(), {});
    CHECK(rc.certificate.B_list == std::vector<double>{1.0, 10.0, 1e3, 1e6});
    CHECK(rc.kappa == doctest::Approx(1.0 / (64.0 * 3.14159265358979)).epsilon(1e-6));
    CHECK(rc.gamma == doctest::Approx(rc.kappa / 2.0).epsilon(1e-12));
    CHECK(rc.certificate.points_per_decade == 50);
    fs::remove_all(dir);
}

TEST_CASE("gamma >= kappa is rejected naming the condition") {
    const auto dir = fresh_dir("gammakappa");
    write(dir / "c.cfg", "[constants]\nkappa = 1e-3\ngamma = 2e-3\n");
    try {
        build_run_config(Command::certify, (dir / "c.cfg").string(), {});
        CHECK(false);
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("gamma < kappa") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("unknown keys are rejected, all of them listed") {
    const auto dir = fresh_dir("unknown");
    write(dir / "c.cfg", "mystery = 3\n[solver]\nbogus = true\n");
    try {
        build_run_config(Command::solve, (dir / "c.cfg").string(), {});
        CHECK(false);
    } catch (const UsageError& e) {
        const std::string what = e.what();
        CHECK(what.find("mystery") != std::string::npos);
        CHECK(what.find("solver.bogus") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("certify: pass on defaults (reduced grid), deterministic bytes, exit 0") {
    const auto dir = fresh_dir("certify_ok");
    write(dir / "c.cfg",
          "symbol = { kind = \"constant-one\" }\n"
          "[certificate]\n"
          "B_list = [1]\n"
          "xi_low = 1e-2\n"
          "xi_high = 1e2\n");
    const std::string args = "certify --config " + (dir / "c.cfg").string() + " --out " +
                             (dir / "out").string();
    CHECK(run_cmd(args) == 0);
    const auto rundir = only_subdir(dir / "out");
    const auto summary = slurp(rundir / "summary.json");
    CHECK(summary.find("\"passed\": true") != std::string::npos);
    const auto csv1 = slurp(rundir / "report.csv");
    CHECK(csv1.rfind("B,xi_over_delta", 0) == 0);

    // byte-identical re-run
    CHECK(run_cmd(args) == 0);
    CHECK(slurp(rundir / "report.csv") == csv1);
    CHECK(slurp(rundir / "summary.json") == summary);
    fs::remove_all(dir);
}

TEST_CASE("certify: kappa = 10/(pi A) exits 2") {
    const auto dir = fresh_dir("certify_fail");
    write(dir / "c.cfg",
          "[constants]\nA = 1\nkappa = 3.1830988618379067\ngamma = 1.59154943091895\n"
          "[certificate]\nB_list = [1]\nxi_low = 1e-2\nxi_high = 1e2\n");
    CHECK(run_cmd("certify --config " + (dir / "c.cfg").string() + " --out " +
                  (dir / "out").string()) == 2);
    fs::remove_all(dir);
}

TEST_CASE("certify: unachievable tolerance exits 3") {
    const auto dir = fresh_dir("certify_tol");
    write(dir / "c.cfg",
          "[certificate]\nB_list = [1]\nxi_low = 1e-1\nxi_high = 1e1\n"
          "quadrature_tol = 1e-30\n");
    CHECK(run_cmd("certify --config " + (dir / "c.cfg").string() + " --out " +
                  (dir / "out").string() + " --threads 1") == 3);
    fs::remove_all(dir);
}

TEST_CASE("solve: quick run exits 0 and writes diagnostics + snapshots") {
    const auto dir = fresh_dir("solve_ok");
    write(dir / "c.cfg", "[solver]\nN = 32\nT = 0.1\ndiagnostics_every = 2\n");
    CHECK(run_cmd("solve --config " + (dir / "c.cfg").string() + " --out " +
                  (dir / "out").string()) == 0);
    const auto rundir = only_subdir(dir / "out");
    const auto diag = slurp(rundir / "diagnostics.csv");
    CHECK(diag.rfind("t,sup_theta,sup_grad_theta,l2,moc_ratio,dt\n", 0) == 0);
    CHECK(fs::exists(rundir / "snapshots/snap-00000.ssqg"));
    fs::remove_all(dir);
}

TEST_CASE("solve: blow-up exits 4") {
    const auto dir = fresh_dir("solve_blowup");
    write(dir / "c.cfg",
          "[solver]\nN = 32\nT = 10\nfixed_dt = 0.1\namplitude = 1e6\ndiagnostics_every = 1\n");
    CHECK(run_cmd("solve --config " + (dir / "c.cfg").string() + " --out " +
                  (dir / "out").string()) == 4);
    fs::remove_all(dir);
}

TEST_CASE("kernel: quick probe exits 0 with C_K near the Riesz constant") {
    const auto dir = fresh_dir("kernel_ok");
    write(dir / "c.cfg",
          "[kernel]\nr_min = 1e-4\nr_max = 1e-2\nper_decade = 2\nangular_samples = 4\n");
    CHECK(run_cmd("kernel --config " + (dir / "c.cfg").string() + " --out " +
                  (dir / "out").string()) == 0);
    const auto rundir = only_subdir(dir / "out");
    const auto summary = slurp(rundir / "summary.json");
    CHECK(summary.find("\"C_K\": 0.159") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("moc-fit: prints JSON deterministically and exits 0") {
    const auto dir = fresh_dir("mocfit");
    // A left unspecified: estimated from the kernel bounds (~20), which caps
    // the reachable omega scale near kappa ~ 2.4e-4
    write(dir / "c.cfg", "[moc_fit]\nsup_norm = 1e-4\ngrad_norm = 1\n");
    const std::string cmd = bin() + " moc-fit --config " + (dir / "c.cfg").string() +
                            " --out " + (dir / "out").string() + " 2>/dev/null";
    auto capture = [&]() {
        std::string out;
        FILE* p = popen(cmd.c_str(), "r");
        REQUIRE(p != nullptr);
        char buf[256];
        while (fgets(buf, sizeof(buf), p)) out += buf;
        pclose(p);
        return out;
    };
    const auto a = capture();
    const auto b = capture();
    CHECK(a == b);
    CHECK(a.find("\"B\":") != std::string::npos);
    CHECK(a.find("\"delta\":") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("usage and io failures use the documented exit codes") {
    CHECK(run_cmd("frobnicate") == 64);
    const auto dir = fresh_dir("badcfg");
    write(dir / "bad.cfg", "nonsense == = 3\n");
    CHECK(run_cmd("certify --config " + (dir / "bad.cfg").string()) == 64);
    // --out pointing through a regular file cannot be created
    write(dir / "blocker", "");
    write(dir / "mini.cfg",
          "[certificate]\nB_list = [1]\nxi_low = 1e-1\nxi_high = 1e1\n");
    CHECK(run_cmd("certify --config " + (dir / "mini.cfg").string() + " --out " +
                  (dir / "blocker" / "sub").string()) == 74);
    fs::remove_all(dir);
}
