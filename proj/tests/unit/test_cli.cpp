#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "freqcorr/cli/commands.hpp"
#include "freqcorr/cli/config.hpp"
#include "freqcorr/cli/csv.hpp"

using namespace freqcorr::cli;
namespace fs = std::filesystem;

namespace
{

struct RunResult
{
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + " " + FREQCORR_CLI_PATH + " " + args + " 2>/dev/null";
    RunResult r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0)
        r.out.append(buf, n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct TempDir
{
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() / ("freqcorr_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text)
{
    std::ofstream(path) << text;
}

std::string rows(int n)
{
    std::string s = "theta_deg,counts\n";
    for (int i = 0; i < n; ++i)
        s += std::to_string(i) + "," + std::to_string(100 + i % 5) + "\n";
    return s;
}

const std::string kData = FREQCORR_DATA_DIR;

} // namespace

TEST_CASE("CSV parsing")
{
    SUBCASE("valid file with metadata")
    {
        const auto t = parse_fringe_csv("# kind = normalized\n# note = x\n" + rows(10));
        CHECK(t.counts.size() == 10);
        CHECK(t.kind == freqcorr::fringe::CountKind::normalized);
        CHECK(t.metadata.size() == 2);
        CHECK(t.counts_err.empty());
    }
    SUBCASE("counts_err column")
    {
        std::string s = "theta_deg,counts,counts_err\n";
        for (int i = 0; i < 9; ++i)
            s += std::to_string(i) + ",10,3.5\n";
        const auto t = parse_fringe_csv(s);
        CHECK(t.counts_err.size() == 9);
        CHECK(t.kind == freqcorr::fringe::CountKind::poisson_counts);
    }
    SUBCASE("too few rows")
    {
        CHECK_THROWS_AS(parse_fringe_csv(rows(3)), InputError);
    }
    SUBCASE("errors name the offending line")
    {
        std::string s = rows(10);
        s.insert(s.find("4,"), "5,oops\n");
        try
        {
            parse_fringe_csv(s);
            FAIL("expected InputError");
        }
        catch (const InputError& e)
        {
            CHECK(std::string(e.what()).find("line 6") != std::string::npos);
        }
        CHECK_THROWS_AS(parse_fringe_csv("angle,counts\n1,2\n"), InputError);
        CHECK_THROWS_AS(parse_fringe_csv(rows(10) + "3,100\n"), InputError);
        CHECK_THROWS_AS(parse_fringe_csv(rows(10) + "30,-1\n"), InputError);
        CHECK_THROWS_AS(parse_fringe_csv("# kind = weird\n" + rows(10)), InputError);
    }
    SUBCASE("format/parse round trip is exact")
    {
        FringeTable t;
        for (int i = 0; i < 12; ++i)
        {
            t.theta_deg.push_back(0.1 * i + 1.0 / 3.0);
            t.counts.push_back(1.0 / (i + 7.0));
        }
        t.kind = freqcorr::fringe::CountKind::normalized;
        const auto back = parse_fringe_csv(format_fringe_csv(t, {"a = b"}));
        CHECK(back.theta_deg == t.theta_deg);
        CHECK(back.counts == t.counts);
        CHECK(back.kind == t.kind);
    }
}

TEST_CASE("config validation names the field")
{
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK_THROWS_AS(c.require_spectrum(), ConfigError);
    c.kappa = 0.14;
    c.pump_fwhm_nm = 1.0;
    try
    {
        c.validate();
        FAIL("expected ConfigError");
    }
    catch (const ConfigError& e)
    {
        CHECK(e.field() == "kappa");
    }
    c.pump_fwhm_nm.reset();
    c.scan_points = 5;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("scan_points"), ConfigError);
    c.scan_points = 100;
    c.filter_order = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.filter_order = 4;
    c.schema = 2;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.schema = 1;
    c.calibration_source = CalibrationSource::user;
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("medium_phi_prime_fs"), ConfigError);
    CHECK_THROWS_AS(parse_medium_variant("glass"), ConfigError);
}

TEST_CASE("calibration sources")
{
    ExperimentConfig c;
    const auto sc = resolve_calibration(c);
    CHECK(sc.phi_prime * sc.delta_omega == doctest::Approx(7.14708).epsilon(1e-5));
    c.calibration_source = CalibrationSource::sellmeier;
    CHECK(resolve_calibration(c).phi_prime * sc.delta_omega == doctest::Approx(-25.27).epsilon(1e-3));
    c.calibration_source = CalibrationSource::user;
    c.medium_phi_prime_fs = 250.0;
    CHECK(resolve_calibration(c).phi_prime == doctest::Approx(250e-15));
}

TEST_CASE("simulate: row count, zero-length medium, noiseless round trip")
{
    TempDir dir;
    const auto out = dir.file("s.csv");
    REQUIRE(run("--kappa 0.14 --medium_length_mm 0 simulate -o " + out).code == 0);
    const auto t = read_fringe_csv(out);
    CHECK(t.counts.size() == 100);
    std::istringstream lines(slurp(out));
    std::string line;
    int data = 0;
    int header = 0;
    while (std::getline(lines, line))
    {
        if (line.rfind("#", 0) == 0)
            continue;
        (line.rfind("theta_deg", 0) == 0 ? header : data)++;
    }
    CHECK(data == 100);
    CHECK(header == 1);
    ExperimentConfig c;
    CHECK(fit_report(c, t, out)["fit"]["visibility"]["value"].get<double>() >= 0.999);

    ExperimentConfig taylor;
    taylor.kappa = 0.5;
    taylor.medium_variant = MediumVariant::taylor;
    const auto sim = simulate_scan(taylor, false, "simulate");
    const double v = fit_report(taylor, sim.table, "mem")["fit"]["visibility"]["value"].get<double>();
    CHECK(v == doctest::Approx(sim.engine_visibility).epsilon(1e-3));
}

TEST_CASE("synth is deterministic and converges for large counts")
{
    TempDir dir;
    const std::string args = "--kappa 0.14 --medium_variant taylor --scan_seed 9 synth -o ";
    REQUIRE(run(args + dir.file("a.csv")).code == 0);
    REQUIRE(run(args + dir.file("b.csv")).code == 0);
    CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));
    REQUIRE(run("--kappa 0.14 --medium_variant taylor --scan_seed 10 synth -o " + dir.file("c.csv")).code == 0);
    CHECK(slurp(dir.file("a.csv")) != slurp(dir.file("c.csv")));

    ExperimentConfig c;
    c.kappa = 0.14;
    c.medium_variant = MediumVariant::taylor;
    c.medium_phi0_rad = 0.4;
    c.scan_mean_counts = 1e9;
    const auto noisy = simulate_scan(c, true, "synth");
    const auto clean = simulate_scan(c, false, "simulate");
    const auto a = fit_report(c, noisy.table, "")["fit"];
    const auto b = fit_report(c, clean.table, "")["fit"];
    for (const char* key : {"visibility", "phase0", "harmonic"})
        CHECK(a[key]["value"].get<double>() == doctest::Approx(b[key]["value"].get<double>()).epsilon(1e-3));
}

TEST_CASE("bundled samples")
{
    ExperimentConfig c;
    const auto cal = fit_report(c, read_fringe_csv(kData + "/calibration_no_crystal.csv"), "")["fit"];
    CHECK(cal["visibility"]["value"].get<double>() == doctest::Approx(0.966).epsilon(0.01));
    const auto crystal = fit_report(c, read_fringe_csv(kData + "/with_crystal.csv"), "")["fit"];
    CHECK(crystal["visibility"]["value"].get<double>() == doctest::Approx(0.56).epsilon(0.02));
    CHECK(crystal["phase0"]["value"].get<double>() == doctest::Approx(0.244).epsilon(0.1));
    const auto clean = fit_report(c, read_fringe_csv(kData + "/with_crystal_noiseless.csv"), "")["fit"];
    CHECK(clean["phase0"]["value"].get<double>() == doctest::Approx(0.244).epsilon(1e-9));
}

TEST_CASE("estimate")
{
    ExperimentConfig c;
    EstimateOptions o;
    o.visibility = 0.568;
    const auto r = estimate_report(c, o);
    CHECK(r["kappa_bar"]["value"].get<double>() == doctest::Approx(0.14).epsilon(1e-9));
    CHECK(r["kappa_bar"]["bound_kind"] == "lower bound");
    CHECK(r["calibration"]["source"] == "self-consistent");
    CHECK(r["sigma_phi_sq"]["value"].get<double>() == doctest::Approx(1.131).epsilon(1e-3));
    CHECK(r["calibration_comparison"].size() == 2);
    CHECK(r["calibration_comparison"][1]["source"] == "sellmeier");
    CHECK(r["warnings"].is_array());

    o.visibility = 1.0;
    CHECK(estimate_report(c, o)["kappa_bar"]["value"].get<double>() == 0.0);

    o.visibility = 0.005;
    const auto inf = estimate_report(c, o);
    CHECK(inf["kappa_bar"]["value"].is_null());
    CHECK(inf["infeasibility"]["ratio"]["value"].get<double>() >= 1.0);
    CHECK(run("estimate --visibility 0.005").code == 0);

    c.analysis_normalize_calibration = true;
    o.visibility = 0.5;
    CHECK_THROWS_AS(estimate_report(c, o), ConfigError);
    c.analysis_calibration_visibility = 0.966;
    const auto norm = estimate_report(c, o);
    CHECK(norm["visibility"]["used"]["value"].get<double>() == doctest::Approx(0.5 / 0.966));
}

TEST_CASE("validate table")
{
    ExperimentConfig c;
    const auto outcome = run_validation(c);
    const auto table = format_validation_table(outcome);
    CHECK(table.find("D_KL") != std::string::npos);
    bool kl_passed = false;
    for (const auto& row : outcome.rows)
        if (row.name.rfind("D_KL", 0) == 0)
            kl_passed = row.passed.value_or(false);
    CHECK(kl_passed);

    c.filter_order = 2;
    for (const auto& row : run_validation(c).rows)
    {
        if (row.name.rfind("D_KL", 0) == 0 || row.name.rfind("F vs exact Gaussian", 0) == 0)
            CHECK(row.passed.value_or(false));
    }
    const auto r = run("validate");
    CHECK(r.code == (outcome.all_passed() ? 0 : 1));
    CHECK(r.out.find("status") != std::string::npos);
}

TEST_CASE("exit codes and configuration precedence")
{
    TempDir dir;
    CHECK(run("--scan_points 3 --kappa 0.1 simulate").code == 2);
    CHECK(run("--medium_variant glass --kappa 0.1 simulate").code == 2);
    CHECK(run("simulate").code == 2); // no pump spectrum
    CHECK(run("fit " + dir.file("missing.csv")).code == 3);
    CHECK(run("--kappa 0.1 --medium_length_mm 0 simulate -o " + dir.file("no/such/dir/x.csv")).code == 3);
    write(dir.file("short.csv"), rows(3));
    CHECK(run("fit " + dir.file("short.csv")).code == 2);
    CHECK(run("--config " + dir.file("none.cfg") + " validate").code == 3);
    write(dir.file("bad.cfg"), "unknown_key = 3\n");
    CHECK(run("--config " + dir.file("bad.cfg") + " validate").code == 2);
    CHECK(run("nonsense").code == 2);

    // flag > file > default; env var supplies the default file
    write(dir.file("base.cfg"), "kappa = 0.3\nmedium_length_mm = 0\nscan_points = 12\n");
    const auto from_file = run("simulate", "FREQCORR_CONFIG=" + dir.file("base.cfg"));
    REQUIRE(from_file.code == 0);
    CHECK(from_file.out.find("# kappa = 0.3\n") != std::string::npos);
    CHECK(from_file.out.find("# scan_points = 12\n") != std::string::npos);
    const auto flagged = run("--scan_points 20 simulate", "FREQCORR_CONFIG=" + dir.file("base.cfg"));
    REQUIRE(flagged.code == 0);
    CHECK(flagged.out.find("# scan_points = 20\n") != std::string::npos);
    CHECK(flagged.out.find("# kappa = 0.3\n") != std::string::npos);
    const auto plain = run("--kappa 0.3 --medium_length_mm 0 simulate");
    CHECK(plain.out.find("# scan_points = 100\n") != std::string::npos);
}

TEST_CASE("recorded configuration reproduces the file")
{
    TempDir dir;
    REQUIRE(run("--kappa 0.2 --medium_variant taylor --medium_phi0_rad 0.3 --scan_points 40 synth -o " +
                dir.file("a.csv")).code == 0);
    // Strip the comment prefix from the recorded config lines and rerun.
    std::istringstream in(slurp(dir.file("a.csv")));
    std::string line;
    std::string cfg;
    while (std::getline(in, line))
    {
        if (line.rfind("# ", 0) != 0)
            break;
        const std::string body = line.substr(2);
        const auto key = body.substr(0, body.find(' '));
        ExperimentConfig probe;
        for (const auto& l : probe.to_lines())
            if (l.substr(0, l.find(' ')) == key)
                cfg += body + "\n";
        if (key == "kappa")
            cfg += body + "\n";
    }
    write(dir.file("re.cfg"), cfg);
    REQUIRE(run("--config " + dir.file("re.cfg") + " synth -o " + dir.file("b.csv")).code == 0);
    CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));
}
