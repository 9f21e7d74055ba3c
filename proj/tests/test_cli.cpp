#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "spinspec/cli.hpp"
#include "spinspec/core.hpp"
#include "spinspec/io.hpp"
#include "spinspec/mors.hpp"

using namespace spinspec;
namespace fs = std::filesystem;

namespace {

const std::string kConfigDir = SPINSPEC_CONFIG_DIR;

fs::path temp_file(const std::string& name) {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "spinspec_cli_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir / name;
}

std::map<std::string, std::string> read_summary(const fs::path& path) {
    std::map<std::string, std::string> kv;
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

double num(const std::map<std::string, std::string>& kv, const std::string& key) {
    REQUIRE(kv.count(key));
    return std::stod(kv.at(key));
}

std::size_t csv_rows(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++rows;
    return rows;
}

}  // namespace

TEST_CASE("cli psd emits the requested table") {
    const auto out = temp_file("psd.csv");
    const auto summary = temp_file("psd.txt");
    const int rc = run_cli({"psd", "--config", kConfigDir + "/spin18k.cfg", "--fmin", "100",
                            "--fmax", "40000", "--points", "2000", "--out", out.string(),
                            "--summary", summary.string()});
    CHECK(rc == 0);
    CHECK(csv_rows(out) == 2000);
    const auto kv = read_summary(summary);
    CHECK(num(kv, "omega_s_khz") == 18.0);
    CHECK(num(kv, "n_points") == 2000.0);

    const auto budget_out = temp_file("psd_budget.csv");
    const int rc2 = run_cli({"psd", "--config", kConfigDir + "/spin18k.cfg", "--points", "50",
                             "--budget", "--out", budget_out.string(), "--summary",
                             temp_file("psd_budget.txt").string()});
    CHECK(rc2 == 0);
    std::ifstream in(budget_out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "# frequency_hz,total,sn,qban,corr,tn,bb,dc");
}

TEST_CASE("cli psd -> fit round trip recovers the config parameters") {
    const auto data = temp_file("roundtrip.csv");
    int rc = run_cli({"psd", "--config", kConfigDir + "/spin18k.cfg", "--fmin", "10000", "--fmax",
                      "26000", "--points", "900", "--out", data.string(), "--summary",
                      temp_file("rt_psd.txt").string()});
    REQUIRE(rc == 0);

    const auto summary = temp_file("rt_fit.txt");
    rc = run_cli({"fit", "--config", kConfigDir + "/spin18k.cfg", "--data", data.string(),
                  "--free", "readout_hz,gamma_s_hz,n_s", "--init", "readout_hz=4200", "--init",
                  "gamma_s_hz=140", "--out", temp_file("rt_fit.csv").string(), "--summary",
                  summary.string()});
    CHECK(rc == 0);
    const auto kv = read_summary(summary);
    CHECK(kv.at("converged") == "1");
    CHECK(num(kv, "readout_hz") == doctest::Approx(3800.0).epsilon(1e-5));
    CHECK(num(kv, "gamma_s_hz") == doctest::Approx(158.333333).epsilon(1e-5));
    CHECK(num(kv, "n_s") == doctest::Approx(3.5).epsilon(1e-5));
    CHECK(num(kv, "rss") < 1e-10);
}

TEST_CASE("cli squeeze reports the optimized minimum and the analytic bound") {
    const auto summary = temp_file("squeeze.txt");
    const int rc = run_cli({"squeeze", "--config", kConfigDir + "/spin18k.cfg", "--out",
                            temp_file("squeeze.csv").string(), "--summary", summary.string()});
    CHECK(rc == 0);
    const auto kv = read_summary(summary);
    CHECK(num(kv, "c_q") == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(num(kv, "analytic_bound_db") == doctest::Approx(-5.0864).epsilon(2e-3));
    // Full-model optimum at gamma/Gamma = 1/24; value frozen from an
    // independent dense-grid scan of the same noise model.
    CHECK(num(kv, "s_min_db") == doctest::Approx(-4.812).epsilon(0.01));
    CHECK(num(kv, "s_min") >= 1.0 - 0.92);
}

TEST_CASE("cli shift reports the softened oscillator") {
    const auto summary = temp_file("shift.txt");
    const int rc = run_cli({"shift", "--config", kConfigDir + "/spin18k.cfg", "--phi", "-0.7854",
                            "--out", temp_file("shift.csv").string(), "--summary",
                            summary.string()});
    CHECK(rc == 0);
    const auto kv = read_summary(summary);
    CHECK(num(kv, "omega_eff_khz") == doctest::Approx(15.9875).epsilon(1e-4));
    CHECK(num(kv, "shift_khz") == doctest::Approx(-2.0125).epsilon(1e-3));
    CHECK(std::abs(num(kv, "shift_khz") + 2.1) / 2.1 < 0.05);
    CHECK(num(kv, "readout_eff_khz") == doctest::Approx(1.9).epsilon(1e-3));
}

TEST_CASE("cli detune finds the interior optimum") {
    const auto out = temp_file("detune.csv");
    const auto summary = temp_file("detune.txt");
    const int rc = run_cli({"detune", "--config", kConfigDir + "/detune3k.cfg", "--dmin-ghz", "1",
                            "--dmax-ghz", "8", "--points", "100", "--out", out.string(),
                            "--summary", summary.string()});
    CHECK(rc == 0);
    CHECK(csv_rows(out) == 100);
    const auto kv = read_summary(summary);
    const double d_opt = num(kv, "delta_opt_ghz");
    CHECK(d_opt > 3.0);
    CHECK(d_opt < 4.0);

    // Flags-only invocation, no config.
    const auto summary2 = temp_file("detune_flags.txt");
    const int rc2 = run_cli({"detune", "--a-hz3", "9.728e21", "--c-hz3", "2.432e20", "--d-coeff",
                             "1.4e46", "--gamma0-hz", "150", "--eta", "0.92", "--out",
                             temp_file("detune_flags.csv").string(), "--summary",
                             summary2.string()});
    CHECK(rc2 == 0);
    CHECK(num(read_summary(summary2), "delta_opt_ghz") == doctest::Approx(d_opt).epsilon(1e-6));
}

TEST_CASE("cli mors fits synthetic line data") {
    // Synthesize through the library, then hand the CSV to the tool.
    ZeemanLadder l;
    l.omega_s = two_pi * 960e3;
    l.omega_qzs = two_pi * 400.0;
    l.linewidth = two_pi * 50.0;
    ZeemanPopulations pops;
    pops.at_m(4) = 0.92;
    pops.at_m(3) = 0.08;
    const auto grid = linspace(955e3, 965e3, 1100);
    const auto s = mors_spectrum(l, pops, grid);
    const auto data = temp_file("mors.csv");
    save_spectrum(s, data.string());

    const auto summary = temp_file("mors.txt");
    const int rc = run_cli({"mors", "--config", kConfigDir + "/mors1m.cfg", "--data",
                            data.string(), "--out", temp_file("mors_fit.csv").string(),
                            "--summary", summary.string()});
    CHECK(rc == 0);
    const auto kv = read_summary(summary);
    CHECK(num(kv, "polarization") == doctest::Approx(0.98).epsilon(1e-3));
    CHECK(kv.at("mass_sign") == "negative");
    CHECK(num(kv, "n_s") == doctest::Approx(0.08).epsilon(0.05));
    CHECK(num(kv, "omega_qzs_hz") == doctest::Approx(400.0).epsilon(1e-3));
}

TEST_CASE("cli gwd emits the four curve families") {
    const auto out = temp_file("gwd.csv");
    const int rc = run_cli({"gwd", "--config", kConfigDir + "/gwd.cfg", "--fmin", "10", "--fmax",
                            "10000", "--points", "200", "--out", out.string(), "--summary",
                            temp_file("gwd.txt").string()});
    CHECK(rc == 0);
    CHECK(csv_rows(out) == 200);

    // Around the coupling frequency the joint readout must sit below the SQL.
    std::ifstream in(out);
    std::string line;
    bool below_sql = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        const double f = std::stod(field);
        std::getline(ss, field, ',');  // qn limited
        std::getline(ss, field, ',');  // squeezed
        std::getline(ss, field, ',');  // joint
        const double joint_db = std::stod(field);
        if (f > 50.0 && f < 200.0 && joint_db < 0.0) below_sql = true;
    }
    CHECK(below_sql);
}

TEST_CASE("cli exit codes") {
    CHECK(run_cli({"frobnicate"}) == 2);
    CHECK(run_cli({"psd"}) == 2);                       // missing --config
    CHECK(run_cli({"psd", "--config", "/no/file"}) == 2);

    const auto bad_cfg = temp_file("bad.cfg");
    {
        std::ofstream out(bad_cfg);
        out << "omega_s_mhz = 1\n";  // unknown key
    }
    CHECK(run_cli({"psd", "--config", bad_cfg.string(), "--out",
                   temp_file("bad_psd.csv").string()}) == 2);

    // Over-softened request: readout exceeds the Larmor frequency and the
    // requested phase drives the radicand negative.
    const auto soft_cfg = temp_file("soft.cfg");
    {
        std::ofstream out(soft_cfg);
        out << "omega_s_khz = 1\ngamma_s0_hz = 20\nreadout_khz = 10\neta = 0.9\n";
    }
    CHECK(run_cli({"shift", "--config", soft_cfg.string(), "--phi", "-0.7853981634", "--out",
                   temp_file("soft.csv").string(), "--summary",
                   temp_file("soft.txt").string()}) == 3);

    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({"psd", "--help"}) == 0);
}
