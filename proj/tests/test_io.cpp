#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "spinspec/io.hpp"

using namespace spinspec;

TEST_CASE("spectrum parsing: header and two rows") {
    std::istringstream in("#freq_hz,psd\n100,1.0\n200,1.1\n");
    const auto loaded = parse_spectrum(in);
    REQUIRE(loaded.spectrum.size() == 2);
    CHECK(loaded.spectrum.freqs_hz[0] == 100.0);
    CHECK(loaded.spectrum.values[1] == 1.1);
    CHECK(!loaded.has_negative);
}

TEST_CASE("spectrum parsing: non-monotonic grid names the offending line") {
    std::istringstream in("100,1.0\n200,1.1\n150,1.2\n");
    try {
        parse_spectrum(in);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find("increasing") != std::string::npos);
    }
}

TEST_CASE("spectrum parsing: negative PSD loads with a warning flag") {
    std::istringstream in("100,1.0\n200,-0.05\n300,0.9\n");
    const auto loaded = parse_spectrum(in);
    CHECK(loaded.has_negative);
    REQUIRE(!loaded.warnings.empty());
    CHECK(loaded.warnings.front().find("line 2") != std::string::npos);
}

TEST_CASE("spectrum parsing: failures carry line numbers") {
    std::istringstream empty("# only a header\n");
    CHECK_THROWS_AS(parse_spectrum(empty), ParseError);

    std::istringstream bad("100,1.0\nxyz,2.0\n");
    try {
        parse_spectrum(bad);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }

    std::istringstream wide("100,1.0,9\n");
    try {
        parse_spectrum(wide);
        CHECK(false);
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(std::string(e.what()).find("two columns") != std::string::npos);
    }

    CHECK_THROWS_AS(load_spectrum("/nonexistent/file.csv"), UsageError);
}

TEST_CASE("spectrum parsing: whitespace format") {
    std::istringstream in("# f psd\n100 1.0\n200\t1.25\n");
    const auto loaded = parse_spectrum(in, SpectrumFormat::Tsv);
    REQUIRE(loaded.spectrum.size() == 2);
    CHECK(loaded.spectrum.values[1] == 1.25);
}

TEST_CASE("emit/load round trip is value-identical for 9-digit inputs") {
    Spectrum s;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double f = 10.0;
    for (int i = 0; i < 200; ++i) {
        // values constructed with <= 9 significant digits
        f += std::floor(1e4 * (0.1 + u(rng))) / 100.0;
        s.freqs_hz.push_back(f);
        s.values.push_back(std::floor(1e8 * u(rng)) / 1e7);
    }
    std::ostringstream out;
    save_spectrum(s, out);
    std::istringstream in(out.str());
    const auto back = parse_spectrum(in);
    REQUIRE(back.spectrum.size() == s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(back.spectrum.freqs_hz[i] == s.freqs_hz[i]);
        CHECK(back.spectrum.values[i] == s.values[i]);
    }
}

TEST_CASE("numeric output uses 9 significant digits") {
    CHECK(format_value(0.123456789123) == "0.123456789");
    CHECK(format_value(123456789.123) == "123456789");
    CHECK(format_value(-5.086383061) == "-5.08638306");
    CHECK(format_value(1.0) == "1");
}

TEST_CASE("config parsing") {
    std::istringstream in(
        "# oscillator\n"
        "omega_s_khz = 18\n"
        "eta = 0.92   # detection\n"
        "\n"
        "phi_rad = -0.785398163\n");
    const auto cfg = Config::parse(in);
    CHECK(cfg.number("omega_s_khz") == 18.0);
    CHECK(cfg.number_or("n_s", 3.5) == 3.5);
    CHECK(cfg.has("eta"));
    CHECK_THROWS_AS(cfg.number("delta_ghz"), UsageError);
}

TEST_CASE("config rejects unknown, duplicate and malformed keys") {
    std::istringstream unknown("omega_s_mhz = 18\n");
    CHECK_THROWS_AS(Config::parse(unknown), ParseError);

    std::istringstream dup("eta = 0.9\neta = 0.8\n");
    CHECK_THROWS_AS(Config::parse(dup), ParseError);

    std::istringstream noeq("eta 0.9\n");
    CHECK_THROWS_AS(Config::parse(noeq), ParseError);

    std::istringstream notnum("eta = fast\n");
    const auto cfg = Config::parse(notnum);
    CHECK_THROWS_AS(cfg.number("eta"), ParseError);
}

TEST_CASE("model config conversion and defaults") {
    std::istringstream in(
        "omega_s_khz = -18\n"
        "gamma_s0_hz = 150\n"
        "readout_khz = 3.8\n"
        "eta = 0.92\n");
    const auto mc = parse_model_config(Config::parse(in));
    CHECK(mc.params.omega_s == doctest::Approx(-two_pi * 18e3).epsilon(1e-12));
    CHECK(mc.params.gamma_s0 == doctest::Approx(two_pi * 150.0).epsilon(1e-12));
    CHECK(mc.probe.delta == doctest::Approx(two_pi * 1.6e9).epsilon(1e-12));  // default
    CHECK(mc.tensor.dc_phase == DcPhaseWeight::Cos2);
    CHECK(mc.det_r == 5.0);

    std::istringstream weight("dc_phase_weight = sin2\n");
    CHECK(parse_model_config(Config::parse(weight)).tensor.dc_phase == DcPhaseWeight::Sin2);
    std::istringstream badweight("dc_phase_weight = tan2\n");
    CHECK_THROWS_AS(parse_model_config(Config::parse(badweight)), UsageError);
}
