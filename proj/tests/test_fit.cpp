#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "spinspec/core.hpp"
#include "spinspec/fit.hpp"

using namespace spinspec;

namespace {

// Detected spectrum of the 18 kHz oscillator at a mixed quadrature, where
// readout, damping and occupancy are simultaneously identifiable.
std::map<std::string, double> truth_params() {
    return {{"omega_s_hz", 18e3}, {"gamma_s_hz", 1e3}, {"readout_hz", 3.8e3},
            {"n_s", 3.5},         {"eta", 0.92},       {"phi_rad", -pi / 4},
            {"s_bb", 0.0}};
}

Spectrum synthesize(const std::map<std::string, double>& params, double noise_rel,
                    std::uint64_t seed, std::size_t n = 800) {
    Spectrum s;
    s.freqs_hz = linspace(10e3, 26e3, n);
    s.values = eval_model(FitModel::Eq1, 1, params, s.freqs_hz);
    if (noise_rel > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& v : s.values) v *= 1.0 + noise_rel * gauss(rng);
    }
    return s;
}

FitProblem problem_with(const Spectrum& data, const std::vector<std::string>& free) {
    FitProblem p;
    p.data = data;
    p.model = FitModel::Eq1;
    p.init = truth_params();
    p.free_names = free;
    return p;
}

}  // namespace

TEST_CASE("zero-noise round trip is exact to solver tolerance") {
    const auto truth = truth_params();
    const auto data = synthesize(truth, 0.0, 0);
    auto prob = problem_with(data, {"readout_hz", "gamma_s_hz", "n_s"});
    prob.init["readout_hz"] = 4.3e3;
    prob.init["gamma_s_hz"] = 0.8e3;
    prob.init["n_s"] = 2.0;

    const auto rep = fit_spectrum(prob);
    CHECK(rep.converged);
    CHECK(rep.residual_rss < 1e-12);
    CHECK(rep.params.at("readout_hz").value == doctest::Approx(3.8e3).epsilon(1e-6));
    CHECK(rep.params.at("gamma_s_hz").value == doctest::Approx(1e3).epsilon(1e-6));
    CHECK(rep.params.at("n_s").value == doctest::Approx(3.5).epsilon(1e-6));
}

TEST_CASE("noisy round trip recovers readout, damping and occupancy within 2%") {
    const auto truth = truth_params();
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto data = synthesize(truth, 0.01, seed);
        auto prob = problem_with(data, {"readout_hz", "gamma_s_hz", "n_s"});
        prob.init["readout_hz"] = 3.8e3 * 1.12;
        prob.init["gamma_s_hz"] = 1e3 * 0.88;
        prob.init["n_s"] = 3.5 * 1.15;

        const auto rep = fit_spectrum(prob);
        CHECK(rep.converged);
        CHECK(std::abs(rep.params.at("readout_hz").value / 3.8e3 - 1.0) < 0.02);
        CHECK(std::abs(rep.params.at("gamma_s_hz").value / 1e3 - 1.0) < 0.02);
        CHECK(std::abs(rep.params.at("n_s").value / 3.5 - 1.0) < 0.02);
        CHECK(rep.params.at("readout_hz").sigma > 0.0);
    }
}

TEST_CASE("rank deficiency: eta and readout from one phase-quadrature spectrum") {
    auto truth = truth_params();
    truth["phi_rad"] = 0.0;
    const auto data = synthesize(truth, 0.01, 9);
    auto prob = problem_with(data, {"eta", "readout_hz"});
    prob.init["phi_rad"] = 0.0;
    try {
        fit_spectrum(prob);
        CHECK(false);
    } catch (const RankDeficiencyError& e) {
        CHECK(!e.parameters.empty());
    }
}

TEST_CASE("rank deficiency: readout/occupancy degenerate at the phase quadrature") {
    // At phi = 0 the back-action and thermal terms share the same spectral
    // shape, so (readout, gamma, n_s) only constrain two combinations.
    auto truth = truth_params();
    truth["phi_rad"] = 0.0;
    const auto data = synthesize(truth, 0.0, 0);
    auto prob = problem_with(data, {"readout_hz", "gamma_s_hz", "n_s"});
    prob.init["phi_rad"] = 0.0;
    CHECK_THROWS_AS(fit_spectrum(prob), RankDeficiencyError);
}

TEST_CASE("fit determinism: identical problems give bitwise-identical reports") {
    const auto data = synthesize(truth_params(), 0.01, 5);
    auto prob = problem_with(data, {"readout_hz", "n_s"});
    prob.init["readout_hz"] = 4.0e3;
    const auto a = fit_spectrum(prob);
    const auto b = fit_spectrum(prob);
    CHECK(a.iterations == b.iterations);
    CHECK(std::memcmp(&a.residual_rss, &b.residual_rss, sizeof(double)) == 0);
    for (const auto& [name, p] : a.params) {
        const auto& q = b.params.at(name);
        CHECK(std::memcmp(&p.value, &q.value, sizeof(double)) == 0);
        CHECK(std::memcmp(&p.sigma, &q.sigma, sizeof(double)) == 0);
    }
}

TEST_CASE("fitted-parameter error shrinks with the noise level") {
    const auto truth = truth_params();
    double prev = 1e300;
    for (double noise : {0.03, 0.01, 0.003}) {
        double err = 0.0;
        for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
            const auto data = synthesize(truth, noise, seed);
            auto prob = problem_with(data, {"readout_hz", "gamma_s_hz", "n_s"});
            prob.init["readout_hz"] = 4.1e3;
            prob.init["gamma_s_hz"] = 0.9e3;
            prob.init["n_s"] = 3.0;
            const auto rep = fit_spectrum(prob);
            err += std::abs(rep.params.at("readout_hz").value / 3.8e3 - 1.0) +
                   std::abs(rep.params.at("gamma_s_hz").value / 1e3 - 1.0) +
                   std::abs(rep.params.at("n_s").value / 3.5 - 1.0);
        }
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("bound projection is reported") {
    const auto data = synthesize(truth_params(), 0.005, 21);
    auto prob = problem_with(data, {"n_s"});
    prob.init["n_s"] = 1.8;
    prob.bounds["n_s"] = {0.0, 2.0};  // truth is 3.5: the fit must pin the bound
    const auto rep = fit_spectrum(prob);
    CHECK(rep.params.at("n_s").value == doctest::Approx(2.0));
    CHECK(std::find(rep.projected.begin(), rep.projected.end(), "n_s") != rep.projected.end());
}

TEST_CASE("masked windows are ignored by the fit") {
    const auto truth = truth_params();
    auto data = synthesize(truth, 0.0, 0);
    // Corrupt a band and zero-weight it.
    std::size_t lo = 0, hi = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.freqs_hz[i] >= 20e3 && data.freqs_hz[i] <= 22e3) {
            data.values[i] += 40.0;
            if (lo == 0) lo = i;
            hi = i;
        }
    }
    auto prob = problem_with(data, {"readout_hz", "gamma_s_hz"});
    prob.init["readout_hz"] = 4.2e3;
    prob.weights.assign(data.size(), 1.0);
    for (std::size_t i = lo; i <= hi; ++i) prob.weights[i] = 0.0;
    const auto rep = fit_spectrum(prob);
    CHECK(rep.params.at("readout_hz").value == doctest::Approx(3.8e3).epsilon(1e-6));
    CHECK(rep.params.at("gamma_s_hz").value == doctest::Approx(1e3).epsilon(1e-6));
}

TEST_CASE("multi-component broadband model round trip") {
    std::map<std::string, double> truth = {{"omega_s_hz", 1e6},
                                           {"bb_amp_1", 2.0},
                                           {"bb_width_1", 400.0},
                                           {"bb_amp_2", 0.25},
                                           {"bb_width_2", 12e3}};
    Spectrum data;
    data.freqs_hz = linspace(0.9e6, 1.1e6, 1200);
    data.values = eval_model(FitModel::MultiLorentzBb, 2, truth, data.freqs_hz);

    FitProblem prob;
    prob.data = data;
    prob.model = FitModel::MultiLorentzBb;
    prob.n_components = 2;
    prob.init = truth;
    prob.init["bb_amp_1"] = 1.4;
    prob.init["bb_width_1"] = 600.0;
    prob.init["bb_amp_2"] = 0.4;
    prob.init["bb_width_2"] = 9e3;
    prob.free_names = {"bb_amp_1", "bb_width_1", "bb_amp_2", "bb_width_2"};
    const auto rep = fit_spectrum(prob);
    CHECK(rep.converged);
    CHECK(rep.params.at("bb_amp_1").value == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(rep.params.at("bb_width_1").value == doctest::Approx(400.0).epsilon(1e-4));
    CHECK(rep.params.at("bb_amp_2").value == doctest::Approx(0.25).epsilon(1e-4));
    CHECK(rep.params.at("bb_width_2").value == doctest::Approx(12e3).epsilon(1e-4));
}

TEST_CASE("problem validation") {
    const auto data = synthesize(truth_params(), 0.0, 0, 64);

    FitProblem p;
    p.data = data;
    p.model = FitModel::Eq1;
    p.init = truth_params();
    CHECK_THROWS_AS(fit_spectrum(p), UsageError);  // no free parameters

    p.free_names = {"not_a_param"};
    CHECK_THROWS_AS(fit_spectrum(p), UsageError);

    p.free_names = {"readout_hz"};
    p.init.erase("n_s");
    CHECK_THROWS_AS(fit_spectrum(p), UsageError);  // incomplete init

    p.init = truth_params();
    p.init["n_s"] = -1.0;  // violates the default lower bound
    CHECK_THROWS_AS(fit_spectrum(p), UsageError);

    p.init = truth_params();
    p.weights.assign(3, 1.0);  // wrong length
    CHECK_THROWS_AS(fit_spectrum(p), UsageError);
}

TEST_CASE("negative-data flag is carried into the report") {
    auto data = synthesize(truth_params(), 0.0, 0, 64);
    FitProblem p;
    p.data = data;
    p.model = FitModel::Eq1;
    p.init = truth_params();
    p.free_names = {"readout_hz"};
    p.data_has_negative = true;
    const auto rep = fit_spectrum(p);
    bool found = false;
    for (const auto& w : rep.warnings) found |= w.find("negative") != std::string::npos;
    CHECK(found);
}
