#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "spinspec/core.hpp"
#include "spinspec/kernels.hpp"

using namespace spinspec;
namespace k = spinspec::kernels;

namespace {

struct BackendGuard {
    ~BackendGuard() { k::set_backend(k::Backend::Auto); }
};

k::BudgetFactors random_factors(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    OscillatorParams p;
    p.omega_s = (u(rng) < 0.5 ? -1.0 : 1.0) * two_pi * (500.0 + 50e3 * u(rng));
    p.gamma_s0 = two_pi * (5.0 + 4e3 * u(rng));
    p.readout_rate = two_pi * 10e3 * u(rng);
    p.n_s = 6.0 * u(rng);
    TensorConfig tensor;
    tensor.a2_over_a1 = 0.05 * u(rng);
    tensor.dc_halfwidth = two_pi * (50.0 + 5e3 * u(rng));
    const double phi = -pi / 2 + pi * u(rng);
    return k::make_budget_factors(p, u(rng), phi, tensor, 0.5 * u(rng));
}

std::vector<double> random_grid(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(n);
    double acc = two_pi * 100.0 * u(rng);
    for (auto& v : w) {
        acc += two_pi * (0.5 + 80.0 * u(rng));
        v = acc;
    }
    return w;
}

}  // namespace

TEST_CASE("scalar psd kernel matches the per-point budget") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        OscillatorParams p;
        p.omega_s = (u(rng) < 0.5 ? -1.0 : 1.0) * two_pi * (1e3 + 30e3 * u(rng));
        p.gamma_s0 = two_pi * (20.0 + 2e3 * u(rng));
        p.readout_rate = two_pi * 6e3 * u(rng);
        p.n_s = 4.0 * u(rng);
        ProbeConfig probe;
        probe.phi = -pi / 2 + pi * u(rng);
        probe.eta = u(rng);
        TensorConfig tensor;
        tensor.a2_over_a1 = 0.03 * u(rng);
        const double s_bb = 0.2 * u(rng);

        const auto f = k::make_budget_factors(p, probe, tensor, s_bb);
        const auto grid = random_grid(rng, 17);
        std::vector<double> out(grid.size());
        k::psd_grid_scalar(f, grid.data(), out.data(), grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto b = budget_terms(p, probe, tensor, s_bb, grid[i]);
            CHECK(out[i] == doctest::Approx(b.total()).epsilon(1e-11));
        }
    }
}

TEST_CASE("avx2 psd kernel is equivalent to the scalar reference") {
    if (!k::cpu_has_avx2()) {
        MESSAGE("avx2 not available; skipping");
        return;
    }
    std::mt19937_64 rng(23);
    for (int t = 0; t < 60; ++t) {
        const auto f = random_factors(rng);
        for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{4}, std::size_t{5},
                              std::size_t{64}, std::size_t{257}}) {
            const auto grid = random_grid(rng, n);
            std::vector<double> ref(n), simd(n);
            k::psd_grid_scalar(f, grid.data(), ref.data(), n);
            k::set_backend(k::Backend::Avx2);
            k::psd_grid(f, grid.data(), simd.data(), n);
            k::set_backend(k::Backend::Auto);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(simd[i] == doctest::Approx(ref[i]).epsilon(1e-13));
        }
    }
}

TEST_CASE("avx2 mors kernel is equivalent to the scalar reference") {
    if (!k::cpu_has_avx2()) {
        MESSAGE("avx2 not available; skipping");
        return;
    }
    BackendGuard guard;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 60; ++t) {
        k::MorsFactors f;
        const double center = two_pi * (0.5e6 + 1e6 * u(rng));
        const double qzs = two_pi * (100.0 + 600.0 * u(rng));
        for (int m = 0; m < 8; ++m) {
            f.center[static_cast<std::size_t>(m)] = center + qzs * (2.0 * m - 7.0);
            f.amp[static_cast<std::size_t>(m)] = -10.0 + 20.0 * u(rng);
        }
        f.hw = two_pi * (5.0 + 100.0 * u(rng));
        for (std::size_t n : {std::size_t{1}, std::size_t{4}, std::size_t{6}, std::size_t{128},
                              std::size_t{1001}}) {
            std::vector<double> grid(n);
            for (std::size_t i = 0; i < n; ++i)
                grid[i] = center - two_pi * 5e3 +
                          two_pi * 10e3 * static_cast<double>(i) / static_cast<double>(n);
            std::vector<double> ref(n), simd(n);
            k::mors_grid_scalar(f, grid.data(), ref.data(), n);
            k::set_backend(k::Backend::Avx2);
            k::mors_grid(f, grid.data(), simd.data(), n);
            k::set_backend(k::Backend::Auto);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(simd[i] == doctest::Approx(ref[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("backend selection") {
    BackendGuard guard;
    k::set_backend(k::Backend::Scalar);
    CHECK(k::active_backend() == k::Backend::Scalar);
    if (k::cpu_has_avx2()) {
        k::set_backend(k::Backend::Avx2);
        CHECK(k::active_backend() == k::Backend::Avx2);
        k::set_backend(k::Backend::Auto);
        CHECK(k::active_backend() == k::Backend::Avx2);
    } else {
        CHECK_THROWS_AS(k::set_backend(k::Backend::Avx2), UsageError);
        k::set_backend(k::Backend::Auto);
        CHECK(k::active_backend() == k::Backend::Scalar);
    }
}

TEST_CASE("dispatched entry point agrees under both backends") {
    BackendGuard guard;
    std::mt19937_64 rng(5);
    const auto f = random_factors(rng);
    const auto grid = random_grid(rng, 301);
    std::vector<double> scalar_out(grid.size()), dispatched(grid.size());

    k::set_backend(k::Backend::Scalar);
    k::psd_grid(f, grid.data(), scalar_out.data(), grid.size());
    k::set_backend(k::Backend::Auto);
    k::psd_grid(f, grid.data(), dispatched.data(), grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(dispatched[i] == doctest::Approx(scalar_out[i]).epsilon(1e-13));
}

TEST_CASE("flat fast path: zero readout gives exactly 1 + bb") {
    OscillatorParams p;
    p.omega_s = two_pi * 18e3;
    p.gamma_s0 = two_pi * 1e3;
    p.readout_rate = 0.0;
    const auto f = k::make_budget_factors(p, 0.92, 0.1, TensorConfig{}, 0.25);
    CHECK(f.atomic_zero);
    const std::vector<double> grid = {0.0, two_pi * 18e3, two_pi * 1e6};
    std::vector<double> out(grid.size());
    k::psd_grid(f, grid.data(), out.data(), grid.size());
    for (double v : out) CHECK(v == f.flat);
}
