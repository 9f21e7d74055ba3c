#include "spinspec/squeeze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "spinspec/core.hpp"
#include "spinspec/kernels.hpp"

namespace spinspec {

namespace {

struct PsdPoint {
    const OscillatorParams& params;
    const TensorConfig& tensor;
    double eta;
    double s_bb;

    double at(double phi, double omega) const {
        const auto f = kernels::make_budget_factors(params, eta, phi, tensor, s_bb);
        double out;
        kernels::psd_grid_scalar(f, &omega, &out, 1);
        return out;
    }
};

// Golden-section minimum on [a, b]; returns (x, f(x)).
template <typename F>
std::pair<double, double> golden_min(F&& fn, double a, double b) {
    constexpr double invphi = 0.61803398874989484820;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = fn(x1);
    double f2 = fn(x2);
    for (int i = 0; i < 120; ++i) {
        if ((b - a) <= 1e-14 * (std::abs(a) + std::abs(b)) + 1e-300) break;
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = fn(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = fn(x2);
        }
    }
    return f1 <= f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

}  // namespace

SearchDomain default_search_domain(const OscillatorParams& params) {
    params.validate_spectral();
    const double om = std::abs(params.omega_s);
    const double readout = params.readout_rate;
    const double gamma = params.gamma_s();
    SearchDomain d;
    d.phi_min = -pi / 2 + 1e-6;
    d.phi_max = pi / 2;
    d.omega_min = std::max(0.02 * om, om - 2.0 * readout - 10.0 * gamma);
    d.omega_max = om + readout + 10.0 * gamma;
    return d;
}

double cooperativity(const OscillatorParams& params) {
    params.validate();
    if (params.gamma_s() <= 0.0) throw DomainError("cooperativity requires gamma_s > 0");
    return params.readout_rate / (params.gamma_s() * (1.0 + 2.0 * params.n_s));
}

double max_squeezing(double c_q, double eta) {
    if (!std::isfinite(c_q) || c_q < 0.0) throw DomainError("cooperativity must be >= 0");
    if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0) throw DomainError("eta must lie in [0, 1]");
    return 1.0 - eta * c_q / (c_q + 1.0);
}

SqueezeResult optimize_squeezing(const OscillatorParams& params, const ProbeConfig& probe,
                                 const TensorConfig& tensor, double s_bb,
                                 const SearchDomain& domain, double refine_tol) {
    params.validate_spectral();
    probe.validate();
    tensor.validate();
    if (!(domain.phi_min < domain.phi_max) || !(domain.omega_min < domain.omega_max) ||
        domain.phi_points < 2 || domain.omega_points < 2)
        throw UsageError("squeezing search domain is empty");
    if (!(refine_tol > 0.0)) throw UsageError("refinement tolerance must be > 0");

    const std::size_t np = static_cast<std::size_t>(domain.phi_points);
    const std::size_t no = static_cast<std::size_t>(domain.omega_points);
    const double phi_step = (domain.phi_max - domain.phi_min) / static_cast<double>(np - 1);
    const double omega_step = (domain.omega_max - domain.omega_min) / static_cast<double>(no - 1);

    std::vector<double> omega(no);
    for (std::size_t j = 0; j < no; ++j)
        omega[j] = domain.omega_min + omega_step * static_cast<double>(j);

    // Coarse deterministic grid: one kernel sweep per phase.
    std::vector<double> row(no);
    double best = std::numeric_limits<double>::infinity();
    double phi_best = domain.phi_min;
    double omega_best = omega.front();
    for (std::size_t i = 0; i < np; ++i) {
        const double phi = domain.phi_min + phi_step * static_cast<double>(i);
        const auto f = kernels::make_budget_factors(params, probe.eta, phi, tensor, s_bb);
        kernels::psd_grid(f, omega.data(), row.data(), no);
        for (std::size_t j = 0; j < no; ++j) {
            if (row[j] < best) {
                best = row[j];
                phi_best = phi;
                omega_best = omega[j];
            }
        }
    }

    // Coordinate descent with golden-section line searches. Windows track the
    // recent step size so diagonal valleys stay reachable.
    const PsdPoint eval{params, tensor, probe.eta, s_bb};
    double wp = phi_step;
    double wo = omega_step;
    double s_best = best;
    for (int iter = 0; iter < 200; ++iter) {
        const double lo_p = std::max(domain.phi_min, phi_best - wp);
        const double hi_p = std::min(domain.phi_max, phi_best + wp);
        const auto [phi_new, s_phi] =
            golden_min([&](double p) { return eval.at(p, omega_best); }, lo_p, hi_p);
        const double dphi = std::abs(phi_new - phi_best);
        phi_best = phi_new;

        const double lo_o = std::max(domain.omega_min, omega_best - wo);
        const double hi_o = std::min(domain.omega_max, omega_best + wo);
        const auto [omega_new, s_omega] =
            golden_min([&](double w) { return eval.at(phi_best, w); }, lo_o, hi_o);
        const double domg = std::abs(omega_new - omega_best);
        omega_best = omega_new;

        const double s_new = std::min(s_phi, s_omega);
        const double improve = s_best - s_new;
        if (s_new < s_best) s_best = s_new;

        wp = std::min(std::max(4.0 * dphi, wp * 0.35), domain.phi_max - domain.phi_min);
        wo = std::min(std::max(4.0 * domg, wo * 0.35), domain.omega_max - domain.omega_min);
        if (iter >= 2 && improve < refine_tol) break;
    }

    SqueezeResult r;
    r.phi_opt = phi_best;
    r.omega_opt = omega_best;
    r.s_min = eval.at(phi_best, omega_best);
    r.analytic_bound = max_squeezing(cooperativity(params), probe.eta);
    return r;
}

EffectiveOscillator effective_oscillator(const OscillatorParams& params, double phi) {
    params.validate_spectral();
    if (!std::isfinite(phi)) throw DomainError("phi must be finite");
    const double radicand = 1.0 + params.readout_rate * std::sin(2.0 * phi) / params.omega_s;
    if (radicand < 0.0) {
        const double sc = std::clamp(-params.omega_s / params.readout_rate, -1.0, 1.0);
        const double phi_c = 0.5 * std::asin(sc);
        throw OverSoftenedError(
            "over-softened: effective frequency reaches zero at phi = " + std::to_string(phi_c),
            phi_c);
    }
    EffectiveOscillator e;
    e.omega_eff = params.omega_s * std::sqrt(radicand);
    e.gamma_s = params.gamma_s();
    e.readout_eff = params.readout_rate * std::cos(phi) * std::cos(phi);
    return e;
}

Spectrum force_normalized_spectrum(const OscillatorParams& params, const ProbeConfig& probe,
                                   const TensorConfig& tensor, double s_bb, bool quantum_only,
                                   std::span<const double> freq_hz) {
    params.validate_spectral();
    probe.validate();
    tensor.validate();
    if (freq_hz.empty()) throw UsageError("frequency grid is empty");
    const double c = std::cos(probe.phi);
    if (std::abs(c) < 1e-8)
        throw DivergentNormalizationError("force normalization diverges at the amplitude quadrature");
    const double gamma = params.gamma_s();
    const double readout = params.readout_rate;
    if (readout <= 0.0 || gamma <= 0.0)
        throw DomainError("force normalization requires readout rate and damping > 0");

    Spectrum out;
    out.freqs_hz.assign(freq_hz.begin(), freq_hz.end());
    out.values.resize(freq_hz.size());
    for (std::size_t i = 0; i < freq_hz.size(); ++i) {
        const double omega = two_pi * freq_hz[i];
        const NoiseBudget b = budget_terms(params, probe, tensor, s_bb, omega);
        double num = b.sn + b.qban + b.corr;
        if (!quantum_only) num += b.tn + b.bb + b.dc;
        const double chi2 = std::norm(susceptibility(params, omega));
        out.values[i] = num / (2.0 * readout * gamma * chi2 * c * c);
    }
    out.validate();
    return out;
}

}  // namespace spinspec
