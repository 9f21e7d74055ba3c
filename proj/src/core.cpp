#include "spinspec/core.hpp"

#include <cmath>

#include "spinspec/kernels.hpp"

namespace spinspec {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void OscillatorParams::validate() const {
    if (!finite(omega_s) || !finite(gamma_s0) || !finite(gamma_s_pb) || !finite(readout_rate) ||
        !finite(n_s))
        throw DomainError("oscillator parameters must be finite");
    if (gamma_s0 < 0.0 || gamma_s_pb < 0.0) throw DomainError("damping rates must be >= 0");
    if (readout_rate < 0.0) throw DomainError("readout rate must be >= 0");
    if (n_s < 0.0) throw DomainError("thermal occupancy must be >= 0");
}

void OscillatorParams::validate_spectral() const {
    validate();
    if (omega_s == 0.0) throw DomainError("|omega_s| must be > 0 for spectral evaluation");
    if (readout_rate > 0.0 && gamma_s() <= 0.0)
        throw DomainError("gamma_s must be > 0 when the readout rate is > 0");
}

void ProbeConfig::validate() const {
    if (!finite(phi) || !finite(eta) || !finite(alpha) || !finite(delta))
        throw DomainError("probe parameters must be finite");
    if (eta < 0.0 || eta > 1.0) throw DomainError("eta must lie in [0, 1]");
    if (delta <= 0.0) throw DomainError("optical detuning must be > 0");
}

void TensorConfig::validate() const {
    if (!finite(a2_over_a1) || !finite(dc_weight) || !finite(dc_exponent) || !finite(dc_halfwidth))
        throw DomainError("tensor parameters must be finite");
    if (dc_exponent < 4.0 || dc_exponent > 6.0) throw DomainError("dc exponent must lie in [4, 6]");
    if (dc_halfwidth <= 0.0) throw DomainError("dc halfwidth must be > 0");
}

void Spectrum::validate() const {
    if (freqs_hz.size() != values.size()) throw DomainError("spectrum arrays differ in length");
    if (freqs_hz.empty()) throw UsageError("spectrum is empty");
    for (std::size_t i = 0; i < freqs_hz.size(); ++i) {
        if (!finite(freqs_hz[i]) || !finite(values[i]))
            throw DomainError("spectrum entries must be finite");
        if (i > 0 && freqs_hz[i] <= freqs_hz[i - 1])
            throw DomainError("frequency grid must be strictly increasing");
    }
}

std::complex<double> susceptibility(const OscillatorParams& params, double omega) {
    params.validate();
    if (!finite(omega)) throw DomainError("omega must be finite");
    if (params.omega_s == 0.0) throw DomainError("|omega_s| must be > 0");
    const std::complex<double> d(0.5 * params.gamma_s(), -omega);
    return params.omega_s / (d * d + params.omega_s * params.omega_s);
}

double tensor_coupling(double alpha, double a2_over_a1) {
    if (!finite(alpha) || !finite(a2_over_a1)) throw DomainError("inputs must be finite");
    return -14.0 * a2_over_a1 * std::cos(2.0 * alpha);
}

double modified_damping(const OscillatorParams& params, double e_s) {
    params.validate();
    if (!finite(e_s)) throw DomainError("tensor coupling must be finite");
    const double gamma_prime = params.gamma_s() + 2.0 * e_s * params.readout_rate;
    if (gamma_prime <= 0.0)
        throw InstabilityError("modified damping is non-positive: self-oscillation regime",
                               gamma_prime);
    return gamma_prime;
}

NoiseBudget budget_terms(const OscillatorParams& params, const ProbeConfig& probe,
                         const TensorConfig& tensor, double s_bb, double omega) {
    params.validate_spectral();
    probe.validate();
    tensor.validate();
    if (!finite(omega) || !finite(s_bb)) throw DomainError("inputs must be finite");

    const double c2 = std::cos(probe.phi) * std::cos(probe.phi);
    const double s2phi = std::sin(2.0 * probe.phi);
    const double eta = probe.eta;
    const double readout = params.readout_rate;
    const double gamma = params.gamma_s();

    NoiseBudget b;
    b.bb = eta * s_bb * c2;
    if (eta > 0.0 && readout > 0.0) {
        const std::complex<double> chi = susceptibility(params, omega);
        const double chi2 = std::norm(chi);
        b.qban = 4.0 * eta * readout * readout * chi2 * c2;
        b.corr = 2.0 * eta * readout * chi.real() * s2phi;
        b.tn = 8.0 * eta * gamma * readout * (params.n_s + 0.5) * chi2 * c2;
        if (tensor.a2_over_a1 != 0.0) {
            const double k2 = tensor.dc_halfwidth * tensor.dc_halfwidth;
            const double dc_phase =
                tensor.dc_phase == DcPhaseWeight::Cos2 ? c2 : std::sin(probe.phi) * std::sin(probe.phi);
            b.dc = eta * tensor.a2_over_a1 * tensor.a2_over_a1 * readout * readout *
                   k2 / (k2 + omega * omega) * dc_phase;
        }
    }
    return b;
}

Spectrum psd_total(const OscillatorParams& params, const ProbeConfig& probe,
                   const TensorConfig& tensor, double s_bb, std::span<const double> freq_hz) {
    if (freq_hz.empty()) throw UsageError("frequency grid is empty");
    const auto factors = kernels::make_budget_factors(params, probe, tensor, s_bb);

    Spectrum s;
    s.freqs_hz.assign(freq_hz.begin(), freq_hz.end());
    s.values.resize(freq_hz.size());
    std::vector<double> omega(freq_hz.size());
    for (std::size_t i = 0; i < freq_hz.size(); ++i) omega[i] = two_pi * freq_hz[i];
    kernels::psd_grid(factors, omega.data(), s.values.data(), omega.size());
    s.validate();
    return s;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    if (n < 2) throw UsageError("linspace needs at least 2 points");
    if (!(lo < hi)) throw UsageError("linspace needs lo < hi");
    std::vector<double> g(n);
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
    g.back() = hi;
    return g;
}

}  // namespace spinspec
