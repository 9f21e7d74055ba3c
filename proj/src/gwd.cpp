#include "spinspec/gwd.hpp"

#include <cmath>

namespace spinspec {

void GwdConfig::validate() const {
    if (!std::isfinite(omega_qi) || omega_qi <= 0.0)
        throw DomainError("interferometer coupling rate must be > 0");
    if (!std::isfinite(squeeze_db) || squeeze_db < 0.0)
        throw DomainError("squeezing must be >= 0 dB");
    if (!std::isfinite(c_q) || c_q < 0.0) throw DomainError("cooperativity must be >= 0");
    if (!std::isfinite(n_s) || n_s < 0.0) throw DomainError("occupancy must be >= 0");
    if (!std::isfinite(omega_s_bare)) throw DomainError("bare spin frequency must be finite");
}

double k_interferometer(double omega, double omega_qi) {
    if (!std::isfinite(omega) || !std::isfinite(omega_qi))
        throw DomainError("inputs must be finite");
    if (omega == 0.0) throw DomainError("free-mass response diverges at omega = 0");
    const double r = omega_qi / omega;
    return r * r;
}

double interferometer_noise(double omega, const GwdConfig& config) {
    config.validate();
    const double k = k_interferometer(omega, config.omega_qi);
    const double e2r = std::pow(10.0, config.squeeze_db / 10.0);  // e^{2r}
    return 0.5 * (e2r * k + 1.0 / (e2r * k));
}

double joint_noise(double omega, const GwdConfig& config) {
    config.validate();
    const double c_q = config.effective_cooperativity();
    if (c_q == 0.0) throw DomainError("joint readout requires a nonzero cooperativity");
    const double k = k_interferometer(omega, config.omega_qi);
    const double em2r = std::pow(10.0, -config.squeeze_db / 10.0);  // e^{-2r}

    if (!config.spin.has_value())
        return 0.5 * (k + 1.0 / k) * (em2r + 1.0 / c_q);

    // Frequency mismatch: the spin channel responds through the softened
    // oscillator instead of the free-mass law.
    const EffectiveOscillator& spin = *config.spin;
    const double om_eff2 = spin.omega_eff * spin.omega_eff;
    const double re = om_eff2 - omega * omega;
    const double im = spin.gamma_s * omega;
    const double k_s = spin.readout_eff * std::abs(config.omega_s_bare) /
                       std::sqrt(re * re + im * im);
    const double cosh2r = 0.5 * (em2r + 1.0 / em2r);
    const double mismatch = std::sqrt(k) - std::sqrt(k_s);
    return 0.5 * (em2r * (k + 1.0 / k) + cosh2r * mismatch * mismatch + k_s / c_q);
}

}  // namespace spinspec
