#pragma once

// Strain-referenced quantum-noise projection for an interferometer alone,
// with injected squeezing, and jointly with a matched negative-mass spin
// oscillator.
//
// This is a deliberately simplified lossless model: free-mass response
// factor, ideal broadband entanglement suppression of the matched joint
// noise, thermal penalty 1/C_q with the same spectral shape, anti-squeezed
// penalty on unmatched back-action. Output is normalized so the standard
// quantum limit is 1 at every frequency; absolute strain units are out of
// scope.

#include <optional>

#include "spinspec/squeeze.hpp"
#include "spinspec/types.hpp"

namespace spinspec {

struct GwdConfig {
    double omega_qi = two_pi * 100.0;     // interferometer coupling rate (rad/s)
    double squeeze_db = 0.0;              // injected squeezing (dB, >= 0)
    double c_q = 0.0;                     // spin cooperativity at zero occupancy (Gamma_S/gamma_S)
    double n_s = 0.0;                     // spin occupancy; enters via the cooperativity
    double omega_s_bare = two_pi * 76.0;  // bare spin frequency for mismatch mode (rad/s)
    std::optional<EffectiveOscillator> spin;  // set => frequency-mismatch mode

    double effective_cooperativity() const { return c_q / (1.0 + 2.0 * n_s); }
    void validate() const;
};

// Free-mass back-action factor K_I = (Omega_qI / Omega)^2.
double k_interferometer(double omega, double omega_qi);

// S/S_SQL = (e^{2r} K_I + e^{-2r} / K_I) / 2 for a phase-squeezed input;
// squeeze_db = 0 is the plain quantum-noise-limited interferometer.
double interferometer_noise(double omega, const GwdConfig& config);

// Joint spin + interferometer readout with a two-mode-squeezed link.
// Matched mode (config.spin unset):
//   S/S_SQL = (K_I + 1/K_I)/2 * (e^{-2r} + 1/C_q).
// Mismatch mode (config.spin set), with
//   K_S = Gamma~_S |Omega_S| / |Omega~_S^2 - Omega^2 - i gamma_S Omega|:
//   S/S_SQL = [e^{-2r}(K_I + 1/K_I) + cosh(2r)(sqrt(K_I)-sqrt(K_S))^2 + K_S/C_q]/2.
double joint_noise(double omega, const GwdConfig& config);

}  // namespace spinspec
