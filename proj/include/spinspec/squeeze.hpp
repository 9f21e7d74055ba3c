#pragma once

// Quantum cooperativity, predicted and numerically optimized ponderomotive
// squeezing, the virtual-rigidity transform, and force-normalized spectra.

#include <span>

#include "spinspec/types.hpp"

namespace spinspec {

struct SqueezeResult {
    double phi_opt = 0.0;        // rad
    double omega_opt = 0.0;      // rad/s
    double s_min = 1.0;          // shot-noise units
    double analytic_bound = 1.0; // 1 - eta C_q / (C_q + 1)
};

// Oscillator as it appears in the detected light at homodyne phase phi:
// shifted frequency, unchanged damping, reduced readout.
struct EffectiveOscillator {
    double omega_eff = 0.0;    // Omega~_S (rad/s, sign follows omega_s)
    double gamma_s = 0.0;      // unchanged damping (rad/s)
    double readout_eff = 0.0;  // Gamma~_S = Gamma_S cos^2(phi) (rad/s)
};

// Search window for the squeezing optimizer. Angular frequencies are the
// positive analysis-frequency axis; phi should stay within (-pi/2, pi/2].
struct SearchDomain {
    double phi_min = 0.0;
    double phi_max = 0.0;
    double omega_min = 0.0;
    double omega_max = 0.0;
    int phi_points = 201;
    int omega_points = 201;
};

// Window around |omega_s| wide enough to contain the softened resonance.
SearchDomain default_search_domain(const OscillatorParams& params);

// C_q = Gamma_S / (gamma_S (1 + 2 n_S)).
double cooperativity(const OscillatorParams& params);

// Asymptotic squeezing floor 1 - eta C_q / (C_q + 1), valid for
// gamma_S << Gamma_S, |Omega_S|.
double max_squeezing(double c_q, double eta);

// Deterministic coarse grid + coordinate-descent refinement of the total PSD
// over (phi, omega). refine_tol is in shot-noise units.
SqueezeResult optimize_squeezing(const OscillatorParams& params, const ProbeConfig& probe,
                                 const TensorConfig& tensor, double s_bb,
                                 const SearchDomain& domain, double refine_tol = 1e-6);

// Omega~_S = Omega_S sqrt(1 + Gamma_S sin(2 phi)/Omega_S), Gamma~_S = Gamma_S cos^2(phi).
// Throws OverSoftenedError when the radicand is negative, reporting the phase
// at which the effective frequency crosses zero.
EffectiveOscillator effective_oscillator(const OscillatorParams& params, double phi);

// Detected PSD terms re-referenced to the force driving the oscillator:
// division by |N_TN|^2 with N_TN = sqrt(2 Gamma_S gamma_S) chi_S cos(phi).
// quantum_only keeps SN + QBAN + correlation terms only; otherwise the full
// budget (thermal, broadband, DC) enters the numerator.
Spectrum force_normalized_spectrum(const OscillatorParams& params, const ProbeConfig& probe,
                                   const TensorConfig& tensor, double s_bb, bool quantum_only,
                                   std::span<const double> freq_hz);

}  // namespace spinspec
