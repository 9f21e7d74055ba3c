#pragma once

// Domain types, the complex spin susceptibility, and the single-frequency
// noise model of the detected probe light, extended with broadband and
// near-DC tensor terms.

#include <complex>
#include <span>

#include "spinspec/types.hpp"

namespace spinspec {

// chi_S(w) = Omega_S / [(gamma_S/2 - i w)^2 + Omega_S^2].
// Signed omega_s flips the sign of the response; gamma may be zero.
std::complex<double> susceptibility(const OscillatorParams& params, double omega);

// Tensor alignment coupling E_S = -14 (a2/a1) cos(2 alpha). Vanishes at the
// QND polarization angle alpha = pi/4.
double tensor_coupling(double alpha, double a2_over_a1);

// Dynamic damping gamma' = gamma_S + 2 E_S Gamma_S. Throws InstabilityError
// when gamma' <= 0 (self-oscillation regime).
double modified_damping(const OscillatorParams& params, double e_s);

// All terms of the detected PSD at one angular frequency, shot-noise units.
// s_bb is the flat broadband floor in shot-noise units.
NoiseBudget budget_terms(const OscillatorParams& params, const ProbeConfig& probe,
                         const TensorConfig& tensor, double s_bb, double omega);

// Total PSD swept over an ordinary-frequency grid (Hz in, shot-noise units out).
Spectrum psd_total(const OscillatorParams& params, const ProbeConfig& probe,
                   const TensorConfig& tensor, double s_bb, std::span<const double> freq_hz);

// Evenly spaced grid helper (ordinary Hz), n >= 2.
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace spinspec
