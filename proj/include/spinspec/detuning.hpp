#pragma once

// Detuning-dependent scalings of readout, damping and noise areas, and the
// optimal-detuning search that trades back-action advantage against near-DC
// tensor noise.

#include <utility>

#include "spinspec/types.hpp"

namespace spinspec {

// Power-law coefficients promoted from trend relations to equalities:
//   Gamma_S(D) = A / D^2,   gamma_S(D) = gamma_S0 + C / D^2,
//   S_DC(D)    = d_coeff / D^r.
// Only ratios and trends are anchored; the absolute scale of each coefficient
// is a fit parameter. Detunings are angular (rad/s).
struct DetuningScaling {
    double a_coeff = 0.0;   // (rad/s)^3
    double c_coeff = 0.0;   // (rad/s)^3
    double gamma_s0 = 0.0;  // rad/s
    double d_coeff = 0.0;   // (rad/s)^r
    double r_exp = 5.0;     // in [4, 6]
    double eta = 1.0;

    void validate() const;
};

double readout_at(const DetuningScaling& s, double delta);   // A / D^2
double damping_at(const DetuningScaling& s, double delta);   // gamma_S0 + C / D^2

// Integrated noise areas, up to the documented unit conventions:
//   area_qban = A^2 / [D^2 (gamma_S0 D^2 + C)]
//   area_tn   = A / D^2
//   area_dc   = d_coeff / [D^4 (gamma_S0 D^2 + C)]
// The per-frequency DC model (TensorConfig) carries its own strength; no
// conversion between the two is assumed here — cross-calibration is an
// explicit caller choice.
double area_qban(const DetuningScaling& s, double delta);
double area_tn(const DetuningScaling& s, double delta);
double area_dc(const DetuningScaling& s, double delta);

// S_S(D) = 1 - eta C_q(D)/(C_q(D)+1) + d_coeff / D^r,
// C_q(D) = A / (C + gamma_S0 D^2).
double squeezing_vs_detuning(const DetuningScaling& s, double delta);

// Golden-section minimizer of squeezing_vs_detuning on [delta_lo, delta_hi];
// returns (delta_opt, s_min). Deterministic; monotone instances converge to
// the corresponding endpoint.
std::pair<double, double> optimal_detuning(const DetuningScaling& s, double delta_lo,
                                           double delta_hi, double rel_tol = 1e-6);

}  // namespace spinspec
