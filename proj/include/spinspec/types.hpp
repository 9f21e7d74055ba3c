#pragma once

#include <cstddef>
#include <vector>

#include "spinspec/errors.hpp"

namespace spinspec {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 6.28318530717958647692;

// State of the probed spin oscillator. All rates are angular (rad/s); the
// sign of omega_s encodes the effective mass (negative = inverted population,
// negative-mass configuration).
struct OscillatorParams {
    double omega_s = 0.0;      // signed Larmor frequency (rad/s)
    double gamma_s0 = 0.0;     // intrinsic damping (rad/s)
    double gamma_s_pb = 0.0;   // probe power-broadening damping (rad/s)
    double readout_rate = 0.0; // measurement rate Gamma_S (rad/s)
    double n_s = 0.0;          // thermal occupancy

    double gamma_s() const { return gamma_s0 + gamma_s_pb; }

    // Field-range checks.
    void validate() const;
    // Additionally requires |omega_s| > 0 and gamma_s > 0 whenever the
    // oscillator is actually read out. Call before any spectral evaluation.
    void validate_spectral() const;
};

// The measurement channel: detected quadrature Q(phi) = P cos(phi) + X sin(phi),
// phi = 0 is the phase quadrature carrying the spin signal.
struct ProbeConfig {
    double phi = 0.0;                  // homodyne quadrature phase (rad)
    double eta = 1.0;                  // overall detection efficiency in [0, 1]
    double alpha = pi / 4;             // input polarization angle (rad); pi/4 = QND point
    double delta = two_pi * 1.6e9;     // optical detuning (rad/s), > 0

    void validate() const;
};

// Which homodyne weighting the near-DC tensor noise follows. The measured
// phase dependence is not settled; both options are provided.
enum class DcPhaseWeight { Cos2, Sin2 };

// Tensor-polarizability noise model at the working detuning.
struct TensorConfig {
    double a2_over_a1 = 0.0;             // polarizability ratio
    double dc_weight = 0.0;              // DC-noise strength D in S_DC = D / Delta^r
    double dc_exponent = 5.0;            // r, in [4, 6]
    double dc_halfwidth = two_pi * 1e3;  // half-width of the zero-centered response (rad/s)
    DcPhaseWeight dc_phase = DcPhaseWeight::Cos2;

    void validate() const;
};

// Per-frequency decomposition of the detected PSD in shot-noise units.
struct NoiseBudget {
    double sn = 1.0;   // imprecision shot noise, exactly 1
    double qban = 0.0; // quantum back-action term
    double corr = 0.0; // shot-noise / back-action cross term (signed)
    double tn = 0.0;   // thermal-force response
    double bb = 0.0;   // broadband spin-response floor
    double dc = 0.0;   // zero-frequency tensor alignment noise

    double total() const { return sn + qban + corr + tn + bb + dc; }
};

// Frequency grid (ordinary Hz) with PSD samples in shot-noise units.
// Negative samples are tolerated (calibration-subtracted measurements can dip
// below zero); loaders flag them.
struct Spectrum {
    std::vector<double> freqs_hz;
    std::vector<double> values;

    std::size_t size() const { return freqs_hz.size(); }
    // Equal lengths, strictly increasing grid, finite entries.
    void validate() const;
};

}  // namespace spinspec
