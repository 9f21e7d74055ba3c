#pragma once

// Zeeman-resolved spectrum synthesis (magneto-optical resonance), quadratic
// Zeeman transition ladder, and extraction of polarization, occupancy and
// effective-mass sign from sublevel populations.

#include <array>
#include <span>

#include "spinspec/kernels.hpp"
#include "spinspec/types.hpp"

namespace spinspec {

// Nine sublevel populations p_{-4}..p_{+4} of the F = 4 manifold.
struct ZeemanPopulations {
    std::array<double, 9> p{};  // index 0 -> m = -4, index 8 -> m = +4

    double& at_m(int m) { return p[static_cast<std::size_t>(m + 4)]; }
    double at_m(int m) const { return p[static_cast<std::size_t>(m + 4)]; }

    // p_m >= 0 and sum = 1 within 1e-9.
    void validate() const;
};

// Transition ladder: (E_{m+1} - E_m)/hbar = Omega_S + Omega_QZS (2m + 1).
struct ZeemanLadder {
    double omega_s = 0.0;    // signed Larmor frequency (rad/s)
    double omega_qzs = 0.0;  // quadratic Zeeman coefficient (rad/s)
    double linewidth = 0.0;  // per-transition FWHM (rad/s), > 0

    void validate() const;
};

enum class MassSign { Positive, Negative };

// Eight transition frequencies for m = -4..+3, ordered by m.
std::array<double, 8> transition_frequencies(const ZeemanLadder& ladder);

// Coherent sum of eight Lorentzian lines with amplitudes
// w_m (p_m - p_{m+1}), w_m = F(F+1) - m(m+1), squared magnitude; matches
// measured power spectra. Amplitudes may be negative.
Spectrum mors_spectrum(const ZeemanLadder& ladder, const ZeemanPopulations& pops,
                       std::span<const double> freq_hz);

// Line-synthesis factors from raw population values (no simplex check); the
// fitting engine calls this with intermediate, possibly unnormalized iterates.
kernels::MorsFactors mors_line_factors(double omega_s, double omega_qzs, double linewidth_fwhm,
                                       const std::array<double, 9>& p);

// Normalized monotone population ladder from eight non-negative decay
// increments: p falls off as exp(-cumulative beta) away from the stretched
// state at the dominant end (m = +4 when high_side).
std::array<double, 9> pops_from_ladder(const std::array<double, 8>& beta, bool high_side);

// P = (sum_m m p_m) / 4, in [-1, 1].
double polarization(const ZeemanPopulations& pops);

// Mean excitation above the stretched state on the relevant side:
// sum (4 - m) p_m for a negative-mass ensemble, sum (4 + m) p_m otherwise.
double thermal_occupancy(const ZeemanPopulations& pops, MassSign sign);

// Negative mass when the population weight sits on the m > 0 side. Throws
// IndeterminateMassError when |P| <= threshold.
MassSign classify_mass(const ZeemanPopulations& pops, double threshold = 0.05);

struct MorsFitResult {
    ZeemanLadder ladder;
    ZeemanPopulations pops;
    double residual_rss = 0.0;
    int iterations = 0;
};

// Damped least-squares fit of the synthesis model to a measured spectrum over
// (Omega_S, Omega_QZS, linewidth, populations), with the populations kept on
// the probability simplex. The data grid must cover all eight transitions of
// the initial ladder. Throws FitError on non-convergence.
MorsFitResult fit_mors(const Spectrum& data, const ZeemanLadder& ladder_init);

}  // namespace spinspec
