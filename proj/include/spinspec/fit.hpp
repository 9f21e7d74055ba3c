#pragma once

// Damped least-squares fitting engine for the spectral models, with named
// parameters, box bounds, rank-deficiency detection and local uncertainty
// estimates.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "spinspec/types.hpp"

namespace spinspec {

enum class FitModel { Eq1, Eq1Dc, Mors, MorsLadder, MultiLorentzBb };

// Parameter names by model (frequencies are ordinary Hz in the fit space):
//   Eq1:            omega_s_hz, gamma_s_hz, readout_hz, n_s, eta, phi_rad, s_bb
//   Eq1Dc:          Eq1 plus a2_over_a1, dc_halfwidth_hz
//                   (dc_phase_sin2 = 0/1 selects the homodyne weighting; fixed only)
//   Mors:           omega_s_hz, omega_qzs_hz, linewidth_hz,
//                   p_m4, p_m3, p_m2, p_m1, p_0, p_p1, p_p2, p_p3
//                   (p_p4 = 1 - sum of the eight free populations)
//   MorsLadder:     omega_s_hz, omega_qzs_hz, linewidth_hz, beta_1..beta_8
//                   (monotone population ladder p ~ exp(-cumulative beta)
//                   descending from the stretched state; ladder_high_side = 0/1
//                   picks the dominant end; fixed only). The power spectrum
//                   constrains the line-amplitude signs only through weak
//                   overlap cross terms, so the unrestricted population fit
//                   has near-degenerate sign branches at realistic noise;
//                   this variant removes them.
//   MultiLorentzBb: omega_s_hz plus bb_amp_1..N, bb_width_1..N
//                   (peak amplitude in shot-noise units, width = damping in Hz)
std::vector<std::string> model_parameter_names(FitModel model, int n_components = 1);

// Evaluates a model over an ordinary-frequency grid. params must contain
// every name reported by model_parameter_names.
std::vector<double> eval_model(FitModel model, int n_components,
                               const std::map<std::string, double>& params,
                               std::span<const double> freq_hz);

struct FitProblem {
    Spectrum data;
    FitModel model = FitModel::Eq1;
    int n_components = 1;
    std::map<std::string, double> init;        // full parameter set
    std::vector<std::string> free_names;
    std::map<std::string, std::pair<double, double>> bounds;  // optional, per name
    std::vector<double> weights;               // empty = uniform
    // Natural variation scale per parameter for numeric differentiation;
    // defaults to |value|. Offset-like parameters (a line position far from
    // zero) need this to be the feature width instead.
    std::map<std::string, double> diff_scales;
    bool data_has_negative = false;            // propagated from the loader

    void validate() const;
};

struct FitParam {
    double value = 0.0;
    double sigma = 0.0;  // one-sigma from the local curvature; 0 for fixed parameters
};

struct FitReport {
    std::map<std::string, FitParam> params;
    double residual_rss = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> projected;  // parameters that hit a bound
    std::vector<std::string> warnings;
};

// Levenberg-style damped least squares: damping multiplied by 3 on a rejected
// step and divided by 3 on an accepted one, starting from 1e-3 relative to the
// normal-matrix diagonal. Stops at relative RSS change < 1e-10 or 500
// iterations. Deterministic given the problem. Throws RankDeficiencyError
// when the normal equations are singular, naming the unidentifiable
// parameters.
FitReport fit_spectrum(const FitProblem& problem);

}  // namespace spinspec
