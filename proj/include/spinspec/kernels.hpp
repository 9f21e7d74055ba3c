#pragma once

// Grid evaluation kernels for the hot inner loops: the single-frequency noise
// model swept over a frequency grid, and the Zeeman-resolved line synthesis.
// Each kernel has a scalar reference implementation and an AVX2 variant
// selected at runtime; the two are equivalence-tested against each other.

#include <array>
#include <cstddef>

#include "spinspec/types.hpp"

namespace spinspec::kernels {

// Coefficients of the detected-PSD model, precomputed once per sweep.
// With w the angular frequency, re_d = base - w^2 and
// m2 = re_d^2 + gamma_sq * w^2 (the squared modulus of the susceptibility
// denominator), the total reads
//
//   total(w) = flat + (lorentz_num + corr_num * re_d) / m2
//                   + dc_num / (dc_k2 + w^2).
struct BudgetFactors {
    double base = 0.0;         // omega_s^2 + gamma^2/4
    double gamma_sq = 0.0;     // gamma^2
    double lorentz_num = 0.0;  // (qban + tn weights) * omega_s^2
    double corr_num = 0.0;     // corr weight * omega_s
    double flat = 1.0;         // 1 + bb
    double dc_num = 0.0;       // dc weight * kappa^2
    double dc_k2 = 1.0;        // kappa^2 (kept at 1 when dc_num == 0)
    bool atomic_zero = true;   // all oscillator terms vanish; flat fast path
};

// Builds the sweep coefficients; phi/eta taken from the probe. The overload
// with explicit (eta, phi) serves the phase-sweep optimizer.
BudgetFactors make_budget_factors(const OscillatorParams& params, const ProbeConfig& probe,
                                  const TensorConfig& tensor, double s_bb);
BudgetFactors make_budget_factors(const OscillatorParams& params, double eta, double phi,
                                  const TensorConfig& tensor, double s_bb);

void psd_grid_scalar(const BudgetFactors& f, const double* omega, double* out, std::size_t n);

// Coherent sum of the eight Zeeman lines, squared magnitude.
struct MorsFactors {
    std::array<double, 8> center{};  // transition angular frequencies (rad/s)
    std::array<double, 8> amp{};     // signed line amplitudes
    double hw = 1.0;                 // half width at half maximum (rad/s)
};

void mors_grid_scalar(const MorsFactors& f, const double* omega, double* out, std::size_t n);

#ifdef SPINSPEC_HAVE_AVX2
void psd_grid_avx2(const BudgetFactors& f, const double* omega, double* out, std::size_t n);
void mors_grid_avx2(const MorsFactors& f, const double* omega, double* out, std::size_t n);
#endif

enum class Backend { Auto, Scalar, Avx2 };

// True when the binary carries the AVX2 kernels and the CPU supports them.
bool cpu_has_avx2();

// Process-wide kernel selection. Auto resolves to AVX2 when available, else
// scalar; the SPINSPEC_KERNEL environment variable (scalar|avx2|auto) is
// honored on first use. Forcing Avx2 on an unsupported CPU throws UsageError.
void set_backend(Backend backend);
Backend active_backend();

// Dispatched entry points used by the library.
void psd_grid(const BudgetFactors& f, const double* omega, double* out, std::size_t n);
void mors_grid(const MorsFactors& f, const double* omega, double* out, std::size_t n);

}  // namespace spinspec::kernels
