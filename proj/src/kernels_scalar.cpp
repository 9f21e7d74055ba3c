#include <cmath>

#include "spinspec/kernels.hpp"

namespace spinspec::kernels {

namespace {

BudgetFactors build(const OscillatorParams& params, double eta, double phi,
                    const TensorConfig& tensor, double s_bb) {
    params.validate_spectral();
    tensor.validate();

    const double gamma = params.gamma_s();
    const double readout = params.readout_rate;
    const double c2 = std::cos(phi) * std::cos(phi);
    const double s2phi = std::sin(2.0 * phi);

    const double qban_w = 4.0 * eta * readout * readout * c2;
    const double tn_w = 8.0 * eta * gamma * readout * (params.n_s + 0.5) * c2;
    const double corr_w = 2.0 * eta * readout * s2phi;
    const double dc_phase = tensor.dc_phase == DcPhaseWeight::Cos2 ? c2 : std::sin(phi) * std::sin(phi);
    const double dc_w = eta * tensor.a2_over_a1 * tensor.a2_over_a1 * readout * readout * dc_phase;

    BudgetFactors f;
    f.base = params.omega_s * params.omega_s + 0.25 * gamma * gamma;
    f.gamma_sq = gamma * gamma;
    f.lorentz_num = (qban_w + tn_w) * params.omega_s * params.omega_s;
    f.corr_num = corr_w * params.omega_s;
    f.flat = 1.0 + eta * s_bb * c2;
    if (dc_w != 0.0) {
        f.dc_k2 = tensor.dc_halfwidth * tensor.dc_halfwidth;
        f.dc_num = dc_w * f.dc_k2;
    } else {
        f.dc_k2 = 1.0;
        f.dc_num = 0.0;
    }
    f.atomic_zero = f.lorentz_num == 0.0 && f.corr_num == 0.0 && f.dc_num == 0.0;
    return f;
}

}  // namespace

BudgetFactors make_budget_factors(const OscillatorParams& params, const ProbeConfig& probe,
                                  const TensorConfig& tensor, double s_bb) {
    probe.validate();
    return build(params, probe.eta, probe.phi, tensor, s_bb);
}

BudgetFactors make_budget_factors(const OscillatorParams& params, double eta, double phi,
                                  const TensorConfig& tensor, double s_bb) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("eta must lie in [0, 1]");
    if (!std::isfinite(phi)) throw DomainError("phi must be finite");
    return build(params, eta, phi, tensor, s_bb);
}

void psd_grid_scalar(const BudgetFactors& f, const double* omega, double* out, std::size_t n) {
    if (f.atomic_zero) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f.flat;
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double w2 = omega[i] * omega[i];
        const double re_d = f.base - w2;
        const double m2 = re_d * re_d + f.gamma_sq * w2;
        out[i] = f.flat + (f.lorentz_num + f.corr_num * re_d) / m2 + f.dc_num / (f.dc_k2 + w2);
    }
}

void mors_grid_scalar(const MorsFactors& f, const double* omega, double* out, std::size_t n) {
    const double hw2 = f.hw * f.hw;
    for (std::size_t i = 0; i < n; ++i) {
        // chi_m = hw / (hw + i d) = hw (hw - i d) / (hw^2 + d^2)
        double re = 0.0;
        double im = 0.0;
        for (int m = 0; m < 8; ++m) {
            const double d = omega[i] - f.center[static_cast<std::size_t>(m)];
            const double s = f.amp[static_cast<std::size_t>(m)] / (hw2 + d * d);
            re += s * hw2;
            im -= s * f.hw * d;
        }
        out[i] = re * re + im * im;
    }
}

}  // namespace spinspec::kernels
