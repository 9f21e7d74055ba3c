#pragma once

// Independent reference implementations used as test oracles. These re-derive
// the models with straight complex arithmetic and stay off the library's
// kernel path on purpose.

#include <cmath>
#include <complex>

namespace oracle {

inline std::complex<double> chi(double omega_s, double gamma, double omega) {
    const std::complex<double> d(0.5 * gamma, -omega);
    return omega_s / (d * d + omega_s * omega_s);
}

struct PsdParams {
    double omega_s = 0.0;
    double gamma = 0.0;
    double readout = 0.0;
    double n_s = 0.0;
    double eta = 1.0;
    double s_bb = 0.0;
    double a2_ratio = 0.0;
    double kappa = 1.0;
    bool dc_sin2 = false;
};

inline double psd(const PsdParams& p, double phi, double omega) {
    const double c2 = std::cos(phi) * std::cos(phi);
    const double s2 = std::sin(2.0 * phi);
    double v = 1.0 + p.eta * p.s_bb * c2;
    if (p.eta > 0.0 && p.readout > 0.0) {
        const auto x = chi(p.omega_s, p.gamma, omega);
        v += 4.0 * p.eta * p.readout * p.readout * std::norm(x) * c2;
        v += 2.0 * p.eta * p.readout * x.real() * s2;
        v += 8.0 * p.eta * p.gamma * p.readout * (p.n_s + 0.5) * std::norm(x) * c2;
        if (p.a2_ratio != 0.0) {
            const double w = p.dc_sin2 ? std::sin(phi) * std::sin(phi) : c2;
            v += p.eta * p.a2_ratio * p.a2_ratio * p.readout * p.readout * p.kappa * p.kappa /
                 (p.kappa * p.kappa + omega * omega) * w;
        }
    }
    return v;
}

}  // namespace oracle
