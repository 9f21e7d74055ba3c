#include "spinspec/detuning.hpp"

#include <cmath>

namespace spinspec {

namespace {

void check_delta(double delta) {
    if (!std::isfinite(delta) || delta <= 0.0) throw DomainError("detuning must be > 0");
}

}  // namespace

void DetuningScaling::validate() const {
    if (!std::isfinite(a_coeff) || !std::isfinite(c_coeff) || !std::isfinite(gamma_s0) ||
        !std::isfinite(d_coeff) || !std::isfinite(r_exp) || !std::isfinite(eta))
        throw DomainError("detuning coefficients must be finite");
    if (a_coeff < 0.0 || c_coeff < 0.0 || gamma_s0 < 0.0 || d_coeff < 0.0)
        throw DomainError("detuning coefficients must be >= 0");
    if (r_exp < 4.0 || r_exp > 6.0) throw DomainError("dc exponent must lie in [4, 6]");
    if (eta < 0.0 || eta > 1.0) throw DomainError("eta must lie in [0, 1]");
}

double readout_at(const DetuningScaling& s, double delta) {
    s.validate();
    check_delta(delta);
    return s.a_coeff / (delta * delta);
}

double damping_at(const DetuningScaling& s, double delta) {
    s.validate();
    check_delta(delta);
    return s.gamma_s0 + s.c_coeff / (delta * delta);
}

double area_qban(const DetuningScaling& s, double delta) {
    s.validate();
    check_delta(delta);
    const double d2 = delta * delta;
    return s.a_coeff * s.a_coeff / (d2 * (s.gamma_s0 * d2 + s.c_coeff));
}

double area_tn(const DetuningScaling& s, double delta) {
    s.validate();
    check_delta(delta);
    return s.a_coeff / (delta * delta);
}

double area_dc(const DetuningScaling& s, double delta) {
    s.validate();
    check_delta(delta);
    const double d2 = delta * delta;
    return s.d_coeff / (d2 * d2 * (s.gamma_s0 * d2 + s.c_coeff));
}

double squeezing_vs_detuning(const DetuningScaling& s, double delta) {
    s.validate();
    check_delta(delta);
    const double c_q = s.a_coeff / (s.c_coeff + s.gamma_s0 * delta * delta);
    return 1.0 - s.eta * c_q / (c_q + 1.0) + s.d_coeff / std::pow(delta, s.r_exp);
}

std::pair<double, double> optimal_detuning(const DetuningScaling& s, double delta_lo,
                                           double delta_hi, double rel_tol) {
    s.validate();
    if (!std::isfinite(delta_lo) || !std::isfinite(delta_hi) || delta_lo <= 0.0 ||
        delta_hi <= 0.0 || !(delta_lo < delta_hi))
        throw UsageError("detuning range is empty or invalid");
    if (!(rel_tol > 0.0)) throw UsageError("relative tolerance must be > 0");

    constexpr double invphi = 0.61803398874989484820;
    double a = delta_lo;
    double b = delta_hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = squeezing_vs_detuning(s, x1);
    double f2 = squeezing_vs_detuning(s, x2);
    while ((b - a) > rel_tol * 0.5 * (a + b)) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = squeezing_vs_detuning(s, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = squeezing_vs_detuning(s, x2);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, squeezing_vs_detuning(s, x)};
}

}  // namespace spinspec
