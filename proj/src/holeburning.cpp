#include "tlsnl/holeburning.hpp"

#include <cmath>
#include <string>

#include "tlsnl/constants.hpp"
#include "tlsnl/errors.hpp"

namespace tlsnl {

void HoleburnParams::validate() const {
    if (!(g_over_2pi > 0.0) || !(n_s > 0.0)) throw ValidationError("hole burning: g and n_s must be positive");
    if (!(gamma0 >= 0.0) || !(kappa_i0 >= 0.0)) throw ValidationError("hole burning: damping rates must be non-negative");
    if (!(kappa_e > 0.0)) throw ValidationError("hole burning: kappa_e must be positive");
}

double HoleburnParams::gamma2() const {
    const double g = kTwoPi * g_over_2pi;
    return std::sqrt(2.0 * g * g * n_s);
}

double holeburn_gamma0(double omega_r, double fd0, double T) {
    if (!(T > 0.0)) throw DomainError("holeburn_gamma0: temperature must be positive");
    return omega_r * fd0 * std::tanh(kHbar * omega_r / (2.0 * kBoltzmann * T));
}

HoleburnResponse holeburn_response(double delta, double nbar, const HoleburnParams& hp) {
    if (!(nbar >= 0.0)) throw DomainError("holeburn_response: nbar must be non-negative");
    const double s = nbar / hp.n_s;
    const double root = std::sqrt(1.0 + s);
    const double u = delta / hp.gamma2();
    const double den = u * u + (1.0 + root) * (1.0 + root);
    HoleburnResponse r;
    r.delta_omega_r = -0.5 * hp.gamma0 * u * s / (root * den);
    r.kappa_i = hp.kappa_i0 + hp.gamma0 * (1.0 - s / root * (1.0 + root) / den);
    return r;
}

double holeburn_critical_power(const HoleburnParams& hp, double omega_r) {
    const double g = kTwoPi * hp.g_over_2pi;
    return kHbar * omega_r / hp.kappa_e * 2.0 * g * g * hp.n_s * hp.n_s;
}

double holeburn_max_pull(const HoleburnParams& hp) { return 0.25 * hp.gamma0; }

double holeburn_hole_width(const HoleburnParams& hp, double nbar) {
    return hp.gamma2() * std::sqrt(1.0 + nbar / hp.n_s);
}

std::vector<HoleburnPoint> holeburn_selfconsistent(const std::vector<double>& f_grid, double p_s,
                                                   const HoleburnParams& hp, double omega_r0,
                                                   const HoleburnOptions& opt) {
    hp.validate();
    if (!(p_s >= 0.0)) throw ValidationError("holeburn_selfconsistent: p_s must be non-negative");
    if (!(omega_r0 > 0.0)) throw ValidationError("holeburn_selfconsistent: omega_r0 must be positive");
    std::vector<HoleburnPoint> out;
    out.reserve(f_grid.size());
    for (double f : f_grid) {
        const double w = kTwoPi * f;
        HoleburnPoint pt;
        pt.f_probe = f;
        double shift = 0.0;
        double kappa_i = hp.kappa_i0 + hp.gamma0;
        std::vector<double> hist;
        bool done = false;
        for (int it = 0; it < opt.max_iter; ++it) {
            const double omega_r = omega_r0 + shift;
            const double delta = w - omega_r;
            const double half = 0.5 * (kappa_i + hp.kappa_e);
            const double nbar = hp.kappa_e / (delta * delta + half * half) * p_s / (kHbar * omega_r);
            const HoleburnResponse r = holeburn_response(delta, nbar, hp);
            const double change = std::fabs(r.delta_omega_r - shift);
            hist.push_back(change);
            shift = r.delta_omega_r;
            kappa_i = r.kappa_i;
            pt.nbar = nbar;
            pt.iterations = it + 1;
            if (change <= opt.tol) {
                done = true;
                break;
            }
        }
        if (!done)
            throw ConvergenceError("hole-burning iteration did not converge at f = " + std::to_string(f) + " Hz", hist);
        pt.delta_omega_r = shift;
        pt.kappa_i = kappa_i;
        pt.delta = w - (omega_r0 + shift);
        out.push_back(pt);
    }
    return out;
}

}  // namespace tlsnl
