#pragma once

#include <vector>

namespace tlsnl {

// all rates in rad/s
struct HoleburnParams {
    double g_over_2pi = 0.0;
    double n_s = 1.0;
    double gamma0 = 0.0;
    double kappa_i0 = 0.0;
    double kappa_e = 0.0;
    void validate() const;
    double gamma2() const;
};

// omega_r Fd0 tanh(hbar omega_r / 2 k_B T)
double holeburn_gamma0(double omega_r, double fd0, double T);

struct HoleburnResponse {
    double delta_omega_r = 0.0;
    double kappa_i = 0.0;
};

HoleburnResponse holeburn_response(double delta, double nbar, const HoleburnParams& hp);

// (hbar omega_r / kappa_e) 2 g^2 n_s^2
double holeburn_critical_power(const HoleburnParams& hp, double omega_r);
double holeburn_max_pull(const HoleburnParams& hp);
// Gamma_2 sqrt(1 + nbar/n_s)
double holeburn_hole_width(const HoleburnParams& hp, double nbar);

struct HoleburnPoint {
    double f_probe = 0.0;
    double delta = 0.0;
    double delta_omega_r = 0.0;
    double kappa_i = 0.0;
    double nbar = 0.0;
    int iterations = 0;
};

struct HoleburnOptions {
    double tol = 1e-3;
    int max_iter = 500;
};

// shifts are referenced to the bare omega_r0 on every pass
std::vector<HoleburnPoint> holeburn_selfconsistent(const std::vector<double>& f_grid, double p_s,
                                                   const HoleburnParams& hp, double omega_r0,
                                                   const HoleburnOptions& opt = {});

}  // namespace tlsnl
