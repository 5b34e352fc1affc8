#pragma once

#include "tlsnl/constants.hpp"

namespace tlsnl {

struct ResonatorParams {
    double f_r0 = 0.0;
    double kappa_e_over_2pi = 0.0;
    double q_bkg = kInf;

    void validate() const;
    double q_e() const { return f_r0 / kappa_e_over_2pi; }
};

struct TlsEnsembleParams {
    double fd0_reac = 0.0;
    double fd0_diss = 0.0;
    double n_s = 1.0;
    double beta = 1.0;
    double q_rel_ref = kInf;
    double d_exp = 1.0;

    void validate() const;
};

inline constexpr double kRelaxationReferenceT = 0.5;

// tanh(h f / 2 k_B T)
double thermal_polarization(double T, double f);

double delta_fr(double T, const ResonatorParams& p, const TlsEnsembleParams& t);

double q_res_min_inv(double T, const ResonatorParams& p, const TlsEnsembleParams& t);
double q_res_inv(double T, double nbar, const ResonatorParams& p, const TlsEnsembleParams& t);
double q_rel_inv(double T, const TlsEnsembleParams& t);
double q_i_inv(double T, double nbar, const ResonatorParams& p, const TlsEnsembleParams& t);

double tcf(double T0, const ResonatorParams& p, const TlsEnsembleParams& t);

double crossover_temperature(const ResonatorParams& p);

// sqrt(T0^2 + T_sat^2), optional input transform for in-gap resonant TLSs
double saturation_temperature(double T0, double t_sat);

}  // namespace tlsnl
