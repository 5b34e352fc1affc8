#pragma once

#include <complex>
#include <string>
#include <vector>

#include "tlsnl/steady_solver.hpp"

namespace tlsnl {

inline constexpr double kDefaultThermalTime = 100e-6;

// C_th from the parameters, or the value giving tau_th = 100 us at T0
double heat_capacity(const ModelParams& m);

struct DynamicState {
    double t = 0.0;
    double temperature = 0.0;
    double n = 0.0;
};

struct Rates {
    double f_r = 0.0;
    double omega_r = 0.0;
    double kappa_e = 0.0;
    double kappa_i = 0.0;
    double kappa = 0.0;
    double delta = 0.0;
    double nbar = 0.0;
};

// instantaneous rates at (T, n); Delta = omega - omega_r(T, n)
Rates instantaneous_rates(double T, double n, const DriveCondition& drive, const ModelParams& m);
std::complex<double> s11_instantaneous(const Rates& r);

struct IntegrationControl {
    double rtol = 1e-8;
    double atol = 1e-8;
    int n_samples = 200;
    double min_step = 1e-15;
    long max_steps = 20000000;
};

struct TrajectorySample {
    double t;
    double temperature;
    double n;
    std::complex<double> s11;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    DynamicState final_state;
    std::complex<double> s11_filtered{1.0, 0.0};
    long steps = 0;
    long rejected = 0;
};

// embedded 4(5) Runge-Kutta; tau_if > 0 also accumulates the exponential IF average of S11
Trajectory integrate_tn(const DynamicState& initial, const DriveCondition& drive, const ModelParams& m, double t_end,
                        const IntegrationControl& ctrl = {}, double tau_if = 0.0);

// integrates in chunks until T and n change by less than rel_tol over two consecutive chunks
DynamicState relax_to_steady(const DynamicState& initial, const DriveCondition& drive, const ModelParams& m,
                             double rel_tol = 1e-7, double max_time = 100.0, const IntegrationControl& ctrl = {});

// P_d - conductance term of the T equation, relative to P_d
double thermal_balance_residual(const OperatingPoint& op, const ModelParams& m);

struct DynamicSweepOptions {
    double t_meas = 0.0;
    double if_bandwidth = 200.0;
    double if_k = 2.0;
    IntegrationControl ctrl;
};

SweepResult swept_response_dynamic(const std::vector<double>& grid, double p_s, SweepDirection direction,
                                   const ModelParams& m, const DynamicSweepOptions& opt);

// k pi f_r / BW, the largest Q whose ring-up settles within the IF window
double if_q_threshold(double f_r, double if_bandwidth, double if_k);

struct KerrReduction {
    double t0 = 0.0;
    double delta0 = 0.0;
    double kappa_i0 = 0.0;
    double kappa_e = 0.0;
    double omega_r0 = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double heating = 0.0;
    std::complex<double> delta_tilde;
    std::complex<double> k;
    std::vector<std::string> warnings;
};

// alpha = dDelta/dT, beta = -dkappa_i/dT at T0, heating = h f_r kappa_i / G_th(T0)
KerrReduction kerr_reduction(double f_probe, const ModelParams& m);
double kerr_kappa_i(const KerrReduction& k, double nbar);
bool kerr_valid(const KerrReduction& k, double nbar);
// lowest stationary phonon number of the Kerr oscillator
double kerr_steady_n(const KerrReduction& k, double p_s);

}  // namespace tlsnl
