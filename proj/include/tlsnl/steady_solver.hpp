#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tlsnl/thermal.hpp"
#include "tlsnl/tls_response.hpp"

namespace tlsnl {

enum class SweepDirection { Up, Down, Fixed };

const char* to_string(SweepDirection d);

struct DriveCondition {
    double f_probe = 0.0;
    double p_s = 0.0;
    SweepDirection direction = SweepDirection::Fixed;
};

struct DiscreteTlsParams {
    double omega_tls_over_2pi = 0.0;
    double g_over_2pi = 0.0;

    void validate() const;
};

struct DcmParams {
    double phi_rot = 0.0;
};

struct ModelParams {
    ResonatorParams res;
    TlsEnsembleParams tls;
    ThermalParams th;
    std::optional<DiscreteTlsParams> disc;
    DcmParams dcm;
    // holds the total Q constant, leaving only the reactive nonlinearity
    std::optional<double> fixed_q;

    void validate() const;
};

std::vector<std::string> model_warnings(const ModelParams& m);

struct SolverTolerances {
    double eps_alpha = 1e-5;
    double eps_x = 1e-8;
    double eps_t = kInf;
    int max_alpha_iter = 10000;
    int max_anderson_iter = 300;
    int max_mixing_iter = 200000;
    int anderson_depth = 5;
    double mix_beta = 0.3;
    double cond_max = 1e12;
    bool check_stability = true;
    bool check_flow = true;
    bool use_anderson = true;

    static SolverTolerances precise();
};

struct OperatingPoint {
    double f_probe = 0.0;
    double p_s = 0.0;
    double temperature = 0.0;
    double nbar = 0.0;
    double q_i = 0.0;
    double q_total = 0.0;
    double f_r = 0.0;
    double x_detuning = 0.0;
    double y_fractional = 0.0;
    std::complex<double> s11{1.0, 0.0};
    double p_d = 0.0;
    double alpha_sat = 0.0;
    int iterations = 0;
    bool converged = false;
    double residual_alpha = 0.0;
    double residual_y = 0.0;
    double residual_t = 0.0;
};

struct AlphaResult {
    double alpha = 0.0;
    double q = 0.0;
    double q_min = 0.0;
    double q_max = 0.0;
    double r = 0.0;
    double xi = 0.0;
    double chi_d = 1.0;
    double residual = 0.0;
    int iterations = 0;
};

// the dissipative fixed point alpha = f(alpha) at realized detuning x and TLS temperature T
AlphaResult alpha_fixed_point(double x, double T, double omega_r, double p_s, const ModelParams& m,
                              double eps_alpha = 1e-5, int max_iter = 10000);

double alpha_map(double alpha, double x, double T, double omega_r, double p_s, const ModelParams& m);

// rad/s
double discrete_tls_shift(double nbar, double T, double f_r_current, const DiscreteTlsParams& dt);
double discrete_tls_chi0(double T, double f_r_current, const DiscreteTlsParams& dt);
double discrete_tls_nc(double f_r_current, const DiscreteTlsParams& dt);

// f_r(T0) at vanishing power
double low_power_resonance(const ModelParams& m);
double low_power_q(const ModelParams& m);
double probe_frequency(double x0, const ModelParams& m);

std::complex<double> s11_reflection(double q, double q_e, double x, double phi = 0.0);

struct MapEval {
    double x_in = 0.0;
    double t_in = 0.0;
    AlphaResult alpha;
    double omega_r = 0.0;
    double q_i = 0.0;
    double p_d = 0.0;
    double nbar = 0.0;
    double t_next = 0.0;
    double shift_next = 0.0;
    double x_next = 0.0;
};

// one pass of the outer map (x, T) -> (x', T')
MapEval evaluate_map(double x, double T, const DriveCondition& drive, const ModelParams& m,
                     const SolverTolerances& tol);

OperatingPoint solve_point(const DriveCondition& drive, const ModelParams& m, const SolverTolerances& tol = {},
                           const OperatingPoint* warm_start = nullptr);

struct EnergyResiduals {
    double p_d_rel = 0.0;
    double nbar_rel = 0.0;
};

EnergyResiduals energy_residuals(const OperatingPoint& op, const ModelParams& m);

struct SweepResult {
    SweepDirection direction = SweepDirection::Up;
    std::vector<OperatingPoint> points;
    std::vector<std::size_t> jump_indices;
    double f_s11_min = 0.0;
    std::optional<double> f_y_zero;
};

SweepResult sweep_frequency(const std::vector<double>& grid, double p_s, SweepDirection direction,
                            const ModelParams& m, const SolverTolerances& tol = {});

SweepResult sweep_power(double f_probe, const std::vector<double>& p_grid, const ModelParams& m,
                        const SolverTolerances& tol = {});

std::vector<std::size_t> detect_jumps(const std::vector<OperatingPoint>& pts, double abs_threshold = 0.05,
                                      double factor = 10.0);

// (Q_minus, Q_plus) from a resonance depth s = |S11| at resonance
std::pair<double, double> dcm_q_from_depth(double s, double phi, double q_e);
double dcm_min_depth(double phi);

}  // namespace tlsnl
