#pragma once

#include <array>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "tlsnl/steady_solver.hpp"

namespace tlsnl {

struct SwensonProblem {
    double y0 = 0.0;
    double a = 0.0;
};

double swenson_a_critical();

// real root of y (1 + 4 y^2) = -a_c
double bistability_y_critical();

std::array<std::complex<double>, 3> swenson_roots(const SwensonProblem& p);

// 4y^3 - 4 y0 y^2 + y - (y0 + a)
std::complex<double> swenson_polynomial(std::complex<double> y, const SwensonProblem& p);
double swenson_residual_scale(const SwensonProblem& p);

bool is_real_root(std::complex<double> y);
std::vector<double> swenson_real_roots(const SwensonProblem& p);
int swenson_real_root_count(const SwensonProblem& p);

struct BranchTrace {
    std::vector<double> y;
    std::vector<std::size_t> jump_indices;
};

BranchTrace swenson_branch(const std::vector<double>& y0_grid, double a, SweepDirection direction);
BranchTrace track_cubic_branch(const std::vector<SwensonProblem>& problems);

// y0 interval with three real roots, empty when |a| <= a_c
std::optional<std::pair<double, double>> swenson_fold_points(double a);

// jump locations from branch tracking, refined on the root-count change
struct JumpLocations {
    std::optional<double> up;
    std::optional<double> down;
};
JumpLocations swenson_jump_locations(double a, double half_span, std::size_t n);

double jump_up_asymptotic(double a);
double jump_down_asymptotic(double a);
// magnitude of the remainder order as written: |a|^-5 and (-a)^(-7/3)
double jump_up_remainder(double a);
double jump_down_remainder(double a);

double swenson_a(double T0, double q, double q_e, double q_i, double p_s, double r_th, double tcf_value);
double swenson_a_depth(double r_th, double tcf_value, double q_e, double alpha_depth, double p_s);

struct DuffingScales {
    double t_r = 0.0;
    double t_d = 0.0;
    double t_d0 = 0.0;
    double t_d1 = 0.0;
    double t_star = 0.0;
    double n_star = 0.0;
    double phi_nl = 0.0;
    double q_i0 = 0.0;
    double omega_r = 0.0;
};

DuffingScales duffing_scales(double T0, const ResonatorParams& p, const TlsEnsembleParams& t,
                             const ThermalParams& th);
DuffingScales duffing_scales_from(double t_d, double t_r, double q_i0, double omega_r, double r_th);

double bifurcation_factor(double phi);
double duffing_a_star(double q, double p_s, double omega_r, double q_e, double n_star);

struct DuffingSolution {
    double k0 = 0.0;
    double a_eff = 0.0;
    double re_z = 0.0;
    std::vector<double> k;
    std::vector<std::complex<double>> s11;
};

DuffingSolution duffing_solve(double y0, double a_star, const DuffingScales& s, double q, double q_e);

struct DuffingTrace {
    std::vector<double> k;
    std::vector<std::complex<double>> s11;
    std::vector<std::size_t> jump_indices;
};

DuffingTrace duffing_branch(const std::vector<double>& y0_grid, double a_star, const DuffingScales& s, double q,
                            double q_e);

double fd0_bifurcation_bound(double T0, double f_r, double n_ch, double n_s);

double delta_t_from_y(double y, double alpha_depth, double p_s, double r_th);
std::complex<double> s11_from_y(double y, double alpha_depth);

struct LinearizedPoint {
    double y0 = 0.0;
    double y_exact = 0.0;
    double y_linear = 0.0;
    double dt_rel_exact = 0.0;
    double dt_rel_linear = 0.0;
    // a(T0) with T0 replaced by the simulated temperature
    double a_effective = 0.0;
};

struct LinearizedComparison {
    double alpha_depth = 0.0;
    double p_s = 0.0;
    double a = 0.0;
    std::vector<LinearizedPoint> points;
};

// full solver at fixed Q = alpha_depth Q_e against Swenson's cubic with a(T0); y0 = Q x0
LinearizedComparison compare_linearized(const ModelParams& m, double alpha_depth, double p_s,
                                        const std::vector<double>& y0_grid, SweepDirection direction,
                                        const SolverTolerances& tol = SolverTolerances::precise());

}  // namespace tlsnl
