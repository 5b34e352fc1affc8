#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tlsnl/steady_solver.hpp"

namespace tlsnl {

enum class PhaseAxis { LossTangent, KappaE };
const char* to_string(PhaseAxis a);

// cells are row-major: cells[i_param * ps_axis.size() + i_ps]
struct PhaseGrid {
    PhaseAxis axis = PhaseAxis::LossTangent;
    std::vector<double> ps_axis;
    std::vector<double> param_axis;
    std::vector<double> f_probe;
    std::vector<OperatingPoint> cells;
    std::vector<std::string> failures;

    const OperatingPoint& at(std::size_t i_param, std::size_t i_ps) const {
        return cells[i_param * ps_axis.size() + i_ps];
    }
};

// Fd0 values set both the reactive and dissipative loss tangent
ModelParams with_axis_value(const ModelParams& base, PhaseAxis axis, double value);

struct PhaseScanOptions {
    SolverTolerances tol;
    unsigned threads = 0;
};

// rows are power continuations at the low-power resonance (y0 = 0)
PhaseGrid phase_scan(const std::vector<double>& ps_axis, const std::vector<double>& param_axis, PhaseAxis axis,
                     const ModelParams& base, const PhaseScanOptions& opt = {});
PhaseGrid kappa_e_study(const std::vector<double>& ps_axis, const std::vector<double>& kappa_e_axis,
                        const ModelParams& base, const PhaseScanOptions& opt = {});

struct ContourPoint {
    double param;
    double p_s;
};

struct BistabilityMap {
    double threshold = 0.0;
    std::vector<char> flags;
    std::vector<ContourPoint> contour;
    // lowest flagged power per row, empty when the row has no flagged cell
    std::vector<std::optional<double>> first_flagged;
};

// threshold defaults to |y_c|; contour points interpolate |y| = threshold in log P_s
BistabilityMap bistability_contour(const PhaseGrid& grid, std::optional<double> threshold = std::nullopt);

struct HysteresisCheck {
    std::size_t i_param;
    std::size_t i_ps;
    bool flagged;
    bool hysteretic;
};

struct VerificationOptions {
    // points across the core window, resolved on the at-power linewidth
    std::size_t core_points = 400;
    std::size_t outer_points = 40;
    double margin_linewidths = 25.0;
    double core_linewidths = 5.0;
    SolverTolerances tol = SolverTolerances::precise();
};

// ascending grid: coarse lead-in from 25 low-power linewidths, fine core around the pulled resonance
std::vector<double> verification_grid(const ModelParams& m, const OperatingPoint& cell, const VerificationOptions& opt,
                                      double stretch = 1.0);

// runs up and down frequency sweeps for each requested cell
std::vector<HysteresisCheck> verify_bistability(const PhaseGrid& grid, const BistabilityMap& map,
                                                const ModelParams& base,
                                                const std::vector<std::pair<std::size_t, std::size_t>>& cells,
                                                const VerificationOptions& opt = {});
// cells whose flag differs from a 4-neighbour
std::vector<std::pair<std::size_t, std::size_t>> boundary_cells(const PhaseGrid& grid, const BistabilityMap& map);
bool sweep_is_hysteretic(const SweepResult& up, const SweepResult& down);

enum class PowerRegime { Linear, Saturated, HeatingOnset, Hot };
const char* to_string(PowerRegime r);

struct RegimeSlopes {
    PowerRegime regime;
    std::size_t count = 0;
    double p_lo = 0.0;
    double p_hi = 0.0;
    double temperature = 0.0;
    double delta_t = 0.0;
    double nbar = 0.0;
    double kappa_i = 0.0;
    double p_d = 0.0;
    double shift = 0.0;
    double y = 0.0;
};

// n multiples refer to min/max of n_s and n_h; the detuned regimes also need |y| >= detuned_y_min
// with resonant (saturated) or relaxation (heating) damping carrying at least `dominance` of kappa_i
struct RegimeBounds {
    double linear_max = 0.01;
    double saturated_min = 10.0;
    double onset_min = 0.3;
    double detuned_y_min = 1.0;
    double dominance = 0.8;
    double hot_min = 1e3;
    // the hot regime also requires |y| below this
    double hot_y_max = 0.05;
};

// least-squares log-log slopes over points with p_lo <= P_s <= p_hi
RegimeSlopes fit_slopes(const std::vector<OperatingPoint>& trace, double p_lo, double p_hi, double t0, double f_r_t0);

// each regime is fitted over its longest run of consecutive qualifying points
std::vector<RegimeSlopes> scaling_exponents(const std::vector<OperatingPoint>& trace, const ModelParams& m,
                                            const RegimeBounds& b = {});

struct ExponentPrediction {
    double temperature;
    double nbar;
    double kappa_i;
};

ExponentPrediction hot_regime_exponents(double d, double gamma);
// eta is the measured shift exponent in the saturated regime
ExponentPrediction saturated_regime_exponents(double eta, double beta);

}  // namespace tlsnl
