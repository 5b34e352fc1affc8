#pragma once

#include <optional>
#include <vector>

#include "tlsnl/tls_response.hpp"

namespace tlsnl {

struct ThermalParams {
    double t0 = 0.025;
    double n_ch = 1.0;
    double gamma = 2.83;
    std::optional<double> c_th;

    void validate() const;
    double g_th0() const;
};

double g_quantum(double T);

// G_th(T) for the constant-exponent law G_th(T0) (T/T0)^gamma
double g_th(double T, const ThermalParams& th);
double thermal_resistance(const ThermalParams& th);

double t_of_pd(double p_d, const ThermalParams& th);
double pd_of_t(double T, const ThermalParams& th);

double n_thermal(double T0, double f);
double n_h(double T0, double q_i, const ResonatorParams& p, const ThermalParams& th);

struct ThreeNodeParams {
    double c_t = 0.0;
    double c_p = 0.0;
    double r_tp = 0.0;
    double r_pb = 0.0;
    double t0 = 0.0;

    void validate() const;
    double tau_tp() const { return r_tp * c_t; }
    double tau_pt() const { return r_tp * c_p; }
    double tau_pb() const { return r_pb * c_p; }
};

struct ThreeNodeSample {
    double t;
    double t_tls;
    double t_phonon;
};

std::vector<ThreeNodeSample> three_node_evolve(const ThreeNodeParams& tn, double p_d, double t_span, double dt,
                                               std::optional<double> t_tls_init = std::nullopt,
                                               std::optional<double> t_phonon_init = std::nullopt);

// (T_t, T_p) at steady state
std::pair<double, double> three_node_steady(const ThreeNodeParams& tn, double p_d);

enum class GapWindow { HalfWidth, FullWidth };

struct BeamGeometry {
    double width_w = 0.0;
    double thickness_t = 0.0;
    double speed_c = 0.0;
    std::optional<double> bandgap_center_fb;
    std::optional<double> bandgap_width_dfb;
    double n_beams = 1.0;
    double channel_multiplier = 1.0;
    GapWindow gap_window = GapWindow::HalfWidth;

    void validate() const;
};

struct LandauerOptions {
    double x_max = 10.0;
    int lm_max = 0;
    double rel_tol = 1e-8;
};

struct LandauerResult {
    double conductance = 0.0;
    int bands = 0;
    double last_band_fraction = 0.0;
    bool truncation_warning = false;
};

LandauerResult landauer_detail(const BeamGeometry& g, double T, const LandauerOptions& opt = {});
double landauer_conductance(const BeamGeometry& g, double T, double x_max = 10.0, int lm_max = 0);
double gamma_exponent(const BeamGeometry& g, double T, const LandauerOptions& opt = {});

// pi hbar c / (k_B w)
double one_dimensional_crossover(double width_w, double speed_c);

struct PowerLawFit {
    double prefactor;
    double exponent;
};

// least squares on G directly (Gauss-Newton seeded by the log-log line)
PowerLawFit fit_power_law(const std::vector<double>& T, const std::vector<double>& G);
PowerLawFit fit_power_law_loglog(const std::vector<double>& T, const std::vector<double>& G);

}  // namespace tlsnl
