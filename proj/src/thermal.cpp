#include "tlsnl/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tlsnl/errors.hpp"

namespace tlsnl {

void ThermalParams::validate() const {
    if (!(t0 > 0.0)) throw ValidationError("t0 must be positive");
    if (!(n_ch > 0.0)) throw ValidationError("n_ch must be positive");
    if (!(gamma > -1.0)) throw ValidationError("gamma must exceed -1");
    if (c_th && !(*c_th > 0.0)) throw ValidationError("c_th must be positive");
}

double ThermalParams::g_th0() const { return n_ch * g_quantum(t0); }

double g_quantum(double T) {
    if (!(T > 0.0)) throw DomainError("g_quantum: temperature must be positive");
    return kPi * kPi * kBoltzmann * kBoltzmann * T / (3.0 * kPlanck);
}

double g_th(double T, const ThermalParams& th) {
    return th.g_th0() * std::pow(T / th.t0, th.gamma);
}

double thermal_resistance(const ThermalParams& th) { return 1.0 / th.g_th0(); }

double t_of_pd(double p_d, const ThermalParams& th) {
    if (!(p_d >= 0.0)) throw DomainError("t_of_pd: dissipated power must be non-negative, got " + std::to_string(p_d));
    const double gp1 = 1.0 + th.gamma;
    const double u = gp1 * p_d / (th.t0 * th.g_th0());
    // (1+u)^(1/gp1) - 1 without cancellation at small u
    return th.t0 + th.t0 * std::expm1(std::log1p(u) / gp1);
}

double pd_of_t(double T, const ThermalParams& th) {
    const double gp1 = 1.0 + th.gamma;
    return th.t0 * th.g_th0() / gp1 * std::expm1(gp1 * std::log(T / th.t0));
}

double n_thermal(double T0, double f) { return kBoltzmann * T0 / (kPlanck * f); }

double n_h(double T0, double q_i, const ResonatorParams& p, const ThermalParams& th) {
    const double nth = n_thermal(T0, p.f_r0);
    return kPi * th.n_ch * q_i * nth * nth / (6.0 * (th.gamma + 1.0));
}

void ThreeNodeParams::validate() const {
    if (!(c_t > 0.0 && c_p > 0.0 && r_tp > 0.0 && r_pb > 0.0 && t0 > 0.0))
        throw ValidationError("three-node parameters must all be positive");
}

std::pair<double, double> three_node_steady(const ThreeNodeParams& tn, double p_d) {
    const double tp = tn.t0 + tn.r_pb * p_d;
    return {tp + tn.r_tp * p_d, tp};
}

std::vector<ThreeNodeSample> three_node_evolve(const ThreeNodeParams& tn, double p_d, double t_span, double dt,
                                               std::optional<double> t_tls_init,
                                               std::optional<double> t_phonon_init) {
    tn.validate();
    const double tau_min = std::min({tn.tau_tp(), tn.tau_pt(), tn.tau_pb()});
    if (!(dt > 0.0) || dt >= tau_min / 10.0)
        throw ValidationError("three_node_evolve: dt must be below min(tau)/10");
    if (!(t_span > 0.0)) throw ValidationError("three_node_evolve: t_span must be positive");

    auto rhs = [&](double tt, double tp, double& dtt, double& dtp) {
        dtt = (p_d - (tt - tp) / tn.r_tp) / tn.c_t;
        dtp = (-(tp - tn.t0) / tn.r_pb - (tp - tt) / tn.r_tp) / tn.c_p;
    };

    const auto steps = static_cast<long>(std::ceil(t_span / dt - 1e-9));
    const double h = t_span / static_cast<double>(steps);
    std::vector<ThreeNodeSample> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    double tt = t_tls_init.value_or(tn.t0);
    double tp = t_phonon_init.value_or(tn.t0);
    out.push_back({0.0, tt, tp});
    for (long i = 0; i < steps; ++i) {
        double k1t, k1p, k2t, k2p, k3t, k3p, k4t, k4p;
        rhs(tt, tp, k1t, k1p);
        rhs(tt + 0.5 * h * k1t, tp + 0.5 * h * k1p, k2t, k2p);
        rhs(tt + 0.5 * h * k2t, tp + 0.5 * h * k2p, k3t, k3p);
        rhs(tt + h * k3t, tp + h * k3p, k4t, k4p);
        tt += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        tp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        out.push_back({h * static_cast<double>(i + 1), tt, tp});
    }
    return out;
}

void BeamGeometry::validate() const {
    if (!(thickness_t > 0.0) || !(width_w >= thickness_t)) throw ValidationError("beam requires w >= t > 0");
    if (!(speed_c > 0.0)) throw ValidationError("beam sound speed must be positive");
    if (bandgap_center_fb.has_value() != bandgap_width_dfb.has_value())
        throw ValidationError("bandgap needs both center and width");
    if (bandgap_center_fb && !(*bandgap_width_dfb > 0.0 && *bandgap_width_dfb < 2.0 * *bandgap_center_fb))
        throw ValidationError("bandgap width must satisfy 0 < dfb < 2 fb");
    if (!(n_beams > 0.0) || !(channel_multiplier > 0.0))
        throw ValidationError("n_beams and channel_multiplier must be positive");
}

namespace {

double phonon_kernel(double x) {
    if (x < 1e-8) return 1.0 - x * x / 12.0;
    const double s = std::sinh(0.5 * x);
    return x * x / (4.0 * s * s);
}

double kernel_integral(double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(phonon_kernel, a, b, 20, tol, &err);
}

}  // namespace

LandauerResult landauer_detail(const BeamGeometry& g, double T, const LandauerOptions& opt) {
    g.validate();
    if (!(T > 0.0)) throw DomainError("landauer_conductance: temperature must be positive");
    if (!(opt.x_max >= 10.0)) throw ValidationError("landauer_conductance: x_max must be at least 10");

    const double f_unit = kBoltzmann * T / kPlanck;  // f = x f_unit
    const double f_max = opt.x_max * f_unit;
    double gap_lo = 0.0, gap_hi = 0.0;
    if (g.bandgap_center_fb) {
        const double half = g.gap_window == GapWindow::HalfWidth ? *g.bandgap_width_dfb : 0.5 * *g.bandgap_width_dfb;
        gap_lo = (*g.bandgap_center_fb - half) / f_unit;
        gap_hi = (*g.bandgap_center_fb + half) / f_unit;
    }

    const int l_need = static_cast<int>(std::floor(2.0 * g.width_w * f_max / g.speed_c));
    const int m_need = static_cast<int>(std::floor(2.0 * g.thickness_t * f_max / g.speed_c));
    const int l_lim = opt.lm_max > 0 ? std::min(opt.lm_max, l_need) : l_need;
    const int m_lim = opt.lm_max > 0 ? std::min(opt.lm_max, m_need) : m_need;

    LandauerResult res;
    double sum = 0.0;
    double edge = 0.0;
    for (int l = 0; l <= l_lim; ++l) {
        for (int m = 0; m <= m_lim; ++m) {
            const double f_lm = 0.5 * g.speed_c * std::hypot(l / g.width_w, m / g.thickness_t);
            const double x_lm = f_lm / f_unit;
            if (x_lm >= opt.x_max) continue;
            double band = 0.0;
            if (g.bandgap_center_fb) {
                band += kernel_integral(x_lm, std::min(gap_lo, opt.x_max), opt.rel_tol);
                band += kernel_integral(std::max(x_lm, gap_hi), opt.x_max, opt.rel_tol);
            } else {
                band = kernel_integral(x_lm, opt.x_max, opt.rel_tol);
            }
            sum += band;
            ++res.bands;
            if (opt.lm_max > 0 && (l == opt.lm_max || m == opt.lm_max)) edge += band;
        }
    }
    const double scale = kBoltzmann * kBoltzmann * T / kPlanck * g.n_beams * g.channel_multiplier;
    res.conductance = scale * sum;
    res.last_band_fraction = sum > 0.0 ? edge / sum : 0.0;
    res.truncation_warning = res.last_band_fraction > 1e-6;
    return res;
}

double landauer_conductance(const BeamGeometry& g, double T, double x_max, int lm_max) {
    LandauerOptions opt;
    opt.x_max = x_max;
    opt.lm_max = lm_max;
    return landauer_detail(g, T, opt).conductance;
}

double gamma_exponent(const BeamGeometry& g, double T, const LandauerOptions& opt) {
    const double h = 1e-3;
    const double gp = landauer_detail(g, T * (1.0 + h), opt).conductance;
    const double gm = landauer_detail(g, T * (1.0 - h), opt).conductance;
    return (std::log(gp) - std::log(gm)) / (std::log1p(h) - std::log1p(-h));
}

double one_dimensional_crossover(double width_w, double speed_c) {
    return kPi * kHbar * speed_c / (kBoltzmann * width_w);
}

PowerLawFit fit_power_law_loglog(const std::vector<double>& T, const std::vector<double>& G) {
    if (T.size() != G.size() || T.size() < 2) throw ValidationError("fit_power_law: need matching samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) {
        const double x = std::log(T[i]), y = std::log(G[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    return {std::exp(icpt), slope};
}

PowerLawFit fit_power_law(const std::vector<double>& T, const std::vector<double>& G) {
    PowerLawFit p = fit_power_law_loglog(T, G);
    double gmax = *std::max_element(G.begin(), G.end());
    double a = p.prefactor / gmax, e = p.exponent;
    auto cost = [&](double aa, double ee) {
        double c = 0;
        for (std::size_t i = 0; i < T.size(); ++i) {
            const double r = aa * std::pow(T[i], ee) - G[i] / gmax;
            c += r * r;
        }
        return c;
    };
    double lambda = 1e-3;
    double c0 = cost(a, e);
    for (int it = 0; it < 200; ++it) {
        double jaa = 0, jae = 0, jee = 0, ga = 0, ge = 0;
        for (std::size_t i = 0; i < T.size(); ++i) {
            const double tp = std::pow(T[i], e);
            const double r = a * tp - G[i] / gmax;
            const double da = tp, de = a * tp * std::log(T[i]);
            jaa += da * da; jae += da * de; jee += de * de;
            ga += da * r; ge += de * r;
        }
        const double maa = jaa * (1 + lambda), mee = jee * (1 + lambda);
        const double det = maa * mee - jae * jae;
        const double sa = -(mee * ga - jae * ge) / det;
        const double se = -(maa * ge - jae * ga) / det;
        const double c1 = cost(a + sa, e + se);
        if (c1 < c0) {
            a += sa; e += se;
            const bool done = std::fabs(sa) <= 1e-14 * std::fabs(a) && std::fabs(se) <= 1e-14;
            c0 = c1;
            lambda = std::max(lambda / 10.0, 1e-12);
            if (done) break;
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    return {a * gmax, e};
}

}  // namespace tlsnl
