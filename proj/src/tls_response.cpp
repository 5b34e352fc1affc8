#include "tlsnl/tls_response.hpp"

#include <cmath>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "tlsnl/errors.hpp"
#include "tlsnl/specfun.hpp"

namespace tlsnl {

namespace {

void require_positive_temperature(double T, const char* who) {
    if (!(T > 0.0) || !std::isfinite(T))
        throw DomainError(std::string(who) + ": temperature must be positive, got " + std::to_string(T));
}

double reduced_frequency(double T, double f) {
    return kPlanck * f / (kTwoPi * kBoltzmann * T);
}

// v Im Psi'(1/2 - i v); TCF vanishes where this equals 1
double tcf_bracket(double v) {
    return -v * trigamma_half_line(v).imag();
}

}  // namespace

void ResonatorParams::validate() const {
    if (!(f_r0 > 0.0) || !std::isfinite(f_r0)) throw ValidationError("f_r0 must be positive");
    if (!(kappa_e_over_2pi > 0.0) || !std::isfinite(kappa_e_over_2pi))
        throw ValidationError("kappa_e_over_2pi must be positive");
    if (!(q_bkg > 0.0)) throw ValidationError("q_bkg must be positive or infinite");
}

void TlsEnsembleParams::validate() const {
    if (!(fd0_reac >= 0.0) || !(fd0_diss >= 0.0)) throw ValidationError("loss tangents must be non-negative");
    if (!(n_s > 0.0)) throw ValidationError("n_s must be positive");
    if (!(beta >= 0.0 && beta <= 1.0)) throw ValidationError("beta must lie in [0, 1]");
    if (!(q_rel_ref > 0.0)) throw ValidationError("q_rel_ref must be positive");
    if (!(d_exp > 0.0)) throw ValidationError("d_exp must be positive");
}

double thermal_polarization(double T, double f) {
    return std::tanh(kPlanck * f / (2.0 * kBoltzmann * T));
}

double delta_fr(double T, const ResonatorParams& p, const TlsEnsembleParams& t) {
    require_positive_temperature(T, "delta_fr");
    if (t.fd0_reac == 0.0) return 0.0;
    const double v = reduced_frequency(T, p.f_r0);
    const DigammaEval psi = digamma_half_line(-v);
    return p.f_r0 * (t.fd0_reac / kPi) * (psi.re_psi - std::log(v));
}

double q_res_min_inv(double T, const ResonatorParams& p, const TlsEnsembleParams& t) {
    require_positive_temperature(T, "q_res_min_inv");
    return t.fd0_diss * thermal_polarization(T, p.f_r0);
}

double q_res_inv(double T, double nbar, const ResonatorParams& p, const TlsEnsembleParams& t) {
    require_positive_temperature(T, "q_res_inv");
    if (!(nbar >= 0.0)) throw DomainError("q_res_inv: nbar must be non-negative");
    const double th = thermal_polarization(T, p.f_r0);
    const double sat = nbar == 0.0 ? 0.0 : std::pow(nbar / t.n_s, t.beta) * th;
    return t.fd0_diss * th / std::sqrt(1.0 + sat);
}

double q_rel_inv(double T, const TlsEnsembleParams& t) {
    return std::pow(T / kRelaxationReferenceT, t.d_exp) / t.q_rel_ref;
}

double q_i_inv(double T, double nbar, const ResonatorParams& p, const TlsEnsembleParams& t) {
    return q_res_inv(T, nbar, p, t) + q_rel_inv(T, t) + 1.0 / p.q_bkg;
}

double tcf(double T0, const ResonatorParams& p, const TlsEnsembleParams& t) {
    require_positive_temperature(T0, "tcf");
    const double v = reduced_frequency(T0, p.f_r0);
    const double im = trigamma_half_line(-v).imag();
    return (t.fd0_reac / kPi) * (1.0 / T0 - (v / T0) * im);
}

double crossover_temperature(const ResonatorParams& p) {
    if (!(p.f_r0 > 0.0)) throw ValidationError("crossover_temperature: f_r0 must be positive");
    const double scale = kPlanck * p.f_r0 / kBoltzmann;
    // T in [0.1, 1.0] h f / k_B maps to v in [1/(2 pi), 10/(2 pi)]
    const double v_lo = 1.0 / (kTwoPi * 1.0);
    const double v_hi = 1.0 / (kTwoPi * 0.1);
    auto g = [](double v) { return tcf_bracket(v) - 1.0; };
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(
        g, v_lo, v_hi, boost::math::tools::eps_tolerance<double>(52), iters);
    const double v_c = 0.5 * (r.first + r.second);
    return scale / (kTwoPi * v_c);
}

double saturation_temperature(double T0, double t_sat) {
    return std::hypot(T0, t_sat);
}

}  // namespace tlsnl
