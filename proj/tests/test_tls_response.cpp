#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "tlsnl/constants.hpp"
#include "tlsnl/errors.hpp"
#include "tlsnl/presets.hpp"
#include "tlsnl/tls_response.hpp"

using namespace tlsnl;
using boost::math::quadrature::gauss_kronrod;

namespace {

ResonatorParams fig2_res() { return preset_fig2().model.res; }
TlsEnsembleParams fig2_tls() { return preset_fig2().model.tls; }

// f_r0 (Fd0/pi) PV int_0^inf (1 - tanh(x/2)) x / (x^2 - x_r^2) dx, x = E / k_B T
double delta_fr_quadrature(double T, double f_r0, double fd0) {
    const double xr = kPlanck * f_r0 / (kBoltzmann * T);
    auto f = [xr](double x) { return (1.0 - std::tanh(0.5 * x)) * x / (x + xr); };
    const double fa = f(xr);
    const double near = gauss_kronrod<double, 61>::integrate(
        [&](double x) { return x == xr ? 0.0 : (f(x) - fa) / (x - xr); }, 0.0, 2.0 * xr, 20, 1e-14);
    const double far = gauss_kronrod<double, 61>::integrate([&](double x) { return f(x) / (x - xr); }, 2.0 * xr,
                                                            std::numeric_limits<double>::infinity(), 20, 1e-14);
    return f_r0 * fd0 / kPi * (near + far);
}

}  // namespace

TEST_CASE("shift vanishes at zero temperature and zero coupling") {
    CHECK(std::fabs(delta_fr(10e-6, fig2_res(), fig2_tls())) < 1e-3);
    TlsEnsembleParams t = fig2_tls();
    t.fd0_reac = 0.0;
    for (double T : {0.001, 0.05, 2.0}) CHECK(delta_fr(T, fig2_res(), t) == 0.0);
}

TEST_CASE("shift matches the principal-value quadrature") {
    ResonatorParams p = fig2_res();
    p.f_r0 = 520.808275e6;
    TlsEnsembleParams t = fig2_tls();
    t.fd0_reac = 1.42e-5;
    for (double T : {0.025, 0.050, 0.075, 0.100}) {
        CAPTURE(T);
        CHECK(std::fabs(delta_fr(T, p, t) - delta_fr_quadrature(T, p.f_r0, t.fd0_reac)) < 0.1);
    }
}

TEST_CASE("resonant loss limits") {
    const ResonatorParams p = fig2_res();
    const TlsEnsembleParams t = fig2_tls();
    CHECK(q_res_inv(1e-5, 0.0, p, t) == doctest::Approx(t.fd0_diss).epsilon(1e-12));
    CHECK(q_res_inv(1e-5, 3.0 * t.n_s, p, t) == doctest::Approx(t.fd0_diss / 2.0).epsilon(1e-12));

    ResonatorParams p520 = p;
    p520.f_r0 = 520e6;
    TlsEnsembleParams t1 = t;
    t1.fd0_diss = 1e-5;
    const double kappa = 2.0 * kPi * p520.f_r0 * q_res_inv(0.025, 0.0, p520, t1);
    CHECK(kappa / (2.0 * kPi) == doctest::Approx(2.4e3).epsilon(0.02));

    CHECK_THROWS_AS(q_res_inv(0.0, 0.0, p, t), DomainError);
    CHECK_THROWS_AS(q_res_inv(0.01, -1.0, p, t), DomainError);
    CHECK_THROWS_AS(delta_fr(-1.0, p, t), DomainError);
}

TEST_CASE("internal loss is the sum of its three terms") {
    ResonatorParams p = preset_fig3().model.res;
    TlsEnsembleParams t = preset_fig3().model.tls;
    p.q_bkg = kInf;
    CHECK(1.0 / q_i_inv(0.5, 1e30, p, t) == doctest::Approx(0.36e6).epsilon(1e-9));
    CHECK(q_i_inv(1e-5, 0.0, p, t) == doctest::Approx(t.fd0_diss).epsilon(1e-9));

    const ResonatorParams p3 = preset_fig3().model.res;
    const double T = 0.050;
    const double nbar = 1e7;
    const double th = std::tanh(kPlanck * p3.f_r0 / (2.0 * kBoltzmann * T));
    const double res = t.fd0_diss * th / std::sqrt(1.0 + std::pow(nbar / t.n_s, t.beta) * th);
    const double rel = std::pow(T / 0.5, t.d_exp) / t.q_rel_ref;
    const double bkg = 1.0 / p3.q_bkg;
    CHECK(q_i_inv(T, nbar, p3, t) == doctest::Approx(res + rel + bkg).epsilon(1e-13));
}

TEST_CASE("crossover temperature") {
    ResonatorParams p = fig2_res();
    p.f_r0 = 520.81e6;
    const double tc = crossover_temperature(p);
    const double ratio = kBoltzmann * tc / (kPlanck * p.f_r0);
    CHECK(std::fabs(ratio - 0.4408) <= 5e-4);
    CHECK(std::fabs(tc - 0.011) <= 0.2e-3);
    ResonatorParams p2 = p;
    p2.f_r0 *= 2.0;
    CHECK(crossover_temperature(p2) == doctest::Approx(2.0 * tc).epsilon(1e-9));

    const TlsEnsembleParams t = fig2_tls();
    CHECK(std::fabs(tcf(tc, p, t)) < 1e-3 * std::fabs(tcf(2.0 * tc, p, t)));
}

TEST_CASE("sqrt(2)/pi approximation of the crossover within 2 percent") {
    ResonatorParams p = fig2_res();
    p.f_r0 = 520.81e6;
    const double tc = crossover_temperature(p);
    const double approx = std::sqrt(2.0) / kPi * kPlanck * p.f_r0 / kBoltzmann;
    CHECK(std::fabs(approx / tc - 1.0) < 0.02);
}

TEST_CASE("TCF asymptotes") {
    const ResonatorParams p = fig2_res();
    const TlsEnsembleParams t = fig2_tls();
    const double tc = crossover_temperature(p);
    const double hi = 50.0 * tc;
    CHECK(tcf(hi, p, t) == doctest::Approx(t.fd0_reac / (kPi * hi)).epsilon(0.01));
    const double lo = tc / 50.0;
    const double x = kBoltzmann / (kPlanck * p.f_r0);
    CHECK(tcf(lo, p, t) == doctest::Approx(-kPi / 3.0 * t.fd0_reac * x * x * lo).epsilon(0.02));
}

TEST_CASE("TCF is the temperature derivative of the shift") {
    const ResonatorParams p = fig2_res();
    const TlsEnsembleParams t = fig2_tls();
    for (double T = 1e-3; T <= 1.0; T *= 1.5) {
        CAPTURE(T);
        const double h = 1e-4 * T;
        const double d = (delta_fr(T + h, p, t) - delta_fr(T - h, p, t)) / (2.0 * h);
        const double expect = p.f_r0 * tcf(T, p, t);
        CHECK(std::fabs(d - expect) <= 1e-4 * std::fabs(expect) + 1e-9);
    }
}

TEST_CASE("log-T asymptote") {
    const ResonatorParams p = fig2_res();
    const TlsEnsembleParams t = fig2_tls();
    auto g = [&](double T) { return delta_fr(T, p, t) - t.fd0_reac / kPi * p.f_r0 * std::log(T); };
    auto dg = [&](double T) { return (g(T * 1.001) - g(T / 1.001)) / (T * 1.001 - T / 1.001); };
    CHECK(std::fabs(dg(10.0)) < 1e-3 * std::fabs(dg(0.025)));
}

TEST_CASE("monotonicity and TCF sign") {
    const ResonatorParams p = preset_fig3().model.res;
    const TlsEnsembleParams t = preset_fig3().model.tls;
    double prev = q_res_inv(0.03, 0.0, p, t);
    for (double n = 1.0; n < 1e12; n *= 2.0) {
        const double q = q_res_inv(0.03, n, p, t);
        CHECK(q < prev);
        prev = q;
    }
    prev = q_i_inv(0.1, 1e7, p, t);
    for (double T = 0.11; T <= 1.0; T += 0.01) {
        const double q = q_i_inv(T, 1e7, p, t);
        CHECK(q > prev);
        prev = q;
    }
    const double tc = crossover_temperature(p);
    for (double T = tc / 100.0; T <= 100.0 * tc; T *= 1.07) {
        if (std::fabs(T / tc - 1.0) < 1e-9) continue;
        CAPTURE(T);
        CHECK((tcf(T, p, t) > 0.0) == (T > tc));
    }
}
