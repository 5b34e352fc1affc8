#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tlsnl/constants.hpp"
#include "tlsnl/dynamics.hpp"
#include "tlsnl/errors.hpp"
#include "tlsnl/presets.hpp"

using namespace tlsnl;

namespace {

double dbm(double p) { return 1e-3 * std::pow(10.0, p / 10.0); }

double linewidth(const ModelParams& m) { return low_power_resonance(m) / low_power_q(m); }

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

}  // namespace

TEST_CASE("no drive keeps the resonator at equilibrium") {
    const ModelParams m = preset_fig3().model;
    const Trajectory tr = integrate_tn({0.0, m.th.t0, 0.0}, {low_power_resonance(m), 0.0}, m, 0.05);
    for (const TrajectorySample& s : tr.samples) {
        CHECK(s.temperature == m.th.t0);
        CHECK(s.n == 0.0);
    }
}

TEST_CASE("default heat capacity gives a 100 us thermal time") {
    ModelParams m = preset_fig2().model;
    CHECK(heat_capacity(m) / m.th.g_th0() == doctest::Approx(100e-6).epsilon(1e-12));
    m.th.c_th = 3e-18;
    CHECK(heat_capacity(m) == 3e-18);
}

TEST_CASE("long-time limit equals the steady fixed point") {
    const ModelParams m = preset_fig3().model;
    const double lw = linewidth(m);
    const double f0 = low_power_resonance(m);
    IntegrationControl ctrl;
    ctrl.rtol = 1e-10;
    ctrl.atol = 1e-12;
    for (double p : {-160.0, -140.0, -125.0}) {
        for (double df : {-3.0, 0.0, 2.0}) {
            CAPTURE(p);
            CAPTURE(df);
            const DriveCondition d{f0 + df * lw, dbm(p)};
            const OperatingPoint op = solve_point(d, m, SolverTolerances::precise());
            const DynamicState s = relax_to_steady({0.0, m.th.t0, 0.0}, d, m, 1e-9, 100.0, ctrl);
            CHECK(std::fabs(s.temperature - op.temperature) <= 1e-6 * op.temperature);
            CHECK(std::fabs(s.n - op.nbar) <= 1e-6 * op.nbar);
        }
    }
}

TEST_CASE("tighter tolerances barely move the endpoint") {
    const ModelParams m = preset_fig3().model;
    const DriveCondition d{low_power_resonance(m) + linewidth(m), dbm(-130.0)};
    IntegrationControl a;
    a.rtol = a.atol = 1e-9;
    IntegrationControl b = a;
    b.rtol = b.atol = 0.5e-9;
    const DynamicState ea = integrate_tn({0.0, m.th.t0, 0.0}, d, m, 5e-3, a).final_state;
    const DynamicState eb = integrate_tn({0.0, m.th.t0, 0.0}, d, m, 5e-3, b).final_state;
    CHECK(std::fabs(ea.temperature - eb.temperature) < 1e-7 * eb.temperature);
    CHECK(std::fabs(ea.n - eb.n) < 1e-7 * eb.n);
}

TEST_CASE("trajectories stay physical") {
    const ModelParams m = preset_fig2().model;
    for (double p : {-150.0, -120.0, -100.0}) {
        const Trajectory tr =
            integrate_tn({0.0, m.th.t0, 0.0}, {low_power_resonance(m), dbm(p)}, m, 2e-2, IntegrationControl{});
        for (const TrajectorySample& s : tr.samples) {
            CHECK(s.n >= 0.0);
            CHECK(s.temperature >= m.th.t0 - 1e-12);
            CHECK(std::abs(s.s11) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("linear ring-up has no overshoot") {
    ModelParams m = preset_fig3().model;
    m.tls.fd0_reac = 0.0;
    m.tls.fd0_diss = 0.0;
    m.res.q_bkg = 2e6;
    IntegrationControl ctrl;
    ctrl.n_samples = 400;
    const Trajectory tr = integrate_tn({0.0, m.th.t0, 0.0}, {low_power_resonance(m) + 0.3 * linewidth(m), dbm(-140.0)},
                                       m, 0.05, ctrl);
    for (std::size_t i = 1; i < tr.samples.size(); ++i) CHECK(tr.samples[i].n >= tr.samples[i - 1].n);
}

TEST_CASE("detailed balance at the fixed point") {
    const ModelParams m = preset_fig2().model;
    for (double p : {-140.0, -115.0, -90.0}) {
        const OperatingPoint op = solve_point({low_power_resonance(m), dbm(p)}, m, SolverTolerances::precise());
        CHECK(thermal_balance_residual(op, m) <= 1e-9);
        const Rates r = instantaneous_rates(op.temperature, op.nbar, {op.f_probe, op.p_s}, m);
        CHECK(std::fabs(r.nbar - op.nbar) <= 1e-9 * op.nbar);
        CHECK(kHbar * r.omega_r * r.kappa_i * op.nbar == doctest::Approx(op.p_d).epsilon(1e-9));
    }
}

TEST_CASE("stiffness and argument errors") {
    const ModelParams m = preset_fig3().model;
    const DriveCondition d{low_power_resonance(m), dbm(-120.0)};
    IntegrationControl ctrl;
    ctrl.min_step = 1e-3;
    CHECK_THROWS_AS(integrate_tn({0.0, m.th.t0, 0.0}, d, m, 1.0, ctrl), StiffnessError);
    CHECK_THROWS_AS(integrate_tn({0.0, m.th.t0, 0.0}, d, m, 0.0), ValidationError);
    CHECK_THROWS_AS(integrate_tn({0.0, m.th.t0, -1.0}, d, m, 1.0), ValidationError);
}

TEST_CASE("IF settling threshold") {
    CHECK(if_q_threshold(520.81e6, 200.0, 1.0) == doctest::Approx(8.2e6).epsilon(0.01));
    CHECK(if_q_threshold(520.81e6, 200.0, 2.0) == doctest::Approx(2.0 * kPi * 520.81e6 / 200.0));
    CHECK_THROWS_AS(if_q_threshold(520.81e6, 0.0, 2.0), ValidationError);
}

TEST_CASE("IF filtered value settles after three time constants") {
    ModelParams m = preset_fig2().model;
    m.res.kappa_e_over_2pi = 2000.0;
    const double tau = 2.0 / 200.0;
    const DriveCondition d{low_power_resonance(m) + 0.5 * linewidth(m), dbm(-150.0)};
    const OperatingPoint op = solve_point(d, m, SolverTolerances::precise());
    const Trajectory tr = integrate_tn({0.0, m.th.t0, 0.0}, d, m, 3.0 * tau, IntegrationControl{}, tau);
    CHECK(std::abs(tr.s11_filtered - op.s11) <= 0.05 * std::abs(op.s11));
}

TEST_CASE("low-power dynamic sweep matches the steady sweep") {
    const ModelParams m = preset_fig3().model;
    const double f0 = low_power_resonance(m);
    const double lw = linewidth(m);
    const std::vector<double> grid = linspace(f0 - 25.0 * lw, f0 + 25.0 * lw, 101);
    DynamicSweepOptions opt;
    opt.t_meas = 0.2;
    const SweepResult dyn = swept_response_dynamic(grid, dbm(-165.0), SweepDirection::Up, m, opt);
    const SweepResult st = sweep_frequency(grid, dbm(-165.0), SweepDirection::Up, m, SolverTolerances::precise());
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        worst = std::max(worst, std::fabs(std::abs(dyn.points[i].s11) - std::abs(st.points[i].s11)));
    CHECK(worst <= 1e-4);
    CHECK_THROWS_AS(swept_response_dynamic(linspace(f0, f0 + 25.0 * lw, 5), 1e-18, SweepDirection::Up, m, opt),
                    ValidationError);
}

TEST_CASE("Kerr reduction") {
    const ModelParams m = preset_fig3().model;
    const KerrReduction k = kerr_reduction(low_power_resonance(m), m);
    CHECK(k.delta_tilde.imag() == doctest::Approx(-0.5 * k.kappa_i0));
    CHECK(k.delta_tilde.imag() < 0.0);
    CHECK(k.k.imag() > 0.0);
    CHECK(k.alpha == doctest::Approx(-kTwoPi * m.res.f_r0 * tcf(m.th.t0, m.res, m.tls)).epsilon(1e-4));
    CHECK_FALSE(k.warnings.empty());
    CHECK(kerr_valid(k, 1.0));
    CHECK_FALSE(kerr_valid(k, 1e15));

    ModelParams mc = m;
    mc.th.t0 = crossover_temperature(m.res);
    const KerrReduction kc = kerr_reduction(low_power_resonance(mc), mc);
    CHECK(std::fabs(kc.alpha) < 1e-4 * std::fabs(k.alpha));
}

TEST_CASE("Kerr steady state agrees with the T-n dynamics at weak drive") {
    const ModelParams m = preset_fig3().model;
    const double f = low_power_resonance(m) + 0.5 * linewidth(m);
    const KerrReduction k = kerr_reduction(f, m);
    for (double p : {-175.0, -168.0}) {
        CAPTURE(p);
        const DriveCondition d{f, dbm(p)};
        const DynamicState s = relax_to_steady({0.0, m.th.t0, 0.0}, d, m);
        REQUIRE((s.temperature - m.th.t0) / m.th.t0 < 0.02);
        CHECK(kerr_steady_n(k, d.p_s) == doctest::Approx(s.n).epsilon(0.01));
    }
    CHECK(kerr_steady_n(k, 0.0) == 0.0);
}
