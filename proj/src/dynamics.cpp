#include "tlsnl/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "tlsnl/errors.hpp"

namespace tlsnl {

namespace odeint = boost::numeric::odeint;

double heat_capacity(const ModelParams& m) {
    if (m.th.c_th) return *m.th.c_th;
    return kDefaultThermalTime * m.th.g_th0();
}

namespace {

double resonance_at(double T, double n, const ModelParams& m) {
    const double base = m.res.f_r0 + delta_fr(T, m.res, m.tls);
    if (!m.disc) return base;
    double f = base;
    for (int i = 0; i < 8; ++i) {
        const double next = base + discrete_tls_shift(n, T, f, *m.disc) / kTwoPi;
        if (next == f) break;
        f = next;
    }
    return f;
}

}  // namespace

Rates instantaneous_rates(double T, double n, const DriveCondition& drive, const ModelParams& m) {
    Rates r;
    r.f_r = resonance_at(T, std::max(n, 0.0), m);
    r.omega_r = kTwoPi * r.f_r;
    r.kappa_e = r.omega_r / m.res.q_e();
    if (m.fixed_q) {
        r.kappa = r.omega_r / *m.fixed_q;
        r.kappa_i = r.kappa - r.kappa_e;
    } else {
        r.kappa_i = r.omega_r * q_i_inv(T, std::max(n, 0.0), m.res, m.tls);
        r.kappa = r.kappa_e + r.kappa_i;
    }
    r.delta = kTwoPi * drive.f_probe - r.omega_r;
    r.nbar = r.kappa_e / (r.delta * r.delta + 0.25 * r.kappa * r.kappa) * drive.p_s / (kHbar * r.omega_r);
    return r;
}

std::complex<double> s11_instantaneous(const Rates& r) {
    return 1.0 - r.kappa_e / std::complex<double>(0.5 * r.kappa, r.delta);
}

namespace {

using State = std::array<double, 4>;

struct Scales {
    double t0;
    double n_ref;
    double tau;
};

struct TnSystem {
    const DriveCondition& drive;
    const ModelParams& m;
    double c_th;
    Scales sc;

    void operator()(const State& y, State& dy, double) const {
        const double T = y[0] * sc.t0;
        const double n = y[1] * sc.n_ref;
        const Rates r = instantaneous_rates(T, n, drive, m);
        const double heat = kHbar * r.omega_r * r.kappa_i * n;
        dy[0] = (heat - pd_of_t(T, m.th)) / (c_th * sc.t0);
        dy[1] = -r.kappa * (n - r.nbar) / sc.n_ref;
        if (sc.tau > 0.0) {
            const std::complex<double> s = s11_instantaneous(r);
            dy[2] = s.real() / sc.tau - y[2] / sc.tau;
            dy[3] = s.imag() / sc.tau - y[3] / sc.tau;
        } else {
            dy[2] = dy[3] = 0.0;
        }
    }
};

double reference_n(const DriveCondition& drive, const ModelParams& m) {
    const Rates r = instantaneous_rates(m.th.t0, 0.0, DriveCondition{resonance_at(m.th.t0, 0.0, m), drive.p_s,
                                                                       SweepDirection::Fixed},
                                        m);
    return std::max(1.0, r.nbar);
}

}  // namespace

Trajectory integrate_tn(const DynamicState& initial, const DriveCondition& drive, const ModelParams& m, double t_end,
                        const IntegrationControl& ctrl, double tau_if) {
    m.validate();
    if (!(t_end > 0.0)) throw ValidationError("integrate_tn: t_end must be positive");
    if (!(initial.temperature > 0.0) || !(initial.n >= 0.0))
        throw ValidationError("integrate_tn: initial temperature must be positive and n non-negative");
    if (!(drive.p_s >= 0.0)) throw ValidationError("integrate_tn: p_s must be non-negative");
    if (ctrl.n_samples < 1) throw ValidationError("integrate_tn: n_samples must be at least 1");

    const double c_th = heat_capacity(m);
    const Scales sc{m.th.t0, std::max(reference_n(drive, m), initial.n), tau_if};
    TnSystem sys{drive, m, c_th, sc};
    auto stepper = odeint::make_controlled(ctrl.atol, ctrl.rtol, odeint::runge_kutta_dopri5<State>());

    State y{initial.temperature / sc.t0, initial.n / sc.n_ref, 0.0, 0.0};
    Trajectory tr;
    auto record = [&](double t) {
        const double T = y[0] * sc.t0;
        const double n = y[1] * sc.n_ref;
        tr.samples.push_back({initial.t + t, T, n, s11_instantaneous(instantaneous_rates(T, n, drive, m))});
    };
    record(0.0);

    const Rates r0 = instantaneous_rates(initial.temperature, initial.n, drive, m);
    double dt = std::min({0.01 / r0.kappa, 0.01 * c_th / g_th(initial.temperature, m.th), t_end / ctrl.n_samples});
    double t = 0.0;
    long attempts = 0;
    for (int k = 1; k <= ctrl.n_samples; ++k) {
        const double target = t_end * static_cast<double>(k) / ctrl.n_samples;
        while (t < target) {
            if (++attempts > ctrl.max_steps)
                throw StiffnessError("integrate_tn: step budget exhausted at t = " + std::to_string(t) +
                                         " s (dt = " + std::to_string(dt) + " s); the T-n system is stiff here",
                                     t, dt);
            const bool last = t + dt >= target;
            double h = last ? target - t : dt;
            const auto res = stepper.try_step(sys, y, t, h);
            if (res == odeint::success) {
                ++tr.steps;
                if (last) t = target;
                else dt = h;
            } else {
                ++tr.rejected;
                dt = h;
            }
            if (dt < ctrl.min_step * std::max(t_end, 1.0))
                throw StiffnessError("integrate_tn: step size underflow at t = " + std::to_string(t) +
                                         " s (dt = " + std::to_string(dt) + " s)",
                                     t, dt);
            if (!std::isfinite(y[0]) || !std::isfinite(y[1]))
                throw StiffnessError("integrate_tn: non-finite state at t = " + std::to_string(t) + " s", t, dt);
            y[0] = std::max(y[0], 1e-6);
            y[1] = std::max(y[1], 0.0);
        }
        record(t);
    }
    tr.final_state = {initial.t + t_end, y[0] * sc.t0, y[1] * sc.n_ref};
    if (tau_if > 0.0) {
        const double norm = -std::expm1(-t_end / tau_if);
        tr.s11_filtered = std::complex<double>(y[2], y[3]) / norm;
    } else {
        tr.s11_filtered = tr.samples.back().s11;
    }
    return tr;
}

DynamicState relax_to_steady(const DynamicState& initial, const DriveCondition& drive, const ModelParams& m,
                             double rel_tol, double max_time, const IntegrationControl& ctrl) {
    DynamicState s = initial;
    IntegrationControl c = ctrl;
    c.n_samples = 1;
    const Rates r = instantaneous_rates(s.temperature, s.n, drive, m);
    double chunk = 20.0 * std::max(1.0 / r.kappa, heat_capacity(m) / g_th(s.temperature, m.th));
    double prev_change = kInf;
    int quiet = 0;
    while (s.t - initial.t < max_time) {
        const DynamicState e = integrate_tn(s, drive, m, chunk, c).final_state;
        const double dT = std::fabs(e.temperature - s.temperature) / e.temperature;
        const double dn = e.n == 0.0 ? 0.0 : std::fabs(e.n - s.n) / e.n;
        const double change = std::max(dT, dn);
        s = e;
        if (change <= rel_tol) {
            if (++quiet >= 2) return s;
        } else {
            quiet = 0;
            // slow modes: stretch the chunk until it spans several of their time constants
            if (change > 0.3 * prev_change) chunk *= 2.0;
        }
        prev_change = change;
    }
    throw ConvergenceError("relax_to_steady: no steady state within " + std::to_string(max_time) + " s", {});
}

double thermal_balance_residual(const OperatingPoint& op, const ModelParams& m) {
    const double cond = pd_of_t(op.temperature, m.th);
    if (op.p_d == 0.0) return std::fabs(cond);
    return std::fabs(op.p_d - cond) / op.p_d;
}

double if_q_threshold(double f_r, double if_bandwidth, double if_k) {
    if (!(if_bandwidth > 0.0) || !(if_k > 0.0)) throw ValidationError("IF bandwidth and k must be positive");
    return if_k * kPi * f_r / if_bandwidth;
}

SweepResult swept_response_dynamic(const std::vector<double>& grid, double p_s, SweepDirection direction,
                                   const ModelParams& m, const DynamicSweepOptions& opt) {
    m.validate();
    if (grid.empty()) throw ValidationError("frequency grid is empty");
    if (direction == SweepDirection::Fixed) throw ValidationError("frequency sweep needs a direction");
    if (!(opt.t_meas > 0.0)) throw ValidationError("t_meas must be positive");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const bool ok = direction == SweepDirection::Up ? grid[i] > grid[i - 1] : grid[i] < grid[i - 1];
        if (!ok) throw ValidationError("frequency grid is not strictly monotone in the sweep direction");
    }
    const double f_lp = low_power_resonance(m);
    const double linewidth = f_lp / low_power_q(m);
    if (std::fabs(grid.front() - f_lp) < 20.0 * linewidth)
        throw ValidationError("first sweep point must be at least 20 linewidths from resonance");
    const bool wrong_side = direction == SweepDirection::Up ? grid.front() > f_lp : grid.front() < f_lp;
    if (wrong_side) throw ValidationError("first sweep point lies on the far side of the resonance");

    const double tau = opt.if_k / opt.if_bandwidth;
    SweepResult out;
    out.direction = direction;
    DynamicState s{0.0, m.th.t0, 0.0};
    for (double f : grid) {
        const DriveCondition d{f, p_s, direction};
        const Trajectory tr = integrate_tn(s, d, m, opt.t_meas, [&] {
            IntegrationControl c = opt.ctrl;
            c.n_samples = 1;
            return c;
        }(), tau);
        s = tr.final_state;
        const Rates r = instantaneous_rates(s.temperature, s.n, d, m);
        OperatingPoint op;
        op.f_probe = f;
        op.p_s = p_s;
        op.temperature = s.temperature;
        op.nbar = s.n;
        op.q_i = r.omega_r / r.kappa_i;
        op.q_total = r.omega_r / r.kappa;
        op.f_r = r.f_r;
        op.x_detuning = r.delta / r.omega_r;
        op.y_fractional = op.q_total * op.x_detuning;
        op.s11 = tr.s11_filtered;
        op.p_d = kHbar * r.omega_r * r.kappa_i * s.n;
        op.iterations = static_cast<int>(tr.steps);
        op.converged = true;
        out.points.push_back(op);
    }
    out.jump_indices = detect_jumps(out.points);
    double best = kInf;
    for (const auto& p : out.points) {
        if (std::abs(p.s11) < best) {
            best = std::abs(p.s11);
            out.f_s11_min = p.f_probe;
        }
    }
    return out;
}

KerrReduction kerr_reduction(double f_probe, const ModelParams& m) {
    m.validate();
    KerrReduction k;
    const double T0 = m.th.t0;
    k.t0 = T0;
    const DriveCondition d{f_probe, 0.0, SweepDirection::Fixed};
    const Rates r0 = instantaneous_rates(T0, 0.0, d, m);
    const double h = 1e-4 * T0;
    const Rates rp = instantaneous_rates(T0 + h, 0.0, d, m);
    const Rates rm = instantaneous_rates(T0 - h, 0.0, d, m);
    k.delta0 = r0.delta;
    k.kappa_i0 = r0.kappa_i;
    k.kappa_e = r0.kappa_e;
    k.omega_r0 = r0.omega_r;
    k.alpha = (rp.delta - rm.delta) / (2.0 * h);
    k.beta = -(rp.kappa_i - rm.kappa_i) / (2.0 * h);
    k.heating = kHbar * r0.omega_r * r0.kappa_i / m.th.g_th0();
    k.delta_tilde = {k.delta0, -0.5 * k.kappa_i0};
    k.k = std::complex<double>(k.alpha, 0.5 * k.beta) * k.heating;
    if (k.beta > 0.0)
        k.warnings.push_back("linearized kappa_i turns negative above n = " +
                             std::to_string(k.kappa_i0 / (k.beta * k.heating)));
    return k;
}

double kerr_kappa_i(const KerrReduction& k, double nbar) { return k.kappa_i0 - k.beta * k.heating * nbar; }

bool kerr_valid(const KerrReduction& k, double nbar) { return kerr_kappa_i(k, nbar) > 0.0; }

double kerr_steady_n(const KerrReduction& k, double p_s) {
    if (!(p_s >= 0.0)) throw ValidationError("kerr_steady_n: p_s must be non-negative");
    if (p_s == 0.0) return 0.0;
    const double F = k.kappa_e * p_s / (kHbar * k.omega_r0);
    const double kr = k.k.real(), ki = k.k.imag();
    const double half = 0.5 * (k.kappa_i0 + k.kappa_e);
    // n [(D0 + kr n)^2 + (half - ki n)^2] - F
    const double a3 = kr * kr + ki * ki;
    const double a2 = 2.0 * (k.delta0 * kr - half * ki);
    const double a1 = k.delta0 * k.delta0 + half * half;
    auto g = [&](double n) { return ((a3 * n + a2) * n + a1) * n - F; };
    std::vector<double> edges{0.0};
    const double qa = 3.0 * a3, qb = 2.0 * a2, qc = a1;
    if (qa != 0.0) {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc > 0.0) {
            const double s = std::sqrt(disc);
            for (double c : {(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)})
                if (c > 0.0) edges.push_back(c);
        }
    }
    std::sort(edges.begin(), edges.end());
    double hi_end = F / a1;
    while (g(hi_end) < 0.0) hi_end *= 2.0;
    edges.push_back(std::max(hi_end, edges.back() * 2.0 + 1.0));
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double lo = edges[i], hi = edges[i + 1];
        if ((g(lo) <= 0.0) && (g(hi) >= 0.0)) {
            boost::uintmax_t it = 200;
            const auto r = boost::math::tools::toms748_solve(g, lo, hi, boost::math::tools::eps_tolerance<double>(52), it);
            return 0.5 * (r.first + r.second);
        }
    }
    throw ConvergenceError("kerr_steady_n: no stationary root found", {});
}

}  // namespace tlsnl
