#include "tlsnl/steady_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <string>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "tlsnl/errors.hpp"

namespace tlsnl {

const char* to_string(SweepDirection d) {
    switch (d) {
        case SweepDirection::Up: return "up";
        case SweepDirection::Down: return "down";
        case SweepDirection::Fixed: return "fixed";
    }
    return "fixed";
}

void DiscreteTlsParams::validate() const {
    if (!(omega_tls_over_2pi > 0.0) || !(g_over_2pi > 0.0))
        throw ValidationError("discrete TLS frequency and coupling must be positive");
}

void ModelParams::validate() const {
    res.validate();
    tls.validate();
    th.validate();
    if (disc) disc->validate();
    if (!(std::fabs(dcm.phi_rot) < kPi / 2.0)) throw ValidationError("|phi_rot| must be below pi/2");
    if (fixed_q && !(*fixed_q > 0.0 && *fixed_q < res.q_e()))
        throw ValidationError("fixed_q must lie in (0, Q_e)");
}

std::vector<std::string> model_warnings(const ModelParams& m) {
    std::vector<std::string> w;
    if (m.disc) {
        const double detune = std::fabs(m.disc->omega_tls_over_2pi - low_power_resonance(m));
        if (m.disc->g_over_2pi > 0.1 * detune)
            w.push_back("discrete TLS is not in the dispersive regime (g >= 0.1 |w_tls - w_r|)");
    }
    return w;
}

SolverTolerances SolverTolerances::precise() {
    SolverTolerances t;
    t.eps_alpha = 1e-14;
    t.eps_x = 1e-17;
    t.eps_t = 1e-12;
    t.max_alpha_iter = 100000;
    return t;
}

double discrete_tls_nc(double f_r_current, const DiscreteTlsParams& dt) {
    const double dw = kTwoPi * (dt.omega_tls_over_2pi - f_r_current);
    const double g = kTwoPi * dt.g_over_2pi;
    return (dw / (2.0 * g)) * (dw / (2.0 * g));
}

double discrete_tls_chi0(double T, double f_r_current, const DiscreteTlsParams& dt) {
    const double dw = kTwoPi * (dt.omega_tls_over_2pi - f_r_current);
    const double g = kTwoPi * dt.g_over_2pi;
    return -(g * g / dw) * thermal_polarization(T, dt.omega_tls_over_2pi);
}

double discrete_tls_shift(double nbar, double T, double f_r_current, const DiscreteTlsParams& dt) {
    if (!(nbar >= 0.0)) throw DomainError("discrete_tls_shift: nbar must be non-negative");
    if (!(T > 0.0)) throw DomainError("discrete_tls_shift: temperature must be positive");
    return discrete_tls_chi0(T, f_r_current, dt) / std::sqrt(1.0 + nbar / discrete_tls_nc(f_r_current, dt));
}

namespace {

double total_shift(double T, double nbar, double f_r_current, const ModelParams& m) {
    double s = delta_fr(T, m.res, m.tls);
    if (m.disc) s += discrete_tls_shift(nbar, T, f_r_current, *m.disc) / kTwoPi;
    return s;
}

double slaved_x(double T, double nbar, double f, const ModelParams& m) {
    const double guess = m.res.f_r0 + delta_fr(T, m.res, m.tls);
    const double shift = total_shift(T, nbar, guess, m);
    return ((f - m.res.f_r0) - shift) / (m.res.f_r0 + shift);
}

// 1 - 1/sqrt(1+s) without cancellation
double one_minus_inv_sqrt(double s) {
    const double r = std::sqrt(1.0 + s);
    return s / (r * (1.0 + r));
}

struct AlphaSetup {
    double th, q_min, q_max, r, xi, q_min_x2;
};

AlphaSetup alpha_setup(double x, double T, double omega_r, double p_s, const ModelParams& m) {
    const double q_e = m.res.q_e();
    const double th = thermal_polarization(T, m.res.f_r0);
    const double base = 1.0 / q_e + 1.0 / m.res.q_bkg + q_rel_inv(T, m.tls);
    const double res = m.tls.fd0_diss * th;
    AlphaSetup s;
    s.th = th;
    s.q_min = 1.0 / (base + res);
    s.q_max = 1.0 / base;
    s.r = res / (base + res);
    s.xi = 4.0 * s.q_min * s.q_min * p_s / (q_e * kHbar * omega_r * omega_r * m.tls.n_s);
    const double qx = 2.0 * s.q_min * x;
    s.q_min_x2 = qx * qx;
    return s;
}

double alpha_step(double a, const AlphaSetup& s, double beta) {
    const double u = 1.0 - s.r * a;
    const double u2 = u * u;
    const double chi = u2 / (u2 + s.q_min_x2);
    const double drive = chi * s.xi;
    if (drive == 0.0 || s.th == 0.0) return 0.0;
    const double ratio = beta == 1.0 ? drive / u2 : std::pow(drive, beta) / std::pow(u, 2.0 * beta);
    return one_minus_inv_sqrt(ratio * s.th);
}

}  // namespace

double alpha_map(double alpha, double x, double T, double omega_r, double p_s, const ModelParams& m) {
    return alpha_step(alpha, alpha_setup(x, T, omega_r, p_s, m), m.tls.beta);
}

AlphaResult alpha_fixed_point(double x, double T, double omega_r, double p_s, const ModelParams& m,
                              double eps_alpha, int max_iter) {
    if (!(T > 0.0)) throw DomainError("alpha_fixed_point: temperature must be positive");
    AlphaResult out;
    const double q_e = m.res.q_e();
    if (m.fixed_q) {
        out.q = out.q_min = out.q_max = *m.fixed_q;
        const double qx = 2.0 * out.q * x;
        out.chi_d = 1.0 / (1.0 + qx * qx);
        out.xi = 4.0 * out.q * out.q * p_s / (q_e * kHbar * omega_r * omega_r * m.tls.n_s);
        return out;
    }
    const AlphaSetup s = alpha_setup(x, T, omega_r, p_s, m);
    double a = 1e-9;
    double step = 0.0;
    std::vector<double> hist;
    int it = 0;
    for (; it < max_iter; ++it) {
        const double next = alpha_step(a, s, m.tls.beta);
        step = std::fabs(next - a);
        a = next;
        if (step <= eps_alpha) break;
        if (max_iter - it <= 16) hist.push_back(step);
    }
    if (step > eps_alpha)
        throw ConvergenceError("alpha iteration did not converge after " + std::to_string(max_iter) + " steps", hist);
    out.alpha = a;
    out.q_min = s.q_min;
    out.q_max = s.q_max;
    out.r = s.r;
    out.xi = s.xi;
    out.iterations = it + 1;
    out.residual = std::fabs(alpha_step(a, s, m.tls.beta) - a);
    const double u = 1.0 - s.r * a;
    out.q = s.q_min / u;
    const double qx = 2.0 * out.q * x;
    out.chi_d = 1.0 / (1.0 + qx * qx);
    return out;
}

double low_power_resonance(const ModelParams& m) {
    const double T0 = m.th.t0;
    const double base = m.res.f_r0 + delta_fr(T0, m.res, m.tls);
    if (!m.disc) return base;
    return m.res.f_r0 + total_shift(T0, 0.0, base, m);
}

double low_power_q(const ModelParams& m) {
    if (m.fixed_q) return *m.fixed_q;
    const double T0 = m.th.t0;
    return 1.0 / (1.0 / m.res.q_e() + q_i_inv(T0, 0.0, m.res, m.tls));
}

double probe_frequency(double x0, const ModelParams& m) { return low_power_resonance(m) * (1.0 + x0); }

std::complex<double> s11_reflection(double q, double q_e, double x, double phi) {
    using cd = std::complex<double>;
    return 1.0 - (2.0 * q / q_e) * cd(1.0, std::tan(phi)) / cd(1.0, 2.0 * q * x);
}

MapEval evaluate_map(double x, double T, const DriveCondition& drive, const ModelParams& m,
                     const SolverTolerances& tol) {
    MapEval e;
    e.x_in = x;
    e.t_in = T;
    const double f_r_cur = drive.f_probe / (1.0 + x);
    e.omega_r = kTwoPi * f_r_cur;
    e.alpha = alpha_fixed_point(x, T, e.omega_r, drive.p_s, m, tol.eps_alpha, tol.max_alpha_iter);
    const double q_e = m.res.q_e();
    double q_i_inv_v;
    if (m.fixed_q) {
        q_i_inv_v = 1.0 / e.alpha.q - 1.0 / q_e;
    } else {
        const double th = thermal_polarization(T, m.res.f_r0);
        q_i_inv_v = 1.0 / m.res.q_bkg + q_rel_inv(T, m.tls) + m.tls.fd0_diss * th * (1.0 - e.alpha.alpha);
        e.alpha.q = 1.0 / (1.0 / q_e + q_i_inv_v);
        const double qx = 2.0 * e.alpha.q * x;
        e.alpha.chi_d = 1.0 / (1.0 + qx * qx);
    }
    const double q = e.alpha.q;
    e.q_i = 1.0 / q_i_inv_v;
    e.p_d = 4.0 * q * q * q_i_inv_v / q_e * e.alpha.chi_d * drive.p_s;
    e.nbar = e.q_i * e.p_d / (kHbar * e.omega_r * e.omega_r);
    e.t_next = t_of_pd(e.p_d, m.th);
    e.shift_next = total_shift(e.t_next, e.nbar, f_r_cur, m);
    e.x_next = ((drive.f_probe - m.res.f_r0) - e.shift_next) / (m.res.f_r0 + e.shift_next);
    return e;
}

namespace {

struct Scaled {
    double sx;
    double t0;
};

struct OuterOutcome {
    bool converged = false;
    double x = 0.0;
    double T = 0.0;
    int iterations = 0;
};

bool within(const MapEval& e, const SolverTolerances& tol) {
    return std::fabs(e.x_next - e.x_in) <= tol.eps_x && std::fabs(e.t_next - e.t_in) <= tol.eps_t * e.t_in;
}

// follows the map while each image still passes, so the returned input is verified and current
MapEval settle(const MapEval& e, const DriveCondition& drive, const ModelParams& m, const SolverTolerances& tol) {
    MapEval cur = e;
    for (int i = 0; i < 3; ++i) {
        const MapEval next = evaluate_map(cur.x_next, cur.t_next, drive, m, tol);
        if (!within(next, tol)) break;
        cur = next;
    }
    return cur;
}

double scaled_norm(const MapEval& e, const Scaled& sc) {
    return std::max(std::fabs(e.x_next - e.x_in) * sc.sx, std::fabs(e.t_next - e.t_in) / sc.t0);
}

OuterOutcome run_anderson(double x0, double t0_state, const DriveCondition& drive, const ModelParams& m,
                          const SolverTolerances& tol, const Scaled& sc, std::vector<double>& hist) {
    OuterOutcome out;
    Eigen::Vector2d u(x0 * sc.sx, t0_state / sc.t0);
    std::deque<Eigen::Vector2d> us, fs;
    double best = kInf;
    for (int k = 0; k < tol.max_anderson_iter; ++k) {
        const MapEval e = evaluate_map(u[0] / sc.sx, u[1] * sc.t0, drive, m, tol);
        const double rn = scaled_norm(e, sc);
        hist.push_back(rn);
        out.iterations = k + 1;
        if (within(e, tol)) {
            const MapEval v = settle(e, drive, m, tol);
            out.converged = true;
            out.x = v.x_in;
            out.T = v.t_in;
            return out;
        }
        if (!std::isfinite(rn) || rn > 1e6 * std::max(best, 1e-12)) return out;
        best = std::min(best, rn);
        const Eigen::Vector2d g(e.x_next * sc.sx, e.t_next / sc.t0);
        const Eigen::Vector2d f = g - u;
        us.push_back(u);
        fs.push_back(f);
        while (static_cast<int>(us.size()) > tol.anderson_depth + 1) {
            us.pop_front();
            fs.pop_front();
        }
        Eigen::Vector2d next = u + f;
        while (us.size() >= 2) {
            const int cols = static_cast<int>(us.size()) - 1;
            Eigen::Matrix<double, 2, Eigen::Dynamic> dU(2, cols), dF(2, cols);
            for (int j = 0; j < cols; ++j) {
                dU.col(j) = us[j + 1] - us[j];
                dF.col(j) = fs[j + 1] - fs[j];
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(dF);
            const auto& sv = svd.singularValues();
            const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : kInf;
            if (cond > tol.cond_max) {
                us.pop_front();
                fs.pop_front();
                continue;
            }
            const Eigen::VectorXd gam = dF.completeOrthogonalDecomposition().solve(f);
            next = u + f - (dU + dF) * gam;
            break;
        }
        if (!next.allFinite()) return out;
        next[1] = std::max(next[1], 1.0);
        u = next;
    }
    return out;
}

OuterOutcome run_mixing(double x0, double t0_state, const DriveCondition& drive, const ModelParams& m,
                        const SolverTolerances& tol, const Scaled& sc, std::vector<double>& hist) {
    OuterOutcome out;
    double x = x0, T = t0_state;
    double beta = tol.mix_beta;
    double prev = kInf;
    double best = kInf;
    int since_best = 0;
    int rises = 0;
    for (int k = 0; k < tol.max_mixing_iter; ++k) {
        const MapEval e = evaluate_map(x, T, drive, m, tol);
        const double rn = scaled_norm(e, sc);
        if (rn < 0.999 * best) {
            best = rn;
            since_best = 0;
        } else if (++since_best > 5000) {
            return out;
        }
        if (k % 64 == 0 || hist.size() < 64) hist.push_back(rn);
        out.iterations = k + 1;
        if (within(e, tol)) {
            const MapEval v = settle(e, drive, m, tol);
            out.converged = true;
            out.x = v.x_in;
            out.T = v.t_in;
            return out;
        }
        if (!std::isfinite(rn)) return out;
        if (rn > prev) {
            if (++rises >= 2) {
                beta = std::max(0.5 * beta, 1e-6);
                rises = 0;
            }
        } else {
            rises = 0;
        }
        prev = rn;
        x += beta * (e.x_next - x);
        T = std::max(T + beta * (e.t_next - T), m.th.t0);
    }
    return out;
}

double max_real_eigenvalue(double x, double T, const DriveCondition& drive, const ModelParams& m,
                           const SolverTolerances& tol, const Scaled& sc) {
    auto G = [&](double ux, double ut) {
        const MapEval e = evaluate_map(ux / sc.sx, ut * sc.t0, drive, m, tol);
        return Eigen::Vector2d(e.x_next * sc.sx, e.t_next / sc.t0);
    };
    const double ux = x * sc.sx, ut = T / sc.t0;
    const double hx = 1e-6, ht = 1e-6 * ut;
    const Eigen::Vector2d cx = (G(ux + hx, ut) - G(ux - hx, ut)) / (2.0 * hx);
    const Eigen::Vector2d ct = (G(ux, ut + ht) - G(ux, std::max(ut - ht, 1e-9))) / (ut + ht - std::max(ut - ht, 1e-9));
    const double tr = cx[0] + ct[1];
    const double det = cx[0] * ct[1] - ct[0] * cx[1];
    const double disc = 0.25 * tr * tr - det;
    if (disc < 0.0) return 0.5 * tr;
    return 0.5 * tr + std::sqrt(disc);
}

bool flow_consistent(double t_start, double nbar_start, double t_root, double nbar_root,
                     const DriveCondition& drive, const ModelParams& m, const SolverTolerances& tol) {
    const double span = t_root - t_start;
    if (std::fabs(span) <= 1e-12 * t_start) return true;
    auto residual = [&](double Ts, double ns) {
        const double xs = slaved_x(Ts, ns, drive.f_probe, m);
        return evaluate_map(xs, Ts, drive, m, tol).t_next - Ts;
    };
    const double r0 = residual(t_start, nbar_start);
    const double floor = 1e-11 * t_start;
    if (std::fabs(r0) <= floor) return true;
    if ((r0 > 0.0) != (span > 0.0)) return false;
    constexpr int kSamples = 24;
    for (int i = 1; i < kSamples; ++i) {
        const double s = static_cast<double>(i) / kSamples;
        const double r = residual(t_start + s * span, nbar_start + s * (nbar_root - nbar_start));
        if (std::fabs(r) > floor && (r > 0.0) != (r0 > 0.0)) return false;
    }
    return true;
}

// x consistent with T, including the n dependence of the discrete TLS shift
double consistent_x(double T, double n_guess, const DriveCondition& drive, const ModelParams& m,
                    const SolverTolerances& tol) {
    double x = slaved_x(T, n_guess, drive.f_probe, m);
    if (!m.disc) return x;
    for (int i = 0; i < 200; ++i) {
        const double next = slaved_x(T, evaluate_map(x, T, drive, m, tol).nbar, drive.f_probe, m);
        if (std::fabs(next - x) <= 1e-3 * tol.eps_x) return next;
        x += 0.5 * (next - x);
    }
    return x;
}

// nearest root of T'(T) - T in the direction of the quasi-static flow from t_start
std::optional<OuterOutcome> run_bracket(double t_start, double n_start, const DriveCondition& drive,
                                        const ModelParams& m, const SolverTolerances& tol) {
    auto residual = [&](double T) {
        const double x = consistent_x(T, n_start, drive, m, tol);
        return evaluate_map(x, T, drive, m, tol).t_next - T;
    };
    OuterOutcome out;
    const double r0 = residual(t_start);
    if (r0 == 0.0) {
        out.converged = true;
        out.T = t_start;
        out.x = consistent_x(t_start, n_start, drive, m, tol);
        return out;
    }
    const double t_lo = m.th.t0;
    const double t_hi = t_of_pd(drive.p_s, m.th);
    const double dir = r0 > 0.0 ? 1.0 : -1.0;
    double a = t_start, ra = r0;
    double h = std::max(1e-9 * t_start, 1e-3 * std::fabs(r0));
    double b = a, rb = ra;
    for (int k = 0; k < 400; ++k) {
        b = std::clamp(a + dir * h, t_lo, std::max(t_hi, t_lo));
        rb = residual(b);
        if ((rb > 0.0) != (ra > 0.0) || rb == 0.0) break;
        if (b == t_lo || b == t_hi) return std::nullopt;
        a = b;
        ra = rb;
        h *= 1.5;
        out.iterations = k + 1;
    }
    if ((rb > 0.0) == (ra > 0.0) && rb != 0.0) return std::nullopt;
    boost::uintmax_t it = 300;
    const auto r = boost::math::tools::toms748_solve(
        [&](double T) { return residual(T); }, std::min(a, b), std::max(a, b), dir > 0.0 ? ra : rb,
        dir > 0.0 ? rb : ra, boost::math::tools::eps_tolerance<double>(52), it);
    out.T = 0.5 * (r.first + r.second);
    out.x = consistent_x(out.T, n_start, drive, m, tol);
    out.converged = true;
    out.iterations += static_cast<int>(it);
    return out;
}

OperatingPoint build_point(double x, double T, const DriveCondition& drive, const ModelParams& m,
                           const SolverTolerances& tol, int iterations) {
    const MapEval e = evaluate_map(x, T, drive, m, tol);
    OperatingPoint op;
    op.f_probe = drive.f_probe;
    op.p_s = drive.p_s;
    op.temperature = T;
    op.nbar = e.nbar;
    op.q_i = e.q_i;
    op.q_total = e.alpha.q;
    op.f_r = drive.f_probe / (1.0 + x);
    op.x_detuning = x;
    op.y_fractional = e.alpha.q * x;
    op.s11 = s11_reflection(e.alpha.q, m.res.q_e(), x, m.dcm.phi_rot);
    op.p_d = e.p_d;
    op.alpha_sat = e.alpha.alpha;
    op.iterations = iterations;
    op.converged = true;
    op.residual_alpha = e.alpha.residual;
    op.residual_y = e.alpha.q * std::fabs(e.x_next - x);
    op.residual_t = std::fabs(e.t_next - T) / T;
    return op;
}

}  // namespace

OperatingPoint solve_point(const DriveCondition& drive, const ModelParams& m, const SolverTolerances& tol,
                           const OperatingPoint* warm_start) {
    m.validate();
    if (!(drive.p_s >= 0.0) || !std::isfinite(drive.p_s)) throw ValidationError("p_s must be non-negative");
    if (!(drive.f_probe > 0.0)) throw ValidationError("f_probe must be positive");

    const Scaled sc{low_power_q(m), m.th.t0};
    const double t_start = warm_start ? std::max(warm_start->temperature, m.th.t0) : m.th.t0;
    const double n_start = warm_start ? warm_start->nbar : 0.0;
    const double x_start = slaved_x(t_start, n_start, drive.f_probe, m);

    std::vector<double> hist;
    int total_iter = 0;
    if (tol.use_anderson) {
        const OuterOutcome a = run_anderson(x_start, t_start, drive, m, tol, sc, hist);
        total_iter += a.iterations;
        if (a.converged) {
            bool ok = true;
            if (tol.check_stability && max_real_eigenvalue(a.x, a.T, drive, m, tol, sc) >= 1.0) ok = false;
            if (ok && tol.check_flow) {
                const double n_root = evaluate_map(a.x, a.T, drive, m, tol).nbar;
                ok = flow_consistent(t_start, n_start, a.T, n_root, drive, m, tol);
            }
            if (ok) return build_point(a.x, a.T, drive, m, tol, total_iter);
        }
    }
    const OuterOutcome d = run_mixing(x_start, t_start, drive, m, tol, sc, hist);
    total_iter += d.iterations;
    if (d.converged) {
        const double n_root = evaluate_map(d.x, d.T, drive, m, tol).nbar;
        if (!tol.check_flow || flow_consistent(t_start, n_start, d.T, n_root, drive, m, tol))
            return build_point(d.x, d.T, drive, m, tol, total_iter);
    }
    if (const auto b = run_bracket(t_start, n_start, drive, m, tol)) {
        const MapEval e = evaluate_map(b->x, b->T, drive, m, tol);
        if (std::fabs(e.x_next - b->x) <= std::max(tol.eps_x, 1e-15 * std::fabs(b->x)) &&
            std::fabs(e.t_next - b->T) <= std::max(tol.eps_t, 1e-13) * b->T)
            return build_point(b->x, b->T, drive, m, tol, total_iter + b->iterations);
        hist.push_back(std::fabs(e.x_next - b->x) * sc.sx);
        // polish from the bracketed root, keeping only results on the same branch
        total_iter += b->iterations;
        auto same_branch = [&](const OuterOutcome& p) {
            return p.converged && std::fabs(p.T - b->T) <= 1e-6 * b->T &&
                   (!tol.check_stability || max_real_eigenvalue(p.x, p.T, drive, m, tol, sc) < 1.0);
        };
        if (tol.use_anderson) {
            const OuterOutcome pa = run_anderson(b->x, b->T, drive, m, tol, sc, hist);
            total_iter += pa.iterations;
            if (same_branch(pa)) return build_point(pa.x, pa.T, drive, m, tol, total_iter);
        }
        const OuterOutcome pm = run_mixing(b->x, b->T, drive, m, tol, sc, hist);
        total_iter += pm.iterations;
        if (same_branch(pm)) return build_point(pm.x, pm.T, drive, m, tol, total_iter);
    }
    throw ConvergenceError("outer x-iteration did not converge at f = " + std::to_string(drive.f_probe) +
                               " Hz, P_s = " + std::to_string(drive.p_s) + " W",
                           hist);
}

EnergyResiduals energy_residuals(const OperatingPoint& op, const ModelParams& m) {
    EnergyResiduals r;
    const std::complex<double> s = s11_reflection(op.q_total, m.res.q_e(), op.x_detuning, 0.0);
    const double pd_s = (1.0 - std::norm(s)) * op.p_s;
    const double scale_pd = std::max(std::fabs(op.p_d), 1e-300);
    r.p_d_rel = op.p_s == 0.0 ? std::fabs(op.p_d) : std::fabs(pd_s - op.p_d) / scale_pd;
    const double w = kTwoPi * op.f_r;
    const double nb = op.q_i * op.p_d / (kHbar * w * w);
    r.nbar_rel = op.nbar == 0.0 ? std::fabs(nb) : std::fabs(nb - op.nbar) / op.nbar;
    return r;
}

std::vector<std::size_t> detect_jumps(const std::vector<OperatingPoint>& pts, double abs_threshold, double factor) {
    std::vector<std::size_t> j;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double dy = std::fabs(pts[i].y_fractional - pts[i - 1].y_fractional);
        const double q = std::max(pts[i].q_total, pts[i - 1].q_total);
        const double expected = q * std::fabs(pts[i].f_probe - pts[i - 1].f_probe) / pts[i].f_r;
        if (dy > abs_threshold && dy > factor * expected) j.push_back(i);
    }
    return j;
}

namespace {

void finish_sweep(SweepResult& r) {
    r.jump_indices = detect_jumps(r.points);
    double best = kInf;
    for (const auto& p : r.points) {
        const double a = std::abs(p.s11);
        if (a < best) {
            best = a;
            r.f_s11_min = p.f_probe;
        }
    }
    for (std::size_t i = 1; i < r.points.size(); ++i) {
        const auto& a = r.points[i - 1];
        const auto& b = r.points[i];
        if ((a.y_fractional <= 0.0) != (b.y_fractional <= 0.0) &&
            std::find(r.jump_indices.begin(), r.jump_indices.end(), i) == r.jump_indices.end()) {
            const double w = a.y_fractional / (a.y_fractional - b.y_fractional);
            r.f_y_zero = a.f_probe + w * (b.f_probe - a.f_probe);
            break;
        }
    }
}

}  // namespace

SweepResult sweep_frequency(const std::vector<double>& grid, double p_s, SweepDirection direction,
                            const ModelParams& m, const SolverTolerances& tol) {
    m.validate();
    if (grid.empty()) throw ValidationError("frequency grid is empty");
    if (direction == SweepDirection::Fixed) throw ValidationError("frequency sweep needs a direction");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const bool inc = grid[i] > grid[i - 1];
        const bool dec = grid[i] < grid[i - 1];
        if ((direction == SweepDirection::Up && !inc) || (direction == SweepDirection::Down && !dec))
            throw ValidationError("frequency grid is not strictly monotone in the sweep direction");
    }
    const double f_lp = low_power_resonance(m);
    const double linewidth = f_lp / low_power_q(m);
    if (std::fabs(grid.front() - f_lp) < 20.0 * linewidth)
        throw ValidationError("first sweep point must be at least 20 linewidths from resonance");
    const bool wrong_side = direction == SweepDirection::Up ? grid.front() > f_lp : grid.front() < f_lp;
    if (wrong_side) throw ValidationError("first sweep point lies on the far side of the resonance");

    SweepResult r;
    r.direction = direction;
    r.points.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const DriveCondition d{grid[i], p_s, direction};
        r.points.push_back(solve_point(d, m, tol, i == 0 ? nullptr : &r.points.back()));
    }
    finish_sweep(r);
    return r;
}

SweepResult sweep_power(double f_probe, const std::vector<double>& p_grid, const ModelParams& m,
                        const SolverTolerances& tol) {
    m.validate();
    if (p_grid.empty()) throw ValidationError("power grid is empty");
    SweepResult r;
    r.direction = SweepDirection::Fixed;
    r.points.reserve(p_grid.size());
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
        const DriveCondition d{f_probe, p_grid[i], SweepDirection::Fixed};
        r.points.push_back(solve_point(d, m, tol, i == 0 ? nullptr : &r.points.back()));
    }
    r.f_s11_min = f_probe;
    return r;
}

double dcm_min_depth(double phi) { return std::fabs(std::sin(phi)); }

std::pair<double, double> dcm_q_from_depth(double s, double phi, double q_e) {
    if (!(std::fabs(phi) < kPi / 2.0)) throw DomainError("dcm_q_from_depth: |phi| must be below pi/2");
    if (s < dcm_min_depth(phi)) throw DomainError("dcm_q_from_depth: depth below the minimum observable value");
    const double c = std::cos(phi);
    const double root = std::sqrt(std::max(0.0, 1.0 + (s * s - 1.0) / (c * c)));
    const double pre = 0.5 * q_e * c * c;
    return {pre * (1.0 - root), pre * (1.0 + root)};
}

}  // namespace tlsnl
