#include "tlsnl/perturbative.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "tlsnl/errors.hpp"

namespace tlsnl {

namespace {

using cd = std::complex<double>;

cd dpoly(cd y, const SwensonProblem& p) { return 12.0 * y * y - 8.0 * p.y0 * y + 1.0; }

cd polish(cd y, const SwensonProblem& p, bool real_only) {
    for (int i = 0; i < 4; ++i) {
        const cd f = swenson_polynomial(y, p);
        const cd d = dpoly(y, p);
        if (std::abs(d) == 0.0) break;
        cd next = y - f / d;
        if (real_only) next = cd(next.real(), 0.0);
        if (!(std::abs(swenson_polynomial(next, p)) < std::abs(f))) break;
        y = next;
    }
    return y;
}

}  // namespace

double swenson_a_critical() { return 4.0 / (3.0 * std::sqrt(3.0)); }

double bistability_y_critical() {
    const double ac = swenson_a_critical();
    auto f = [ac](double y) { return y * (1.0 + 4.0 * y * y) + ac; };
    boost::uintmax_t it = 200;
    const auto r = boost::math::tools::toms748_solve(f, -1.0, 0.0, boost::math::tools::eps_tolerance<double>(53), it);
    return 0.5 * (r.first + r.second);
}

std::complex<double> swenson_polynomial(std::complex<double> y, const SwensonProblem& p) {
    return ((4.0 * y - 4.0 * p.y0) * y + 1.0) * y - (p.y0 + p.a);
}

double swenson_residual_scale(const SwensonProblem& p) {
    return std::max({1.0, std::fabs(p.y0 * p.y0 * p.y0), std::fabs(p.a)});
}

std::array<std::complex<double>, 3> swenson_roots(const SwensonProblem& p) {
    if (!std::isfinite(p.y0) || !std::isfinite(p.a)) throw DomainError("swenson_roots: non-finite input");
    // monic y^3 + b y^2 + c y + d, shifted y = t + y0/3
    const double b = -p.y0;
    const double shift = -b / 3.0;
    const double P = 0.25 - p.y0 * p.y0 / 3.0;
    const double Q = -2.0 * p.y0 * p.y0 * p.y0 / 27.0 + p.y0 / 12.0 - 0.25 * (p.y0 + p.a);
    const double disc = -(4.0 * P * P * P + 27.0 * Q * Q);
    std::array<cd, 3> r;
    if (disc > 0.0 && P < 0.0) {
        const double m = 2.0 * std::sqrt(-P / 3.0);
        const double arg = std::clamp(3.0 * Q / (P * m), -1.0, 1.0);
        const double th = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            const double t = m * std::cos(th - 2.0 * kPi * k / 3.0);
            r[k] = polish(cd(t + shift, 0.0), p, true);
        }
        std::sort(r.begin(), r.end(), [](cd u, cd v) { return u.real() < v.real(); });
        return r;
    }
    const double s = std::sqrt(std::max(0.0, 0.25 * Q * Q + P * P * P / 27.0));
    const double A = -std::copysign(std::cbrt(std::fabs(Q) * 0.5 + s), Q);
    const double B = A != 0.0 ? -P / (3.0 * A) : 0.0;
    const double t_real = A + B;
    r[0] = polish(cd(t_real + shift, 0.0), p, true);
    const double re = -0.5 * t_real + shift;
    const double im = 0.5 * std::sqrt(3.0) * (A - B);
    r[1] = polish(cd(re, std::fabs(im)), p, false);
    r[2] = std::conj(r[1]);
    return r;
}

bool is_real_root(std::complex<double> y) {
    return std::fabs(y.imag()) <= 1e-10 * std::max(1.0, std::fabs(y.real()));
}

std::vector<double> swenson_real_roots(const SwensonProblem& p) {
    std::vector<double> out;
    for (const cd& y : swenson_roots(p))
        if (is_real_root(y)) out.push_back(y.real());
    std::sort(out.begin(), out.end());
    if (out.size() == 2) out.erase(out.begin() + 1);
    return out;
}

int swenson_real_root_count(const SwensonProblem& p) {
    return static_cast<int>(swenson_real_roots(p).size());
}

BranchTrace track_cubic_branch(const std::vector<SwensonProblem>& problems) {
    BranchTrace tr;
    tr.y.reserve(problems.size());
    enum class Label { Single, Low, High };
    Label label = Label::Single;
    std::vector<double> prev;
    for (std::size_t i = 0; i < problems.size(); ++i) {
        const std::vector<double> roots = swenson_real_roots(problems[i]);
        double y;
        if (i == 0) {
            y = roots.front();
            if (roots.size() == 3) {
                const double target = problems[i].y0;
                const bool low = std::fabs(roots.front() - target) <= std::fabs(roots.back() - target);
                label = low ? Label::Low : Label::High;
                y = low ? roots.front() : roots.back();
            }
        } else if (roots.size() == 3) {
            if (label == Label::Single) {
                const double last = tr.y.back();
                label = std::fabs(roots.front() - last) <= std::fabs(roots.back() - last) ? Label::Low : Label::High;
            }
            y = label == Label::Low ? roots.front() : roots.back();
        } else {
            y = roots.front();
            if (prev.size() == 3) {
                const double tracked = label == Label::Low ? prev.front() : prev.back();
                const double other = label == Label::Low ? prev.back() : prev.front();
                if (std::fabs(y - other) < std::fabs(y - tracked)) tr.jump_indices.push_back(i);
            }
            label = Label::Single;
        }
        tr.y.push_back(y);
        prev = roots;
    }
    return tr;
}

BranchTrace swenson_branch(const std::vector<double>& y0_grid, double a, SweepDirection direction) {
    for (std::size_t i = 1; i < y0_grid.size(); ++i) {
        const bool inc = y0_grid[i] > y0_grid[i - 1];
        if ((direction == SweepDirection::Up && !inc) || (direction == SweepDirection::Down && inc))
            throw ValidationError("swenson_branch: grid not monotone in the sweep direction");
    }
    std::vector<SwensonProblem> probs;
    probs.reserve(y0_grid.size());
    for (double y0 : y0_grid) probs.push_back({y0, a});
    return track_cubic_branch(probs);
}

std::optional<std::pair<double, double>> swenson_fold_points(double a) {
    if (std::fabs(a) <= swenson_a_critical()) return std::nullopt;
    // folds satisfy (1 + 4 y^2)^2 = -8 a y; y0 = y - a / (1 + 4 y^2)
    const double s = a < 0.0 ? 1.0 : -1.0;
    const double A = std::fabs(a);
    auto g = [A](double y) { const double q = 1.0 + 4.0 * y * y; return q * q - 8.0 * A * y; };
    // g has a minimum at y_m solving 16 y (1 + 4 y^2) = 8 A
    boost::uintmax_t it = 200;
    auto gp = [A](double y) { return 16.0 * y * (1.0 + 4.0 * y * y) - 8.0 * A; };
    auto rm = boost::math::tools::toms748_solve(gp, 0.0, std::cbrt(A) + 1.0, boost::math::tools::eps_tolerance<double>(53), it);
    const double ym = 0.5 * (rm.first + rm.second);
    it = 200;
    auto r1 = boost::math::tools::toms748_solve(g, 0.0, ym, boost::math::tools::eps_tolerance<double>(53), it);
    it = 200;
    auto r2 = boost::math::tools::toms748_solve(g, ym, std::cbrt(A) + 1.0, boost::math::tools::eps_tolerance<double>(53), it);
    const double y1 = 0.5 * (r1.first + r1.second);
    const double y2 = 0.5 * (r2.first + r2.second);
    auto y0_of = [A](double y) { return y + A / (1.0 + 4.0 * y * y); };
    double lo = y0_of(y2), hi = y0_of(y1);
    if (s < 0.0) {
        const double t = lo;
        lo = -hi;
        hi = -t;
    }
    return std::make_pair(std::min(lo, hi), std::max(lo, hi));
}

JumpLocations swenson_jump_locations(double a, double half_span, std::size_t n) {
    JumpLocations out;
    std::vector<double> up(n), down(n);
    for (std::size_t i = 0; i < n; ++i) {
        up[i] = -half_span + 2.0 * half_span * static_cast<double>(i) / static_cast<double>(n - 1);
        down[n - 1 - i] = up[i];
    }
    auto refine = [a](double y_three, double y_one) {
        for (int k = 0; k < 200; ++k) {
            const double mid = 0.5 * (y_three + y_one);
            if (mid == y_three || mid == y_one) break;
            if (swenson_real_root_count({mid, a}) == 3) y_three = mid; else y_one = mid;
        }
        return 0.5 * (y_three + y_one);
    };
    const BranchTrace tu = swenson_branch(up, a, SweepDirection::Up);
    if (!tu.jump_indices.empty()) {
        const std::size_t i = tu.jump_indices.front();
        out.up = refine(up[i - 1], up[i]);
    }
    const BranchTrace td = swenson_branch(down, a, SweepDirection::Down);
    if (!td.jump_indices.empty()) {
        const std::size_t i = td.jump_indices.front();
        out.down = refine(down[i - 1], down[i]);
    }
    return out;
}

double jump_up_asymptotic(double a) {
    return -a - 1.0 / (16.0 * a) - 1.0 / (256.0 * a * a * a);
}

double jump_down_asymptotic(double a) {
    const double A = -a;
    const double c = std::cbrt(A);
    return 3.0 * c / std::pow(2.0, 4.0 / 3.0) - 1.0 / (std::pow(2.0, 8.0 / 3.0) * c) + 1.0 / (48.0 * a) -
           7.0 / (864.0 * std::cbrt(2.0) * std::pow(A, 5.0 / 3.0));
}

double jump_up_remainder(double a) { return std::pow(std::fabs(a), -5.0); }

double jump_down_remainder(double a) { return std::pow(-a, -7.0 / 3.0); }

double swenson_a(double T0, double q, double q_e, double q_i, double p_s, double r_th, double tcf_value) {
    (void)T0;
    if (!(q > 0.0 && q_e > 0.0 && q_i > 0.0)) throw DomainError("swenson_a: quality factors must be positive");
    return -r_th * tcf_value * 4.0 * q * q * q / (q_e * q_i) * p_s;
}

double swenson_a_depth(double r_th, double tcf_value, double q_e, double alpha_depth, double p_s) {
    return -r_th * tcf_value * 4.0 * q_e * alpha_depth * alpha_depth * (1.0 - alpha_depth) * p_s;
}

DuffingScales duffing_scales_from(double t_d, double t_r, double q_i0, double omega_r, double r_th) {
    DuffingScales s;
    s.t_d = t_d;
    s.t_r = t_r;
    const double ratio = t_d / t_r;
    s.phi_nl = std::atan(ratio) - kPi / 2.0;
    s.t_star = t_d / std::sqrt(1.0 + ratio * ratio);
    s.q_i0 = q_i0;
    s.omega_r = omega_r;
    s.n_star = q_i0 * s.t_star / (kHbar * omega_r * omega_r * r_th);
    return s;
}

DuffingScales duffing_scales(double T0, const ResonatorParams& p, const TlsEnsembleParams& t,
                             const ThermalParams& th) {
    if (!(T0 > 0.0)) throw DomainError("duffing_scales: T0 must be positive");
    ThermalParams at = th;
    at.t0 = T0;
    const double r_th = thermal_resistance(at);
    const double w = kTwoPi * p.f_r0;
    const double eps = kHbar * w / (2.0 * kBoltzmann * T0);
    const double sech = 1.0 / std::cosh(eps);
    const double kt = kBoltzmann * T0;
    const double t_d0 = 16.0 * t.n_s * r_th * kt * kt / kHbar * eps * eps / std::tanh(eps);
    const double t_d1 = 2.0 * T0 / (t.fd0_diss * eps * sech * sech);
    const double t_d = 1.0 / (1.0 / t_d0 + 1.0 / t_d1);
    const double q_i0 = 1.0 / q_i_inv(T0, 0.0, p, t);
    DuffingScales s = duffing_scales_from(t_d, 1.0 / tcf(T0, p, t), q_i0, w, r_th);
    s.t_d0 = t_d0;
    s.t_d1 = t_d1;
    return s;
}

double bifurcation_factor(double phi) {
    const double c = std::cos(kPi / 3.0 - phi);
    return 1.0 / (8.0 * c * c * c);
}

double duffing_a_star(double q, double p_s, double omega_r, double q_e, double n_star) {
    return 4.0 * q * q * q * p_s / (kHbar * omega_r * omega_r * q_e * n_star);
}

namespace {

void check_phi(double phi) {
    if (!(std::fabs(phi) <= kPi / 2.0)) throw ValidationError("duffing model requires |phi| <= pi/2");
}

}  // namespace

DuffingSolution duffing_solve(double y0, double a_star, const DuffingScales& s, double q, double q_e) {
    check_phi(s.phi_nl);
    DuffingSolution out;
    const cd rot = std::polar(1.0, -s.phi_nl);
    const cd z = cd(1.0, 2.0 * y0) * rot;
    out.re_z = z.real();
    out.k0 = z.imag() / (2.0 * z.real());
    out.a_eff = a_star / (z.real() * z.real() * z.real());
    out.k = swenson_real_roots({out.k0, -out.a_eff});
    for (double k : out.k) {
        const cd pp = cd(1.0, 2.0 * k) * z.real() * std::polar(1.0, s.phi_nl);
        out.s11.push_back(1.0 - 2.0 * q / (pp * q_e));
    }
    return out;
}

DuffingTrace duffing_branch(const std::vector<double>& y0_grid, double a_star, const DuffingScales& s, double q,
                            double q_e) {
    check_phi(s.phi_nl);
    std::vector<SwensonProblem> probs;
    std::vector<double> re_z;
    for (double y0 : y0_grid) {
        const cd z = cd(1.0, 2.0 * y0) * std::polar(1.0, -s.phi_nl);
        probs.push_back({z.imag() / (2.0 * z.real()), -a_star / (z.real() * z.real() * z.real())});
        re_z.push_back(z.real());
    }
    const BranchTrace bt = track_cubic_branch(probs);
    DuffingTrace tr;
    tr.k = bt.y;
    tr.jump_indices = bt.jump_indices;
    for (std::size_t i = 0; i < bt.y.size(); ++i) {
        const cd pp = cd(1.0, 2.0 * bt.y[i]) * re_z[i] * std::polar(1.0, s.phi_nl);
        tr.s11.push_back(1.0 - 2.0 * q / (pp * q_e));
    }
    return tr;
}

double fd0_bifurcation_bound(double T0, double f_r, double n_ch, double n_s) {
    const double nth = n_thermal(T0, f_r);
    return kPi * kPi / (8.0 * std::sqrt(3.0)) * n_ch * nth * nth / n_s * std::tanh(1.0 / (2.0 * nth));
}

double delta_t_from_y(double y, double alpha_depth, double p_s, double r_th) {
    if (!(alpha_depth >= 0.0 && alpha_depth <= 1.0)) throw DomainError("alpha_depth must lie in [0, 1]");
    return 4.0 * alpha_depth * (1.0 - alpha_depth) / (1.0 + 4.0 * y * y) * r_th * p_s;
}

std::complex<double> s11_from_y(double y, double alpha_depth) {
    if (!(alpha_depth >= 0.0 && alpha_depth <= 1.0)) throw DomainError("alpha_depth must lie in [0, 1]");
    return 1.0 - 2.0 * alpha_depth / cd(1.0, 2.0 * y);
}

LinearizedComparison compare_linearized(const ModelParams& m, double alpha_depth, double p_s,
                                        const std::vector<double>& y0_grid, SweepDirection direction,
                                        const SolverTolerances& tol) {
    if (!(alpha_depth > 0.0 && alpha_depth < 1.0)) throw ValidationError("alpha_depth must lie in (0, 1)");
    if (y0_grid.empty()) throw ValidationError("compare_linearized: empty y0 grid");
    ModelParams mq = m;
    const double q_e = m.res.q_e();
    mq.fixed_q = alpha_depth * q_e;
    const double q = *mq.fixed_q;
    const double T0 = m.th.t0;
    const double r_th = thermal_resistance(m.th);

    LinearizedComparison out;
    out.alpha_depth = alpha_depth;
    out.p_s = p_s;
    out.a = swenson_a_depth(r_th, tcf(T0, m.res, m.tls), q_e, alpha_depth, p_s);
    const BranchTrace lin = swenson_branch(y0_grid, out.a, direction);

    constexpr double kLeadIn = 25.0;
    constexpr std::size_t kLeadPoints = 100;
    const double sgn = direction == SweepDirection::Down ? 1.0 : -1.0;
    std::vector<double> f;
    const double start = sgn * kLeadIn;
    const bool need_lead = sgn * y0_grid.front() < kLeadIn;
    if (need_lead) {
        for (std::size_t i = 0; i < kLeadPoints; ++i) {
            const double y0 = start + (y0_grid.front() - start) * static_cast<double>(i) / kLeadPoints;
            f.push_back(probe_frequency(y0 / q, mq));
        }
    }
    const std::size_t offset = f.size();
    for (double y0 : y0_grid) f.push_back(probe_frequency(y0 / q, mq));
    const SweepResult sw = sweep_frequency(f, p_s, direction, mq, tol);

    const double k = 4.0 * q_e * alpha_depth * alpha_depth * (1.0 - alpha_depth) * p_s;
    out.points.reserve(y0_grid.size());
    for (std::size_t i = 0; i < y0_grid.size(); ++i) {
        const OperatingPoint& op = sw.points[offset + i];
        LinearizedPoint pt;
        pt.y0 = y0_grid[i];
        pt.y_exact = op.y_fractional;
        pt.y_linear = lin.y[i];
        pt.dt_rel_exact = (op.temperature - T0) / T0;
        pt.dt_rel_linear = delta_t_from_y(pt.y_linear, alpha_depth, p_s, r_th) / T0;
        pt.a_effective = -tcf(op.temperature, m.res, m.tls) / g_th(op.temperature, m.th) * k;
        out.points.push_back(pt);
    }
    return out;
}

}  // namespace tlsnl
