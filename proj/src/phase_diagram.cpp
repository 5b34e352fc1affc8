#include "tlsnl/phase_diagram.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "tlsnl/errors.hpp"
#include "tlsnl/perturbative.hpp"

namespace tlsnl {

const char* to_string(PhaseAxis a) { return a == PhaseAxis::LossTangent ? "fd0" : "kappa_e_over_2pi"; }

const char* to_string(PowerRegime r) {
    switch (r) {
        case PowerRegime::Linear: return "linear";
        case PowerRegime::Saturated: return "saturated";
        case PowerRegime::HeatingOnset: return "heating_onset";
        case PowerRegime::Hot: return "hot";
    }
    return "linear";
}

ModelParams with_axis_value(const ModelParams& base, PhaseAxis axis, double value) {
    ModelParams m = base;
    if (axis == PhaseAxis::LossTangent) {
        m.tls.fd0_reac = value;
        m.tls.fd0_diss = value;
    } else {
        m.res.kappa_e_over_2pi = value;
    }
    return m;
}

namespace {

void check_axis(const std::vector<double>& a, const char* name) {
    if (a.empty()) throw ValidationError(std::string(name) + " axis is empty");
    for (std::size_t i = 1; i < a.size(); ++i)
        if (!(a[i] > a[i - 1])) throw ValidationError(std::string(name) + " axis must be strictly increasing");
}

unsigned worker_count(unsigned requested, std::size_t jobs) {
    unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

template <class Job>
void parallel_for(std::size_t jobs, unsigned threads, Job job) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs; i = next++) job(i);
    };
    const unsigned n = worker_count(threads, jobs);
    if (n <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

}  // namespace

PhaseGrid phase_scan(const std::vector<double>& ps_axis, const std::vector<double>& param_axis, PhaseAxis axis,
                     const ModelParams& base, const PhaseScanOptions& opt) {
    check_axis(ps_axis, "P_s");
    check_axis(param_axis, "parameter");
    PhaseGrid g;
    g.axis = axis;
    g.ps_axis = ps_axis;
    g.param_axis = param_axis;
    g.f_probe.assign(param_axis.size(), 0.0);
    g.cells.assign(param_axis.size() * ps_axis.size(), OperatingPoint{});
    std::vector<std::vector<std::string>> row_failures(param_axis.size());
    for (std::size_t i = 0; i < param_axis.size(); ++i) with_axis_value(base, axis, param_axis[i]).validate();

    parallel_for(param_axis.size(), opt.threads, [&](std::size_t i) {
        const ModelParams m = with_axis_value(base, axis, param_axis[i]);
        const double f = low_power_resonance(m);
        g.f_probe[i] = f;
        const OperatingPoint* warm = nullptr;
        for (std::size_t j = 0; j < ps_axis.size(); ++j) {
            OperatingPoint& cell = g.cells[i * ps_axis.size() + j];
            try {
                cell = solve_point({f, ps_axis[j], SweepDirection::Fixed}, m, opt.tol, warm);
                warm = &cell;
            } catch (const ConvergenceError& e) {
                cell.f_probe = f;
                cell.p_s = ps_axis[j];
                cell.converged = false;
                row_failures[i].push_back(e.what());
                warm = nullptr;
            }
        }
    });
    for (auto& r : row_failures)
        for (auto& s : r) g.failures.push_back(std::move(s));
    return g;
}

PhaseGrid kappa_e_study(const std::vector<double>& ps_axis, const std::vector<double>& kappa_e_axis,
                        const ModelParams& base, const PhaseScanOptions& opt) {
    return phase_scan(ps_axis, kappa_e_axis, PhaseAxis::KappaE, base, opt);
}

BistabilityMap bistability_contour(const PhaseGrid& grid, std::optional<double> threshold) {
    BistabilityMap map;
    map.threshold = threshold ? *threshold : std::fabs(bistability_y_critical());
    const std::size_t np = grid.ps_axis.size();
    map.flags.assign(grid.cells.size(), 0);
    map.first_flagged.assign(grid.param_axis.size(), std::nullopt);
    for (std::size_t c = 0; c < grid.cells.size(); ++c)
        map.flags[c] = grid.cells[c].converged && std::fabs(grid.cells[c].y_fractional) >= map.threshold;
    for (std::size_t i = 0; i < grid.param_axis.size(); ++i) {
        for (std::size_t j = 0; j < np; ++j) {
            if (!map.flags[i * np + j]) continue;
            map.first_flagged[i] = grid.ps_axis[j];
            double p = grid.ps_axis[j];
            if (j > 0 && grid.at(i, j - 1).converged) {
                const double y0 = std::fabs(grid.at(i, j - 1).y_fractional);
                const double y1 = std::fabs(grid.at(i, j).y_fractional);
                if (y1 > y0) {
                    const double w = (map.threshold - y0) / (y1 - y0);
                    const double l0 = std::log(grid.ps_axis[j - 1]), l1 = std::log(grid.ps_axis[j]);
                    p = std::exp(l0 + w * (l1 - l0));
                }
            }
            map.contour.push_back({grid.param_axis[i], p});
            break;
        }
    }
    return map;
}

std::vector<std::pair<std::size_t, std::size_t>> boundary_cells(const PhaseGrid& grid, const BistabilityMap& map) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    const std::size_t np = grid.ps_axis.size(), nq = grid.param_axis.size();
    auto flag = [&](std::size_t i, std::size_t j) { return map.flags[i * np + j] != 0; };
    for (std::size_t i = 0; i < nq; ++i) {
        for (std::size_t j = 0; j < np; ++j) {
            const bool f = flag(i, j);
            const bool edge = (j > 0 && flag(i, j - 1) != f) || (j + 1 < np && flag(i, j + 1) != f) ||
                              (i > 0 && flag(i - 1, j) != f) || (i + 1 < nq && flag(i + 1, j) != f);
            if (edge) out.emplace_back(i, j);
        }
    }
    return out;
}

bool sweep_is_hysteretic(const SweepResult& up, const SweepResult& down) {
    if (!up.jump_indices.empty() || !down.jump_indices.empty()) return true;
    if (up.points.size() != down.points.size()) throw ValidationError("up and down sweeps must share a grid");
    const std::size_t n = up.points.size();
    double noise = 1e-3;
    double diff = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const OperatingPoint& a = up.points[k];
        const OperatingPoint& b = down.points[n - 1 - k];
        noise = std::max({noise, 10.0 * a.residual_y, 10.0 * b.residual_y});
        diff = std::max(diff, std::fabs(a.y_fractional - b.y_fractional));
    }
    return diff > noise;
}

std::vector<double> verification_grid(const ModelParams& m, const OperatingPoint& cell, const VerificationOptions& opt,
                                      double stretch) {
    const double f_lp = low_power_resonance(m);
    const double lw_lp = f_lp / low_power_q(m);
    const bool have = cell.converged && cell.q_total > 0.0;
    const double shift = have ? cell.f_r - f_lp : 0.0;
    const double lw_p = have ? cell.f_r / cell.q_total : lw_lp;
    const double pad = stretch * opt.core_linewidths * lw_p * (1.0 + std::fabs(have ? cell.y_fractional : 0.0));
    double core_lo = f_lp + std::min(0.0, 2.0 * shift) - pad;
    double core_hi = f_lp + std::max(0.0, 2.0 * shift) + pad;
    const double lo = std::min(f_lp - opt.margin_linewidths * lw_lp, core_lo - lw_p);
    const double hi = std::max(f_lp + opt.margin_linewidths * lw_lp, core_hi + lw_p);
    std::vector<double> g;
    auto segment = [&g](double a, double b, std::size_t n, bool include_end) {
        for (std::size_t k = 0; k < n + (include_end ? 1 : 0); ++k)
            g.push_back(a + (b - a) * static_cast<double>(k) / static_cast<double>(n));
    };
    segment(lo, core_lo, opt.outer_points, false);
    segment(core_lo, core_hi, opt.core_points, false);
    segment(core_hi, hi, opt.outer_points, true);
    return g;
}

std::vector<HysteresisCheck> verify_bistability(const PhaseGrid& grid, const BistabilityMap& map,
                                                const ModelParams& base,
                                                const std::vector<std::pair<std::size_t, std::size_t>>& cells,
                                                const VerificationOptions& opt) {
    if (opt.core_points < 3 || opt.outer_points < 1) throw ValidationError("verification sweeps need more points");
    std::vector<HysteresisCheck> out;
    for (const auto& [i, j] : cells) {
        const ModelParams m = with_axis_value(base, grid.axis, grid.param_axis[i]);
        const double p_s = grid.ps_axis[j];
        HysteresisCheck chk{i, j, map.flags[i * grid.ps_axis.size() + j] != 0, false};
        double stretch = 1.0;
        for (int attempt = 0; attempt < 6; ++attempt) {
            const std::vector<double> up = verification_grid(m, grid.at(i, j), opt, stretch);
            const std::vector<double> down(up.rbegin(), up.rend());
            const SweepResult su = sweep_frequency(up, p_s, SweepDirection::Up, m, opt.tol);
            const SweepResult sd = sweep_frequency(down, p_s, SweepDirection::Down, m, opt.tol);
            chk.hysteretic = sweep_is_hysteretic(su, sd);
            // a sweep that never crosses the pulled resonance needs a wider window
            const bool short_window = su.points.back().y_fractional < 0.0 || sd.points.back().y_fractional > 0.0;
            if (!short_window) break;
            stretch *= 2.0;
        }
        out.push_back(chk);
    }
    return out;
}

namespace {

double slope_of(const std::vector<double>& p, const std::vector<double>& v) {
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (v[k] > 0.0 && std::isfinite(v[k])) {
            xs.push_back(p[k]);
            ys.push_back(v[k]);
        }
    }
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return fit_power_law_loglog(xs, ys).exponent;
}

}  // namespace

RegimeSlopes fit_slopes(const std::vector<OperatingPoint>& trace, double p_lo, double p_hi, double t0, double f_r_t0) {
    RegimeSlopes s{};
    s.p_lo = p_lo;
    s.p_hi = p_hi;
    std::vector<double> p, T, dT, n, ki, pd, sh, y;
    for (const OperatingPoint& o : trace) {
        if (!o.converged || o.p_s < p_lo || o.p_s > p_hi) continue;
        p.push_back(o.p_s);
        T.push_back(o.temperature);
        dT.push_back(o.temperature - t0);
        n.push_back(o.nbar);
        ki.push_back(kTwoPi * o.f_r / o.q_i);
        pd.push_back(o.p_d);
        sh.push_back(std::fabs(o.f_r - f_r_t0));
        y.push_back(std::fabs(o.y_fractional));
    }
    s.count = p.size();
    s.temperature = slope_of(p, T);
    s.delta_t = slope_of(p, dT);
    s.nbar = slope_of(p, n);
    s.kappa_i = slope_of(p, ki);
    s.p_d = slope_of(p, pd);
    s.shift = slope_of(p, sh);
    s.y = slope_of(p, y);
    return s;
}

std::vector<RegimeSlopes> scaling_exponents(const std::vector<OperatingPoint>& trace, const ModelParams& m,
                                            const RegimeBounds& b) {
    const double T0 = m.th.t0;
    const double n_s = m.tls.n_s;
    const double nh = n_h(T0, 1.0 / q_i_inv(T0, 0.0, m.res, m.tls), m.res, m.th);
    const double f0 = low_power_resonance(m);
    auto resonant_share = [&](const OperatingPoint& o) {
        return q_res_inv(o.temperature, o.nbar, m.res, m.tls) / q_i_inv(o.temperature, o.nbar, m.res, m.tls);
    };
    auto relaxation_share = [&](const OperatingPoint& o) {
        return q_rel_inv(o.temperature, m.tls) / q_i_inv(o.temperature, o.nbar, m.res, m.tls);
    };
    auto qualifies = [&](PowerRegime r, const OperatingPoint& o) {
        const double ay = std::fabs(o.y_fractional);
        switch (r) {
            case PowerRegime::Linear:
                return o.nbar <= b.linear_max * std::min(n_s, nh);
            case PowerRegime::Saturated:
                return o.nbar >= b.saturated_min * n_s && ay >= b.detuned_y_min && resonant_share(o) >= b.dominance;
            case PowerRegime::HeatingOnset:
                return o.nbar >= b.onset_min * nh && o.nbar >= b.saturated_min * n_s && ay >= b.detuned_y_min &&
                       relaxation_share(o) >= b.dominance;
            case PowerRegime::Hot:
                return o.nbar >= b.hot_min * std::max(n_s, nh) && ay <= b.hot_y_max;
        }
        return false;
    };
    std::vector<RegimeSlopes> out;
    for (PowerRegime r : {PowerRegime::Linear, PowerRegime::Saturated, PowerRegime::HeatingOnset, PowerRegime::Hot}) {
        std::size_t best_len = 0, best_start = 0, run = 0;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            run = trace[i].converged && qualifies(r, trace[i]) ? run + 1 : 0;
            if (run > best_len) {
                best_len = run;
                best_start = i + 1 - run;
            }
        }
        if (best_len < 2) continue;
        const double p_a = trace[best_start].p_s;
        const double p_b = trace[best_start + best_len - 1].p_s;
        if (!(p_a != p_b)) continue;
        RegimeSlopes s = fit_slopes(trace, std::min(p_a, p_b), std::max(p_a, p_b), T0, f0);
        s.regime = r;
        out.push_back(s);
    }
    return out;
}

ExponentPrediction hot_regime_exponents(double d, double gamma) {
    const double den = 1.0 + d + gamma;
    return {1.0 / den, (1.0 - d + gamma) / den, d / den};
}

ExponentPrediction saturated_regime_exponents(double eta, double beta) {
    return {1.0 - 2.0 * eta - beta * (0.5 - eta), 1.0 - 2.0 * eta, -beta * (0.5 - eta)};
}

}  // namespace tlsnl
