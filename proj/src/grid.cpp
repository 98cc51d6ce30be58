#include "threshold_lab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thlab {

namespace {

constexpr double kSpeedFloor = 1e-12;
constexpr double kDtFloor = 1e-14;
constexpr double kNegClip = -1e-12;

// Index with ghost handling: periodic wrap or zeroth-order extrapolation.
inline int ghost(int i, int n, Boundary b) {
    if (b == Boundary::Periodic) {
        return ((i % n) + n) % n;
    }
    return std::clamp(i, 0, n - 1);
}

void check_finite(const std::vector<double>& z, const char* what, double t) {
    for (double v : z) {
        if (!std::isfinite(v)) {
            throw NonFinite(std::string(what) + " non-finite at t = " +
                            std::to_string(t));
        }
    }
}

} // namespace

std::vector<double> GridState::e_field() const {
    std::vector<double> e(n_cells);
    const std::vector<double> ux = dx_field(u);
    for (int i = 0; i < n_cells; ++i) e[i] = ux[i] + rho[i];
    return e;
}

std::vector<double> GridState::dx_field(const std::vector<double>& z) const {
    std::vector<double> d(n_cells);
    const double h = dx();
    for (int i = 0; i < n_cells; ++i) {
        if (boundary == Boundary::Periodic) {
            d[i] = (z[ghost(i + 1, n_cells, boundary)] -
                    z[ghost(i - 1, n_cells, boundary)]) / (2.0 * h);
        } else if (i == 0) {
            d[i] = (z[1] - z[0]) / h;
        } else if (i == n_cells - 1) {
            d[i] = (z[n_cells - 1] - z[n_cells - 2]) / h;
        } else {
            d[i] = (z[i + 1] - z[i - 1]) / (2.0 * h);
        }
    }
    return d;
}

double GridState::mass() const {
    double m = 0.0;
    for (double r : rho) m += r;
    return m * dx();
}

double q_consistency(const AugGridState& state) {
    if (state.n_cells < 3) throw InvalidData("q_consistency: need >= 3 cells");
    const double h = state.dx();
    double worst = 0.0;
    for (int i = 1; i < state.n_cells - 1; ++i) {
        const double dv = (state.v[i + 1] - state.v[i - 1]) / (2.0 * h);
        worst = std::max(worst, std::fabs(state.q[i] - state.n[i] - dv));
    }
    return worst;
}

double cfl_dt(const GridState& state, const ClosureSpec& spec, double cfl) {
    double smax = kSpeedFloor;
    for (int i = 0; i < state.n_cells; ++i) {
        const double l1 = spec.lambda1(state.rho[i], state.u[i]);
        smax = std::max({smax, std::fabs(l1), std::fabs(state.u[i])});
    }
    const double dt = cfl * state.dx() / smax;
    if (dt < kDtFloor) {
        throw CflCollapse("dt = " + std::to_string(dt) + " at t = " +
                          std::to_string(state.t));
    }
    return dt;
}

double cfl_dt(const AugGridState& state, const ClosureSpec& spec, double cfl) {
    double smax = kSpeedFloor;
    for (int i = 0; i < state.n_cells; ++i) {
        const double l1 = spec.lambda1(state.n[i], state.v[i]);
        smax = std::max({smax, std::fabs(l1), std::fabs(state.v[i])});
    }
    const double dt = cfl * state.dx() / smax;
    if (dt < kDtFloor) {
        throw CflCollapse("dt = " + std::to_string(dt) + " at t = " +
                          std::to_string(state.t));
    }
    return dt;
}

GridState step_primitive(const GridState& state, const ClosureSpec& spec,
                         double dt, long* clip_incidents) {
    const int n = state.n_cells;
    const double h = state.dx();
    const Boundary b = state.boundary;

    // Cache f and lambda1 per cell.
    std::vector<double> fv(n), l1(n);
    for (int i = 0; i < n; ++i) {
        fv[i] = spec.f(state.rho[i], state.u[i]);
        l1[i] = spec.lambda1(state.rho[i], state.u[i]);
    }

    auto flux = [&](int i) { return state.rho[i] * fv[i]; };

    // Local Lax-Friedrichs interface fluxes for (rho f)_x.
    std::vector<double> fhat(n + 1);
    for (int k = 0; k <= n; ++k) {
        const int il = ghost(k - 1, n, b);
        const int ir = ghost(k, n, b);
        const double a = std::max(std::fabs(l1[il]), std::fabs(l1[ir]));
        fhat[k] = 0.5 * (flux(il) + flux(ir)) -
                  0.5 * a * (state.rho[ir] - state.rho[il]);
    }

    GridState next = state;
    next.t = state.t + dt;
    for (int i = 0; i < n; ++i) {
        double r = state.rho[i] - dt / h * (fhat[i + 1] - fhat[i]);
        if (r < 0.0) {
            if (r < kNegClip && clip_incidents) ++(*clip_incidents);
            r = 0.0;
        }
        next.rho[i] = r;

        // Upwind u u_x plus the explicit relaxation source.
        const double ui = state.u[i];
        double du;
        if (ui >= 0.0) {
            du = (ui - state.u[ghost(i - 1, n, b)]) / h;
        } else {
            du = (state.u[ghost(i + 1, n, b)] - ui) / h;
        }
        next.u[i] = ui - dt * ui * du + dt * state.rho[i] * (fv[i] - ui);
    }
    check_finite(next.rho, "rho", next.t);
    check_finite(next.u, "u", next.t);
    return next;
}

AugGridState step_augmented(const AugGridState& state, const ClosureSpec& spec,
                            double dt) {
    const int nc = state.n_cells;
    const double h = state.dx();
    const Boundary b = state.boundary;

    AugGridState next = state;
    next.t = state.t + dt;

    auto upwind = [&](const std::vector<double>& z, int i, double speed) {
        if (speed >= 0.0) {
            return (z[i] - z[ghost(i - 1, nc, b)]) / h;
        }
        return (z[ghost(i + 1, nc, b)] - z[i]) / h;
    };

    for (int i = 0; i < nc; ++i) {
        const DerivStack d = spec.eval(state.n[i], state.v[i]);
        const double s1 = d.lambda1;  // n f_n + f
        const double s2 = state.v[i];

        const double nq = state.n[i] - state.q[i];
        next.n[i] = state.n[i] - dt * s1 * upwind(state.n, i, s1) +
                    dt * d.f_u * state.n[i] * nq;
        next.v[i] = state.v[i] - dt * s2 * upwind(state.v, i, s2) +
                    dt * state.n[i] * (d.f - state.v[i]);
        next.q[i] = state.q[i] - dt * s2 * upwind(state.q, i, s2) +
                    dt * state.q[i] * nq;
    }
    check_finite(next.n, "n", next.t);
    check_finite(next.v, "v", next.t);
    check_finite(next.q, "q", next.t);
    return next;
}

namespace {

MonitorSample make_monitor(const GridState& s, const RunConfig& cfg) {
    MonitorSample m;
    m.t = s.t;
    const std::vector<double> e = s.e_field();
    const std::vector<double> dr = s.dx_field(s.rho);
    const std::vector<double> de = s.dx_field(e);
    const std::vector<double> du = s.dx_field(s.u);

    m.min_e = *std::min_element(e.begin(), e.end());
    m.max_e = *std::max_element(e.begin(), e.end());
    m.max_rho = *std::max_element(s.rho.begin(), s.rho.end());
    m.min_u = *std::min_element(s.u.begin(), s.u.end());
    m.max_u = *std::max_element(s.u.begin(), s.u.end());
    m.min_dx_rho = *std::min_element(dr.begin(), dr.end());
    m.max_dx_rho = *std::max_element(dr.begin(), dr.end());
    m.sup_abs_dx_rho = std::max(std::fabs(m.min_dx_rho), std::fabs(m.max_dx_rho));
    m.min_dx_e = *std::min_element(de.begin(), de.end());
    m.max_dx_e = *std::max_element(de.begin(), de.end());
    for (double v : du) m.max_abs_dx_u = std::max(m.max_abs_dx_u, std::fabs(v));

    if (cfg.r_eval) {
        double rmin = std::numeric_limits<double>::infinity();
        double rmax = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < s.n_cells; ++i) {
            const double R = cfg.r_eval(s.rho[i], s.u[i]);
            rmin = std::min(rmin, R);
            rmax = std::max(rmax, R);
        }
        m.min_R = rmin;
        m.max_R = rmax;
    }
    if (cfg.sign0 != 0) {
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i < s.n_cells; ++i) {
            worst = std::min(worst, cfg.sign0 *
                             (cfg.spec.f(s.rho[i], s.u[i]) - s.u[i]));
        }
        m.min_signed_g = worst;
    }
    return m;
}

// Explicit-source stability limit. The CFL bound only tracks wave speeds;
// near density concentration the relaxation rate rho * |f_u - 1| dominates
// and has to cap dt as well.
double source_dt(const GridState& s, const ClosureSpec& spec) {
    double rate = 0.0;
    for (int i = 0; i < s.n_cells; ++i) {
        rate = std::max(rate, s.rho[i] *
                                  (std::fabs(spec.f_u(s.rho[i], s.u[i])) + 1.0));
    }
    return rate > 0.0 ? 0.5 / rate : 1e300;
}

double source_dt(const AugGridState& s, const ClosureSpec& spec) {
    double rate = 0.0;
    for (int i = 0; i < s.n_cells; ++i) {
        const double fu = std::fabs(spec.f_u(s.n[i], s.v[i]));
        const double an = std::fabs(s.n[i]);
        const double aq = std::fabs(s.q[i]);
        rate = std::max({rate, fu * (2.0 * an + aq), an * (fu + 1.0),
                         an + 2.0 * aq});
    }
    return rate > 0.0 ? 0.5 / rate : 1e300;
}

MonitorSample make_monitor_aug(const AugGridState& a, const RunConfig& cfg) {
    GridState view;
    view.t = a.t;
    view.x_lo = a.x_lo;
    view.x_hi = a.x_hi;
    view.n_cells = a.n_cells;
    view.boundary = a.boundary;
    view.rho = a.n;
    view.u = a.v;
    MonitorSample m = make_monitor(view, cfg);
    m.q_defect = q_consistency(a);
    return m;
}

} // namespace

RunResult run(const RunConfig& config) {
    if (!(config.t_end > 0.0)) throw InvalidData("run: t_end must be > 0");
    if (config.n_cells < 3) throw InvalidData("run: need at least 3 cells");

    RunResult result;

    std::vector<double> outputs = config.output_times;
    std::sort(outputs.begin(), outputs.end());

    GridState prim;
    AugGridState aug;
    const bool augmented = config.mode == RunMode::Augmented;
    if (augmented) {
        aug.x_lo = config.x_lo;
        aug.x_hi = config.x_hi;
        aug.n_cells = config.n_cells;
        aug.boundary = config.boundary;
        aug.n.resize(config.n_cells);
        aug.v.resize(config.n_cells);
        aug.q.resize(config.n_cells);
        for (int i = 0; i < config.n_cells; ++i) {
            const double x = aug.x_center(i);
            aug.n[i] = config.rho0.value(x);
            aug.v[i] = config.u0.value(x);
        }
        if (config.q_seeding == QSeeding::Analytic) {
            for (int i = 0; i < config.n_cells; ++i) {
                aug.q[i] = aug.n[i] + config.u0.d1(aug.x_center(i));
            }
        } else {
            GridState tmp;
            tmp.n_cells = config.n_cells;
            tmp.x_lo = config.x_lo;
            tmp.x_hi = config.x_hi;
            tmp.boundary = config.boundary;
            tmp.u = aug.v;
            tmp.rho = aug.n;
            const std::vector<double> dv = tmp.dx_field(tmp.u);
            for (int i = 0; i < config.n_cells; ++i) aug.q[i] = aug.n[i] + dv[i];
        }
    } else {
        prim.x_lo = config.x_lo;
        prim.x_hi = config.x_hi;
        prim.n_cells = config.n_cells;
        prim.boundary = config.boundary;
        prim.rho.resize(config.n_cells);
        prim.u.resize(config.n_cells);
        for (int i = 0; i < config.n_cells; ++i) {
            const double x = prim.x_center(i);
            prim.rho[i] = std::max(0.0, config.rho0.value(x));
            prim.u[i] = config.u0.value(x);
        }
    }

    auto current_monitor = [&]() {
        return augmented ? make_monitor_aug(aug, config)
                         : make_monitor(prim, config);
    };
    auto primitive_view = [&]() -> GridState {
        if (!augmented) return prim;
        GridState view;
        view.t = aug.t;
        view.x_lo = aug.x_lo;
        view.x_hi = aug.x_hi;
        view.n_cells = aug.n_cells;
        view.boundary = aug.boundary;
        view.rho = aug.n;
        view.u = aug.v;
        return view;
    };

    result.monitors.push_back(current_monitor());
    if (config.keep_history) result.history.push_back(primitive_view());

    size_t out_idx = 0;
    auto flush_outputs = [&](double t) {
        while (out_idx < outputs.size() &&
               outputs[out_idx] <= t + 1e-12 * std::max(1.0, t)) {
            if (augmented) {
                result.aug_snapshots.push_back(aug);
            }
            result.snapshots.push_back(primitive_view());
            ++out_idx;
        }
    };
    flush_outputs(0.0);

    double t = 0.0;
    result.termination = Termination::ReachedT;
    while (t < config.t_end - 1e-14 * std::max(1.0, config.t_end)) {
        double dt;
        try {
            dt = augmented ? cfl_dt(aug, config.spec, config.cfl)
                           : cfl_dt(prim, config.spec, config.cfl);
        } catch (const CflCollapse&) {
            result.termination = Termination::CflCollapse;
            break;
        }
        dt = std::min(dt, config.dt_max);
        dt = std::min(dt, config.t_end - t);
        if (out_idx < outputs.size()) {
            dt = std::min(dt, std::max(outputs[out_idx] - t, kDtFloor));
        }

        if (augmented) {
            aug = step_augmented(aug, config.spec, dt);
            t = aug.t;
        } else {
            prim = step_primitive(prim, config.spec, dt, &result.clip_incidents);
            t = prim.t;
        }

        MonitorSample m = current_monitor();
        result.monitors.push_back(m);
        if (config.keep_history) result.history.push_back(primitive_view());
        flush_outputs(t);

        if (m.min_e < -config.guards.e_min ||
            m.max_abs_dx_u > config.guards.dxu_max) {
            result.termination = Termination::BlowupGuard;
            result.guard_time = t;
            // Locate the offending cell for the guard record.
            const GridState view = primitive_view();
            const std::vector<double> e = view.e_field();
            int worst = 0;
            for (int i = 1; i < view.n_cells; ++i) {
                if (e[i] < e[worst]) worst = i;
            }
            result.guard_x = view.x_center(worst);
            break;
        }
    }

    result.t_final = t;
    return result;
}

GridFieldProvider::GridFieldProvider(std::vector<GridState> states)
    : states_(std::move(states)) {
    if (states_.empty()) throw InvalidData("GridFieldProvider: no snapshots");
    e_.reserve(states_.size());
    for (const GridState& s : states_) e_.push_back(s.e_field());
}

double GridFieldProvider::t_max() const { return states_.back().t; }

std::optional<FieldSample> GridFieldProvider::query(double t, double x) const {
    if (t < states_.front().t - 1e-12 || t > states_.back().t + 1e-12) {
        return std::nullopt;
    }
    // Snapshot bracket in time.
    auto cmp = [](const GridState& s, double tv) { return s.t < tv; };
    auto it = std::lower_bound(states_.begin(), states_.end(), t, cmp);
    size_t k1 = std::min<size_t>(it - states_.begin(), states_.size() - 1);
    size_t k0 = k1 > 0 ? k1 - 1 : 0;
    double wt = 0.0;
    if (k1 > k0 && states_[k1].t > states_[k0].t) {
        wt = (t - states_[k0].t) / (states_[k1].t - states_[k0].t);
        wt = std::clamp(wt, 0.0, 1.0);
    }

    auto sample_snapshot = [&](size_t k, double& rho, double& u,
                               double& e) -> bool {
        const GridState& s = states_[k];
        const double h = s.dx();
        if (x < s.x_lo || x > s.x_hi) return false;
        // Linear interpolation between cell centers, clamped at the edges.
        double pos = (x - s.x_lo) / h - 0.5;
        pos = std::clamp(pos, 0.0, static_cast<double>(s.n_cells - 1));
        const int i0 = std::min(static_cast<int>(pos), s.n_cells - 2);
        const double w = std::clamp(pos - i0, 0.0, 1.0);
        rho = (1.0 - w) * s.rho[i0] + w * s.rho[i0 + 1];
        u = (1.0 - w) * s.u[i0] + w * s.u[i0 + 1];
        e = (1.0 - w) * e_[k][i0] + w * e_[k][i0 + 1];
        return true;
    };

    double r0, u0, e0, r1, u1, e1;
    if (!sample_snapshot(k0, r0, u0, e0) || !sample_snapshot(k1, r1, u1, e1)) {
        return std::nullopt;
    }
    FieldSample out;
    out.rho = (1.0 - wt) * r0 + wt * r1;
    out.u = (1.0 - wt) * u0 + wt * u1;
    out.e = (1.0 - wt) * e0 + wt * e1;
    return out;
}

} // namespace thlab
