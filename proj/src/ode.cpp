#include "threshold_lab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thlab {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600,
                 e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640,
                 e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

} // namespace

std::vector<OdeSample> integrate_scalar(
    const std::function<double(double, double)>& rhs, double t0, double y0,
    double t_end, const OdeOptions& opts,
    const std::function<bool(double, double)>& stop) {
    std::vector<OdeSample> out;
    out.push_back({t0, y0});
    if (t_end <= t0) return out;

    double t = t0;
    double y = y0;
    double k1 = rhs(t, y);

    double dt = opts.dt_init;
    if (dt <= 0.0) {
        const double scale = opts.abs_tol + opts.rel_tol * std::fabs(y);
        const double d = std::fabs(k1);
        dt = d > 0.0 ? 0.1 * std::cbrt(scale / d) : 1e-4 * (t_end - t0);
        dt = std::min(dt, 0.1 * (t_end - t0));
    }
    dt = std::min(dt, opts.dt_max);

    for (int step = 0; step < opts.max_steps; ++step) {
        if (t >= t_end) return out;
        dt = std::min(dt, t_end - t);

        const double k2 = rhs(t + c2 * dt, y + dt * a21 * k1);
        const double k3 = rhs(t + c3 * dt, y + dt * (a31 * k1 + a32 * k2));
        const double k4 = rhs(t + c4 * dt, y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
        const double k5 = rhs(t + c5 * dt,
                              y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const double k6 = rhs(
            t + dt, y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const double y5 = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const double k7 = rhs(t + dt, y5);
        const double err_raw =
            dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double scale =
            opts.abs_tol + opts.rel_tol * std::max(std::fabs(y), std::fabs(y5));
        const double err = std::fabs(err_raw) / scale;

        if (!std::isfinite(y5) || !std::isfinite(err_raw)) {
            // Retry with a much smaller step; bail out if dt underflows.
            dt *= 0.1;
            if (dt < 1e-15 * std::max(1.0, std::fabs(t))) {
                throw NonFinite("ODE step produced non-finite state");
            }
            k1 = rhs(t, y);
            continue;
        }

        if (err <= 1.0) {
            t += dt;
            y = y5;
            k1 = k7;  // FSAL
            out.push_back({t, y});
            if (stop && stop(t, y)) return out;
        }
        const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        dt *= std::clamp(fac, 0.2, 5.0);
        dt = std::min(dt, opts.dt_max);
        if (dt < 1e-15 * std::max(1.0, std::fabs(t))) {
            throw MaxIterExceeded("ODE step size collapsed");
        }
    }
    throw MaxIterExceeded("ODE exceeded max step count");
}

double RhoSeries::at(double time) const {
    if (t.empty()) throw InvalidData("RhoSeries: empty");
    if (time <= t.front()) return rho.front();
    if (time >= t.back()) return rho.back();
    auto it = std::upper_bound(t.begin(), t.end(), time);
    const size_t k = static_cast<size_t>(it - t.begin());
    const double w = (time - t[k - 1]) / (t[k] - t[k - 1]);
    return rho[k - 1] + w * (rho[k] - rho[k - 1]);
}

EOdeResult integrate_e_ode(const RhoSeries& rho_on_path, double e0,
                           double t_end, double tol) {
    if (rho_on_path.t.size() != rho_on_path.rho.size() || rho_on_path.t.empty()) {
        throw InvalidData("integrate_e_ode: malformed rho series");
    }
    for (double r : rho_on_path.rho) {
        if (!(r >= 0.0)) {
            throw InvalidData("integrate_e_ode: rho series must be >= 0");
        }
    }

    constexpr double kBlowupThreshold = -1e8;

    OdeOptions opts;
    opts.abs_tol = tol;
    opts.rel_tol = tol;

    auto rhs = [&](double t, double e) {
        return -e * (e - rho_on_path.at(t));
    };
    auto stop = [&](double, double e) { return e < kBlowupThreshold; };

    EOdeResult result;
    result.samples = integrate_scalar(rhs, 0.0, e0, t_end, opts, stop);

    const OdeSample last = result.samples.back();
    if (last.y < kBlowupThreshold) {
        BlowupRecord rec;
        rec.t_c_numeric = last.t + 1.0 / std::fabs(last.y);
        rec.t_c_paper_bound = e0 < 0.0 ? -1.0 / e0
                                       : std::numeric_limits<double>::infinity();
        result.blowup = rec;
    }
    return result;
}

} // namespace thlab
