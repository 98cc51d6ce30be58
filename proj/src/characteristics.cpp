#include "threshold_lab/characteristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thlab {

PathTrace trace_path(const FieldProvider& fields, const ClosureSpec& spec,
                     double x0, PathKind kind, double t_end, double dt_max,
                     const PhiFactorTable* riemann) {
    if (!(dt_max > 0.0)) throw InvalidData("trace_path: dt_max must be > 0");

    PathTrace trace;
    trace.kind = kind;
    trace.origin = x0;

    bool left_domain = false;
    auto speed = [&](double t, double x) -> double {
        auto s = fields.query(t, x);
        if (!s) {
            left_domain = true;
            return 0.0;
        }
        return kind == PathKind::XPath ? s->u : spec.lambda1(s->rho, s->u);
    };

    OdeOptions opts;
    opts.abs_tol = 1e-8;
    opts.rel_tol = 1e-8;
    opts.dt_max = dt_max;

    std::vector<OdeSample> xs;
    try {
        xs = integrate_scalar(speed, 0.0, x0, std::min(t_end, fields.t_max()),
                              opts, [&](double, double) { return left_domain; });
    } catch (const Error&) {
        left_domain = true;
    }

    for (const OdeSample& s : xs) {
        auto f = fields.query(s.t, s.y);
        if (!f) break;
        PathSample ps;
        ps.t = s.t;
        ps.x = s.y;
        ps.rho = f->rho;
        ps.u = f->u;
        ps.e = f->e;
        if (riemann) ps.R = riemann->riemann(f->rho, f->u);
        trace.samples.push_back(ps);
    }
    trace.terminated =
        left_domain ? PathTermination::LeftDomain : PathTermination::ReachedT;
    if (trace.samples.empty()) {
        throw InvalidData("trace_path: origin outside field coverage");
    }
    return trace;
}

PressurelessPoint pressureless_exact(const ProfileSpec& rho0,
                                     const ProfileSpec& u0, double alpha,
                                     double t) {
    if (t < 0.0) throw InvalidData("pressureless_exact: t must be >= 0");
    PressurelessPoint p;
    const double slope = u0.d1(alpha);
    p.x = alpha + u0.value(alpha) * t;
    const double denom = 1.0 + slope * t;
    if (denom <= 0.0) {
        p.blowup_at = -1.0 / slope;
        p.rho = std::numeric_limits<double>::infinity();
        p.u_x = -std::numeric_limits<double>::infinity();
        return p;
    }
    p.rho = rho0.value(alpha) / denom;
    p.u_x = slope / denom;
    return p;
}

PressurelessExactProvider::PressurelessExactProvider(ProfileSpec rho0,
                                                     ProfileSpec u0,
                                                     double x_lo, double x_hi,
                                                     double t_end)
    : rho0_(std::move(rho0)), u0_(std::move(u0)), x_lo_(x_lo), x_hi_(x_hi),
      t_end_(t_end) {
    if (!(x_hi > x_lo) || !(t_end >= 0.0)) {
        throw InvalidData("PressurelessExactProvider: bad domain");
    }
}

std::optional<FieldSample> PressurelessExactProvider::query(double t,
                                                            double x) const {
    if (t < 0.0 || t > t_end_ || x < x_lo_ || x > x_hi_) return std::nullopt;

    // Invert x = alpha + u0(alpha) t. The map is strictly increasing in
    // alpha while 1 + u0'(alpha) t > 0; bisect on a padded interval.
    auto fwd = [&](double a) { return a + u0_.value(a) * t - x; };
    const double pad = (std::fabs(u0_.sup_value()) +
                        std::fabs(u0_.inf_value()) + 1.0) * (t + 1.0);
    double lo = x_lo_ - pad, hi = x_hi_ + pad;
    if (fwd(lo) > 0.0 || fwd(hi) < 0.0) return std::nullopt;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::fabs(x)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (fwd(mid) < 0.0) lo = mid; else hi = mid;
    }
    const double alpha = 0.5 * (lo + hi);

    const double denom = 1.0 + u0_.d1(alpha) * t;
    if (denom <= 0.0) return std::nullopt;  // past blow-up on this path
    FieldSample s;
    s.rho = rho0_.value(alpha) / denom;
    s.u = u0_.value(alpha);
    s.e = (u0_.d1(alpha) + rho0_.value(alpha)) / denom;
    return s;
}

BlowupFit estimate_blowup_rate(const std::vector<OdeSample>& e_samples) {
    std::vector<OdeSample> window;
    for (const OdeSample& s : e_samples) {
        if (s.y < -10.0) window.push_back(s);
    }
    if (window.size() < 8) {
        throw InsufficientSamples("blow-up rate fit needs >= 8 samples with e < -10, got " +
                                  std::to_string(window.size()));
    }

    const double t_last = window.back().t;
    const double span = std::max(t_last - window.front().t, 1e-12);

    // For a candidate pole time, the best (intercept, exponent) pair is a
    // linear regression; scan log-spaced pole offsets then golden-refine.
    auto sse_and_fit = [&](double t_c, double& exponent) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(window.size());
        for (const OdeSample& s : window) {
            const double lx = std::log(t_c - s.t);
            const double ly = std::log(std::fabs(s.y));
            sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
        }
        const double denom = n * sxx - sx * sx;
        const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
        const double icept = (sy - slope * sx) / n;
        double sse = 0.0;
        for (const OdeSample& s : window) {
            const double lx = std::log(t_c - s.t);
            const double ly = std::log(std::fabs(s.y));
            const double r = ly - (icept + slope * lx);
            sse += r * r;
        }
        exponent = -slope;
        return sse;
    };

    double best_tc = 0.0, best_sse = std::numeric_limits<double>::infinity();
    constexpr int kOffsets = 256;
    const double off_lo = std::log(1e-9 * span);
    const double off_hi = std::log(10.0 * span);
    for (int i = 0; i <= kOffsets; ++i) {
        const double off = std::exp(off_lo + (off_hi - off_lo) * i / kOffsets);
        double p;
        const double sse = sse_and_fit(t_last + off, p);
        if (sse < best_sse) { best_sse = sse; best_tc = t_last + off; }
    }
    // Golden-section refinement around the best offset.
    double a = std::log((best_tc - t_last) * 0.5);
    double b = std::log((best_tc - t_last) * 2.0);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 120; ++it) {
        const double m1 = b - gr * (b - a);
        const double m2 = a + gr * (b - a);
        double p1, p2;
        const double s1 = sse_and_fit(t_last + std::exp(m1), p1);
        const double s2 = sse_and_fit(t_last + std::exp(m2), p2);
        if (s1 < s2) b = m2; else a = m1;
    }
    BlowupFit fit;
    fit.t_c_fit = t_last + std::exp(0.5 * (a + b));
    sse_and_fit(fit.t_c_fit, fit.exponent);
    return fit;
}

} // namespace thlab
