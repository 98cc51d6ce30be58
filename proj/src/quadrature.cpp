#include "threshold_lab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thlab {

namespace {

// Gauss 7 / Kronrod 15 on [-1, 1]: abscissae, Kronrod weights, Gauss weights
// (zero where the node is Kronrod-only).
struct NodeWeight {
    double x, wk, wg;
};

constexpr NodeWeight kG7K15[8] = {
    {0.000000000000000e+00, 2.094821410847278e-01, 4.179591836734694e-01},
    {2.077849550078985e-01, 2.044329400752989e-01, 0.0},
    {4.058451513773972e-01, 1.903505780647854e-01, 3.818300505051189e-01},
    {5.860872354676911e-01, 1.690047266392679e-01, 0.0},
    {7.415311855993945e-01, 1.406532597155259e-01, 2.797053914892767e-01},
    {8.648644233597691e-01, 1.047900103222502e-01, 0.0},
    {9.491079123427585e-01, 6.309209262997855e-02, 1.294849661688697e-01},
    {9.914553711208126e-01, 2.293532201052922e-02, 0.0},
};

double g7k15(const std::function<double(double)>& fn, double a, double b,
             double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = fn(mid);
    double k15 = kG7K15[0].wk * f0;
    double g7 = kG7K15[0].wg * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kG7K15[i].x;
        const double s = fn(mid + dx) + fn(mid - dx);
        k15 += kG7K15[i].wk * s;
        g7 += kG7K15[i].wg * s;
    }
    k15 *= half;
    g7 *= half;
    const double diff = std::fabs(k15 - g7);
    err = std::min(diff, 200.0 * diff * std::sqrt(200.0 * diff));
    return k15;
}

} // namespace

double integrate_adaptive(const std::function<double(double)>& fn, double a,
                          double b, double tol) {
    if (a == b) return 0.0;
    struct Interval {
        double a, b, value, err;
    };
    double err0;
    const double v0 = g7k15(fn, a, b, err0);
    std::vector<Interval> stack{{a, b, v0, err0}};

    double total = v0;
    double total_err = err0;
    constexpr int kMaxSplits = 4000;
    int splits = 0;
    while (total_err > tol) {
        if (++splits > kMaxSplits || stack.empty()) {
            throw MaxIterExceeded("adaptive quadrature did not reach tolerance");
        }
        auto worst = std::max_element(
            stack.begin(), stack.end(),
            [](const Interval& p, const Interval& q) { return p.err < q.err; });
        const Interval iv = *worst;
        stack.erase(worst);

        double el, er;
        const double mid = 0.5 * (iv.a + iv.b);
        const double vl = g7k15(fn, iv.a, mid, el);
        const double vr = g7k15(fn, mid, iv.b, er);
        total += vl + vr - iv.value;
        total_err += el + er - iv.err;
        stack.push_back({iv.a, mid, vl, el});
        stack.push_back({mid, iv.b, vr, er});
    }
    return total;
}

void require_no_sigma_crossing(const ClosureSpec& spec, double u_ref, double u) {
    const double lo = std::min(u_ref, u);
    const double hi = std::max(u_ref, u);
    constexpr int kScan = 512;
    const double scale = std::max({1.0, std::fabs(lo), std::fabs(hi)});
    double prev = 0.0;
    for (int i = 0; i <= kScan; ++i) {
        const double xi = lo + (hi - lo) * i / kScan;
        const double g = spec.f(0.0, xi) - xi;
        if (std::fabs(g) <= 1e-14 * scale) {
            throw SignChange("f(xi) - xi vanishes at xi = " + std::to_string(xi));
        }
        if (i > 0 && prev * g < 0.0) {
            throw SignChange("f(xi) - xi changes sign in [" + std::to_string(lo) +
                             ", " + std::to_string(hi) + "]");
        }
        prev = g;
    }
}

double quadrature_phi_factor(const ClosureSpec& spec, double u_ref, double u,
                             double tol) {
    if (!spec.rho_independent()) {
        throw InvalidData("phi factor requires a rho-independent closure");
    }
    if (u == u_ref) return 1.0;
    require_no_sigma_crossing(spec, u_ref, u);
    const double integral = integrate_adaptive(
        [&](double xi) { return 1.0 / (spec.f(0.0, xi) - xi); }, u_ref, u, tol);
    const double factor = std::exp(integral);
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw NonFiniteEval("phi factor non-finite");
    }
    return factor;
}

double riemann_R(const ClosureSpec& spec, double rho, double u, double u_ref,
                 double tol) {
    if (rho < 0.0) throw InvalidData("riemann_R: rho must be >= 0");
    const double factor = quadrature_phi_factor(spec, u_ref, u, tol);
    return rho * factor * (spec.f(0.0, u) - u);
}

PhiFactorTable::PhiFactorTable(const ClosureSpec& spec, double u_ref,
                               double u_lo, double u_hi, double tol, int nodes)
    : spec_(spec), u_ref_(u_ref), u_lo_(u_lo), u_hi_(u_hi), tol_(tol) {
    if (!(u_hi > u_lo) || u_ref < u_lo || u_ref > u_hi) {
        throw InvalidData("PhiFactorTable: need u_lo <= u_ref <= u_hi");
    }
    require_no_sigma_crossing(spec_, u_lo, u_hi);
    if (nodes < 8) nodes = 8;

    nodes_.resize(nodes + 1);
    for (int i = 0; i <= nodes; ++i) {
        nodes_[i] = u_lo + (u_hi - u_lo) * i / nodes;
    }
    // Pin u_ref onto the closest node so cum_ is exactly 0 there.
    const int iref = std::clamp(
        static_cast<int>(std::lround((u_ref - u_lo) / (u_hi - u_lo) * nodes)), 0,
        nodes);
    nodes_[iref] = u_ref;

    auto integrand = [this](double xi) {
        return 1.0 / (spec_.f(0.0, xi) - xi);
    };
    cum_.assign(nodes + 1, 0.0);
    const double seg_tol = tol_ / nodes;
    for (int i = iref + 1; i <= nodes; ++i) {
        cum_[i] = cum_[i - 1] +
                  integrate_adaptive(integrand, nodes_[i - 1], nodes_[i], seg_tol);
    }
    for (int i = iref - 1; i >= 0; --i) {
        cum_[i] = cum_[i + 1] -
                  integrate_adaptive(integrand, nodes_[i], nodes_[i + 1], seg_tol);
    }
}

double PhiFactorTable::log_factor(double u) const {
    const double uc = std::clamp(u, u_lo_, u_hi_);
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), uc);
    int k = static_cast<int>(it - nodes_.begin()) - 1;
    k = std::clamp(k, 0, static_cast<int>(nodes_.size()) - 2);
    // Short one-shot panel from the nearest node; smooth integrand on a
    // sub-cell interval, so a single K15 is plenty.
    const double base = nodes_[k];
    if (uc == base) return cum_[k];
    double err;
    const double tail = g7k15(
        [this](double xi) { return 1.0 / (spec_.f(0.0, xi) - xi); }, base, uc, err);
    return cum_[k] + tail;
}

double PhiFactorTable::riemann(double rho, double u) const {
    if (rho <= 0.0) return 0.0;
    const double uc = std::clamp(u, u_lo_, u_hi_);
    const double g = spec_.f(0.0, uc) - uc;
    if (g == 0.0) return 0.0;
    const double log_mag = std::log(rho) + log_factor(uc) + std::log(std::fabs(g));
    const double mag = std::exp(log_mag);
    return g > 0.0 ? mag : -mag;
}

} // namespace thlab
