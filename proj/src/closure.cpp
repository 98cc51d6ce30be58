#include "threshold_lab/closure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace thlab {

namespace {

bool all_finite(const DerivStack& d) {
    return std::isfinite(d.f) && std::isfinite(d.f_rho) && std::isfinite(d.f_u) &&
           std::isfinite(d.f_rhorho) && std::isfinite(d.f_uu) &&
           std::isfinite(d.f_rhou) && std::isfinite(d.lambda1) &&
           std::isfinite(d.lambda2);
}

// Exponent pairs (i,j), i + j <= 4, rho power first.
constexpr std::array<std::pair<int, int>, kCustomCoeffCount> kCustomExponents = {{
    {0, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 4},
    {1, 0}, {1, 1}, {1, 2}, {1, 3},
    {2, 0}, {2, 1}, {2, 2},
    {3, 0}, {3, 1},
    {4, 0},
}};

double ipow(double x, int n) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
}

} // namespace

ClosureSpec::ClosureSpec(ClosureFamily fam, std::vector<double> params)
    : family_(fam), params_(std::move(params)) {}

ClosureSpec ClosureSpec::affine(double a, double b) {
    return ClosureSpec(ClosureFamily::Affine, {a, b});
}

ClosureSpec ClosureSpec::sin_shift() {
    return ClosureSpec(ClosureFamily::SinShift, {});
}

ClosureSpec ClosureSpec::pressureless_identity() {
    return ClosureSpec(ClosureFamily::PressurelessIdentity, {});
}

ClosureSpec ClosureSpec::rho_coupled(double c) {
    return ClosureSpec(ClosureFamily::RhoCoupled, {c});
}

ClosureSpec ClosureSpec::custom(std::vector<double> coeffs) {
    if (coeffs.size() != kCustomCoeffCount) {
        throw InvalidData("Custom closure expects " +
                          std::to_string(kCustomCoeffCount) +
                          " coefficients, got " + std::to_string(coeffs.size()));
    }
    for (double c : coeffs) {
        if (!std::isfinite(c)) throw InvalidData("Custom coefficient not finite");
    }
    return ClosureSpec(ClosureFamily::Custom, std::move(coeffs));
}

bool ClosureSpec::rho_independent() const {
    switch (family_) {
        case ClosureFamily::Affine:
        case ClosureFamily::SinShift:
        case ClosureFamily::PressurelessIdentity:
            return true;
        case ClosureFamily::RhoCoupled:
            return false;
        case ClosureFamily::Custom:
            for (int k = 0; k < kCustomCoeffCount; ++k) {
                if (kCustomExponents[k].first > 0 && params_[k] != 0.0) return false;
            }
            return true;
    }
    return false;
}

std::string ClosureSpec::family_name() const {
    switch (family_) {
        case ClosureFamily::Affine: return "Affine";
        case ClosureFamily::SinShift: return "SinShift";
        case ClosureFamily::PressurelessIdentity: return "PressurelessIdentity";
        case ClosureFamily::RhoCoupled: return "RhoCoupled";
        case ClosureFamily::Custom: return "Custom";
    }
    return "?";
}

DerivStack ClosureSpec::eval(double rho, double u) const {
    DerivStack d;
    switch (family_) {
        case ClosureFamily::Affine: {
            const double a = params_[0], b = params_[1];
            d.f = a - b * u;
            d.f_u = -b;
            break;
        }
        case ClosureFamily::SinShift: {
            d.f = u + std::sin(u);
            d.f_u = 1.0 + std::cos(u);
            d.f_uu = -std::sin(u);
            break;
        }
        case ClosureFamily::PressurelessIdentity: {
            d.f = u;
            d.f_u = 1.0;
            break;
        }
        case ClosureFamily::RhoCoupled: {
            const double c = params_[0];
            d.f = c * rho - u;
            d.f_rho = c;
            d.f_u = -1.0;
            break;
        }
        case ClosureFamily::Custom: {
            for (int k = 0; k < kCustomCoeffCount; ++k) {
                const double c = params_[k];
                if (c == 0.0) continue;
                const int i = kCustomExponents[k].first;
                const int j = kCustomExponents[k].second;
                d.f += c * ipow(rho, i) * ipow(u, j);
                if (i >= 1) d.f_rho += c * i * ipow(rho, i - 1) * ipow(u, j);
                if (j >= 1) d.f_u += c * j * ipow(rho, i) * ipow(u, j - 1);
                if (i >= 2) d.f_rhorho += c * i * (i - 1) * ipow(rho, i - 2) * ipow(u, j);
                if (j >= 2) d.f_uu += c * j * (j - 1) * ipow(rho, i) * ipow(u, j - 2);
                if (i >= 1 && j >= 1)
                    d.f_rhou += c * i * j * ipow(rho, i - 1) * ipow(u, j - 1);
            }
            break;
        }
    }
    d.rhof_rhorho = 2.0 * d.f_rho + rho * d.f_rhorho;
    d.lambda1 = rho * d.f_rho + d.f;
    d.lambda2 = u;
    if (!all_finite(d) || !std::isfinite(d.rhof_rhorho)) {
        throw NonFiniteEval("closure " + family_name() + " non-finite at (rho=" +
                            std::to_string(rho) + ", u=" + std::to_string(u) + ")");
    }
    return d;
}

double ClosureSpec::f(double rho, double u) const {
    switch (family_) {
        case ClosureFamily::Affine: return params_[0] - params_[1] * u;
        case ClosureFamily::SinShift: return u + std::sin(u);
        case ClosureFamily::PressurelessIdentity: return u;
        case ClosureFamily::RhoCoupled: return params_[0] * rho - u;
        case ClosureFamily::Custom: return eval(rho, u).f;
    }
    return 0.0;
}

double ClosureSpec::f_u(double rho, double u) const {
    switch (family_) {
        case ClosureFamily::Affine: return -params_[1];
        case ClosureFamily::SinShift: return 1.0 + std::cos(u);
        case ClosureFamily::PressurelessIdentity: return 1.0;
        case ClosureFamily::RhoCoupled: return -1.0;
        case ClosureFamily::Custom: return eval(rho, u).f_u;
    }
    return 0.0;
}

double ClosureSpec::lambda1(double rho, double u) const {
    switch (family_) {
        case ClosureFamily::Affine: return params_[0] - params_[1] * u;
        case ClosureFamily::SinShift: return u + std::sin(u);
        case ClosureFamily::PressurelessIdentity: return u;
        case ClosureFamily::RhoCoupled: return 2.0 * params_[0] * rho - u;
        case ClosureFamily::Custom: return eval(rho, u).lambda1;
    }
    return 0.0;
}

DerivStack eval_closure(const ClosureSpec& spec, double rho, double u) {
    return spec.eval(rho, u);
}

std::vector<SigmaRoot> find_sigma(const ClosureSpec& spec, double u_lo,
                                  double u_hi, double tol) {
    if (!spec.rho_independent()) {
        throw InvalidData("find_sigma requires a rho-independent closure");
    }
    if (!(tol > 0.0) || !(u_hi > u_lo)) {
        throw InvalidData("find_sigma: need tol > 0 and u_hi > u_lo");
    }

    auto g = [&](double u) { return spec.f(0.0, u) - u; };

    constexpr int kScan = 1024;
    const double du = (u_hi - u_lo) / kScan;

    // Degenerate family f(u) = u: g vanishes identically, no isolated roots.
    double gmax = 0.0;
    std::vector<double> gv(kScan + 1);
    for (int i = 0; i <= kScan; ++i) {
        gv[i] = g(u_lo + i * du);
        gmax = std::max(gmax, std::fabs(gv[i]));
    }
    if (gmax < 1e-14 * std::max(1.0, std::fabs(u_lo) + std::fabs(u_hi))) {
        throw EmptySigma("f(u) - u vanishes identically on the interval");
    }

    std::vector<SigmaRoot> roots;
    auto push_root = [&](double u_star) {
        if (!roots.empty() && std::fabs(u_star - roots.back().u_star) < 1e-10)
            return;
        if (std::fabs(g(u_star)) > tol) return;
        SigmaRoot r;
        r.u_star = u_star;
        r.stable = spec.f_u(0.0, u_star) < 1.0;
        roots.push_back(r);
    };

    for (int i = 0; i < kScan; ++i) {
        const double a = u_lo + i * du;
        const double b = a + du;
        if (gv[i] == 0.0) {
            push_root(a);
            continue;
        }
        if (gv[i] * gv[i + 1] < 0.0) {
            double lo = a, hi = b, glo = gv[i];
            while (hi - lo > 1e-12) {
                const double mid = 0.5 * (lo + hi);
                const double gm = g(mid);
                if (gm == 0.0) { lo = hi = mid; break; }
                if (glo * gm < 0.0) hi = mid;
                else { lo = mid; glo = gm; }
            }
            push_root(0.5 * (lo + hi));
        }
    }
    if (gv[kScan] == 0.0) push_root(u_hi);

    if (roots.empty()) {
        throw EmptySigma("no root of f(u) - u in [" + std::to_string(u_lo) +
                         ", " + std::to_string(u_hi) + "]");
    }
    return roots;
}

double PhiCurve::min_phi() const {
    return *std::min_element(phi.begin(), phi.end());
}

double PhiCurve::max_phi() const {
    return *std::max_element(phi.begin(), phi.end());
}

PhiCurve equilibrium_phi(const ClosureSpec& spec, double rho_max, double eps,
                         double tol, int max_iter) {
    if (!(rho_max >= 0.0) || !(tol > 0.0) || max_iter < 1) {
        throw InvalidData("equilibrium_phi: bad arguments");
    }
    if (!(eps < 1.0)) {
        throw NoContraction("equilibrium_phi: eps must be < 1");
    }

    // Certify sup f_u < 1 on a scan box wide enough to contain the iterates.
    const double u_scan = 8.0 + 2.0 * rho_max;
    Box box{0.0, std::max(rho_max, 1e-12), -u_scan, u_scan};
    StructureReport rep = check_structure(spec, box);
    if (rep.fu_max >= 1.0) {
        throw NoContraction("f_u >= 1 on [0," + std::to_string(rho_max) + "]x[" +
                            std::to_string(-u_scan) + "," + std::to_string(u_scan) +
                            "] (max " + std::to_string(rep.fu_max) + ")");
    }
    const double a = std::min(rep.fu_max + 1e-3, 1.0 - 1e-12);

    const double mu = 1.0 / (1.0 - eps);

    constexpr int kSamples = 257;
    PhiCurve out;
    out.rho.resize(kSamples);
    out.phi.assign(kSamples, 0.0);
    out.residual.assign(kSamples, 0.0);
    out.theoretical_factor = std::max(0.0, (a - eps) / (1.0 - eps));
    for (int i = 0; i < kSamples; ++i) {
        out.rho[i] = rho_max * static_cast<double>(i) / (kSamples - 1);
    }

    double prev_step = std::numeric_limits<double>::quiet_NaN();
    double worst_ratio = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        double step_norm = 0.0;
        double res_norm = 0.0;
        for (int i = 0; i < kSamples; ++i) {
            const double h = spec.f(out.rho[i], out.phi[i]) - out.phi[i];
            const double next = out.phi[i] + mu * h;
            if (!std::isfinite(next)) {
                throw NonFiniteEval("equilibrium_phi iterate diverged");
            }
            step_norm = std::max(step_norm, std::fabs(next - out.phi[i]));
            out.phi[i] = next;
            out.residual[i] = std::fabs(spec.f(out.rho[i], out.phi[i]) - out.phi[i]);
            res_norm = std::max(res_norm, out.residual[i]);
        }
        out.iterations = it;
        if (std::isfinite(prev_step) && prev_step > 0.0) {
            worst_ratio = std::max(worst_ratio, step_norm / prev_step);
        }
        prev_step = step_norm;
        if (res_norm <= tol) {
            out.contraction_factor = worst_ratio;
            return out;
        }
    }
    throw MaxIterExceeded("equilibrium_phi: residual above tol after " +
                          std::to_string(max_iter) + " iterations");
}

std::string SignStatus::label() const {
    if (nonneg) return "NonNeg";
    if (nonpos) return "NonPos";
    return "Mixed";
}

StructureReport check_structure(const ClosureSpec& spec, const Box& box,
                                int grid_n) {
    if (box.rho_lo < 0.0) {
        throw InvalidData("check_structure: rho range must be within [0, inf)");
    }
    if (grid_n < 2) grid_n = 2;

    StructureReport rep;
    rep.box = box;
    rep.grid_n = grid_n;

    SignStatus rr, uu;
    rr.min_value = uu.min_value = std::numeric_limits<double>::infinity();
    rr.max_value = uu.max_value = -std::numeric_limits<double>::infinity();
    double fu_min = std::numeric_limits<double>::infinity();
    double fu_max = -std::numeric_limits<double>::infinity();
    double c2 = 0.0;

    auto visit = [&](double rho, double u) {
        const DerivStack d = spec.eval(rho, u);
        fu_min = std::min(fu_min, d.f_u);
        fu_max = std::max(fu_max, d.f_u);
        if (d.rhof_rhorho < rr.min_value) {
            rr.min_value = d.rhof_rhorho; rr.min_at_rho = rho; rr.min_at_u = u;
        }
        if (d.rhof_rhorho > rr.max_value) {
            rr.max_value = d.rhof_rhorho; rr.max_at_rho = rho; rr.max_at_u = u;
        }
        if (d.f_uu < uu.min_value) {
            uu.min_value = d.f_uu; uu.min_at_rho = rho; uu.min_at_u = u;
        }
        if (d.f_uu > uu.max_value) {
            uu.max_value = d.f_uu; uu.max_at_rho = rho; uu.max_at_u = u;
        }
        for (double v : {d.f, d.f_rho, d.f_u, d.f_rhorho, d.f_uu, d.f_rhou}) {
            c2 = std::max(c2, std::fabs(v));
        }
    };

    // Tensor grid plus the four exact corners.
    for (int i = 0; i < grid_n; ++i) {
        const double rho = box.rho_lo + (box.rho_hi - box.rho_lo) * i / (grid_n - 1);
        for (int j = 0; j < grid_n; ++j) {
            const double u = box.u_lo + (box.u_hi - box.u_lo) * j / (grid_n - 1);
            visit(rho, u);
        }
    }
    visit(box.rho_lo, box.u_lo);
    visit(box.rho_lo, box.u_hi);
    visit(box.rho_hi, box.u_lo);
    visit(box.rho_hi, box.u_hi);

    rr.nonneg = rr.min_value >= 0.0;
    rr.nonpos = rr.max_value <= 0.0;
    uu.nonneg = uu.min_value >= 0.0;
    uu.nonpos = uu.max_value <= 0.0;

    rep.rho_f_rhorho_sign = rr;
    rep.f_uu_sign = uu;
    rep.fu_min = fu_min;
    rep.fu_max = fu_max;
    rep.fu_nonpositive = fu_max <= 0.0;
    rep.fu_below_one = fu_max < 1.0;
    rep.c2_norm = c2;
    return rep;
}

} // namespace thlab
