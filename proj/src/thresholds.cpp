#include "threshold_lab/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "threshold_lab/quadrature.hpp"

namespace thlab {

namespace {

constexpr double kSignTol = 1e-12;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

} // namespace

std::string branch_name(Branch b) {
    switch (b) {
        case Branch::Thm1Strict: return "Thm1Strict";
        case Branch::Thm2Weak: return "Thm2Weak";
        case Branch::Thm3General: return "Thm3General";
    }
    return "?";
}

std::string outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Global: return "Global";
        case Outcome::Blowup: return "Blowup";
        case Outcome::Indeterminate: return "Indeterminate";
    }
    return "?";
}

double compute_M(const ProfileSpec& rho0, const ProfileSpec& u0) {
    return std::max(rho0.sup_value(), max_e0(rho0, u0).value);
}

void strict_hyperbolicity(const ClosureSpec& spec, const ProfileSpec& u0,
                          double& inf_abs, int& sign0) {
    inf_abs = 0.0;
    sign0 = 0;
    if (!spec.rho_independent() || !u0.bounded()) return;

    const double a = u0.inf_value();
    const double b = u0.sup_value();
    auto g = [&](double u) { return spec.f(0.0, u) - u; };

    constexpr int kScan = 2048;
    bool any_pos = false, any_neg = false;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kScan; ++i) {
        const double u = a + (b - a) * i / kScan;
        const double gv = g(u);
        if (gv > 0.0) any_pos = true;
        if (gv < 0.0) any_neg = true;
        best = std::min(best, std::fabs(gv));
        if (a == b) break;
    }
    if (any_pos == any_neg) return;  // mixed sign or identically zero
    inf_abs = best;
    sign0 = any_pos ? 1 : -1;
}

std::pair<double, double> u_bounds(const ClosureSpec& spec,
                                   const ProfileSpec& rho0,
                                   const ProfileSpec& u0) {
    if (!u0.bounded()) throw InvalidData("u_bounds: u0 must be bounded");
    const double ui = u0.inf_value();
    const double us = u0.sup_value();

    if (spec.rho_independent()) {
        double lo = std::min(ui, 0.0) - 1.0;
        double hi = std::max(us, 0.0) + 1.0;
        std::vector<SigmaRoot> roots;
        for (int attempt = 0;; ++attempt) {
            try {
                roots = find_sigma(spec, lo, hi, 1e-9);
                break;
            } catch (const EmptySigma&) {
                if (attempt >= 8) throw;
                const double w = hi - lo;
                lo -= w;
                hi += w;
            }
        }
        const SigmaRoot& first = roots.front();
        const SigmaRoot& last = roots.back();
        // Stability is only needed on a side where the data extends past the
        // terminal root (that root must attract from outside).
        if (ui < first.u_star && !first.stable) {
            throw HypothesisFailed("smallest Sigma root is unstable (f_u >= 1)");
        }
        if (us > last.u_star && !last.stable) {
            throw HypothesisFailed("largest Sigma root is unstable (f_u >= 1)");
        }
        return {std::min(ui, first.u_star), std::max(us, last.u_star)};
    }

    const double M = std::max(compute_M(rho0, u0), 1e-6);
    const double u_scan = 8.0 + 2.0 * M;
    const StructureReport rep =
        check_structure(spec, Box{0.0, M, -u_scan, u_scan});
    if (rep.fu_max >= 1.0) {
        throw NoContraction("f_u >= 1 on the certification box");
    }
    const double eps = rep.fu_min - 1e-3;
    const PhiCurve phi = equilibrium_phi(spec, M, eps, 1e-11, 500);
    return {std::min(ui, phi.min_phi()), std::max(us, phi.max_phi())};
}

std::pair<double, double> rhox_envelope(const ClosureSpec& spec,
                                        const ProfileSpec& rho0,
                                        const ProfileSpec& u0) {
    if (!spec.rho_independent()) {
        throw HypothesisFailed("rhox_envelope: f must be rho-independent");
    }
    if (!rho0.bounded() || !u0.bounded()) {
        throw HypothesisFailed("rhox_envelope: data must be bounded");
    }
    const double min_e = min_e0(rho0, u0).value;
    if (min_e < 0.0) {
        throw HypothesisFailed("rhox_envelope: min e0 = " + fmt(min_e) + " < 0");
    }
    const double M = std::max(compute_M(rho0, u0), 0.0);

    double blo = u0.inf_value(), bhi = u0.sup_value();
    try {
        auto ub = u_bounds(spec, rho0, u0);
        blo = ub.first;
        bhi = ub.second;
    } catch (const Error&) {
        // fall back to the initial data range
    }
    const StructureReport rep =
        check_structure(spec, Box{0.0, std::max(M, 1e-6), blo, bhi});
    if (!rep.fu_nonpositive) {
        throw HypothesisFailed("rhox_envelope: f_u > 0 on the solution box (max " +
                               fmt(rep.fu_max) + ")");
    }
    const double beta =
        1.0 + rho0.sup_abs_d1() + u0.sup_abs_d2() + rho0.sup_abs_value();
    const double gamma = 12.0 * (rep.c2_norm + 1.0) * std::max(M * M * M, 1.0);
    return {beta, gamma};
}

double rho_pointwise_bound(const ClosureSpec& spec, const ProfileSpec& rho0,
                           const ProfileSpec& u0, double u_now, double x,
                           double tol) {
    if (!spec.rho_independent()) {
        throw InvalidData("rho_pointwise_bound: f must be rho-independent");
    }
    const double u_start = u0.value(x);
    const double g0 = spec.f(0.0, u_start) - u_start;
    const double gn = spec.f(0.0, u_now) - u_now;
    const double factor = quadrature_phi_factor(spec, u_start, u_now, tol);
    return rho0.sup_value() * std::fabs(g0) / (factor * std::fabs(gn));
}

ThresholdVerdict classify(const ClosureSpec& spec, const ProfileSpec& rho0,
                          const ProfileSpec& u0, BranchMode mode) {
    if (rho0.inf_value() < 0.0) {
        throw InvalidData("classify: rho0 can be negative (inf = " +
                          fmt(rho0.inf_value()) + ")");
    }

    ThresholdVerdict v;
    auto note = [&](const std::string& name, bool ok, const std::string& wit) {
        v.hypothesis_log.push_back({name, ok, wit});
        if (!ok) v.failed_hypotheses.push_back(name);
        return ok;
    };

    const bool rho_indep = spec.rho_independent();
    double inf_abs = 0.0;
    int sign0 = 0;
    strict_hyperbolicity(spec, u0, inf_abs, sign0);

    switch (mode) {
        case BranchMode::Auto:
            v.branch = rho_indep
                           ? (inf_abs > 0.0 ? Branch::Thm1Strict : Branch::Thm2Weak)
                           : Branch::Thm3General;
            break;
        case BranchMode::ForceThm1: v.branch = Branch::Thm1Strict; break;
        case BranchMode::ForceThm2: v.branch = Branch::Thm2Weak; break;
        case BranchMode::ForceThm3: v.branch = Branch::Thm3General; break;
    }

    bool structural = true;
    structural &= note("rho0_nonneg", true, "inf rho0 = " + fmt(rho0.inf_value()));
    structural &= note("data_bounded", rho0.bounded() && u0.bounded(),
                       "inf/sup of rho0 and u0 finite");
    if (v.branch != Branch::Thm3General) {
        structural &= note("f_rho_independent", rho_indep, spec.family_name());
    }
    if (v.branch == Branch::Thm1Strict) {
        structural &= note("strict_hyperbolicity", inf_abs > 0.0,
                           "inf |f(u0)-u0| = " + fmt(inf_abs));
    }

    const double M = compute_M(rho0, u0);

    // Certify f_u <= 0 on the a-priori box; if u bounds are unavailable the
    // initial data range stands in (and is recorded as such).
    double box_ulo, box_uhi;
    std::string box_note;
    try {
        auto ub = u_bounds(spec, rho0, u0);
        box_ulo = ub.first;
        box_uhi = ub.second;
        box_note = "a-priori box";
    } catch (const Error& err) {
        box_ulo = u0.bounded() ? u0.inf_value() : -8.0;
        box_uhi = u0.bounded() ? u0.sup_value() : 8.0;
        box_note = std::string("initial-data box (u bounds unavailable: ") +
                   err.what() + ")";
    }
    StructureReport srep =
        check_structure(spec, Box{0.0, std::max(M, 1e-6), box_ulo, box_uhi});
    structural &= note("fu_nonpositive", srep.fu_nonpositive,
                       "max f_u = " + fmt(srep.fu_max) + " on " + box_note +
                           " [0," + fmt(std::max(M, 1e-6)) + "]x[" +
                           fmt(box_ulo) + "," + fmt(box_uhi) + "]");

    const ScanExtremum me0 = min_e0(rho0, u0);
    const bool e0_ok = me0.value >= 0.0;
    note("e0_nonnegative", e0_ok,
         "min e0 = " + fmt(me0.value) + " near x = " + fmt(me0.x));

    if (!structural) {
        v.outcome = Outcome::Indeterminate;
        return v;
    }

    if (!e0_ok) {
        v.outcome = Outcome::Blowup;
        v.tc_upper = -1.0 / me0.value;
        v.witness_x = me0.x;
        return v;
    }

    if (v.branch != Branch::Thm3General) {
        v.outcome = Outcome::Global;
        return v;
    }

    // Theorem-3 global regularity needs one of the two convexity/monotonicity
    // bullets on top of e0 >= 0.
    const ScanExtremum mono_min = scan_minimum(
        {&rho0, &u0}, [&](double x) { return u0.d2(x) + rho0.d1(x); });
    const ScanExtremum mono_neg = scan_minimum(
        {&rho0, &u0}, [&](double x) { return -(u0.d2(x) + rho0.d1(x)); });
    const double mono_max = -mono_neg.value;

    const bool b1 =
        static_cast<bool>(
            note("bullet1_rhof_rhorho_nonneg", srep.rho_f_rhorho_sign.nonneg,
                 "min = " + fmt(srep.rho_f_rhorho_sign.min_value)) &
            note("bullet1_fuu_nonpositive", srep.f_uu_sign.nonpos,
                 "max = " + fmt(srep.f_uu_sign.max_value)) &
            note("bullet1_rho0x_nonneg", rho0.inf_d1() >= -kSignTol,
                 "inf rho0' = " + fmt(rho0.inf_d1())) &
            note("bullet1_u0xx_plus_rho0x_nonneg", mono_min.value >= -kSignTol,
                 "min = " + fmt(mono_min.value)));
    const bool b2 =
        static_cast<bool>(
            note("bullet2_rhof_rhorho_nonpos", srep.rho_f_rhorho_sign.nonpos,
                 "max = " + fmt(srep.rho_f_rhorho_sign.max_value)) &
            note("bullet2_fuu_nonneg", srep.f_uu_sign.nonneg,
                 "min = " + fmt(srep.f_uu_sign.min_value)) &
            note("bullet2_rho0x_nonpos", rho0.sup_d1() <= kSignTol,
                 "sup rho0' = " + fmt(rho0.sup_d1())) &
            note("bullet2_u0xx_plus_rho0x_nonpos", mono_max <= kSignTol,
                 "max = " + fmt(mono_max)));

    if (b1 || b2) {
        v.outcome = Outcome::Global;
        // Bullet entries from the unused branch are informational; drop them
        // from the failed list.
        v.failed_hypotheses.clear();
        for (const HypothesisEntry& h : v.hypothesis_log) {
            if (!h.satisfied && h.name.rfind("bullet", 0) != 0) {
                v.failed_hypotheses.push_back(h.name);
            }
        }
    } else {
        v.outcome = Outcome::Indeterminate;  // bounds hold, no regularity claim
    }
    return v;
}

BoundsReport bounds_report(const ClosureSpec& spec, const ProfileSpec& rho0,
                           const ProfileSpec& u0,
                           const ThresholdVerdict& verdict) {
    BoundsReport rep;
    rep.M = compute_M(rho0, u0);
    rep.min_e0 = min_e0(rho0, u0).value;
    rep.max_e0 = max_e0(rho0, u0).value;

    double inf_abs = 0.0;
    int sign0 = 0;
    strict_hyperbolicity(spec, u0, inf_abs, sign0);
    rep.inf_abs_g0 = inf_abs;
    rep.sign0 = sign0;
    rep.strict_hyperbolic = inf_abs > 0.0;

    double box_ulo = u0.bounded() ? u0.inf_value() : -8.0;
    double box_uhi = u0.bounded() ? u0.sup_value() : 8.0;
    try {
        auto ub = u_bounds(spec, rho0, u0);
        rep.u_lo = ub.first;
        rep.u_hi = ub.second;
        box_ulo = ub.first;
        box_uhi = ub.second;
    } catch (const Error&) {
    }
    rep.c2_norm = check_structure(spec, Box{0.0, std::max(rep.M, 1e-6), box_ulo,
                                            box_uhi}).c2_norm;
    try {
        auto env = rhox_envelope(spec, rho0, u0);
        rep.beta = env.first;
        rep.gamma = env.second;
    } catch (const Error&) {
    }
    (void)verdict;
    return rep;
}

namespace {

// Accumulates one named check over the monitor series.
struct CheckBuilder {
    InvariantCheck check;
    bool seen = false;

    explicit CheckBuilder(std::string name) { check.name = std::move(name); }

    void sample(double t, double margin) {
        check.applicable = true;
        if (!seen || margin < check.worst_margin) check.worst_margin = margin;
        if (margin < 0.0 && check.pass) {
            check.pass = false;
            check.t_first_fail = t;
        }
        seen = true;
    }
};

} // namespace

std::vector<InvariantCheck> audit(const RunResult& run,
                                  const BoundsReport& bounds,
                                  const ThresholdVerdict& verdict, double dx,
                                  std::optional<double> inf_R0,
                                  std::optional<double> sup_R0,
                                  const AuditTolerances& tol) {
    const double tg = tol.c * dx;
    const bool box_applies = bounds.min_e0 >= 0.0;

    CheckBuilder positivity("rho_positivity");
    positivity.check.applicable = true;
    positivity.check.pass = run.clip_incidents == 0;
    positivity.check.worst_margin = -static_cast<double>(run.clip_incidents);

    CheckBuilder box_rho("box_rho_upper"), box_e_lo("box_e_lower"),
        box_e_hi("box_e_upper"), u_lo_chk("u_lower"), u_hi_chk("u_upper"),
        r_floor("riemann_floor"), r_roof("riemann_roof"),
        sign_inv("sign_invariance"), env("envelope_rhox"), xi_pos("xi_nonneg"),
        eta_pos("eta_nonneg"), xi_neg("xi_nonpos"), eta_neg("eta_nonpos"),
        qdef("q_defect_bounded");

    auto bullet_ok = [&](const char* name) {
        for (const HypothesisEntry& h : verdict.hypothesis_log) {
            if (h.name == name) return h.satisfied;
        }
        return false;
    };
    const bool track_nonneg = verdict.branch == Branch::Thm3General &&
                              verdict.outcome == Outcome::Global &&
                              bullet_ok("bullet1_rho0x_nonneg") &&
                              bullet_ok("bullet1_u0xx_plus_rho0x_nonneg");
    const bool track_nonpos = verdict.branch == Branch::Thm3General &&
                              verdict.outcome == Outcome::Global &&
                              bullet_ok("bullet2_rho0x_nonpos") &&
                              bullet_ok("bullet2_u0xx_plus_rho0x_nonpos");

    for (const MonitorSample& m : run.monitors) {
        if (box_applies) {
            box_rho.sample(m.t, bounds.M + tg - m.max_rho);
            box_e_lo.sample(m.t, m.min_e + tg);
            box_e_hi.sample(m.t, bounds.M + tg - m.max_e);
        }
        if (bounds.u_lo && bounds.u_hi) {
            u_lo_chk.sample(m.t, m.min_u - (*bounds.u_lo - tg));
            u_hi_chk.sample(m.t, *bounds.u_hi + tg - m.max_u);
        }
        if (inf_R0 && m.min_R) {
            r_floor.sample(
                m.t, *m.min_R - (*inf_R0 - tg * (1.0 + std::fabs(*inf_R0))));
        }
        if (sup_R0 && m.max_R && bounds.sign0 > 0) {
            r_roof.sample(m.t,
                          *sup_R0 + tg * (1.0 + std::fabs(*sup_R0)) - *m.max_R);
        }
        if (m.min_signed_g) {
            sign_inv.sample(m.t, *m.min_signed_g + kSignTol);
        }
        if (bounds.beta && bounds.gamma && box_applies) {
            const double cap =
                *bounds.beta * std::exp(std::min(*bounds.gamma * m.t, 700.0));
            env.sample(m.t, cap - m.sup_abs_dx_rho);
        }
        if (track_nonneg) {
            xi_pos.sample(m.t, m.min_dx_rho + tg);
            eta_pos.sample(m.t, m.min_dx_e + tg);
        }
        if (track_nonpos) {
            xi_neg.sample(m.t, tg - m.max_dx_rho);
            eta_neg.sample(m.t, tg - m.max_dx_e);
        }
        if (m.q_defect) {
            qdef.sample(m.t, 1.0 - *m.q_defect);  // order-one sanity cap
        }
    }

    CheckBuilder tc("blowup_by_tc_upper");
    if (verdict.outcome == Outcome::Blowup) {
        const double deadline = verdict.tc_upper * 1.2;
        if (run.termination == Termination::BlowupGuard) {
            tc.sample(run.guard_time, deadline - run.guard_time);
        } else {
            // Guard never fired: the run missed the theoretical deadline.
            tc.sample(run.t_final, -std::fabs(deadline));
        }
    }

    std::vector<InvariantCheck> out;
    for (CheckBuilder* b :
         {&positivity, &box_rho, &box_e_lo, &box_e_hi, &u_lo_chk, &u_hi_chk,
          &r_floor, &r_roof, &sign_inv, &env, &xi_pos, &eta_pos, &xi_neg,
          &eta_neg, &qdef, &tc}) {
        if (b->check.applicable) out.push_back(b->check);
    }
    return out;
}

} // namespace thlab
