#pragma once

#include <optional>
#include <string>
#include <vector>

#include "threshold_lab/closure.hpp"
#include "threshold_lab/grid.hpp"
#include "threshold_lab/profile.hpp"

namespace thlab {

enum class Branch { Thm1Strict, Thm2Weak, Thm3General };
enum class Outcome { Global, Blowup, Indeterminate };

std::string branch_name(Branch b);
std::string outcome_name(Outcome o);

struct HypothesisEntry {
    std::string name;
    bool satisfied = false;
    std::string witness;  // value or location backing the decision
};

struct ThresholdVerdict {
    Branch branch = Branch::Thm1Strict;
    Outcome outcome = Outcome::Indeterminate;
    double tc_upper = 0.0;   // Blowup: -1 / min e0
    double witness_x = 0.0;  // Blowup: location with e0 < 0
    std::vector<std::string> failed_hypotheses;
    std::vector<HypothesisEntry> hypothesis_log;
};

struct BoundsReport {
    double M = 0.0;
    std::optional<double> u_lo;
    std::optional<double> u_hi;
    std::optional<double> beta;   // rho_x envelope beta * exp(gamma t)
    std::optional<double> gamma;
    double c2_norm = 0.0;
    bool strict_hyperbolic = false;
    double inf_abs_g0 = 0.0;  // inf over x of |f(u0) - u0|
    int sign0 = 0;            // uniform sign of f(u0) - u0, 0 if mixed/zero
    double min_e0 = 0.0;
    double max_e0 = 0.0;
};

enum class BranchMode { Auto, ForceThm1, ForceThm2, ForceThm3 };

ThresholdVerdict classify(const ClosureSpec& spec, const ProfileSpec& rho0,
                          const ProfileSpec& u0,
                          BranchMode mode = BranchMode::Auto);

double compute_M(const ProfileSpec& rho0, const ProfileSpec& u0);

/// inf over x of |f(u0(x)) - u0(x)| together with the uniform sign (0 when
/// the sign is mixed or the infimum vanishes).
void strict_hyperbolicity(const ClosureSpec& spec, const ProfileSpec& u0,
                          double& inf_abs, int& sign0);

std::pair<double, double> u_bounds(const ClosureSpec& spec,
                                   const ProfileSpec& rho0,
                                   const ProfileSpec& u0);

std::pair<double, double> rhox_envelope(const ClosureSpec& spec,
                                        const ProfileSpec& rho0,
                                        const ProfileSpec& u0);

/// Per-characteristic density bound at velocity u_now on the path from x:
/// sup rho0 * |g(u0(x))| / (phi(u0(x)->u_now) * |g(u_now)|).
double rho_pointwise_bound(const ClosureSpec& spec, const ProfileSpec& rho0,
                           const ProfileSpec& u0, double u_now, double x,
                           double tol);

/// Full a-priori report for (spec, rho0, u0); classify must not have failed
/// structurally (the report itself tolerates missing pieces).
BoundsReport bounds_report(const ClosureSpec& spec, const ProfileSpec& rho0,
                           const ProfileSpec& u0,
                           const ThresholdVerdict& verdict);

struct InvariantCheck {
    std::string name;
    bool applicable = false;
    bool pass = true;
    double worst_margin = 0.0;  // >= 0 means within bound
    double t_first_fail = -1.0;
};

struct AuditTolerances {
    double c = 5.0;  // grid tolerance C * dx
};

std::vector<InvariantCheck> audit(const RunResult& run,
                                  const BoundsReport& bounds,
                                  const ThresholdVerdict& verdict, double dx,
                                  std::optional<double> inf_R0,
                                  std::optional<double> sup_R0,
                                  const AuditTolerances& tol = {});

} // namespace thlab
