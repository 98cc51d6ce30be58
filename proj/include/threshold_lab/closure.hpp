#pragma once

#include <string>
#include <vector>

#include "threshold_lab/errors.hpp"

namespace thlab {

enum class ClosureFamily {
    Affine,                // f(u) = a - b*u
    SinShift,              // f(u) = u + sin(u)
    PressurelessIdentity,  // f(rho,u) = u
    RhoCoupled,            // f(rho,u) = c*rho - u
    Custom,                // bivariate polynomial in (rho,u), total degree <= 4
};

/// Point evaluation of a closure together with its partial derivatives up to
/// second order and the two characteristic speeds of the primitive system.
struct DerivStack {
    double f = 0.0;
    double f_rho = 0.0;
    double f_u = 0.0;
    double f_rhorho = 0.0;
    double f_uu = 0.0;
    double f_rhou = 0.0;
    double rhof_rhorho = 0.0;  // (rho*f)_rhorho = 2 f_rho + rho f_rhorho
    double lambda1 = 0.0;      // rho f_rho + f
    double lambda2 = 0.0;      // u
};

/// Number of coefficients of a bivariate polynomial of total degree 4,
/// ordered (i,j) with i = rho power ascending, then j = u power ascending.
inline constexpr int kCustomCoeffCount = 15;

class ClosureSpec {
public:
    static ClosureSpec affine(double a, double b);
    static ClosureSpec sin_shift();
    static ClosureSpec pressureless_identity();
    static ClosureSpec rho_coupled(double c);
    static ClosureSpec custom(std::vector<double> coeffs);

    ClosureFamily family() const { return family_; }
    const std::vector<double>& params() const { return params_; }
    bool rho_independent() const;
    std::string family_name() const;

    /// Full derivative stack at (rho, u). Throws NonFiniteEval if any entry
    /// comes out non-finite.
    DerivStack eval(double rho, double u) const;

    /// Convenience accessors used in hot loops.
    double f(double rho, double u) const;
    double f_u(double rho, double u) const;
    double lambda1(double rho, double u) const;

private:
    ClosureSpec(ClosureFamily fam, std::vector<double> params);
    ClosureFamily family_;
    std::vector<double> params_;
};

DerivStack eval_closure(const ClosureSpec& spec, double rho, double u);

struct SigmaRoot {
    double u_star = 0.0;
    bool stable = false;  // f_u(u*) < 1
};

/// Roots of f(u) - u in [u_lo, u_hi], increasing. Bracketing scan on 1024
/// intervals, bisection refinement to interval width 1e-12.
std::vector<SigmaRoot> find_sigma(const ClosureSpec& spec, double u_lo,
                                  double u_hi, double tol);

/// Equilibrium curve phi with f(rho, phi(rho)) = phi(rho), sampled on
/// [0, rho_max], computed by the damped fixed-point iteration
/// psi <- psi + h(rho,psi)/(1-eps) with h = f - u.
struct PhiCurve {
    std::vector<double> rho;
    std::vector<double> phi;
    std::vector<double> residual;     // |f(rho_i, phi_i) - phi_i|
    double contraction_factor = 0.0;  // observed worst ratio of sup-norm steps
    double theoretical_factor = 0.0;  // (a - eps) / (1 - eps)
    int iterations = 0;

    double min_phi() const;
    double max_phi() const;
};

PhiCurve equilibrium_phi(const ClosureSpec& spec, double rho_max, double eps,
                         double tol, int max_iter);

struct Box {
    double rho_lo = 0.0;
    double rho_hi = 1.0;
    double u_lo = -1.0;
    double u_hi = 1.0;
};

/// Sign certificate for a scalar field sampled over a box. `nonneg` and
/// `nonpos` can both hold (identically zero field); neither means Mixed,
/// in which case the stored extrema are the two opposite-sign witnesses.
struct SignStatus {
    bool nonneg = false;
    bool nonpos = false;
    double min_value = 0.0;
    double max_value = 0.0;
    double min_at_rho = 0.0, min_at_u = 0.0;
    double max_at_rho = 0.0, max_at_u = 0.0;

    bool mixed() const { return !nonneg && !nonpos; }
    std::string label() const;  // "NonNeg" | "NonPos" | "Mixed"
};

struct StructureReport {
    Box box;
    int grid_n = 0;  // tensor sample resolution per axis
    bool fu_nonpositive = false;
    bool fu_below_one = false;
    double fu_min = 0.0;
    double fu_max = 0.0;
    SignStatus rho_f_rhorho_sign;
    SignStatus f_uu_sign;
    double c2_norm = 0.0;  // max sup-norm of f and all partials up to order 2
};

StructureReport check_structure(const ClosureSpec& spec, const Box& box,
                                int grid_n = 64);

} // namespace thlab
