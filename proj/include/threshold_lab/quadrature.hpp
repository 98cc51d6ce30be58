#pragma once

#include <functional>
#include <vector>

#include "threshold_lab/closure.hpp"

namespace thlab {

/// Adaptive Gauss-Kronrod (G7/K15) quadrature of fn over [a, b] to absolute
/// tolerance tol. Throws MaxIterExceeded if the interval stack exhausts
/// without meeting tol.
double integrate_adaptive(const std::function<double(double)>& fn, double a,
                          double b, double tol);

/// Scans f(xi) - xi on the closed interval between u_ref and u for a zero or
/// sign change (512 subintervals plus endpoints). Throws SignChange on hit.
void require_no_sigma_crossing(const ClosureSpec& spec, double u_ref, double u);

/// exp( integral_{u_ref}^{u} d xi / (f(xi) - xi) ), the Riemann integrating
/// factor for rho-independent closures. Strictly positive and finite.
double quadrature_phi_factor(const ClosureSpec& spec, double u_ref, double u,
                             double tol);

/// Riemann invariant R = rho * phi_factor(u_ref -> u) * (f(u) - u).
double riemann_R(const ClosureSpec& spec, double rho, double u, double u_ref,
                 double tol);

/// Precomputed cumulative integral I(u) = integral_{u_ref}^{u} d xi/(f-xi)
/// on a root-free interval, for evaluating R over a whole grid every step.
/// R is assembled in log space, so it stays finite as u approaches a root
/// of f(u) - u (where the factor diverges but R itself tends to 0).
class PhiFactorTable {
public:
    PhiFactorTable(const ClosureSpec& spec, double u_ref, double u_lo,
                   double u_hi, double tol = 1e-10, int nodes = 1024);

    double u_ref() const { return u_ref_; }
    double u_lo() const { return u_lo_; }
    double u_hi() const { return u_hi_; }

    /// Cumulative integral at u (u clamped to the table range).
    double log_factor(double u) const;

    /// rho * e^{I(u)} * (f(u) - u), evaluated stably via logs.
    double riemann(double rho, double u) const;

private:
    const ClosureSpec spec_;
    double u_ref_ = 0.0;
    double u_lo_ = 0.0;
    double u_hi_ = 0.0;
    double tol_ = 1e-10;
    std::vector<double> nodes_;
    std::vector<double> cum_;  // I(nodes_[k])
};

} // namespace thlab
