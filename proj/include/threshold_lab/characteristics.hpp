#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "threshold_lab/closure.hpp"
#include "threshold_lab/ode.hpp"
#include "threshold_lab/profile.hpp"
#include "threshold_lab/quadrature.hpp"

namespace thlab {

struct FieldSample {
    double rho = 0.0;
    double u = 0.0;
    double e = 0.0;  // u_x + rho
};

/// Read-only space-time sampler backing the Lagrangian engine. Queries are
/// safe under concurrent reads. Returns nullopt outside coverage.
class FieldProvider {
public:
    virtual ~FieldProvider() = default;
    virtual std::optional<FieldSample> query(double t, double x) const = 0;
    virtual double t_max() const = 0;
};

/// Fields from a closed-form constant state (handy in tests).
class ConstantFieldProvider : public FieldProvider {
public:
    ConstantFieldProvider(double rho, double u, double t_end)
        : sample_{rho, u, rho}, t_end_(t_end) {}
    std::optional<FieldSample> query(double t, double) const override {
        if (t < 0.0 || t > t_end_) return std::nullopt;
        return sample_;
    }
    double t_max() const override { return t_end_; }

private:
    FieldSample sample_;
    double t_end_;
};

enum class PathKind { XPath, YPath };

enum class PathTermination { ReachedT, BlowupDetected, LeftDomain };

struct PathSample {
    double t = 0.0;
    double x = 0.0;
    double rho = 0.0;
    double u = 0.0;
    double e = 0.0;
    std::optional<double> R;
};

struct PathTrace {
    PathKind kind = PathKind::XPath;
    double origin = 0.0;
    std::vector<PathSample> samples;
    PathTermination terminated = PathTermination::ReachedT;
    std::optional<double> t_c_numeric;  // set when terminated == BlowupDetected
};

/// Traces dx/dt = u (XPath) or dx/dt = lambda1 (YPath) through the provided
/// fields with an adaptive RK pair at per-step tolerance 1e-8. When
/// `riemann` is given, each sample also carries R.
PathTrace trace_path(const FieldProvider& fields, const ClosureSpec& spec,
                     double x0, PathKind kind, double t_end, double dt_max,
                     const PhiFactorTable* riemann = nullptr);

struct PressurelessPoint {
    double x = 0.0;
    double rho = 0.0;
    double u_x = 0.0;
    std::optional<double> blowup_at;  // -1/u0'(alpha) when 1 + u0'(alpha) t <= 0
};

/// Exact solution of the pressureless closure along the straight
/// characteristic from alpha: x = alpha + u0(alpha) t,
/// rho = rho0(alpha) / (1 + u0'(alpha) t).
PressurelessPoint pressureless_exact(const ProfileSpec& rho0,
                                     const ProfileSpec& u0, double alpha,
                                     double t);

/// Whole-field exact pressureless sampler: inverts alpha -> x for queries.
/// Valid strictly before the first blow-up time of the data.
class PressurelessExactProvider : public FieldProvider {
public:
    PressurelessExactProvider(ProfileSpec rho0, ProfileSpec u0, double x_lo,
                              double x_hi, double t_end);
    std::optional<FieldSample> query(double t, double x) const override;
    double t_max() const override { return t_end_; }

private:
    ProfileSpec rho0_;
    ProfileSpec u0_;
    double x_lo_, x_hi_, t_end_;
};

struct BlowupFit {
    double t_c_fit = 0.0;
    double exponent = 0.0;
};

/// Least-squares fit of log|e| against log(t_c - t) over the samples with
/// e < -10, optimizing t_c jointly. Requires at least 8 such samples.
BlowupFit estimate_blowup_rate(const std::vector<OdeSample>& e_samples);

} // namespace thlab
