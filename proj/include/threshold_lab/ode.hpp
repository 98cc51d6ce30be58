#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "threshold_lab/errors.hpp"

namespace thlab {

struct OdeOptions {
    double abs_tol = 1e-8;
    double rel_tol = 1e-8;
    double dt_max = 1e300;
    double dt_init = 0.0;  // 0 = auto
    int max_steps = 2000000;
};

struct OdeSample {
    double t = 0.0;
    double y = 0.0;
};

/// Adaptive Dormand-Prince 5(4) for a scalar ODE dy/dt = rhs(t, y) on
/// [t0, t_end]. Records every accepted step. `stop` (optional) is checked
/// after each accepted step; returning true ends integration early.
std::vector<OdeSample> integrate_scalar(
    const std::function<double(double, double)>& rhs, double t0, double y0,
    double t_end, const OdeOptions& opts,
    const std::function<bool(double, double)>& stop = nullptr);

struct BlowupRecord {
    double t_c_numeric = 0.0;
    double t_c_paper_bound = 0.0;  // -1 / e(0)
};

/// Result of integrating de/dt = -e(e - rho(t)) along a characteristic.
struct EOdeResult {
    std::vector<OdeSample> samples;
    std::optional<BlowupRecord> blowup;
};

/// rho(t) supplied as a sampled time series, linearly interpolated; values
/// past the last sample are frozen at the final value (the integration may
/// outlive the stored field by a short tail near blow-up).
struct RhoSeries {
    std::vector<double> t;
    std::vector<double> rho;

    double at(double time) const;
};

/// Integrates the e-equation with blow-up detection at e < -1e8. The
/// numerical blow-up time is t_hit + 1/|e(t_hit)| (the pole of the leading
/// -e^2 dynamics past the detection threshold).
EOdeResult integrate_e_ode(const RhoSeries& rho_on_path, double e0,
                           double t_end, double tol);

} // namespace thlab
